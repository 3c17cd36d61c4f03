"""Greedy value-of-information sensor scheduling under a connection cap.

Per query interval the scheduler: (1) services age-of-loop violations with the
nearest sensor of each stale feature, (2) if the variance targets still fail,
repeatedly picks the feature with the worst variance-to-target ratio and adds
the lowest-noise available sensor for it, recomputing the would-be posterior
covariance after each pick, until the targets hold, the cap is reached, or no
candidate sensor remains. Selected sensors then get a sized link budget, their
observations are transmitted, and only the ones that actually arrive are fused
into the stored belief and close the loop for their features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channel as ch
from . import estimator as est
from .aol import AolTracker
from .errors import ConfigError, InputError
from .sensing import SensorFleet, observe

Array = np.ndarray


@dataclass(frozen=True)
class UncertaintyTargets:
    """Per-feature variance bounds the twin must satisfy this interval."""

    variance_bounds: Array

    def __post_init__(self) -> None:
        b = np.asarray(self.variance_bounds, dtype=float)
        if np.any(b <= 0.0):
            raise InputError("variance bounds must be strictly positive")
        object.__setattr__(self, "variance_bounds", b)


@dataclass(frozen=True)
class ScheduleResult:
    selected: tuple[int, ...]                  # agent ids, selection order
    budgets: tuple[ch.LinkBudget, ...]         # aligned with ``selected``
    aol_serviced: tuple[int, ...]              # features serviced for age violations
    delivered: tuple[int, ...]                 # agent ids whose uplink made the deadline
    blind: bool

    @property
    def total_prbs(self) -> int:
        return sum(b.prbs for b in self.budgets)


def compute_targets(required_var: Array, accuracy_request: Array) -> UncertaintyTargets:
    """Combine the twin's standing bounds with the controller's accuracy request.

    Per feature: min(required_var, 1/request); a zero request imposes nothing.
    """
    xi = np.asarray(required_var, dtype=float)
    eta = np.asarray(accuracy_request, dtype=float)
    if np.any(xi <= 0.0):
        raise InputError("required variances must be strictly positive")
    if np.any(eta < 0.0):
        raise InputError("accuracy requests must be nonnegative")
    requested = np.full_like(xi, np.inf)
    asked = eta > 0.0
    requested[asked] = 1.0 / eta[asked]
    return UncertaintyTargets(np.minimum(xi, requested))


def service_aol(
    violated: tuple[int, ...], fleet: SensorFleet, available: set[int]
) -> list[int]:
    """Nearest available sensor per stale feature (ties: lowest id); picks consume availability."""
    chosen: list[int] = []
    for k in sorted(violated):
        cands = [fleet.agents[i] for i in fleet.agents_for(k) if i in available]
        if not cands:
            continue  # unserviceable; surfaces in the age logs, not as an error
        best = min(cands, key=lambda a: (a.distance_m, a.agent_id))
        chosen.append(best.agent_id)
        available.discard(best.agent_id)
    return chosen


def select_feature(
    cov_diag: Array,
    targets: UncertaintyTargets,
    fleet: SensorFleet,
    available: set[int],
) -> int | None:
    """Feature with the largest variance-to-target ratio among coverable features."""
    best_k: int | None = None
    best_ratio = -np.inf
    for k in range(cov_diag.shape[0]):
        if not any(i in available for i in fleet.agents_for(k)):
            continue
        ratio = cov_diag[k] / targets.variance_bounds[k]
        if ratio > best_ratio:  # strict: ties keep the lowest feature index
            best_ratio = ratio
            best_k = k
    return best_k


def plan_selection(
    prior_cov: Array,
    targets: UncertaintyTargets,
    violated: tuple[int, ...],
    fleet: SensorFleet,
    cap: int,
) -> tuple[list[int], list[int], Array]:
    """Decide the transmission set; returns (agent ids in order, serviced features, planned cov).

    The covariance used inside the loop assumes every pick is delivered; real
    outages are applied afterwards to the stored belief only.
    """
    if cap < 1:
        raise ConfigError("connection cap must be at least 1")
    if len(fleet) < 1:
        raise ConfigError("fleet must not be empty")
    available = {a.agent_id for a in fleet.agents}
    cov = np.array(prior_cov, dtype=float)
    selected: list[int] = []
    serviced: list[int] = []

    for k in sorted(violated):
        if len(selected) >= cap:
            break
        cands = [fleet.agents[i] for i in fleet.agents_for(k) if i in available]
        if not cands:
            continue
        agent = min(cands, key=lambda a: (a.distance_m, a.agent_id))
        selected.append(agent.agent_id)
        available.discard(agent.agent_id)
        serviced.append(k)
        cov = est.posterior_cov(cov, agent.obs_matrix, agent.noise_cov)

    while len(selected) < cap:
        diag = np.diag(cov)
        if not np.any(diag > targets.variance_bounds):
            break
        k = select_feature(diag, targets, fleet, available)
        if k is None:
            break
        cands = [fleet.agents[i] for i in fleet.agents_for(k) if i in available]
        agent = min(cands, key=lambda a: (a.noise_var, a.agent_id))
        selected.append(agent.agent_id)
        available.discard(agent.agent_id)
        cov = est.posterior_cov(cov, agent.obs_matrix, agent.noise_cov)

    return selected, serviced, cov


def size_and_transmit(
    selected: list[int],
    fleet: SensorFleet,
    params: ch.ChannelParams,
    true_state: Array,
    rng: np.random.Generator,
    qi: int = 0,
) -> tuple[tuple[ch.LinkBudget, ...], list, list[int]]:
    """Size every selected link, draw observations, realize the uplinks.

    Returns (budgets, observations, delivered agent ids). Observations are
    drawn for all selected sensors first, then the link outcomes, so the
    stream of random draws is well defined for reproducibility.
    """
    budgets = tuple(
        ch.optimal_bandwidth(
            params, fleet.agents[i].tx_power_w, fleet.agents[i].distance_m, agent_id=i
        )
        for i in selected
    )
    observations = [observe(fleet.agents[i], true_state, rng, qi=qi) for i in selected]
    outcomes = [ch.uplink_outcome(params, b, rng) for b in budgets]
    delivered = [i for i, out in zip(selected, outcomes) if out.delivered]
    return budgets, observations, delivered


def fuse_delivered(
    prior: est.Belief,
    selected: list[int],
    delivered: list[int],
    observations: list,
    fleet: SensorFleet,
) -> est.Belief:
    """Kalman-update the prior with the observations that actually arrived."""
    if not delivered:
        return prior.copy()
    idx = [selected.index(i) for i in delivered]
    batch = est.FusionBatch.from_observations(
        [fleet.agents[i] for i in delivered], [observations[j] for j in idx]
    )
    return est.fuse(prior, batch)


def schedule(
    prior: est.Belief,
    targets: UncertaintyTargets,
    aol: AolTracker,
    fleet: SensorFleet,
    params: ch.ChannelParams,
    cap: int,
    true_state: Array,
    rng: np.random.Generator,
) -> tuple[ScheduleResult, est.Belief, AolTracker]:
    """Full scheduling round: plan, size links, transmit, fuse what arrived."""
    selected, serviced, _ = plan_selection(prior.cov, targets, aol.violated(), fleet, cap)
    if not selected:
        result = ScheduleResult(
            selected=(), budgets=(), aol_serviced=tuple(serviced), delivered=(), blind=True
        )
        return result, prior.copy(), aol

    budgets, observations, delivered = size_and_transmit(
        selected, fleet, params, true_state, rng, qi=prior.qi
    )
    posterior = fuse_delivered(prior, selected, delivered, observations, fleet)
    closed = {fleet.agents[i].feature for i in delivered}
    result = ScheduleResult(
        selected=tuple(selected),
        budgets=budgets,
        aol_serviced=tuple(serviced),
        delivered=tuple(delivered),
        blind=False,
    )
    return result, posterior, aol.close_loop(closed)
