"""Per-episode co-simulation engine: plant, sensing fleet, belief, and ages.

``TwinLoop`` owns the mutable episode state and advances it one query interval
per ``step``: the plant moves under the applied force, the belief is blindly
predicted, ages tick, and the configured scheduling scheme decides which
sensors transmit and how the belief is corrected. Scheme behavior is injected
as a callable so the same engine drives the scheduler-based policy and every
benchmark variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from . import dynamics as dyn
from . import estimator as est
from .aol import AolTracker
from .channel import ChannelParams
from .scheduler import ScheduleResult, UncertaintyTargets, compute_targets
from .sensing import SensorFleet

Array = np.ndarray


class SchemeRound(Protocol):
    """One scheduling round: decide, transmit, and correct the belief."""

    def __call__(
        self,
        prior: est.Belief,
        targets: UncertaintyTargets,
        aol: AolTracker,
        fleet: SensorFleet,
        params: ChannelParams,
        cap: int,
        true_state: Array,
        rng: np.random.Generator,
    ) -> tuple[ScheduleResult, est.Belief, AolTracker]: ...


@dataclass
class StepResult:
    belief: est.Belief
    reward_env: float
    done: bool
    schedule: ScheduleResult
    true_state: Array
    targets: Array          # variance bounds in force this interval
    failed: bool            # any belief variance above its bound after fusion


class TwinLoop:
    def __init__(
        self,
        model: dyn.DynamicsModel,
        mc_params: dyn.MountainCarParams,
        fleet: SensorFleet,
        channel_params: ChannelParams,
        required_var: Array,
        aol_thresholds: tuple[int, ...],
        cap: int,
        scheme_round: SchemeRound,
        rng: np.random.Generator,
        termination_reward: float = 100.0,
        action_cost_weight: float = 0.1,
        init_belief_var: float = 1e-4,
    ) -> None:
        self.model = model
        self.mc_params = mc_params
        self.fleet = fleet
        self.channel_params = channel_params
        self.required_var = np.asarray(required_var, dtype=float)
        self.aol_thresholds = tuple(aol_thresholds)
        self.cap = cap
        self.scheme_round = scheme_round
        self.rng = rng
        self.termination_reward = termination_reward
        self.action_cost_weight = action_cost_weight
        self.init_belief_var = init_belief_var
        self.state: Array | None = None
        self.belief: est.Belief | None = None
        self.aol: AolTracker | None = None

    def reset(self) -> est.Belief:
        self.state = dyn.initial_state(self.mc_params, self.rng)
        self.belief = est.init_belief(self.state, self.rng, var=self.init_belief_var)
        self.aol = AolTracker.fresh(self.aol_thresholds)
        return self.belief

    def step(self, force: float, accuracy: Array) -> StepResult:
        assert self.state is not None, "call reset() first"
        self.state = dyn.step(self.model, self.state, force, self.rng)
        done = bool(self.state[0] >= self.mc_params.goal_position)
        reward = -self.action_cost_weight * float(force) ** 2
        if done:
            reward += self.termination_reward

        prior = est.predict(self.belief, force, self.model)
        self.aol = self.aol.tick()
        targets = compute_targets(self.required_var, accuracy)
        sched, posterior, self.aol = self.scheme_round(
            prior,
            targets,
            self.aol,
            self.fleet,
            self.channel_params,
            self.cap,
            self.state,
            self.rng,
        )
        self.belief = posterior
        failed = bool(np.any(np.diag(posterior.cov) > targets.variance_bounds))
        return StepResult(
            belief=posterior,
            reward_env=reward,
            done=done,
            schedule=sched,
            true_state=self.state.copy(),
            targets=targets.variance_bounds.copy(),
            failed=failed,
        )
