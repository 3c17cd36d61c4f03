"""Scheduling schemes: the scheduler-driven policy and the four benchmarks.

Every scheme plugs into ``TwinLoop`` as a round callable with the same
signature; they differ only in which sensors transmit and how the belief is
corrected:

* ``AoL-REVERB``  -- the full planner (age servicing + value-of-information).
* ``Perfect``     -- oracle belief equal to the true next state, no radio.
* ``CB-Greedy``   -- the ``cap`` nearest sensors every interval.
* ``EB-Greedy``   -- the ``cap`` lowest-noise sensors every interval.
* ``Traditional`` -- fixed sensor(s), belief replaced by the raw observation
  (no memory across intervals, the pre-twin baseline).
"""

from __future__ import annotations

import numpy as np

from . import estimator as est
from . import scheduler as sched
from .config import RunConfig
from .control import ActionVector, PolicyAgent, scripted_controller, shaped_reward
from .dynamics import mountain_car_model, MountainCarParams
from .errors import ConfigError
from .loop import TwinLoop
from .recordio import EpisodeRecord
from .scheduler import ScheduleResult
from .sensing import generate_fleet

Array = np.ndarray


def reverb_round(prior, targets, aol, fleet, params, cap, true_state, rng):
    return sched.schedule(prior, targets, aol, fleet, params, cap, true_state, rng)


def perfect_round(prior, targets, aol, fleet, params, cap, true_state, rng):
    belief = est.Belief(
        mean=np.asarray(true_state, dtype=float).copy(),
        cov=np.zeros_like(prior.cov),
        qi=prior.qi,
    )
    result = ScheduleResult(selected=(), budgets=(), aol_serviced=(), delivered=(), blind=True)
    return result, belief, aol.close_loop(range(len(aol.ages)))


def _transmission_round(selected, prior, aol, fleet, params, true_state, rng):
    budgets, observations, delivered = sched.size_and_transmit(
        selected, fleet, params, true_state, rng, qi=prior.qi
    )
    posterior = sched.fuse_delivered(prior, selected, delivered, observations, fleet)
    closed = {fleet.agents[i].feature for i in delivered}
    result = ScheduleResult(
        selected=tuple(selected),
        budgets=budgets,
        aol_serviced=(),
        delivered=tuple(delivered),
        blind=not selected,
    )
    return result, posterior, aol.close_loop(closed)


def make_greedy_round(kind: str):
    """Greedy benchmarks: rank by distance (cost) or by measurement noise (error)."""
    if kind == "distance":
        key = lambda a: (a.distance_m, a.agent_id)
    elif kind == "noise":
        key = lambda a: (a.noise_var, a.agent_id)
    else:
        raise ConfigError(f"unknown greedy ranking {kind!r}")

    def round_fn(prior, targets, aol, fleet, params, cap, true_state, rng):
        ranked = sorted(fleet.agents, key=key)
        selected = [a.agent_id for a in ranked[:cap]]
        return _transmission_round(selected, prior, aol, fleet, params, true_state, rng)

    return round_fn


def make_traditional_round(n_sensors: int):
    """Fixed sensor set, memoryless belief: the estimate is the raw observation.

    With two sensors the lowest-id sensor of each feature reports every
    interval; with one, only the lowest-id sensor overall. Features without a
    delivered observation keep the predicted prior.
    """

    def round_fn(prior, targets, aol, fleet, params, cap, true_state, rng):
        per_feature = [ids[0] for ids in (fleet.agents_for(k) for k in range(len(prior.mean))) if ids]
        selected = sorted(per_feature)[:n_sensors]
        budgets, observations, delivered = sched.size_and_transmit(
            selected, fleet, params, true_state, rng, qi=prior.qi
        )
        mean = prior.mean.copy()
        cov = prior.cov.copy()
        for agent_id in delivered:
            agent = fleet.agents[agent_id]
            obs = observations[selected.index(agent_id)]
            k = agent.feature
            mean[k] = obs.values[0]
            cov[k, :] = 0.0
            cov[:, k] = 0.0
            cov[k, k] = agent.noise_var
        posterior = est.Belief(mean=mean, cov=cov, qi=prior.qi)
        closed = {fleet.agents[i].feature for i in delivered}
        result = ScheduleResult(
            selected=tuple(selected),
            budgets=budgets,
            aol_serviced=(),
            delivered=tuple(delivered),
            blind=not selected,
        )
        return result, posterior, aol.close_loop(closed)

    return round_fn


def make_round(scheme: str, cfg: RunConfig):
    if scheme == "AoL-REVERB":
        return reverb_round
    if scheme == "Perfect":
        return perfect_round
    if scheme == "CB-Greedy":
        return make_greedy_round("distance")
    if scheme == "EB-Greedy":
        return make_greedy_round("noise")
    if scheme == "Traditional":
        return make_traditional_round(cfg.traditional_sensors)
    raise ConfigError(f"unknown scheme {scheme!r}")


def make_policy(cfg: RunConfig, agent: PolicyAgent | None = None):
    """Deterministic control policy: trained mean action, or the scripted pump."""
    if agent is not None:
        return agent.act_mean
    accuracy = np.asarray(cfg.scripted_accuracy, dtype=float)
    return lambda state: scripted_controller(state, accuracy)


def build_loop(cfg: RunConfig, scheme: str, rng: np.random.Generator) -> TwinLoop:
    fleet_rng, env_rng = (np.random.default_rng(s) for s in rng.bit_generator.seed_seq.spawn(2))
    fleet = generate_fleet(cfg.fleet, fleet_rng)
    model = mountain_car_model(process_noise_var=cfg.process_noise_var)
    return TwinLoop(
        model=model,
        mc_params=MountainCarParams(),
        fleet=fleet,
        channel_params=cfg.channel,
        required_var=np.asarray(cfg.required_var, dtype=float),
        aol_thresholds=cfg.aol_thresholds,
        cap=cfg.cap,
        scheme_round=make_round(scheme, cfg),
        rng=env_rng,
        init_belief_var=cfg.init_belief_var,
    )


def run_episode(cfg: RunConfig, scheme: str, policy, seed: int) -> EpisodeRecord:
    """Simulate one seeded episode of the given scheme and log every interval."""
    loop = build_loop(cfg, scheme, np.random.default_rng(seed))
    belief = loop.reset()
    record = EpisodeRecord(scheme=scheme, seed=seed)
    for qi in range(cfg.qi_cap):
        action: ActionVector = policy(belief.mean)
        res = loop.step(action.force, action.accuracy)
        reward = shaped_reward(res.reward_env, action.accuracy, cfg.control.kappa, cfg.control.shaping)
        record.append(
            qi=qi,
            true_pos=res.true_state[0],
            true_vel=res.true_state[1],
            belief_pos=res.belief.mean[0],
            belief_vel=res.belief.mean[1],
            cov_pos=res.belief.cov[0, 0],
            cov_vel=res.belief.cov[1, 1],
            target_pos=res.targets[0],
            target_vel=res.targets[1],
            n_selected=len(res.schedule.selected),
            selected=";".join(str(i) for i in res.schedule.selected),
            delivered=";".join(str(i) for i in res.schedule.delivered),
            prbs=res.schedule.total_prbs,
            age_pos=loop.aol.ages[0],
            age_vel=loop.aol.ages[1],
            reward=reward,
            force=action.force,
            eta_pos=action.accuracy[0],
            eta_vel=action.accuracy[1],
            failed=int(res.failed),
        )
        belief = res.belief
        if res.done:
            record.reached_goal = True
            break
    return record
