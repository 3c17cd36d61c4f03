"""Actor-critic controller that outputs a force and per-feature accuracy requests.

The actor is a Gaussian policy over a raw action vector; the first raw
dimension is squashed by tanh into the force range, the rest pass through a
scaled sigmoid to become nonnegative accuracy requests. Log-probabilities and
the clipped-ratio surrogate are computed in the raw (pre-squash) space. The
critic is a state-value net trained on one-step temporal-difference targets;
the same one-step residual is the actor's advantage.

A deterministic energy-pumping controller is provided so the estimation and
scheduling pipeline can be exercised without a trained policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, TrainingError
from .loop import TwinLoop
from .nets import MLP, make_optimizer

Array = np.ndarray

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ActionVector:
    """Control force in [-1, 1] plus per-feature accuracy requests in [0, eta_max]."""

    force: float
    accuracy: Array

    def __post_init__(self) -> None:
        acc = np.asarray(self.accuracy, dtype=float)
        if not np.isfinite(self.force) or not np.all(np.isfinite(acc)):
            raise InputError("action fields must be finite")
        if abs(self.force) > 1.0 + 1e-12:
            raise InputError("force outside [-1, 1]")
        if np.any(acc < 0.0):
            raise InputError("accuracy requests must be nonnegative")
        object.__setattr__(self, "accuracy", acc)


@dataclass(frozen=True)
class Transition:
    state: Array
    raw_action: Array
    log_prob: float
    reward: float
    next_state: Array
    done: bool


@dataclass
class ControlConfig:
    hidden: tuple[int, ...] = (64, 64)
    lr_actor: float = 1e-3
    lr_critic: float = 1e-3
    clip: float = 0.2
    gamma: float = 0.99
    kappa: float = 5e-6
    eta_max: float = 1e4
    epochs: int = 10
    minibatch: int = 64
    entropy_coef: float = 0.0
    init_log_std: float = 0.5
    # Exploration schedule: keep log-std at or above this floor for the first
    # explore_frac of training episodes so the sparse summit bonus can be
    # found before the action-cost gradient shrinks the policy's spread.
    explore_floor: float = -0.75
    explore_frac: float = 0.5
    advantage_norm: bool = True
    optimizer: str = "adam"
    shaping: str = "accuracy_bonus"  # or "accuracy_cost"
    # Fixed per-feature scaling applied to the belief mean before the nets;
    # mountain-car velocity lives on a ~1/14 scale relative to position.
    input_scale: tuple[float, ...] = (1.0, 14.285714285714286)


class PolicyAgent:
    """Gaussian actor + value critic over the belief mean."""

    def __init__(
        self,
        state_dim: int,
        n_features: int,
        cfg: ControlConfig,
        rng: np.random.Generator,
    ) -> None:
        self.cfg = cfg
        self.state_dim = state_dim
        self.n_features = n_features
        self.action_dim = 1 + n_features
        self.actor = MLP((state_dim, *cfg.hidden, self.action_dim), rng)
        self.critic = MLP((state_dim, *cfg.hidden, 1), rng)
        self.log_std = np.full(self.action_dim, float(cfg.init_log_std))
        self.scale = np.asarray(cfg.input_scale[:state_dim], dtype=float)

    # --- action plumbing ----------------------------------------------------

    def _scaled(self, states: Array) -> Array:
        return np.atleast_2d(np.asarray(states, dtype=float)) * self.scale

    def raw_mean(self, states: Array) -> Array:
        return self.actor.forward(self._scaled(states))

    def squash(self, raw: Array) -> ActionVector:
        raw = np.asarray(raw, dtype=float)
        force = math.tanh(float(raw[0]))
        accuracy = self.cfg.eta_max / (1.0 + np.exp(-raw[1:]))
        return ActionVector(force=force, accuracy=accuracy)

    def sample_step(self, state: Array, rng: np.random.Generator) -> tuple[ActionVector, Array, float]:
        """Sample a raw action, return (squashed action, raw, log-probability)."""
        mean = self.raw_mean(state)[0]
        std = np.exp(self.log_std)
        raw = mean + std * rng.standard_normal(self.action_dim)
        logp = float(gaussian_log_prob(raw[None, :], mean[None, :], self.log_std)[0])
        return self.squash(raw), raw, logp

    def act(self, state: Array, rng: np.random.Generator) -> ActionVector:
        action, _, _ = self.sample_step(state, rng)
        return action

    def act_mean(self, state: Array) -> ActionVector:
        """Deterministic (mean) action, used for evaluation rollouts."""
        return self.squash(self.raw_mean(state)[0])

    def value(self, states: Array) -> Array:
        return self.critic.forward(self._scaled(states))[:, 0]

    # --- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "state_dim": self.state_dim,
            "n_features": self.n_features,
            "eta_max": self.cfg.eta_max,
            "input_scale": self.scale.tolist(),
            "log_std": self.log_std.tolist(),
            "actor": self.actor.to_lists(),
            "critic": self.critic.to_lists(),
        }

    @classmethod
    def from_dict(cls, data: dict, cfg: ControlConfig | None = None) -> "PolicyAgent":
        if data.get("version") != 1:
            raise InputError(f"unsupported weights version {data.get('version')!r}")
        import dataclasses

        cfg = dataclasses.replace(cfg or ControlConfig(), eta_max=float(data["eta_max"]))
        agent = cls.__new__(cls)
        agent.cfg = cfg
        agent.state_dim = int(data["state_dim"])
        agent.n_features = int(data["n_features"])
        agent.action_dim = 1 + agent.n_features
        agent.actor = MLP.from_lists(data["actor"])
        agent.critic = MLP.from_lists(data["critic"])
        agent.log_std = np.array(data["log_std"], dtype=float)
        agent.scale = np.array(data["input_scale"], dtype=float)
        return agent


def gaussian_log_prob(raw: Array, mean: Array, log_std: Array) -> Array:
    """Diagonal-Gaussian log density of raw actions, summed over dimensions."""
    z = (raw - mean) / np.exp(log_std)
    return -0.5 * np.sum(z * z + 2.0 * log_std + _LOG_2PI, axis=1)


def shaped_reward(reward_env: float, accuracy: Array, kappa: float, mode: str = "accuracy_bonus") -> float:
    """Add the accuracy-request term: reward + kappa * mean(accuracy).

    ``accuracy_cost`` flips the sign, treating requested accuracy as a direct
    cost instead of a bonus.
    """
    if kappa < 0.0:
        raise InputError("kappa must be nonnegative")
    term = kappa * float(np.mean(np.asarray(accuracy, dtype=float)))
    if mode == "accuracy_bonus":
        return reward_env + term
    if mode == "accuracy_cost":
        return reward_env - term
    raise InputError(f"unknown shaping mode {mode!r}")


def td_error(agent: PolicyAgent, transition: Transition, gamma: float) -> float:
    """One-step residual r + gamma * V(s') - V(s); no bootstrap on terminal steps."""
    v_s = float(agent.value(transition.state[None, :])[0])
    v_next = 0.0 if transition.done else float(agent.value(transition.next_state[None, :])[0])
    return transition.reward + gamma * v_next - v_s


@dataclass
class UpdateDiagnostics:
    actor_loss: float
    critic_loss: float
    mean_advantage: float


def ppo_update(
    agent: PolicyAgent,
    batch: Sequence[Transition],
    actor_opt,
    critic_opt,
    rng: np.random.Generator,
    log_std_floor: float = LOG_STD_MIN,
) -> UpdateDiagnostics:
    """Clipped-ratio policy step and TD(0) critic regression over one batch."""
    if not batch:
        raise InputError("update needs a nonempty batch")
    cfg = agent.cfg
    # Never raise an entry that already sits below the floor: with zero
    # gradients the update must leave parameters exactly unchanged.
    floor = min(log_std_floor, float(agent.log_std.min()))
    states = np.stack([t.state for t in batch])
    next_states = np.stack([t.next_state for t in batch])
    raws = np.stack([t.raw_action for t in batch])
    logp_old = np.array([t.log_prob for t in batch])
    rewards = np.array([t.reward for t in batch])
    not_done = 1.0 - np.array([t.done for t in batch], dtype=float)
    n = len(batch)

    actor_params = agent.actor.parameters() + [agent.log_std]
    critic_params = agent.critic.parameters()
    actor_losses: list[float] = []
    critic_losses: list[float] = []
    last_adv = 0.0

    for _ in range(cfg.epochs):
        # One-step TD residuals with the current critic; they are both the
        # critic's regression error and the actor's advantage estimate.
        v_s = agent.value(states)
        v_next = agent.value(next_states) * not_done
        targets = rewards + cfg.gamma * v_next
        delta = targets - v_s
        adv = delta.copy()
        if cfg.advantage_norm:
            adv = (adv - adv.mean()) / (adv.std() + 1e-8)
        last_adv = float(delta.mean())

        order = rng.permutation(n)
        for start in range(0, n, cfg.minibatch):
            mb = order[start : start + cfg.minibatch]
            x = agent._scaled(states[mb])

            # Actor: clipped surrogate in the raw action space.
            mean, acts = agent.actor.forward_cached(x)
            std = np.exp(agent.log_std)
            logp_new = gaussian_log_prob(raws[mb], mean, agent.log_std)
            ratio = np.exp(logp_new - logp_old[mb])
            a_mb = adv[mb]
            unclipped = ratio * a_mb
            clipped = np.clip(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * a_mb
            surrogate = np.minimum(unclipped, clipped)
            # d surrogate / d logp_new is ratio*adv where the unclipped term is
            # active, zero in the clipped-and-worse region.
            active = unclipped <= clipped
            dlogp = np.where(active, ratio * a_mb, 0.0) / len(mb)
            z = (raws[mb] - mean) / std
            grad_mean = -(dlogp[:, None] * z / std)  # minimize -surrogate
            grad_log_std = -(dlogp[:, None] * (z * z - 1.0)).sum(axis=0)
            if cfg.entropy_coef > 0.0:
                grad_log_std -= cfg.entropy_coef * np.ones_like(agent.log_std)
            net_grads = agent.actor.backward(acts, grad_mean)
            if not all(np.all(np.isfinite(g)) for g in net_grads + [grad_log_std]):
                raise TrainingError("non-finite actor gradients")
            actor_opt.step(actor_params, net_grads + [grad_log_std])
            np.clip(agent.log_std, floor, LOG_STD_MAX, out=agent.log_std)
            actor_losses.append(float(-surrogate.mean()))

            # Critic: semi-gradient MSE to the frozen minibatch targets.
            v_mb, c_acts = agent.critic.forward_cached(x)
            err = v_mb[:, 0] - targets[mb]
            c_grads = agent.critic.backward(c_acts, (2.0 * err / len(mb))[:, None])
            if not all(np.all(np.isfinite(g)) for g in c_grads):
                raise TrainingError("non-finite critic gradients")
            critic_opt.step(critic_params, c_grads)
            critic_losses.append(float(np.mean(err * err)))

    return UpdateDiagnostics(
        actor_loss=float(np.mean(actor_losses)),
        critic_loss=float(np.mean(critic_losses)),
        mean_advantage=last_adv,
    )


@dataclass
class EpisodeStats:
    episode: int
    shaped_return: float
    env_return: float
    reached_goal: bool
    qis: int


def train(
    make_loop: Callable[[np.random.Generator], TwinLoop],
    episodes: int,
    cfg: ControlConfig,
    seed: int,
    qi_cap: int = 999,
) -> tuple[PolicyAgent, list[EpisodeStats]]:
    """Run the full learning loop: belief in, force and accuracy request out.

    Each episode drives a fresh co-simulation; the shaped reward is observed,
    transitions are batched per episode, and one clipped-ratio update follows.
    """
    root = np.random.SeedSequence(seed)
    init_ss, act_ss, update_ss, env_ss = root.spawn(4)
    init_rng = np.random.default_rng(init_ss)
    act_rng = np.random.default_rng(act_ss)
    update_rng = np.random.default_rng(update_ss)
    env_children = env_ss.spawn(episodes)
    agent = PolicyAgent(state_dim=2, n_features=2, cfg=cfg, rng=init_rng)
    actor_opt = make_optimizer(cfg.optimizer, cfg.lr_actor)
    critic_opt = make_optimizer(cfg.optimizer, cfg.lr_critic)
    curve: list[EpisodeStats] = []

    explore_until = int(cfg.explore_frac * episodes)
    for ep in range(episodes):
        loop = make_loop(np.random.default_rng(env_children[ep]))
        belief = loop.reset()
        state = belief.mean.copy()
        transitions: list[Transition] = []
        env_return = 0.0
        shaped_return = 0.0
        reached = False
        qis = 0
        for _ in range(qi_cap):
            action, raw, logp = agent.sample_step(state, act_rng)
            res = loop.step(action.force, action.accuracy)
            r = shaped_reward(res.reward_env, action.accuracy, cfg.kappa, cfg.shaping)
            next_state = res.belief.mean.copy()
            transitions.append(
                Transition(state, raw, logp, r, next_state, res.done)
            )
            env_return += res.reward_env
            shaped_return += r
            state = next_state
            qis += 1
            if res.done:
                reached = True
                break
        if not math.isfinite(shaped_return):
            raise TrainingError("non-finite episode return")
        floor = cfg.explore_floor if ep < explore_until else LOG_STD_MIN
        ppo_update(agent, transitions, actor_opt, critic_opt, update_rng, log_std_floor=floor)
        curve.append(EpisodeStats(ep, shaped_return, env_return, reached, qis))
    return agent, curve


def scripted_controller(state: Array, accuracy: Array) -> ActionVector:
    """Deterministic energy pump: push along the velocity sign, +1 at rest."""
    s = np.asarray(state, dtype=float)
    if not np.all(np.isfinite(s)):
        raise InputError("state must be finite")
    force = 1.0 if s[1] >= 0.0 else -1.0
    return ActionVector(force=force, accuracy=np.asarray(accuracy, dtype=float))
