"""Sensing agents: placement, observation matrices, and noisy measurements."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigError, InputError

Array = np.ndarray


@dataclass(frozen=True)
class SensingAgent:
    """One wireless sensor: what it measures, how noisily, and where it sits."""

    agent_id: int
    obs_matrix: Array        # (D, K) row selector(s) into the state
    noise_cov: Array         # (D, D) symmetric positive definite
    distance_m: float
    tx_power_w: float

    def __post_init__(self) -> None:
        h = np.atleast_2d(np.asarray(self.obs_matrix, dtype=float))
        c = np.atleast_2d(np.asarray(self.noise_cov, dtype=float))
        if h.shape[0] > h.shape[1]:
            raise ConfigError("observation dimension may not exceed the state dimension")
        if c.shape != (h.shape[0], h.shape[0]) or not np.allclose(c, c.T, atol=1e-12):
            raise ConfigError("noise covariance must be symmetric and match the observation dim")
        if np.linalg.eigvalsh(c).min() <= 0.0:
            raise ConfigError("noise covariance must be positive definite")
        if not (self.distance_m > 0.0):
            raise ConfigError("distance must be strictly positive")
        if not (self.tx_power_w > 0.0):
            raise ConfigError("transmit power budget must be strictly positive")
        object.__setattr__(self, "obs_matrix", h)
        object.__setattr__(self, "noise_cov", c)

    @property
    def feature(self) -> int:
        """Measured state feature for single-feature (selector-row) sensors."""
        return int(np.argmax(self.obs_matrix[0]))

    @property
    def noise_var(self) -> float:
        """Scalar measurement variance for single-feature sensors."""
        return float(self.noise_cov[0, 0])


@dataclass(frozen=True)
class Observation:
    agent_id: int
    values: Array
    qi: int = 0

    def __post_init__(self) -> None:
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(v)):
            raise InputError("observation values must be finite")
        if self.qi < 0:
            raise InputError("query interval index must be nonnegative")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class FleetConfig:
    """How to generate a fleet of single-feature sensors."""

    n_agents: int = 20
    max_distance_m: float = 20.0
    tx_power_w: float = 0.02
    # Per-feature [lo, hi] measurement-variance ranges, feature order = state order.
    noise_var_ranges: tuple[tuple[float, float], ...] = ((1e-3, 2e-2), (2e-4, 4e-3))

    def __post_init__(self) -> None:
        if self.n_agents < 1:
            raise ConfigError("need at least one sensing agent")
        if self.max_distance_m <= 0.0:
            raise ConfigError("max distance must be positive")
        for lo, hi in self.noise_var_ranges:
            if not (0.0 < lo <= hi):
                raise ConfigError("noise variance range must satisfy 0 < lo <= hi")


@dataclass(frozen=True)
class SensorFleet:
    agents: tuple[SensingAgent, ...]
    feature_index: Mapping[int, tuple[int, ...]]

    def __len__(self) -> int:
        return len(self.agents)

    def agents_for(self, feature: int) -> tuple[int, ...]:
        return self.feature_index.get(feature, ())


def generate_fleet(config: FleetConfig, rng: np.random.Generator, dim: int = 2) -> SensorFleet:
    """Place ``n_agents`` single-feature sensors, features assigned round-robin.

    Distances are i.i.d. uniform on (0, max_distance]; each sensor's scalar
    noise variance is uniform in its feature's configured range.
    """
    n_features = len(config.noise_var_ranges)
    if n_features != dim:
        raise ConfigError("one noise range per state feature is required")
    if config.n_agents < n_features:
        raise ConfigError(
            f"{config.n_agents} agents cannot cover {n_features} features round-robin"
        )
    agents = []
    for i in range(config.n_agents):
        k = i % n_features
        lo, hi = config.noise_var_ranges[k]
        h = np.zeros((1, dim))
        h[0, k] = 1.0
        d = float(config.max_distance_m * (1.0 - rng.uniform(0.0, 1.0)))  # in (0, d_max]
        agents.append(
            SensingAgent(
                agent_id=i,
                obs_matrix=h,
                noise_cov=np.array([[rng.uniform(lo, hi)]]),
                distance_m=d,
                tx_power_w=config.tx_power_w,
            )
        )
    index: dict[int, tuple[int, ...]] = {}
    for k in range(n_features):
        index[k] = tuple(a.agent_id for a in agents if a.feature == k)
        if not index[k]:
            warnings.warn(f"no sensor measures feature {k}; its targets are unreachable")
    return SensorFleet(agents=tuple(agents), feature_index=index)


def observe(agent: SensingAgent, state: Array, rng: np.random.Generator, qi: int = 0) -> Observation:
    """Measure ``H s + w`` with ``w ~ N(0, C_w)``."""
    s = np.asarray(state, dtype=float)
    if not np.all(np.isfinite(s)):
        raise InputError("state must be finite")
    mean = agent.obs_matrix @ s
    noise = np.linalg.cholesky(agent.noise_cov) @ rng.standard_normal(agent.obs_matrix.shape[0])
    return Observation(agent_id=agent.agent_id, values=mean + noise, qi=qi)


def fleet_to_dict(fleet: SensorFleet) -> dict:
    """Snapshot a fleet for the run's config record (lossless floats)."""
    return {
        "agents": [
            {
                "agent_id": a.agent_id,
                "obs_matrix": a.obs_matrix.tolist(),
                "noise_cov": a.noise_cov.tolist(),
                "distance_m": a.distance_m,
                "tx_power_w": a.tx_power_w,
            }
            for a in fleet.agents
        ]
    }


def fleet_from_dict(data: dict) -> SensorFleet:
    agents = tuple(
        SensingAgent(
            agent_id=int(d["agent_id"]),
            obs_matrix=np.array(d["obs_matrix"], dtype=float),
            noise_cov=np.array(d["noise_cov"], dtype=float),
            distance_m=float(d["distance_m"]),
            tx_power_w=float(d["tx_power_w"]),
        )
        for d in data["agents"]
    )
    dim = agents[0].obs_matrix.shape[1] if agents else 0
    index = {k: tuple(a.agent_id for a in agents if a.feature == k) for k in range(dim)}
    return SensorFleet(agents=agents, feature_index=index)
