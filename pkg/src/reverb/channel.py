"""Rician uplink model and the closed-form outage-constrained bandwidth allocator.

The allocator sizes the smallest bandwidth W such that a packet of D bits
makes the latency deadline with outage probability at most epsilon over the
Rician fading tail. The chain is:

  outage(W) = P[ W log2(1 + snr) < D/tau ] = CDF of the fading power at a
  threshold that depends on W; inverting the (approximated) Rician quantile
  turns this into (1 - Ups*Theta) e^Ups = 1 with Ups = -D ln2 / (W tau),
  solved by the Lambert W function. Only Theta > 1 admits a positive-W root;
  the argument -e^{-1/Theta}/Theta always carries the spurious root
  Ups = 0 (infinite bandwidth) on one branch, so the allocator evaluates both
  real branches and keeps the one that differs from -1/Theta.

Granted bandwidth is quantized upward to physical resource blocks (PRBs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConfigError, DomainError, InfeasibleError, InputError

_INV_E = math.exp(-1.0)


@dataclass(frozen=True)
class ChannelParams:
    """Uplink constants shared by every sensor-to-AP link."""

    system_gain: float = 1.0            # lumped frequency/antenna constant
    path_loss_exp: float = 2.0
    noise_power_dbm: float = -11.5      # total noise power over the reference bandwidth
    noise_ref_bandwidth_hz: float = 20e6
    rician_k: float = 10.0              # LoS-to-scatter power ratio, linear
    packet_bits: float = 1024.0
    max_latency_s: float = 5e-3
    outage_target: float = 1e-5
    prb_hz: float = 180e3

    def __post_init__(self) -> None:
        for name in (
            "system_gain",
            "path_loss_exp",
            "noise_ref_bandwidth_hz",
            "rician_k",
            "packet_bits",
            "max_latency_s",
            "prb_hz",
        ):
            if not (getattr(self, name) > 0.0):
                raise ConfigError(f"{name} must be strictly positive")
        if not (0.0 < self.outage_target < 0.5):
            raise ConfigError("outage target must lie in (0, 0.5)")
        q = gaussian_q_inv(self.outage_target)
        if not (self.rician_k > 0.5 * q * q):
            raise ConfigError(
                "LoS component too weak for the outage target "
                f"(need rician_k > {0.5 * q * q:.3f})"
            )

    @property
    def noise_psd(self) -> float:
        """Noise power spectral density in W/Hz."""
        return 10.0 ** (self.noise_power_dbm / 10.0 - 3.0) / self.noise_ref_bandwidth_hz


@dataclass(frozen=True)
class LinkBudget:
    """Sized uplink for one scheduled sensor."""

    agent_id: int
    bandwidth_hz: float
    prbs: int
    theta: float
    fading_threshold: float
    tx_power_w: float
    distance_m: float


@dataclass(frozen=True)
class LinkOutcome:
    delivered: bool
    latency_s: float
    fading: float


def snr(
    params: ChannelParams,
    tx_power_w: float,
    distance_m: float,
    bandwidth_hz: float,
    fading: float,
) -> float:
    """Instantaneous SNR: gain * power * fading / (d^alpha * W * N0)."""
    if min(tx_power_w, distance_m, bandwidth_hz) <= 0.0 or fading < 0.0:
        raise InputError("power, distance, bandwidth must be positive; fading nonnegative")
    return (
        params.system_gain
        * tx_power_w
        * fading
        / (distance_m**params.path_loss_exp * bandwidth_hz * params.noise_psd)
    )


def rician_fading_sample(
    rician_k: float, rng: np.random.Generator, size: int | None = None
) -> float | np.ndarray:
    """Unit-mean Rician fading power: |sqrt(K/(K+1)) + CN(0, 1/(K+1))|^2."""
    if rician_k < 0.0:
        raise InputError("Rician factor must be nonnegative")
    los = math.sqrt(rician_k / (rician_k + 1.0))
    sigma = math.sqrt(0.5 / (rician_k + 1.0))  # per real dimension
    shape = () if size is None else (size,)
    re = los + sigma * rng.standard_normal(shape)
    im = sigma * rng.standard_normal(shape)
    power = re * re + im * im
    return float(power) if size is None else power


def marcum_q1(a: float, b: float, rel_tol: float = 1e-12) -> float:
    """First-order Marcum Q: tail of a noncentral chi-square with 2 dof.

    Poisson-mixture series: sum_k e^{-a^2/2} (a^2/2)^k / k! * P[chi2_{2k+2} > b^2],
    truncated when the remaining Poisson mass is below ``rel_tol`` of the sum.
    """
    if a < 0.0 or b < 0.0:
        raise InputError("arguments must be nonnegative")
    if b == 0.0:
        return 1.0
    ha = 0.5 * a * a
    hb = 0.5 * b * b
    pois = math.exp(-ha)          # Poisson weight at k = 0
    inner = math.exp(-hb)         # chi-square tail increment at j = 0
    chi_tail = inner              # P[chi2_2 > b^2]
    total = pois * chi_tail
    cum = pois
    k = 0
    while (1.0 - cum) > rel_tol * max(total, 1e-300) and k < 100000:
        k += 1
        pois *= ha / k
        inner *= hb / k
        chi_tail += inner
        total += pois * chi_tail
        cum += pois
    return min(total, 1.0)


def gaussian_q(x: float) -> float:
    """Standard normal tail probability."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def gaussian_q_inv(eps: float) -> float:
    """Inverse of the Gaussian Q-function via erfc^{-1}."""
    if not (0.0 < eps < 1.0):
        raise DomainError("tail probability must lie in (0, 1)")
    return math.sqrt(2.0) * float(special.erfcinv(2.0 * eps))


def lambert_w(x: float, branch: str = "principal", rel_tol: float = 1e-12) -> float:
    """Real Lambert W by Halley iteration: w with w e^w = x.

    ``principal`` covers x >= -1/e; ``lower`` covers -1/e <= x < 0.
    """
    if not math.isfinite(x):
        raise DomainError("argument must be finite")
    if x < -_INV_E - 1e-15:
        raise DomainError("no real solution below -1/e")
    x = max(x, -_INV_E)
    if branch == "principal":
        if x == 0.0:
            return 0.0
        # Branch-point series near -1/e, log asymptote for large x, linear otherwise.
        if x < -0.25:
            p = math.sqrt(2.0 * (math.e * x + 1.0))
            w = -1.0 + p - p * p / 3.0
        elif x < math.e:
            w = x / (1.0 + x)
        else:
            lx = math.log(x)
            w = lx - math.log(lx)
    elif branch == "lower":
        if not (x < 0.0):
            raise DomainError("lower branch requires x in [-1/e, 0)")
        if x > -0.25:
            lx = math.log(-x)
            w = lx - math.log(-lx)
        else:
            p = -math.sqrt(2.0 * (math.e * x + 1.0))
            w = -1.0 + p - p * p / 3.0
    else:
        raise InputError(f"unknown branch {branch!r}")

    for _ in range(100):
        ew = math.exp(w)
        fw = w * ew - x
        if fw == 0.0:
            break
        wp1 = w + 1.0
        if wp1 == 0.0:
            w += 1e-12
            continue
        delta = fw / (ew * wp1 - (w + 2.0) * fw / (2.0 * wp1))
        w -= delta
        if abs(delta) <= rel_tol * (abs(w) + 1e-300):
            break
    if abs(w * math.exp(w) - x) > 1e-9 * max(abs(x), 1e-12):
        raise DomainError(f"Halley iteration failed to converge for x={x!r}")
    return w


def outage_fading_threshold(rician_k: float, outage_target: float) -> float:
    """Approximate Rician quantile argument y with 1 - Q1(sqrt(2K), y) ~= epsilon."""
    q = gaussian_q_inv(outage_target)
    s = math.sqrt(2.0 * rician_k)
    if not (s > q):
        raise DomainError("LoS component too weak: need sqrt(2K) > Qinv(outage)")
    if q == 0.0:
        raise DomainError("outage target of 0.5 leaves the threshold undefined")
    y = s + math.log(s / (s - q)) / (2.0 * q) - q
    if not (y > 0.0):
        raise DomainError("fading threshold must be positive")
    return y


def optimal_bandwidth(
    params: ChannelParams, tx_power_w: float, distance_m: float, agent_id: int = -1
) -> LinkBudget:
    """Smallest bandwidth meeting the latency deadline at the outage target.

    Raises InfeasibleError when no finite bandwidth works (Theta <= 1: even
    infinite bandwidth cannot reach rate D/tau at this SNR budget).
    """
    if tx_power_w <= 0.0 or distance_m <= 0.0:
        raise InputError("power and distance must be strictly positive")
    y = outage_fading_threshold(params.rician_k, params.outage_target)
    d_ln2 = params.packet_bits * math.log(2.0)
    theta = (
        params.system_gain
        * tx_power_w
        * y
        * y
        * params.max_latency_s
        / (
            2.0
            * (1.0 + params.rician_k)
            * distance_m**params.path_loss_exp
            * params.noise_psd
            * d_ln2
        )
    )
    if not math.isfinite(theta) or theta <= 0.0:
        raise InfeasibleError(f"degenerate link constant theta={theta!r}")
    z = -math.exp(-1.0 / theta) / theta
    trivial = -1.0 / theta
    roots = [lambert_w(z, "principal"), lambert_w(z, "lower")]
    nontrivial = [w for w in roots if abs(w - trivial) > 1e-9 * max(1.0, abs(trivial))]
    if not nontrivial:
        raise InfeasibleError("both Lambert branches collapse onto the infinite-bandwidth root")
    ups = nontrivial[0] + 1.0 / theta
    if ups >= 0.0:
        raise InfeasibleError(
            "no positive-bandwidth solution: the deadline rate exceeds the wideband limit"
        )
    bandwidth = -d_ln2 / (params.max_latency_s * ups)
    return LinkBudget(
        agent_id=agent_id,
        bandwidth_hz=bandwidth,
        prbs=int(math.ceil(bandwidth / params.prb_hz)),
        theta=theta,
        fading_threshold=y,
        tx_power_w=tx_power_w,
        distance_m=distance_m,
    )


def uplink_outcome(
    params: ChannelParams, budget: LinkBudget, rng: np.random.Generator
) -> LinkOutcome:
    """Realize one transmission: sample fading, check the latency deadline."""
    fading = rician_fading_sample(params.rician_k, rng)
    gamma = snr(params, budget.tx_power_w, budget.distance_m, budget.bandwidth_hz, fading)
    rate = budget.bandwidth_hz * math.log2(1.0 + gamma)
    latency = params.packet_bits / rate if rate > 0.0 else math.inf
    return LinkOutcome(delivered=latency <= params.max_latency_s, latency_s=latency, fading=fading)
