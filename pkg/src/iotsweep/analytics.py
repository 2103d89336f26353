"""Discovery-time model and experiment statistics.

The model treats scanning as repeated draws from a categorical distribution:
each timestep of length ``delta_t`` either hears device i (probability p_i)
or hears nobody (the null outcome, probability p0). Discovering n of N
devices is then collecting n distinct coupon types under non-uniform coupon
probabilities, and the expected draw count has an exact inclusion-exclusion
form:

    E[draws to n of N] = sum_{h=0}^{n-1} R(N,n,h) * T_h
    R(N,n,h)           = (-1)^(n-1-h) * C(N-h-1, N-n)
    T_h                = sum over all size-h device subsets J of
                         1 / (1 - p0 - sum_{j in J} p_j)

Seconds are draws times delta_t.

Per-timestep probabilities come from Poisson traffic: a device emitting at
rate lambda contributes p = (lambda*dt) * exp(-lambda*dt), divided by the
channel divisor C when the scanner only covers the device's channel 1/C of
the time. delta_t must be small enough that two arrivals in one step are
negligible; ``discretize`` enforces that gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CapacityError,
    DegenerateVectorError,
    DeltaTooCoarseError,
    ParameterError,
)

#: Exhaustive subset enumeration above this many devices is unreasonable
#: (2^24 subsets is already ~17M terms).
SUBSET_ENUMERATION_CAP = 24

DEFAULT_DELTA_T_S = 0.1
DEFAULT_MULTI_ARRIVAL_GATE = 0.01


# ---------------------------------------------------------------------------
# Per-device traffic statistics

@dataclass(frozen=True)
class TrafficStats:
    """Mean and population standard deviation of inter-arrival times."""

    mu_s: float
    sigma_s: float
    sample_count: int


def traffic_stats(interarrivals_s: Sequence[float]) -> TrafficStats:
    """Estimate a device's inter-arrival mean and standard deviation.

    Uses the population form (divide by K, not K-1): the estimate describes
    the captured trace itself. Memoryless traffic shows mu ~= sigma.
    """
    k = len(interarrivals_s)
    if k < 2:
        raise ParameterError(f"need at least 2 inter-arrival samples, got {k}")
    mu = math.fsum(interarrivals_s) / k
    if mu <= 0:
        raise ParameterError("inter-arrival times must be positive on average")
    var = math.fsum((t - mu) ** 2 for t in interarrivals_s) / k
    return TrafficStats(mu_s=mu, sigma_s=math.sqrt(var), sample_count=k)


# ---------------------------------------------------------------------------
# Poisson discretization

@dataclass(frozen=True)
class ProbabilityVector:
    """Per-timestep transmit probabilities (p0, p_1..p_N).

    Normalized: p0 + sum(p) == 1. ``channel_count_divisor`` records the C
    (scalar, or one value per device) that was applied to the raw rates.
    """

    p0: float
    p: tuple[float, ...]
    delta_t_s: float
    channel_count_divisor: float | tuple[float, ...] = 1

    def __post_init__(self):
        if len(self.p) < 1:
            raise ParameterError("probability vector needs at least one device")
        if not 0.0 <= self.p0 <= 1.0 or any(not 0.0 <= q <= 1.0 for q in self.p):
            raise ParameterError("probabilities must lie in [0, 1]")
        total = self.p0 + math.fsum(self.p)
        if abs(total - 1.0) > 1e-9:
            raise ParameterError(f"p0 + sum(p) must equal 1, got {total!r}")

    @property
    def n_devices(self) -> int:
        return len(self.p)


def multi_arrival_prob(rates_per_s: Sequence[float], delta_t_s: float) -> float:
    """Pr(two or more arrivals in one timestep) for superposed Poisson traffic.

    With combined rate lambda = sum(lambda_i):
      Pr(Z=0) = exp(-lambda dt), Pr(Z=1) = lambda dt exp(-lambda dt),
      Pr(Z>=2) = 1 - Pr(Z=0) - Pr(Z=1).
    """
    lam = math.fsum(rates_per_s)
    x = lam * delta_t_s
    return 1.0 - math.exp(-x) - x * math.exp(-x)


def discretize(
    rates_per_s: Sequence[float],
    delta_t_s: float = DEFAULT_DELTA_T_S,
    channel_count: float | Sequence[float] = 1,
    *,
    max_multi_arrival_prob: float = DEFAULT_MULTI_ARRIVAL_GATE,
) -> ProbabilityVector:
    """Turn per-device Poisson rates into a per-timestep probability vector.

    p_i = (lambda_i dt) exp(-lambda_i dt) / C_i and p0 = 1 - sum(p_i); the
    explicit normalization keeps each draw a proper distribution. C may be a
    single divisor or one per device (a channel-hopping scanner hears a
    device 1/C of the time).
    """
    if not rates_per_s:
        raise ParameterError("need at least one device rate")
    if any(r <= 0 for r in rates_per_s):
        raise ParameterError("rates must be positive")
    if delta_t_s <= 0:
        raise ParameterError("delta_t must be positive")
    if isinstance(channel_count, (int, float)):
        divisors = [float(channel_count)] * len(rates_per_s)
    else:
        divisors = [float(c) for c in channel_count]
        if len(divisors) != len(rates_per_s):
            raise ParameterError("one channel divisor per device required")
    if any(c < 1 for c in divisors):
        raise ParameterError("channel divisors must be >= 1")

    pr_multi = multi_arrival_prob(rates_per_s, delta_t_s)
    if pr_multi > max_multi_arrival_prob:
        raise DeltaTooCoarseError(
            f"Pr(>=2 arrivals per step) = {pr_multi:.4g} exceeds the "
            f"{max_multi_arrival_prob:.4g} gate; shrink delta_t below "
            f"{delta_t_s:.4g} s or raise the gate",
            multi_arrival_prob=pr_multi,
        )
    p = tuple(
        (lam * delta_t_s) * math.exp(-lam * delta_t_s) / c
        for lam, c in zip(rates_per_s, divisors)
    )
    scalar = isinstance(channel_count, (int, float))
    return ProbabilityVector(
        p0=1.0 - math.fsum(p),
        p=p,
        delta_t_s=delta_t_s,
        channel_count_divisor=float(channel_count) if scalar else tuple(divisors),
    )


# ---------------------------------------------------------------------------
# Exact order-statistic expectation

def _subsets_by_size(values: Sequence[float]) -> list[np.ndarray]:
    """All subset sums of ``values`` grouped by subset size."""
    buckets: list[list[float]] = [[0.0]]
    for v in values:
        extended: list[list[float]] = [[] for _ in range(len(buckets) + 1)]
        for size, bucket in enumerate(buckets):
            extended[size].extend(bucket)
            extended[size + 1].extend(s + v for s in bucket)
        buckets = extended
    return [np.asarray(bucket, dtype=float) for bucket in buckets]


def _reciprocal_sums_by_size(pv: ProbabilityVector) -> np.ndarray:
    """T_h = sum over size-h subsets J of 1/(1 - p0 - P_J), for h = 0..N-1.

    Split-and-combine keeps the enumeration at two lists of 2^(N/2) subset
    sums instead of one list of 2^N.
    """
    n = pv.n_devices
    caught_mass = 1.0 - pv.p0  # total probability of hearing anything
    half_a = _subsets_by_size(pv.p[: n // 2])
    half_b = _subsets_by_size(pv.p[n // 2 :])
    t = np.zeros(n)
    for ha, sums_a in enumerate(half_a):
        for hb, sums_b in enumerate(half_b):
            h = ha + hb
            if h >= n:  # the full set never appears in the formula
                continue
            denom = caught_mass - sums_a[:, None] - sums_b[None, :]
            if np.any(denom <= 0.0):
                raise DegenerateVectorError(
                    "some size-%d subset already carries all transmit probability "
                    "(denominator <= 0); the remaining devices can never be drawn" % h
                )
            t[h] += float(np.sum(1.0 / denom))
    return t


def _check_pv_size(pv: ProbabilityVector) -> None:
    if pv.n_devices > SUBSET_ENUMERATION_CAP:
        raise CapacityError(
            f"exact enumeration capped at N={SUBSET_ENUMERATION_CAP} devices, "
            f"got {pv.n_devices}"
        )


def expected_order_statistics(pv: ProbabilityVector) -> list[float]:
    """Expected time (seconds) to discover n devices, for every n = 1..N."""
    _check_pv_size(pv)
    n_dev = pv.n_devices
    t = _reciprocal_sums_by_size(pv)
    out = []
    for n in range(1, n_dev + 1):
        terms = [
            (-1.0) ** (n - 1 - h) * math.comb(n_dev - h - 1, n_dev - n) * t[h]
            for h in range(n)
        ]
        out.append(math.fsum(terms) * pv.delta_t_s)
    return out


def expected_order_statistic(pv: ProbabilityVector, n: int) -> float:
    """Expected time (seconds) until n of the N devices have been seen."""
    _check_pv_size(pv)
    if not 1 <= n <= pv.n_devices:
        raise ParameterError(f"n must lie in 1..{pv.n_devices}, got {n}")
    t = _reciprocal_sums_by_size(pv)
    n_dev = pv.n_devices
    terms = [
        (-1.0) ** (n - 1 - h) * math.comb(n_dev - h - 1, n_dev - n) * t[h]
        for h in range(n)
    ]
    return math.fsum(terms) * pv.delta_t_s


def continuous_min_check(rates_per_s: Sequence[float]) -> float:
    """Expected first discovery on a continuously monitored channel: 1/sum(lambda).

    The delta_t -> 0 limit of the n=1 expectation; useful as a cross-check.
    """
    if not rates_per_s:
        raise ParameterError("need at least one rate")
    return 1.0 / math.fsum(rates_per_s)


# ---------------------------------------------------------------------------
# Monte Carlo oracle

def mc_order_statistic(
    pv: ProbabilityVector, n: int, episodes: int, seed: int
) -> float:
    """Mean time (seconds) to collect n distinct devices, by simulation.

    Simulates the per-timestep categorical draw process exactly. Draws that
    hit the null coupon or an already-seen device leave the state unchanged,
    so the simulation samples the geometric number of timesteps between
    successive new devices instead of iterating every timestep; the total
    draw count has the same distribution either way.
    """
    if episodes < 1:
        raise ParameterError("episodes must be >= 1")
    if not 1 <= n <= pv.n_devices:
        raise ParameterError(f"n must lie in 1..{pv.n_devices}, got {n}")
    rng = np.random.default_rng(seed)
    p = np.asarray(pv.p, dtype=float)
    n_dev = pv.n_devices
    collected = np.zeros((episodes, n_dev), dtype=bool)
    draws = np.zeros(episodes, dtype=float)
    for _ in range(n):
        fresh_mass = np.where(collected, 0.0, p).cumsum(axis=1)
        live = fresh_mass[:, -1]  # probability a draw hears a new device
        if np.any(live <= 0.0):
            raise DegenerateVectorError("zero probability of hearing a new device")
        draws += rng.geometric(live)
        u = rng.random(episodes) * live
        idx = (fresh_mass < u[:, None]).sum(axis=1)
        idx = np.minimum(idx, n_dev - 1)
        collected[np.arange(episodes), idx] = True
    return float(draws.mean()) * pv.delta_t_s


# ---------------------------------------------------------------------------
# Student-t quantile (no table lookup)

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def _betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def t_quantile(prob: float, df: int) -> float:
    """Inverse CDF of Student's t: the value x with P(T <= x) = prob.

    Uses the identity P(T > t) = I_{df/(df+t^2)}(df/2, 1/2) / 2 for t > 0 and
    inverts the incomplete beta by bisection.
    """
    if not 0.0 < prob < 1.0:
        raise ParameterError("prob must lie strictly in (0, 1)")
    if df < 1:
        raise ParameterError("degrees of freedom must be >= 1")
    if prob == 0.5:
        return 0.0
    tail = 2.0 * min(prob, 1.0 - prob)  # two-sided tail mass for |T| > t
    a = df / 2.0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _betainc(a, 0.5, mid) < tail:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    t = math.sqrt(df * (1.0 - x) / x)
    return t if prob > 0.5 else -t


# ---------------------------------------------------------------------------
# Cross-trial summaries

@dataclass(frozen=True)
class OrderStatRow:
    n: int
    mean_s: float
    std_s: float
    ci_halfwidth_s: float
    censored_count: int

    @property
    def ci_lo_s(self) -> float:
        return self.mean_s - self.ci_halfwidth_s

    @property
    def ci_hi_s(self) -> float:
        return self.mean_s + self.ci_halfwidth_s


@dataclass(frozen=True)
class OrderStatSummary:
    rows: tuple[OrderStatRow, ...]
    trial_count: int
    alpha: float


def summarize(
    trials: Iterable[Sequence[float]],
    alpha: float = 0.05,
    n_devices: int | None = None,
) -> OrderStatSummary:
    """Sample means and t-confidence intervals of discovery order statistics.

    ``trials`` holds, per trial, the first-seen times of whichever devices
    that trial discovered (any order). Row n aggregates the n-th smallest
    time across trials. Trials that discovered fewer than n devices leave
    that order statistic undefined; such rows report a nonzero
    ``censored_count`` and aggregate the remaining trials only.
    """
    per_trial = [sorted(t) for t in trials]
    m = len(per_trial)
    if m < 2:
        raise ParameterError(f"need at least 2 trials, got {m}")
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha must lie in (0, 1)")
    n_max = n_devices if n_devices is not None else max((len(t) for t in per_trial), default=0)
    rows = []
    for n in range(1, n_max + 1):
        values = [t[n - 1] for t in per_trial if len(t) >= n]
        censored = m - len(values)
        if not values:
            rows.append(OrderStatRow(n, math.nan, math.nan, math.nan, censored))
            continue
        mean = math.fsum(values) / len(values)
        if len(values) >= 2:
            var = math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)
            std = math.sqrt(var)
            half = t_quantile(1.0 - alpha / 2.0, len(values) - 1) * std / math.sqrt(len(values))
        else:
            std = math.nan
            half = math.nan
        rows.append(OrderStatRow(n, mean, std, half, censored))
    return OrderStatSummary(rows=tuple(rows), trial_count=m, alpha=alpha)
