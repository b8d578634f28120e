"""Solver-quality scoring from (mean, std) reward summaries.

The score compares a candidate solver's reward distribution C against a
trusted reference T, both reduced to Gaussian summaries:

    H2(T, C) = 1 - sqrt(2*sT*sC / (sT^2 + sC^2)) * exp(-(mT - mC)^2 / (4*(sT^2 + sC^2)))
    q        = sgn(dmu) * f**alpha * sqrt(H2),   dmu = mC - mT,  f = |dmu| / (rH - rL)
    xq       = 2 / (1 + exp(-q / 5))

xq lives in (0, 2): 1 means equally capable, below 1 worse than trusted,
above 1 better. (rH - rL) is the global range of trusted-solver mean rewards
over many tasks, so a mean gap only matters relative to that scale. The
magnitude |dmu| is used inside f (a fractional power of a negative number is
undefined); the sign is carried entirely by sgn(dmu), with sgn(0) = 0.

Also provided: the outcome-assessment score in [-1, 1] built from upper/lower
partial moments of the return samples about a minimally acceptable return.
"""
from __future__ import annotations

import math
from typing import Iterable, NamedTuple

SIGMA_FLOOR = 1e-9  # keeps degenerate (deterministic) summaries usable


class GaussianSummary(NamedTuple):
    mean: float
    std: float


class RewardRange(NamedTuple):
    """Global reward scale (r_low, r_high); must be non-degenerate."""

    r_low: float
    r_high: float

    @property
    def width(self) -> float:
        return self.r_high - self.r_low


class SqResult(NamedTuple):
    hellinger_sq: float
    delta_mu: float
    f: float
    q: float
    xq: float

    def to_dict(self) -> dict:
        return {
            "hellinger_sq": self.hellinger_sq,
            "delta_mu": self.delta_mu,
            "f": self.f,
            "q": self.q,
            "xq": self.xq,
        }


def hellinger_sq(p: GaussianSummary, q: GaussianSummary) -> float:
    """Squared Hellinger distance between two Gaussian summaries, in [0, 1].

    Symmetric; 0 for identical summaries. Stds below SIGMA_FLOOR are floored
    before use.
    """
    for s in (p, q):
        if not (math.isfinite(s.mean) and math.isfinite(s.std)):
            raise ValueError(f"non-finite Gaussian summary: {s}")
        if s.std < 0.0:
            raise ValueError(f"negative std: {s.std}")
    sp = max(p.std, SIGMA_FLOOR)
    sq = max(q.std, SIGMA_FLOOR)
    var_sum = sp * sp + sq * sq
    bc = math.sqrt(2.0 * sp * sq / var_sum) * math.exp(-0.25 * (p.mean - q.mean) ** 2 / var_sum)
    return 1.0 - bc


def solver_quality(
    trusted: GaussianSummary,
    candidate: GaussianSummary,
    rng: RewardRange,
    alpha: float = 0.5,
) -> SqResult:
    """Score the candidate against the trusted summary on the given global scale."""
    if not rng.r_high > rng.r_low:
        raise ValueError("degenerate reward range")
    if not alpha > 0.0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    h2 = hellinger_sq(trusted, candidate)
    delta_mu = candidate.mean - trusted.mean
    f = abs(delta_mu) / rng.width
    sign = (delta_mu > 0.0) - (delta_mu < 0.0)
    q = sign * f**alpha * math.sqrt(h2)
    xq = 2.0 / (1.0 + math.exp(-q / 5.0))
    return SqResult(h2, delta_mu, f, q, xq)


def reward_range(training_means: Iterable[float]) -> RewardRange:
    """Global range of trusted-solver mean rewards across training tasks."""
    means = list(training_means)
    if len(means) < 2:
        raise ValueError("reward range needs at least 2 training means")
    lo, hi = min(means), max(means)
    if not hi > lo:
        raise ValueError("degenerate reward range: all training means equal")
    return RewardRange(lo, hi)


def outcome_assessment(samples: Iterable[float], r_star: float) -> float:
    """Partial-moment outcome score in [-1, 1] about the acceptable return r_star.

    +1 when all mass is above r_star, -1 when all is below, 0 when balanced
    (or when every sample equals r_star exactly).
    """
    xs = list(samples)
    if not xs:
        raise ValueError("outcome assessment needs at least 1 sample")
    n = len(xs)
    # fsum keeps the score independent of sample order
    upm = math.fsum(x - r_star for x in xs if x > r_star) / n
    lpm = math.fsum(r_star - x for x in xs if x < r_star) / n
    total = upm + lpm
    if total == 0.0:
        return 0.0
    return (upm - lpm) / total
