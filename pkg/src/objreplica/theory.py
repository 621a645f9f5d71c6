"""Replication factor and bounds on the largest identical-group ratio.

For one allocation context with ``X`` objects split into identical groups,
the ratio ``X_N / X`` of the largest group satisfies

    theta - alpha  <  X_N / X  <  1/(2(X-1)) + sqrt(1/(4(X-1)^2) + A)

with ``A = (theta - alpha) / (1 - alpha)``, where ``theta`` is the fraction
of equal comparisons and ``alpha`` the chance that a comparison between two
non-identical objects still finds equal values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

REPORT_THRESHOLD = 0.6


class NoComparisons(ValueError):
    pass


class AlphaOutOfRange(ValueError):
    pass


class TooFewObjects(ValueError):
    pass


def theta(equivalent: int, different: int) -> float:
    n = equivalent + different
    if n <= 0:
        raise NoComparisons("no comparisons recorded (insufficient data)")
    return equivalent / n


def _check(theta_: float, alpha: float) -> None:
    if not 0.0 <= alpha < 1.0:
        raise AlphaOutOfRange(f"alpha must lie in [0, 1), got {alpha}")
    if not 0.0 <= theta_ <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta_}")


def prob_A(theta_: float, alpha: float) -> float:
    """Probability that a compared pair is truly identical, clamped at 0."""
    _check(theta_, alpha)
    return min(1.0, max(0.0, (theta_ - alpha) / (1.0 - alpha)))


def lower_bound(theta_: float, alpha: float) -> float:
    """omega = theta - alpha, clamped at 0 when theta < alpha."""
    _check(theta_, alpha)
    return max(0.0, theta_ - alpha)


def upper_bound(theta_: float, alpha: float, X: int, cap: bool = True) -> float:
    """gamma for ``X`` objects; capped at 1 unless ``cap`` is false."""
    if X < 2:
        raise TooFewObjects(f"need at least two objects, got {X}")
    a = prob_A(theta_, alpha)
    t = 1.0 / (X - 1)
    g = t / 2.0 + math.sqrt(t * t / 4.0 + a)
    return min(g, 1.0) if cap else g


@dataclass(frozen=True)
class BoundInterval:
    theta: float
    alpha: float
    X: int
    omega: float
    gamma: float
    gamma_raw: float
    A: float
    omega_clamped: bool
    gamma_capped: bool

    @property
    def B(self) -> float:
        return self.alpha * (1.0 - self.A)

    @property
    def C(self) -> float:
        return 1.0 - self.A - self.B

    def contains(self, ratio: float, strict_lower: bool = True) -> bool:
        """Whether ``ratio`` lies inside (omega, gamma_raw)."""
        lo = self.theta - self.alpha
        above = ratio > lo if strict_lower else ratio >= lo
        return above and ratio < self.gamma_raw


def bound_interval(theta_: float, alpha: float, X: int) -> BoundInterval:
    a = prob_A(theta_, alpha)
    raw = upper_bound(theta_, alpha, X, cap=False)
    return BoundInterval(theta=theta_, alpha=alpha, X=X,
                         omega=lower_bound(theta_, alpha), gamma=min(raw, 1.0),
                         gamma_raw=raw, A=a, omega_clamped=theta_ < alpha,
                         gamma_capped=raw > 1.0)


def is_suspect(theta_: float, threshold: float = REPORT_THRESHOLD) -> bool:
    return theta_ > threshold


@dataclass(frozen=True)
class ReplicationRatio:
    pooled: float
    macro: float
    object_weighted: Optional[float]


def replication_ratio(counts: Iterable[tuple[int, int]]) -> float:
    """Pooled equal fraction over ``(equivalent, different)`` pairs."""
    eq = diff = 0
    for e, d in counts:
        eq += e
        diff += d
    return theta(eq, diff)


def replication_ratios(counts: Iterable[tuple[int, int, int]]) -> ReplicationRatio:
    """All program-level variants from ``(equivalent, different, X)`` triples.

    ``pooled`` sums counts, ``macro`` averages per-context theta, and
    ``object_weighted`` weights per-context theta by object count.
    Contexts without comparisons are skipped.
    """
    rows = [(e, d, x) for e, d, x in counts if e + d > 0]
    if not rows:
        raise NoComparisons("no context has comparisons")
    pooled = replication_ratio((e, d) for e, d, _ in rows)
    thetas = [theta(e, d) for e, d, _ in rows]
    macro = sum(thetas) / len(thetas)
    total_x = sum(x for _, _, x in rows)
    weighted = (sum(t * x for t, (_, _, x) in zip(thetas, rows)) / total_x
                if total_x else None)
    return ReplicationRatio(pooled, macro, weighted)
