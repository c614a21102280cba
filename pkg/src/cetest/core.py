"""Three-way mean-difference testing: significance first, equivalence second.

The primary entry point is :func:`cet_two_sample`, which runs a two-sided
two-sample t-test and, when that fails to reject, a TOST equivalence test
against a margin.  The verdict is one of three outcomes:

* ``POSITIVE`` - the difference is statistically significant,
* ``NEGATIVE`` - the difference is significantly within the margin
  (statistical equivalence),
* ``INCONCLUSIVE`` - neither test rejects.

:func:`cet_general` is the confidence-interval form of the same procedure
for an arbitrary estimate/standard-error pair (regression slope, log hazard
ratio, ...), :func:`classify_region` maps an (estimate, SE) point straight
to a verdict, and :func:`lead_margin` / :func:`equivalence_curve` summarise
how the equivalence claim depends on the margin choice.

Boundary ties (test statistic exactly at a critical value) never declare:
a tie at the significance threshold falls through to the equivalence test,
and a tie at the equivalence threshold falls through to inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from . import distributions as dist

__all__ = [
    "Decision",
    "Alphas",
    "SymmetricMargin",
    "IntervalMargin",
    "StandardizedMargin",
    "Margin",
    "SummaryStats",
    "CetOutcome",
    "DegenerateDataError",
    "summarize",
    "cet_two_sample",
    "cet_general",
    "classify_region",
    "lead_margin",
    "equivalence_curve",
]


class Decision(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    INCONCLUSIVE = "inconclusive"


class DegenerateDataError(ValueError):
    """Raised when both samples have zero variance.

    The t-based procedures are undefined at s_p = 0; callers holding such
    data should fall back to exact/deterministic comparison of the values.
    """


@dataclass(frozen=True)
class Alphas:
    """Error caps: `alpha1` for false positives, `alpha2` for false equivalence."""

    alpha1: float = 0.05
    alpha2: float = 0.10

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            a = getattr(self, name)
            if not 0.0 < a < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {a}")


@dataclass(frozen=True)
class SymmetricMargin:
    """Equivalence margin [-delta, +delta] on the raw difference scale."""

    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"delta must be finite and > 0, got {self.delta}")


@dataclass(frozen=True)
class IntervalMargin:
    """Equivalence margin [lower, upper]; need not be centred at zero."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("margin endpoints must be finite")
        if not self.lower < self.upper:
            raise ValueError(
                f"margin must satisfy lower < upper, got [{self.lower}, {self.upper}]"
            )

    @classmethod
    def around(cls, center: float, half_width: float) -> "IntervalMargin":
        """Symmetric interval of the given half-width around `center`."""
        if half_width <= 0:
            raise ValueError(f"half_width must be > 0, got {half_width}")
        return cls(center - half_width, center + half_width)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.upper - self.lower)


@dataclass(frozen=True)
class StandardizedMargin:
    """Margin expressed as q times the pooled sample SD: [-q*s_p, +q*s_p]."""

    q: float

    def __post_init__(self):
        if not (math.isfinite(self.q) and self.q > 0):
            raise ValueError(f"q must be finite and > 0, got {self.q}")


Margin = Union[SymmetricMargin, IntervalMargin, StandardizedMargin]


@dataclass(frozen=True)
class SummaryStats:
    """Sufficient statistics of a two-sample dataset (pooled-variance model)."""

    n1: int
    n2: int
    xbar1: float
    xbar2: float
    s_p: float

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError(f"each group needs at least 2 observations, got {self.n1}, {self.n2}")
        if not (math.isfinite(self.s_p) and self.s_p >= 0):
            raise ValueError(f"pooled SD must be finite and >= 0, got {self.s_p}")

    @property
    def mu_hat_d(self) -> float:
        return self.xbar1 - self.xbar2

    @property
    def s_star(self) -> float:
        """Standard error of the mean difference."""
        return self.s_p * math.sqrt(1.0 / self.n1 + 1.0 / self.n2)

    @property
    def df(self) -> int:
        return self.n1 + self.n2 - 2

    @property
    def is_degenerate(self) -> bool:
        return self.s_p == 0.0


@dataclass(frozen=True)
class CetOutcome:
    """Full result of a three-way test.

    `p1` is the two-sided significance p-value, `p2` the TOST equivalence
    p-value (always computed - it is a marginal p-value, valid on its own),
    and `p_cet` the combined summary: p1 for positive verdicts, 1 - p2
    otherwise.  `ci_wide` is the (1 - alpha1) interval used for step one,
    `ci_narrow` the (1 - 2*alpha2) interval used for the equivalence step.
    """

    decision: Decision
    p1: float
    p2: float
    p_cet: float
    ci_wide: tuple
    ci_narrow: tuple
    resolved_delta: float


def summarize(sample1: Sequence[float], sample2: Sequence[float]) -> SummaryStats:
    """Reduce two raw samples to their sufficient statistics.

    The pooled SD is sqrt(((n1-1)*s1^2 + (n2-1)*s2^2) / (n1+n2-2)).  Data
    where both samples are constant come back flagged degenerate (s_p = 0)
    rather than raising; the test procedures reject them later.
    """
    x1 = np.asarray(sample1, dtype=float)
    x2 = np.asarray(sample2, dtype=float)
    if x1.ndim != 1 or x2.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    if x1.size < 2 or x2.size < 2:
        raise ValueError(f"each sample needs at least 2 values, got {x1.size} and {x2.size}")
    if not (np.all(np.isfinite(x1)) and np.all(np.isfinite(x2))):
        raise ValueError("samples must not contain NaN or infinities")
    n1, n2 = int(x1.size), int(x2.size)
    v1 = float(x1.var(ddof=1))
    v2 = float(x2.var(ddof=1))
    s_p = math.sqrt(((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2))
    return SummaryStats(n1, n2, float(x1.mean()), float(x2.mean()), s_p)


@lru_cache(maxsize=65536)
def _crit(p: float, df: float) -> float:
    return float(dist.t_quantile(p, df))


def resolve_delta(margin: Margin, s_p: Optional[float] = None) -> float:
    """Half-width of a margin centred at zero.

    Standardized margins need the pooled SD; interval margins must be
    symmetric about zero to be usable on the mean-difference scale.
    """
    if isinstance(margin, SymmetricMargin):
        return margin.delta
    if isinstance(margin, StandardizedMargin):
        if s_p is None:
            raise ValueError("standardized margins need the pooled SD to resolve")
        if s_p <= 0:
            raise DegenerateDataError("standardized margin is zero when s_p = 0")
        return margin.q * s_p
    if isinstance(margin, IntervalMargin):
        if margin.lower != -margin.upper:
            raise ValueError(
                "the two-sample procedure is symmetric; "
                f"margin [{margin.lower}, {margin.upper}] is not centred at zero "
                "(use cet_general for asymmetric margins)"
            )
        return margin.upper
    raise TypeError(f"not a margin: {margin!r}")


def cet_two_sample(stats: SummaryStats, margin: Margin, alphas: Alphas = Alphas()) -> CetOutcome:
    """Three-way verdict for a two-sample comparison of means.

    Step one tests H0: mu_d = 0 with the pooled two-sample t statistic and
    declares POSITIVE when |T| strictly exceeds the upper alpha1/2 critical
    value.  Otherwise two one-sided tests against the margin declare
    NEGATIVE when both reject at level alpha2, else INCONCLUSIVE.
    """
    if stats.is_degenerate:
        raise DegenerateDataError(
            "pooled SD is zero: the t procedures are undefined; "
            "compare the raw values directly instead"
        )
    delta = resolve_delta(margin, stats.s_p)
    df = float(stats.df)
    s_star = stats.s_star
    mu = stats.mu_hat_d

    t_stat = mu / s_star
    p1 = 2.0 * float(dist.t_cdf(-abs(t_stat), df))
    t1 = _crit(1.0 - alphas.alpha1 / 2.0, df)
    t2 = _crit(1.0 - alphas.alpha2, df)

    tost_lo = (mu + delta) / s_star
    tost_hi = (mu - delta) / s_star
    p2 = max(float(dist.t_cdf(-tost_lo, df)), float(dist.t_cdf(tost_hi, df)))

    if abs(t_stat) > t1:
        decision = Decision.POSITIVE
    elif tost_lo > t2 and tost_hi < -t2:
        decision = Decision.NEGATIVE
    else:
        decision = Decision.INCONCLUSIVE

    return CetOutcome(
        decision=decision,
        p1=p1,
        p2=p2,
        p_cet=p1 if decision is Decision.POSITIVE else 1.0 - p2,
        ci_wide=(mu - t1 * s_star, mu + t1 * s_star),
        ci_narrow=(mu - t2 * s_star, mu + t2 * s_star),
        resolved_delta=delta,
    )


def cet_general(
    theta_hat: float,
    se: float,
    df: Optional[float],
    theta0: float,
    margin: Margin,
    alphas: Alphas = Alphas(),
) -> CetOutcome:
    """Confidence-interval form of the three-way test for any estimator.

    POSITIVE when the (1 - alpha1) interval excludes `theta0`; NEGATIVE when
    theta0 is inside that interval and the (1 - 2*alpha2) interval lies
    entirely within the margin (endpoints inclusive); INCONCLUSIVE
    otherwise.  Pass ``df=None`` for a normal (large-sample) reference
    distribution.  Fed the two-sample estimate, SE and df, this agrees with
    :func:`cet_two_sample`.
    """
    if not (math.isfinite(se) and se > 0):
        raise ValueError(f"standard error must be finite and > 0, got {se}")

    if isinstance(margin, SymmetricMargin):
        lower, upper = theta0 - margin.delta, theta0 + margin.delta
        half = margin.delta
    elif isinstance(margin, IntervalMargin):
        lower, upper = margin.lower, margin.upper
        if not lower <= theta0 <= upper:
            raise ValueError(
                f"margin [{lower}, {upper}] must bracket the null value {theta0}"
            )
        half = margin.half_width
    elif isinstance(margin, StandardizedMargin):
        raise ValueError(
            "standardized margins are defined through the pooled SD of a "
            "two-sample dataset; use cet_two_sample"
        )
    else:
        raise TypeError(f"not a margin: {margin!r}")

    if df is None:
        cdf = dist.normal_cdf
        q1 = float(dist.normal_quantile(1.0 - alphas.alpha1 / 2.0))
        q2 = float(dist.normal_quantile(1.0 - alphas.alpha2))
    else:
        cdf = lambda x: dist.t_cdf(x, df)  # noqa: E731
        q1 = _crit(1.0 - alphas.alpha1 / 2.0, float(df))
        q2 = _crit(1.0 - alphas.alpha2, float(df))

    t_stat = (theta_hat - theta0) / se
    p1 = 2.0 * float(cdf(-abs(t_stat)))
    p2 = max(
        float(cdf(-(theta_hat - lower) / se)),
        float(cdf((theta_hat - upper) / se)),
    )

    wide = (theta_hat - q1 * se, theta_hat + q1 * se)
    narrow = (theta_hat - q2 * se, theta_hat + q2 * se)

    if abs(t_stat) > q1:
        decision = Decision.POSITIVE
    elif lower <= narrow[0] and narrow[1] <= upper:
        decision = Decision.NEGATIVE
    else:
        decision = Decision.INCONCLUSIVE

    return CetOutcome(
        decision=decision,
        p1=p1,
        p2=p2,
        p_cet=p1 if decision is Decision.POSITIVE else 1.0 - p2,
        ci_wide=wide,
        ci_narrow=narrow,
        resolved_delta=half,
    )


def classify_region(
    mu_hat_d: float, s_star: float, delta: float, alphas: Alphas, df: float
) -> Decision:
    """Verdict for an (estimate, standard-error) point, no p-values computed.

    Mirrors :func:`cet_two_sample` exactly; `df` is the t degrees of freedom
    (n1 + n2 - 2 for the two-sample test).  Useful for mapping out the
    decision regions: the NEGATIVE set is a diamond in the (mu_hat_d, s_star)
    plane with vertices at (0, 0), (0, delta/t2) and horizontal extremes at
    +/- delta / (t2/t1 + 1), where t1 and t2 are the alpha1/2 and alpha2
    critical values.
    """
    if not s_star > 0:
        raise ValueError(f"s_star must be > 0, got {s_star}")
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    t1 = _crit(1.0 - alphas.alpha1 / 2.0, float(df))
    t2 = _crit(1.0 - alphas.alpha2, float(df))
    if abs(mu_hat_d / s_star) > t1:
        return Decision.POSITIVE
    if (mu_hat_d + delta) / s_star > t2 and (mu_hat_d - delta) / s_star < -t2:
        return Decision.NEGATIVE
    return Decision.INCONCLUSIVE


def lead_margin(stats: SummaryStats, alpha2: float = 0.10) -> float:
    """Smallest margin half-width at which the data support equivalence.

    Equals the larger absolute endpoint of the (1 - 2*alpha2) confidence
    interval: any symmetric margin strictly wider than this declares
    NEGATIVE (provided step one did not already declare POSITIVE), any
    narrower one cannot.
    """
    if stats.is_degenerate:
        raise DegenerateDataError("pooled SD is zero; every positive margin is equivalent")
    if not 0.0 < alpha2 < 1.0:
        raise ValueError(f"alpha2 must lie in (0, 1), got {alpha2}")
    t2 = _crit(1.0 - alpha2, float(stats.df))
    return abs(stats.mu_hat_d) + t2 * stats.s_star


def equivalence_curve(
    stats: SummaryStats, delta_grid: Sequence[float]
) -> list:
    """TOST p-value as a function of the margin half-width.

    Returns (delta, p2) pairs over the grid; p2 is nonincreasing in delta
    and crosses 0.5 at delta = |mu_hat_d|.
    """
    if stats.is_degenerate:
        raise DegenerateDataError("pooled SD is zero; the TOST p-value is undefined")
    grid = [float(d) for d in delta_grid]
    if not grid:
        raise ValueError("delta grid must be nonempty")
    if any(d <= 0 for d in grid):
        raise ValueError("margins must be > 0")
    df = float(stats.df)
    s_star = stats.s_star
    mu = stats.mu_hat_d
    out = []
    for d in grid:
        p2 = max(
            float(dist.t_cdf(-(mu + d) / s_star, df)),
            float(dist.t_cdf((mu - d) / s_star, df)),
        )
        out.append((d, p2))
    return out
