"""Design-stage calculators for the three-way test.

Given a true mean difference and SD, these compute the chance of each
verdict, the chance of a conclusive study, and the sample size needed to
hit a target for either.  The positive rate has a closed form through the
noncentral t distribution; the negative rate integrates a normal-CDF window
over the sampling distribution of the pooled SD by Monte Carlo.

All Monte Carlo results are deterministic functions of the seed, and the
chi-squared draws are inverse-CDF transforms of a uniform stream, so a
fixed seed acts as common random numbers across candidate sample sizes
during a search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import distributions as dist
from .core import (
    Alphas,
    IntervalMargin,
    Margin,
    StandardizedMargin,
    SymmetricMargin,
)

__all__ = [
    "McConfig",
    "DesignPoint",
    "OperatingChars",
    "Feasibility",
    "SampleSizeSearchError",
    "pr_positive",
    "pr_negative_mc",
    "pr_negative_standardized",
    "pr_inconclusive",
    "feasibility",
    "operating_characteristics",
    "pr_success",
    "sample_size_for_power",
    "sample_size_for_success",
]


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings: number of draws and RNG seed."""

    draws: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.draws < 1:
            raise ValueError(f"draws must be >= 1, got {self.draws}")


@dataclass(frozen=True)
class DesignPoint:
    """A hypothetical truth: mean difference, common SD, group sizes, margin."""

    mu_d: float
    sigma: float
    n1: int
    n2: int
    margin: Margin
    alphas: Alphas = Alphas()

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be finite and > 0, got {self.sigma}")
        if not math.isfinite(self.mu_d):
            raise ValueError(f"mu_d must be finite, got {self.mu_d}")
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError(f"group sizes must be >= 2, got {self.n1}, {self.n2}")

    @property
    def sigma_star(self) -> float:
        """True SD of the mean-difference estimator."""
        return self.sigma * math.sqrt(1.0 / self.n1 + 1.0 / self.n2)

    @property
    def df(self) -> int:
        return self.n1 + self.n2 - 2


@dataclass(frozen=True)
class OperatingChars:
    """Verdict probabilities at a design point; they sum to one.

    `mc_stderr` is the Monte Carlo standard error of the negative component
    (the inconclusive component inherits it); the positive component is
    exact.
    """

    pr_positive: float
    pr_negative: float
    pr_inconclusive: float
    mc_stderr: float = 0.0


@dataclass(frozen=True)
class Feasibility:
    """Which verdicts a standardized margin permits at a given design."""

    negative_possible: bool
    inconclusive_possible: bool


class SampleSizeSearchError(RuntimeError):
    """Search exhausted its cap without reaching the target."""

    def __init__(self, message: str, best_n: int, best_value: float):
        super().__init__(message)
        self.best_n = best_n
        self.best_value = best_value


def _crit_pair(alphas: Alphas, df: float):
    t1 = float(dist.t_quantile(1.0 - alphas.alpha1 / 2.0, df))
    t2 = float(dist.t_quantile(1.0 - alphas.alpha2, df))
    return t1, t2


def _raw_delta(margin: Margin) -> float:
    if isinstance(margin, SymmetricMargin):
        return margin.delta
    if isinstance(margin, IntervalMargin):
        if margin.lower != -margin.upper:
            raise ValueError(
                "operating characteristics are defined for margins symmetric "
                f"about zero, got [{margin.lower}, {margin.upper}]"
            )
        return margin.upper
    if isinstance(margin, StandardizedMargin):
        raise ValueError(
            "margin scales with the sample SD; use pr_negative_standardized"
        )
    raise TypeError(f"not a margin: {margin!r}")


def pr_positive(dp: DesignPoint) -> float:
    """Exact probability of a POSITIVE verdict (the usual two-sided power).

    Equals alpha1 when mu_d = 0.  The margin plays no role in step one.
    """
    df = float(dp.df)
    t1, _ = _crit_pair(dp.alphas, df)
    ncp = dp.mu_d / dp.sigma_star
    return float(
        (1.0 - dist.noncentral_t_cdf(t1, df, ncp)) + dist.noncentral_t_cdf(-t1, df, ncp)
    )


def _s_star_draws(dp: DesignPoint, mc: McConfig) -> np.ndarray:
    rng = np.random.default_rng(mc.seed)
    q = dist.chi2_sample(float(dp.df), rng, size=mc.draws)
    return dp.sigma_star * np.sqrt(q / dp.df)


def _window_mixture(dp: DesignPoint, win: np.ndarray):
    """Mean and stderr of P(-win < muhat < win) over the SE draws."""
    terms = dist.normal_cdf(win, dp.mu_d, dp.sigma_star) - dist.normal_cdf(
        -win, dp.mu_d, dp.sigma_star
    )
    est = float(terms.mean())
    stderr = float(terms.std(ddof=1) / math.sqrt(terms.size)) if terms.size > 1 else 0.0
    return est, stderr


def pr_negative_mc(dp: DesignPoint, mc: McConfig = McConfig()):
    """Monte Carlo probability of a NEGATIVE verdict for a fixed raw margin.

    For each simulated SE value s the mean-difference estimate must land in
    the window (-w(s), w(s)) with w(s) = max(0, min(delta - t2*s, t1*s)):
    inside the margin by a t2 multiple of s, without clearing the
    significance threshold t1.  Averaging the normal probability of that
    window over chi-squared draws of s gives the estimate; the returned
    stderr is the sample SD of the averaged terms over sqrt(draws).
    """
    delta = _raw_delta(dp.margin)
    t1, t2 = _crit_pair(dp.alphas, float(dp.df))
    s = _s_star_draws(dp, mc)
    win = np.clip(np.minimum(delta - t2 * s, t1 * s), 0.0, None)
    return _window_mixture(dp, win)


def pr_negative_standardized(
    q: float,
    mu_d: float,
    sigma: float,
    n1: int,
    n2: int,
    alphas: Alphas = Alphas(),
    mc: McConfig = McConfig(),
):
    """Monte Carlo probability of a NEGATIVE verdict for margin q * s_p.

    Because the margin scales with the sample SD, the acceptance window for
    the mean difference is proportional to the simulated SE: |muhat| <
    s * min(q/k - t2, t1) with k = sqrt(1/n1 + 1/n2).  When q <= t2 * k no
    dataset can ever satisfy the equivalence test and the probability is
    exactly zero.
    """
    if not q > 0:
        raise ValueError(f"q must be > 0, got {q}")
    feas = feasibility(q, n1, n2, alphas)
    if not feas.negative_possible:
        return 0.0, 0.0
    dp = DesignPoint(mu_d, sigma, n1, n2, StandardizedMargin(q), alphas)
    t1, t2 = _crit_pair(alphas, float(dp.df))
    k = math.sqrt(1.0 / n1 + 1.0 / n2)
    slope = min(q / k - t2, t1)
    s = _s_star_draws(dp, mc)
    return _window_mixture(dp, slope * s)


def feasibility(q: float, n1: int, n2: int, alphas: Alphas = Alphas()) -> Feasibility:
    """Which verdicts a standardized margin q * s_p can ever produce.

    A negative verdict needs q > t2 * sqrt(1/n1 + 1/n2); an inconclusive
    verdict needs q / sqrt(1/n1 + 1/n2) < t1 + t2 (otherwise every
    non-positive dataset is automatically equivalent).
    """
    if not q > 0:
        raise ValueError(f"q must be > 0, got {q}")
    if n1 < 2 or n2 < 2:
        raise ValueError(f"group sizes must be >= 2, got {n1}, {n2}")
    df = float(n1 + n2 - 2)
    t1, t2 = _crit_pair(alphas, df)
    k = math.sqrt(1.0 / n1 + 1.0 / n2)
    return Feasibility(
        negative_possible=q > t2 * k,
        inconclusive_possible=(q / k) < (t1 + t2),
    )


def _pr_negative(dp: DesignPoint, mc: McConfig):
    if isinstance(dp.margin, StandardizedMargin):
        return pr_negative_standardized(
            dp.margin.q, dp.mu_d, dp.sigma, dp.n1, dp.n2, dp.alphas, mc
        )
    return pr_negative_mc(dp, mc)


def pr_inconclusive(dp: DesignPoint, mc: McConfig = McConfig()):
    """Probability of an INCONCLUSIVE verdict, as one minus the other two."""
    neg, stderr = _pr_negative(dp, mc)
    inc = 1.0 - pr_positive(dp) - neg
    return float(np.clip(inc, 0.0, 1.0)), stderr


def operating_characteristics(dp: DesignPoint, mc: McConfig = McConfig()) -> OperatingChars:
    """All three verdict probabilities at a design point."""
    pos = pr_positive(dp)
    neg, stderr = _pr_negative(dp, mc)
    inc = float(np.clip(1.0 - pos - neg, 0.0, 1.0))
    return OperatingChars(pos, neg, inc, stderr)


def pr_success(
    mu_tilde: float,
    sigma_tilde: float,
    n1: int,
    n2: int,
    margin: Margin,
    alphas: Alphas = Alphas(),
    mc: McConfig = McConfig(),
    alt_weight: float = 0.5,
) -> float:
    """Probability of a conclusive study, averaged over two scenarios.

    The anticipated-effect scenario (mu_d = mu_tilde) gets weight
    `alt_weight`, the null scenario (mu_d = 0) the rest; the default is the
    even split.  Conclusive means positive or negative, so false positives
    and false negatives count as success here.
    """
    if not 0.0 <= alt_weight <= 1.0:
        raise ValueError(f"alt_weight must lie in [0, 1], got {alt_weight}")
    inc_alt, _ = pr_inconclusive(
        DesignPoint(mu_tilde, sigma_tilde, n1, n2, margin, alphas), mc
    )
    inc_null, _ = pr_inconclusive(
        DesignPoint(0.0, sigma_tilde, n1, n2, margin, alphas), mc
    )
    return 1.0 - alt_weight * inc_alt - (1.0 - alt_weight) * inc_null


def _normal_power(n: int, mu: float, sigma: float, alpha1: float) -> float:
    se = sigma * math.sqrt(4.0 / n)
    z1 = float(dist.normal_quantile(1.0 - alpha1 / 2.0))
    shift = abs(mu) / se
    return float(dist.normal_cdf(shift - z1) + dist.normal_cdf(-shift - z1))


def _exact_power(n: int, mu: float, sigma: float, alphas: Alphas) -> float:
    half = n // 2
    return pr_positive(DesignPoint(mu, sigma, half, half, SymmetricMargin(1.0), alphas))


def sample_size_for_power(
    target: float,
    mu_tilde: float,
    sigma_tilde: float,
    alphas: Alphas = Alphas(),
    *,
    exact: bool = False,
    max_n: int = 4_194_304,
) -> int:
    """Smallest even total n (balanced groups) reaching the target positive rate.

    The default power metric is the classical normal-approximation design
    calculation; pass ``exact=True`` to search on the exact noncentral-t
    positive rate instead (typically 2-4 higher at the 0.90 boundary).
    Requires mu_tilde != 0: under the null no sample size pushes the
    positive rate past alpha1.
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target must lie in (0, 1), got {target}")
    if mu_tilde == 0.0:
        raise ValueError(
            "anticipated effect is zero: the positive rate is alpha1 for "
            "every n, so no sample size attains the target"
        )
    if not (math.isfinite(sigma_tilde) and sigma_tilde > 0):
        raise ValueError(f"sigma must be finite and > 0, got {sigma_tilde}")

    if exact:
        power = lambda n: _exact_power(n, mu_tilde, sigma_tilde, alphas)  # noqa: E731
    else:
        power = lambda n: _normal_power(n, mu_tilde, sigma_tilde, alphas.alpha1)  # noqa: E731

    return _search_even_n(power, target, max_n, label="power")


def sample_size_for_success(
    target: float,
    mu_tilde: float,
    sigma_tilde: float,
    margin: Margin,
    alphas: Alphas = Alphas(),
    mc: McConfig = McConfig(),
    *,
    max_n: int = 1_048_576,
) -> int:
    """Smallest even total n (balanced groups) reaching the target success rate.

    Uses one fixed seed for every candidate n (common random numbers), which
    makes the Monte Carlo success curve effectively monotone and the search
    reproducible.  After bracketing and bisecting, the boundary is walked
    two-by-two so that the returned n satisfies the target and n - 2 does
    not even if the curve wiggles near the boundary.  Raises
    :class:`SampleSizeSearchError` with the best value seen if the cap is
    reached first.
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target must lie in (0, 1), got {target}")
    cache = {}

    def success(n: int) -> float:
        if n not in cache:
            half = n // 2
            cache[n] = pr_success(mu_tilde, sigma_tilde, half, half, margin, alphas, mc)
        return cache[n]

    return _search_even_n(success, target, max_n, label="success")


def _search_even_n(metric, target: float, max_n: int, label: str) -> int:
    """Bracket by doubling, bisect on even n, then walk the boundary."""
    n = 4
    best_n, best_value = n, metric(n)
    if best_value < target:
        lo = n
        hi = None
        while n < max_n:
            n = min(2 * n, max_n if max_n % 2 == 0 else max_n - 1)
            value = metric(n)
            if value > best_value:
                best_n, best_value = n, value
            if value >= target:
                hi = n
                break
            lo = n
        if hi is None:
            raise SampleSizeSearchError(
                f"no even n <= {max_n} reaches the {label} target {target}; "
                f"best achieved {best_value:.6f} at n = {best_n}",
                best_n=best_n,
                best_value=best_value,
            )
        while hi - lo > 2:
            mid = (lo + hi) // 2
            mid += mid % 2
            if mid in (lo, hi):
                break
            if metric(mid) >= target:
                hi = mid
            else:
                lo = mid
        n = hi
    # walk down while the predecessor still qualifies, then up if a
    # non-monotone wiggle left us short
    while n > 4 and metric(n - 2) >= target:
        n -= 2
    while metric(n) < target:
        n += 2
        if n > max_n:
            raise SampleSizeSearchError(
                f"boundary walk exceeded the cap {max_n} for the {label} target",
                best_n=best_n,
                best_value=best_value,
            )
    return n
