"""Distribution kernels backing the testing and design calculations.

Thin validated wrappers over scipy's special-function ufuncs.  Everything
broadcasts over numpy arrays; scalars come back as plain floats.  Sampling
goes through the inverse CDF so that a fixed uniform stream produces draws
that vary smoothly with the degrees of freedom (required by the
common-random-numbers sample-size searches).
"""

from __future__ import annotations

import numpy as np
from scipy import special


def _check_df(df) -> None:
    df = np.asarray(df)
    if not np.all(np.isfinite(df)) or np.any(df <= 0):
        raise ValueError(f"degrees of freedom must be finite and > 0, got {df}")


def normal_cdf(x, mean=0.0, sd=1.0):
    """CDF of the normal distribution with the given mean and SD."""
    if np.any(np.asarray(sd) <= 0) or not np.all(np.isfinite(np.asarray(sd))):
        raise ValueError(f"sd must be finite and > 0, got {sd}")
    return special.ndtr((np.asarray(x, dtype=float) - mean) / sd)


def normal_quantile(p, mean=0.0, sd=1.0):
    """Inverse of :func:`normal_cdf` for p in (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0) or np.any(p >= 1):
        raise ValueError(f"p must lie strictly inside (0, 1), got {p}")
    if np.any(np.asarray(sd) <= 0):
        raise ValueError(f"sd must be > 0, got {sd}")
    return mean + sd * special.ndtri(p)


def t_cdf(x, df):
    """CDF of Student's t distribution.  `df` may be any positive real."""
    _check_df(df)
    return special.stdtr(df, np.asarray(x, dtype=float))


def t_quantile(p, df):
    """Inverse of :func:`t_cdf` for p in (0, 1)."""
    _check_df(df)
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0) or np.any(p >= 1):
        raise ValueError(f"p must lie strictly inside (0, 1), got {p}")
    return special.stdtrit(df, p)


def noncentral_t_cdf(x, df, ncp):
    """CDF of the noncentral t distribution.

    Reduces to the central :func:`t_cdf` at ncp = 0 (scipy's kernel agrees
    with the central CDF to machine precision there).
    """
    _check_df(df)
    if not np.all(np.isfinite(np.asarray(ncp))):
        raise ValueError(f"noncentrality parameter must be finite, got {ncp}")
    return special.nctdtr(df, ncp, np.asarray(x, dtype=float))


def chi2_sample(df, rng, size=None):
    """Draw from the chi-squared distribution via inverse-CDF transform.

    Consumes exactly one uniform per draw from the caller-supplied
    ``numpy.random.Generator``, so two calls with equally seeded generators
    and different `df` are driven by the same uniforms.
    """
    _check_df(df)
    u = rng.random(size)
    # gammaincinv is the regularized lower-incomplete-gamma inverse; the
    # chi-squared CDF is gammainc(df/2, x/2).
    return 2.0 * special.gammaincinv(df / 2.0, u)
