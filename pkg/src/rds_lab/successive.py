"""Successive-sampling (SS) estimator for a known population size.

The sample is modelled as without-replacement draws with probability
proportional to degree from a finite population of ``N`` units. Starting
from inclusion probabilities proportional to degree, each round

1. imputes integer population counts per degree value from the current
   inclusion weights (never below the sample count, summing to ``N``);
2. simulates ``M`` successive samples of the observed size from that
   population and sets the inclusion probability of degree ``k`` to the
   mean number of draws of degree ``k`` divided by the population count.

The estimate is the inverse-inclusion weighted share of group A.
"""

from __future__ import annotations

from typing import Literal

import numba
import numpy as np

from .errors import EstimatorError
from .estimators import EstimatorResult
from .sampling import RdsSample

__all__ = ["ss_estimator", "impute_degree_counts", "successive_inclusion"]

DegreeSource = Literal["out", "in"]


def impute_degree_counts(sample_counts: np.ndarray, shares: np.ndarray, n_pop: int) -> np.ndarray:
    """Integer population counts near ``n_pop * shares`` with ``counts >= sample_counts``.

    The ``n_pop - n`` unsampled units go to the classes in proportion to the
    positive part of their expected unsampled counts, rounded by largest
    remainder.
    """
    sample_counts = np.asarray(sample_counts, dtype=np.int64)
    n = int(sample_counts.sum())
    spare = n_pop - n
    if spare < 0:
        raise EstimatorError(f"population size {n_pop} below sample size {n}")
    if spare == 0:
        return sample_counts.copy()
    extra = np.clip(n_pop * np.asarray(shares, dtype=np.float64) - sample_counts, 0.0, None)
    if extra.sum() <= 0:
        extra = np.asarray(shares, dtype=np.float64).copy()
    quota = extra * (spare / extra.sum())
    base = np.floor(quota).astype(np.int64)
    left = spare - int(base.sum())
    if left:
        order = np.argsort(-(quota - base), kind="stable")
        base[order[:left]] += 1
    return sample_counts + base


@numba.njit(cache=False)
def _draw_counts(k: np.ndarray, start: np.ndarray, u: np.ndarray) -> np.ndarray:
    draws, size = u.shape
    c_count = k.size
    taken = np.zeros(c_count)
    w = np.empty(c_count)
    for m in range(draws):
        tot = 0.0
        for c in range(c_count):
            w[c] = k[c] * start[c]
            tot += w[c]
        for t in range(size):
            x = u[m, t] * tot
            acc = 0.0
            pick = -1
            for c in range(c_count):
                if w[c] > 0.0:
                    pick = c
                    acc += w[c]
                    if x < acc:
                        break
            w[pick] -= k[pick]
            tot -= k[pick]
            taken[pick] += 1.0
    return taken / draws


def successive_inclusion(
    degrees: np.ndarray,
    pop_counts: np.ndarray,
    size: int,
    draws: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Monte-Carlo inclusion probability per degree class under successive sampling.

    Each step of a simulated sample picks a class with probability
    proportional to ``degree * remaining units`` in that class.
    """
    start = np.asarray(pop_counts, dtype=np.float64)
    if size > start.sum():
        raise EstimatorError("sample size exceeds imputed population")
    u = rng.random((draws, size))
    taken = _draw_counts(np.asarray(degrees, dtype=np.float64), start, u)
    return taken / start


def ss_estimator(
    s: RdsSample,
    N: int,
    degree_source: DegreeSource = "out",
    M: int = 500,
    r: int = 3,
    rng: np.random.Generator | int | None = None,
) -> EstimatorResult:
    """SS estimate of the group A share using out- or indegrees as the sampling size variable."""
    if degree_source == "out":
        d = np.asarray(s.out_degree)
    elif degree_source == "in":
        d = np.asarray(s.require_in_degree())
    else:
        raise ValueError(f"unknown degree_source {degree_source!r}")
    n = len(s)
    if n == 0:
        raise EstimatorError("empty sample")
    if N < n:
        raise EstimatorError(f"population size {N} below sample size {n}")
    if M < 1 or r < 1:
        raise ValueError("M and r must be positive")
    if np.any(d < 1):
        raise EstimatorError(f"zero {degree_source}degree encountered")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)

    values, cls, n_k = np.unique(d, return_inverse=True, return_counts=True)
    cls = cls.ravel()
    incl = values.astype(np.float64)
    for _ in range(r):
        w = n_k / incl
        pop = impute_degree_counts(n_k, w / w.sum(), N)
        incl = successive_inclusion(values, pop, n, M, rng)
        if np.any(incl <= 0):
            raise EstimatorError("degenerate degree distribution: a sampled degree has zero inclusion")
    weights = 1.0 / incl[cls]
    est = float(weights[s.is_a].sum() / weights.sum())
    params = {"N": int(N), "M": int(M), "r": int(r), "degree_source": degree_source}
    return EstimatorResult(f"ss_{degree_source}", est, params)
