"""Equilibrium inclusion probabilities of the recruitment random walk.

The walk moves from ``i`` to a uniformly chosen out-neighbour, so its
transition matrix is ``R[i, j] = e_ij / d_out(i)``. The exact stationary
vector is found by power iteration; the mean-field version aggregates nodes
into (indegree, outdegree) classes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .errors import RdsLabError
from .graph import DirectedGraph, is_strongly_connected

logger = logging.getLogger(__name__)

__all__ = [
    "StationaryDistribution",
    "DegreeClassTable",
    "ConvergenceError",
    "stationary_distribution",
    "mean_field_pi",
    "class_averages",
]

LAZY_FACTOR = 0.999


class ConvergenceError(RdsLabError, RuntimeError):
    """Power or fixed-point iteration hit its iteration cap."""


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    probabilities: np.ndarray
    iterations: int
    damped: bool = False
    direct: bool = False

    def __post_init__(self) -> None:
        p = self.probabilities
        if np.any(p <= 0):
            raise ValueError("stationary probabilities must be positive")
        if abs(float(p.sum()) - 1.0) > 1e-10:
            raise ValueError("stationary probabilities must sum to 1")

    def __len__(self) -> int:
        return int(self.probabilities.size)

    def __getitem__(self, i):
        return self.probabilities[i]


def _power_iterate(step, x0: np.ndarray, tol: float, max_iter: int, lazy: float | None):
    x = x0
    for it in range(1, max_iter + 1):
        y = step(x)
        if lazy is not None:
            y = lazy * y + (1.0 - lazy) * x
        y /= y.sum()
        diff = float(np.abs(y - x).sum())
        x = y
        if diff < tol:
            return x, it
    return None, max_iter


def stationary_distribution(
    g: DirectedGraph, tol: float = 1e-12, max_iter: int = 100_000
) -> StationaryDistribution:
    """Power iteration on ``R^T`` from the uniform vector.

    Stops when successive iterates differ by less than ``tol`` in L1 norm.
    If that does not happen within ``max_iter`` iterations (nearly periodic
    walks), the iteration is rerun on the lazy walk
    ``0.999 R + 0.001 I``, which has the same stationary vector. A walk
    that mixes too slowly for either falls back to a direct sparse solve.
    """
    n = g.n_nodes
    if g.out_degree.min() == 0:
        raise ValueError("walk undefined: node with zero outdegree")
    if not is_strongly_connected(g):
        raise ValueError("walk is reducible: graph is not strongly connected")
    src, dst = g.src, g.dst
    inv_out = 1.0 / g.out_degree.astype(np.float64)

    def step(x: np.ndarray) -> np.ndarray:
        return np.bincount(dst, weights=(x * inv_out)[src], minlength=n)

    x0 = np.full(n, 1.0 / n)
    pi, it = _power_iterate(step, x0, tol, max_iter, None)
    damped = False
    if pi is None:
        logger.warning("power iteration did not converge in %d steps; retrying lazy walk", max_iter)
        pi, it = _power_iterate(step, x0, tol, max_iter, LAZY_FACTOR)
        damped = True
        if pi is None:
            # damping cures periodicity, not slow mixing
            logger.warning("lazy walk did not converge either; solving the balance equations directly")
            return StationaryDistribution(_direct_solve(g, inv_out), 2 * max_iter, True, True)
    return StationaryDistribution(pi, it, damped)


def _direct_solve(g: DirectedGraph, inv_out: np.ndarray) -> np.ndarray:
    """Sparse LU solve of ``(R^T - I) x = 0`` with the last equation replaced by ``sum(x) = 1``."""
    n = g.n_nodes
    a = sparse.coo_matrix((inv_out[g.src], (g.dst, g.src)), shape=(n, n)).tolil()
    a -= sparse.identity(n, format="lil")
    a[n - 1, :] = np.ones(n)
    b = np.zeros(n)
    b[-1] = 1.0
    x = splinalg.spsolve(a.tocsc(), b)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise ConvergenceError("stationary distribution: direct solve failed")
    return x / x.sum()


@dataclass(frozen=True, eq=False)
class DegreeClassTable:
    """Mean-field inclusion probability per (indegree, outdegree) class.

    Arrays are parallel over classes. ``node_class[i]`` indexes the class of
    node ``i``. ``pi_bar`` is normalised so that
    ``sum(N * fraction * pi_bar) == 1``.
    """

    in_degree: np.ndarray
    out_degree: np.ndarray
    fraction: np.ndarray
    pi_bar: np.ndarray
    node_class: np.ndarray
    node_count: int
    mean_indegree: float
    iterations: int

    @property
    def classes(self) -> dict[tuple[int, int], tuple[float, float]]:
        return {
            (int(ki), int(ko)): (float(f), float(p))
            for ki, ko, f, p in zip(self.in_degree, self.out_degree, self.fraction, self.pi_bar)
        }

    @property
    def counts(self) -> np.ndarray:
        return np.rint(self.fraction * self.node_count).astype(np.int64)

    def uncorrelated(self) -> np.ndarray:
        """Closed form ``K_in / (N * mean indegree)`` for graphs without degree correlations."""
        return self.in_degree / (self.node_count * self.mean_indegree)

    def node_values(self) -> np.ndarray:
        """Mean-field probability of each node's class."""
        return self.pi_bar[self.node_class]


def _degree_classes(g: DirectedGraph):
    key = g.in_degree * (int(g.out_degree.max()) + 1) + g.out_degree
    uniq, node_class, counts = np.unique(key, return_inverse=True, return_counts=True)
    base = int(g.out_degree.max()) + 1
    return uniq // base, uniq % base, node_class.ravel(), counts


def mean_field_pi(
    g: DirectedGraph, tol: float = 1e-10, max_iter: int = 100_000
) -> DegreeClassTable:
    """Fixed point of the degree-class recursion for the mean inclusion probability.

    Iterates ``pi(K) = K_in * sum_K' f(K'|K) / K'_out * pi(K')``, where
    ``f(K'|K)`` is the share of edges into class ``K`` that leave class
    ``K'``, until the largest relative change falls below ``tol``.
    """
    if g.out_degree.min() == 0 or g.in_degree.min() == 0:
        raise ValueError("mean-field recursion needs positive in- and outdegrees")
    n = g.n_nodes
    k_in, k_out, node_class, counts = _degree_classes(g)
    c = k_in.size
    # column-stochastic transfer of class mass: T[K, K'] = E(K'->K) / (N f_K' K'_out)
    e = sparse.coo_matrix(
        (np.ones(g.n_edges), (node_class[g.dst], node_class[g.src])), shape=(c, c)
    ).tocsr()
    t = e.multiply(1.0 / (counts * k_out)[None, :]).tocsr()
    mass = counts / n

    def converge(lazy: float | None):
        x = mass.copy()
        for it in range(1, max_iter + 1):
            y = t @ x
            if lazy is not None:
                y = lazy * y + (1.0 - lazy) * x
            y /= y.sum()
            change = float(np.max(np.abs(y - x) / y))
            x = y
            if change < tol:
                return x, it
        return None, max_iter

    x, it = converge(None)
    if x is None:
        logger.warning("mean-field iteration did not converge; retrying lazy iteration")
        x, it = converge(LAZY_FACTOR)
        if x is None:
            raise ConvergenceError("mean-field iteration did not converge")
    pi_bar = x / counts
    return DegreeClassTable(
        in_degree=k_in,
        out_degree=k_out,
        fraction=counts / n,
        pi_bar=pi_bar,
        node_class=node_class,
        node_count=n,
        mean_indegree=g.n_edges / n,
        iterations=it,
    )


def class_averages(table: DegreeClassTable, probabilities) -> np.ndarray:
    """Average a per-node probability vector within each degree class of ``table``."""
    p = np.asarray(getattr(probabilities, "probabilities", probabilities), dtype=np.float64)
    sums = np.bincount(table.node_class, weights=p, minlength=table.pi_bar.size)
    return sums / np.bincount(table.node_class, minlength=table.pi_bar.size)
