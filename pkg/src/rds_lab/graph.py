"""Directed graph container, edge-list I/O and structural metrics.

Nodes are dense integers ``0..N-1``. Each node carries a binary trait stored
as a boolean array ``is_a`` (``True`` for group A). Graphs are immutable once
constructed; every metric below is a pure function of the graph.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import GraphFormatError, UndefinedMetricError

__all__ = [
    "DirectedGraph",
    "GraphMetrics",
    "RecruitmentMatrix",
    "load_graph",
    "write_graph",
    "read_graph_files",
    "write_graph_files",
    "is_strongly_connected",
    "directedness",
    "indegree_assortativity",
    "in_out_correlation",
    "homophily",
    "group_degree_ratios",
    "true_recruitment_matrix",
    "degree_balance_residuals",
    "graph_metrics",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _csr(n: int, rows: np.ndarray, cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((cols, rows))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return _frozen(indptr), _frozen(cols[order].astype(np.int64))


def _gather(indptr: np.ndarray, indices: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Concatenate the CSR rows of ``nodes``."""
    starts = indptr[nodes]
    lens = indptr[nodes + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offsets = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(total)
    return indices[offsets]


class DirectedGraph:
    """Simple directed graph with an optional A/B trait per node.

    Parameters
    ----------
    n_nodes : int
        Number of nodes ``N``.
    src, dst : array-like of int
        Endpoints of the ordered edges ``src[e] -> dst[e]``.
    is_a : array-like of bool, optional
        Trait per node, ``True`` for group A. Graphs without traits only
        occur as intermediate products of the generators.
    labels : sequence, optional
        Original node labels when the graph was read from a file whose ids
        were not already ``0..N-1``.
    """

    def __init__(
        self,
        n_nodes: int,
        src: Iterable[int],
        dst: Iterable[int],
        is_a: Iterable[bool] | None = None,
        labels: Sequence | None = None,
    ) -> None:
        n = int(n_nodes)
        if n <= 0:
            raise GraphFormatError("node_count must be positive")
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.shape != dst.shape:
            raise GraphFormatError("src and dst must have equal length")
        if src.size and (src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n):
            raise GraphFormatError("edge endpoint out of range")
        if np.any(src == dst):
            raise GraphFormatError("self-loops are not allowed")
        keys = src * n + dst
        order = np.argsort(keys, kind="stable")
        keys = keys[order]
        if keys.size > 1 and np.any(keys[1:] == keys[:-1]):
            raise GraphFormatError("duplicate ordered edge")
        self._n = n
        self._keys = _frozen(keys)
        self._src = _frozen(src[order])
        self._dst = _frozen(dst[order])
        if is_a is not None:
            is_a = np.asarray(is_a, dtype=bool).ravel()
            if is_a.size != n:
                raise GraphFormatError("trait vector length differs from node count")
            is_a = _frozen(is_a.copy())
        self._is_a = is_a
        if labels is not None and len(labels) != n:
            raise GraphFormatError("labels length differs from node count")
        self._labels = tuple(labels) if labels is not None else None

    # -- basic accessors -------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return self._n

    @property
    def n_edges(self) -> int:
        return int(self._keys.size)

    @property
    def src(self) -> np.ndarray:
        return self._src

    @property
    def dst(self) -> np.ndarray:
        return self._dst

    @property
    def is_a(self) -> np.ndarray:
        if self._is_a is None:
            raise ValueError("graph has no trait assignment")
        return self._is_a

    @property
    def has_traits(self) -> bool:
        return self._is_a is not None

    @property
    def labels(self) -> tuple | None:
        return self._labels

    def with_traits(self, is_a: Iterable[bool]) -> "DirectedGraph":
        """Return a copy of this graph carrying the given trait assignment."""
        g = object.__new__(DirectedGraph)
        g.__dict__.update(
            {k: v for k, v in self.__dict__.items() if k not in ("_is_a",)}
        )
        is_a = np.asarray(is_a, dtype=bool).ravel()
        if is_a.size != self._n:
            raise GraphFormatError("trait vector length differs from node count")
        g._is_a = _frozen(is_a.copy())
        return g

    def edges(self) -> np.ndarray:
        """``(E, 2)`` array of ordered edges sorted by source then target."""
        return np.column_stack((self._src, self._dst))

    # -- degree and adjacency --------------------------------------------
    @cached_property
    def out_degree(self) -> np.ndarray:
        return _frozen(np.bincount(self._src, minlength=self._n).astype(np.int64))

    @cached_property
    def in_degree(self) -> np.ndarray:
        return _frozen(np.bincount(self._dst, minlength=self._n).astype(np.int64))

    @cached_property
    def _out_csr(self) -> tuple[np.ndarray, np.ndarray]:
        # keys are already sorted by (src, dst)
        indptr = np.zeros(self._n + 1, dtype=np.int64)
        np.cumsum(self.out_degree, out=indptr[1:])
        return _frozen(indptr), self._dst

    @cached_property
    def _in_csr(self) -> tuple[np.ndarray, np.ndarray]:
        return _csr(self._n, self._dst, self._src)

    def out_neighbors(self, i: int) -> np.ndarray:
        indptr, idx = self._out_csr
        return idx[indptr[i] : indptr[i + 1]]

    def in_neighbors(self, i: int) -> np.ndarray:
        indptr, idx = self._in_csr
        return idx[indptr[i] : indptr[i + 1]]

    @cached_property
    def out_lists(self) -> list[list[int]]:
        """Out-neighbour lists as plain Python lists, for per-step hot loops."""
        indptr, idx = self._out_csr
        flat = idx.tolist()
        bounds = indptr.tolist()
        return [flat[bounds[i] : bounds[i + 1]] for i in range(self._n)]

    def has_edge(self, i: int, j: int) -> bool:
        key = int(i) * self._n + int(j)
        pos = int(np.searchsorted(self._keys, key))
        return pos < self._keys.size and int(self._keys[pos]) == key

    @cached_property
    def reciprocal_mask(self) -> np.ndarray:
        """Boolean mask over edges: ``True`` where the reverse edge exists."""
        rev = self._dst * self._n + self._src
        pos = np.searchsorted(self._keys, rev)
        pos_c = np.minimum(pos, max(self._keys.size - 1, 0))
        mask = (pos < self._keys.size) & (self._keys[pos_c] == rev)
        return _frozen(mask)

    @cached_property
    def strongly_connected(self) -> bool:
        return is_strongly_connected(self)

    # -- misc --------------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        if self._n != other._n or not np.array_equal(self._keys, other._keys):
            return False
        if (self._is_a is None) != (other._is_a is None):
            return False
        return self._is_a is None or bool(np.array_equal(self._is_a, other._is_a))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"DirectedGraph(n_nodes={self._n}, n_edges={self.n_edges}, traits={self.has_traits})"


@dataclass(frozen=True)
class RecruitmentMatrix:
    """Row-stochastic 2x2 matrix of A/B cross-group edge proportions."""

    s_aa: float
    s_ab: float
    s_ba: float
    s_bb: float

    def __post_init__(self) -> None:
        for name in ("s_aa", "s_ab", "s_ba", "s_bb"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0, 1]")
        if abs(self.s_aa + self.s_ab - 1.0) > 1e-12 or abs(self.s_ba + self.s_bb - 1.0) > 1e-12:
            raise ValueError("recruitment matrix rows must sum to 1")

    @classmethod
    def from_counts(cls, aa: float, ab: float, ba: float, bb: float) -> "RecruitmentMatrix":
        """Normalise raw (possibly weighted) transition counts row-wise."""
        ra, rb = aa + ab, ba + bb
        if ra <= 0:
            raise ValueError("group A has no outgoing edges")
        if rb <= 0:
            raise ValueError("group B has no outgoing edges")
        s_ab = ab / ra
        s_ba = ba / rb
        return cls(1.0 - s_ab, s_ab, s_ba, 1.0 - s_ba)

    def as_array(self) -> np.ndarray:
        return np.array([[self.s_aa, self.s_ab], [self.s_ba, self.s_bb]])

    def swapped(self) -> "RecruitmentMatrix":
        """The same matrix with the A and B labels exchanged."""
        return RecruitmentMatrix(self.s_bb, self.s_ba, self.s_ab, self.s_aa)


@dataclass(frozen=True)
class GraphMetrics:
    """Structural summary of a traited directed graph.

    ``indegree_assortativity`` and ``in_out_correlation`` are ``None`` when
    undefined (zero degree variance).
    """

    node_count: int
    edge_count: int
    directed_edge_count: int
    directedness: float
    indegree_assortativity: float | None
    in_out_correlation: float | None
    homophily_a: float
    attractivity_ratio: float
    activity_ratio: float
    proportion_a: float
    mean_in_a: float
    mean_in_b: float
    mean_out_a: float
    mean_out_b: float

    def to_dict(self) -> dict:
        return asdict(self)


# -- I/O -----------------------------------------------------------------


def _content_lines(stream: IO[str]):
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split()


def _label_order(labels: set[str]) -> list[str]:
    try:
        return sorted(labels, key=int)
    except ValueError:
        return sorted(labels)


def load_graph(edge_stream: IO[str], trait_stream: IO[str]) -> DirectedGraph:
    """Read a graph from an edge list (``"i j"`` lines) and a trait file (``"i A"``).

    Lines starting with ``#`` are ignored. Node labels that are not already
    ``0..N-1`` are remapped to dense ids; the original labels are kept on
    ``graph.labels``.
    """
    raw_edges: list[tuple[str, str]] = []
    for lineno, tok in _content_lines(edge_stream):
        if len(tok) != 2:
            raise GraphFormatError(f"edge list line {lineno}: expected 'i j', got {' '.join(tok)!r}")
        raw_edges.append((tok[0], tok[1]))
    if not raw_edges:
        raise GraphFormatError("empty graph")

    traits: dict[str, bool] = {}
    for lineno, tok in _content_lines(trait_stream):
        if len(tok) != 2 or tok[1] not in ("A", "B"):
            raise GraphFormatError(f"trait line {lineno}: expected 'i A|B', got {' '.join(tok)!r}")
        if tok[0] in traits:
            raise GraphFormatError(f"trait line {lineno}: node {tok[0]} assigned twice")
        traits[tok[0]] = tok[1] == "A"

    referenced = {u for e in raw_edges for u in e}
    missing = referenced - traits.keys()
    if missing:
        first = _label_order(missing)[0]
        raise GraphFormatError(f"trait missing for node {first}")

    order = _label_order(set(traits))
    index = {lab: i for i, lab in enumerate(order)}
    n = len(order)
    identity = all(lab == str(i) for i, lab in enumerate(order))

    src = np.fromiter((index[u] for u, _ in raw_edges), dtype=np.int64, count=len(raw_edges))
    dst = np.fromiter((index[v] for _, v in raw_edges), dtype=np.int64, count=len(raw_edges))
    if np.any(src == dst):
        line = int(np.flatnonzero(src == dst)[0])
        raise GraphFormatError(f"self-loop on node {raw_edges[line][0]}")
    keys = src * n + dst
    uniq, counts = np.unique(keys, return_counts=True)
    if np.any(counts > 1):
        dup = int(uniq[counts > 1][0])
        raise GraphFormatError(f"duplicate edge {order[dup // n]} -> {order[dup % n]}")
    is_a = np.array([traits[lab] for lab in order], dtype=bool)
    return DirectedGraph(n, src, dst, is_a, labels=None if identity else order)


def write_graph(g: DirectedGraph, edge_stream: IO[str], trait_stream: IO[str]) -> None:
    """Write ``g`` in the edge-list / trait-file format read by :func:`load_graph`."""
    labels = g.labels if g.labels is not None else [str(i) for i in range(g.n_nodes)]
    for u, v in zip(g.src.tolist(), g.dst.tolist()):
        edge_stream.write(f"{labels[u]} {labels[v]}\n")
    for i, a in enumerate(g.is_a.tolist()):
        trait_stream.write(f"{labels[i]} {'A' if a else 'B'}\n")


def read_graph_files(edge_path, trait_path) -> DirectedGraph:
    with open(edge_path, encoding="utf-8") as fe, open(trait_path, encoding="utf-8") as ft:
        return load_graph(fe, ft)


def write_graph_files(g: DirectedGraph, edge_path, trait_path) -> None:
    with open(edge_path, "w", encoding="utf-8") as fe, open(trait_path, "w", encoding="utf-8") as ft:
        write_graph(g, fe, ft)


# -- connectivity ----------------------------------------------------------


def _reach_count(indptr: np.ndarray, indices: np.ndarray, n: int, start: int) -> int:
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    frontier = np.array([start], dtype=np.int64)
    count = 1
    while frontier.size:
        nbrs = _gather(indptr, indices, frontier)
        nbrs = np.unique(nbrs[~seen[nbrs]])
        seen[nbrs] = True
        count += nbrs.size
        frontier = nbrs
    return count


def is_strongly_connected(g: DirectedGraph) -> bool:
    """Forward and backward reachability from node 0 both cover every node."""
    n = g.n_nodes
    if n == 1:
        return True
    if g.out_degree.min() == 0 or g.in_degree.min() == 0:
        return False
    if _reach_count(*g._out_csr, n, 0) != n:
        return False
    return _reach_count(*g._in_csr, n, 0) == n


# -- metrics -----------------------------------------------------------------


def directedness(g: DirectedGraph) -> float:
    """Fraction of ordered edges whose reverse edge is absent."""
    if g.n_edges == 0:
        raise UndefinedMetricError("directedness undefined on an edgeless graph")
    return float(np.count_nonzero(~g.reciprocal_mask)) / g.n_edges


def indegree_assortativity(g: DirectedGraph) -> float:
    """Newman assortativity of indegrees over ordered edges.

    Each ordered edge contributes the pair (indegree of source, indegree of
    target); the pair is symmetrised as in the undirected formula.
    """
    if g.n_edges < 2:
        raise UndefinedMetricError("assortativity needs at least two edges")
    din = g.in_degree.astype(np.float64)
    j = din[g.src]
    k = din[g.dst]
    e = float(g.n_edges)
    mean = np.sum(0.5 * (j + k)) / e
    num = np.sum(j * k) / e - mean * mean
    den = np.sum(0.5 * (j * j + k * k)) / e - mean * mean
    if den <= 1e-12 * max(1.0, mean * mean):
        raise UndefinedMetricError("undefined: zero variance of edge-end indegrees")
    return float(num / den)


def in_out_correlation(g: DirectedGraph) -> float:
    """Pearson correlation between each node's indegree and outdegree."""
    if g.n_nodes < 2:
        raise UndefinedMetricError("correlation needs at least two nodes")
    x = g.in_degree.astype(np.float64)
    y = g.out_degree.astype(np.float64)
    x = x - x.mean()
    y = y - y.mean()
    sxx = float(np.dot(x, x))
    syy = float(np.dot(y, y))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedMetricError("undefined: zero variance in a degree sequence")
    return float(np.dot(x, y) / math.sqrt(sxx * syy))


def _edge_type_counts(g: DirectedGraph) -> tuple[int, int, int, int]:
    a = g.is_a
    sa = a[g.src]
    da = a[g.dst]
    aa = int(np.count_nonzero(sa & da))
    ab = int(np.count_nonzero(sa & ~da))
    ba = int(np.count_nonzero(~sa & da))
    return aa, ab, ba, g.n_edges - aa - ab - ba


def true_recruitment_matrix(g: DirectedGraph) -> RecruitmentMatrix:
    """Cross-group edge proportions over every ordered edge of the network."""
    aa, ab, ba, bb = _edge_type_counts(g)
    if aa + ab == 0:
        raise UndefinedMetricError("group A has no outgoing edges")
    if ba + bb == 0:
        raise UndefinedMetricError("group B has no outgoing edges")
    return RecruitmentMatrix.from_counts(aa, ab, ba, bb)


def homophily(g: DirectedGraph) -> float:
    """Homophily of group A, ``1 - S_AB / p_B``."""
    n_a = int(np.count_nonzero(g.is_a))
    n_b = g.n_nodes - n_a
    if n_b == 0:
        raise UndefinedMetricError("p_B = 0: homophily undefined")
    if n_a == 0:
        raise UndefinedMetricError("group A is empty")
    aa, ab, _, _ = _edge_type_counts(g)
    if aa + ab == 0:
        raise UndefinedMetricError("group A has no outgoing edges")
    return 1.0 - (ab / (aa + ab)) / (n_b / g.n_nodes)


def _group_means(g: DirectedGraph) -> tuple[float, float, float, float]:
    a = g.is_a
    n_a = int(np.count_nonzero(a))
    n_b = g.n_nodes - n_a
    if n_a == 0 or n_b == 0:
        raise UndefinedMetricError("both groups must be nonempty")
    din, dout = g.in_degree, g.out_degree
    return (
        float(din[a].sum()) / n_a,
        float(din[~a].sum()) / n_b,
        float(dout[a].sum()) / n_a,
        float(dout[~a].sum()) / n_b,
    )


def group_degree_ratios(g: DirectedGraph) -> tuple[float, float]:
    """Attractivity ratio (mean indegree A/B) and activity ratio (mean outdegree A/B)."""
    in_a, in_b, out_a, out_b = _group_means(g)
    if in_b == 0 or out_b == 0:
        raise UndefinedMetricError("group B has zero mean degree")
    return in_a / in_b, out_a / out_b


def degree_balance_residuals(g: DirectedGraph) -> tuple[float, float]:
    """Residuals of the two indegree-sum balance identities, relative to E.

    ``N_A Dout_A S_AA + N_B Dout_B S_BA = N_A Din_A`` and
    ``N_A Dout_A S_AB + N_B Dout_B S_BB = N_B Din_B``.
    """
    in_a, in_b, out_a, out_b = _group_means(g)
    s = true_recruitment_matrix(g)
    n_a = float(np.count_nonzero(g.is_a))
    n_b = g.n_nodes - n_a
    e = float(g.n_edges)
    r1 = (n_a * out_a * s.s_aa + n_b * out_b * s.s_ba - n_a * in_a) / e
    r2 = (n_a * out_a * s.s_ab + n_b * out_b * s.s_bb - n_b * in_b) / e
    return r1, r2


def graph_metrics(g: DirectedGraph) -> GraphMetrics:
    """Compute every structural summary used to characterise a network."""
    try:
        gamma: float | None = indegree_assortativity(g)
    except UndefinedMetricError:
        gamma = None
    try:
        rho: float | None = in_out_correlation(g)
    except UndefinedMetricError:
        rho = None
    in_a, in_b, out_a, out_b = _group_means(g)
    m_star, w_star = group_degree_ratios(g)
    return GraphMetrics(
        node_count=g.n_nodes,
        edge_count=g.n_edges,
        directed_edge_count=int(np.count_nonzero(~g.reciprocal_mask)),
        directedness=directedness(g),
        indegree_assortativity=gamma,
        in_out_correlation=rho,
        homophily_a=homophily(g),
        attractivity_ratio=m_star,
        activity_ratio=w_star,
        proportion_a=float(np.count_nonzero(g.is_a)) / g.n_nodes,
        mean_in_a=in_a,
        mean_in_b=in_b,
        mean_out_a=out_a,
        mean_out_b=out_b,
    )
