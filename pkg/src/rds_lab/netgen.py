"""Generators for the three synthetic network families.

* Net1: random purely directed graph, reciprocity raised by degree-preserving
  rewiring, traits swapped until the attractivity ratio hits its target.
  ``directedness_target == 0`` uses a random undirected graph instead.
* Net2: random undirected graph, reciprocal links broken and moved so that
  the in/out degree correlation tracks ``1 - directedness``; traits as for
  Net1; then degree-preserving rewiring towards a homophily target.
* Net3: a Net2-style base whose indegree assortativity is pushed up by
  swapping edge targets between same-trait nodes.

Every edge-changing step keeps the graph simple (no self-loops, no duplicate
ordered pairs). A generated graph that is not strongly connected is thrown
away and the whole generation restarts on a fresh random substream.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np

from .errors import GenerationError, InfeasibleTargetError
from .graph import DirectedGraph, indegree_assortativity, is_strongly_connected

logger = logging.getLogger(__name__)

__all__ = [
    "GenTarget",
    "generate",
    "gen_random_directed",
    "gen_random_undirected",
    "reduce_directedness_net1",
    "increase_directedness_net2",
    "assign_traits_attractivity",
    "rewire_homophily",
    "rewire_assortativity_net3",
]

MAX_CONSECUTIVE_FAILURES = 1000
DIRECTEDNESS_FLOOR_NET1 = 0.2

Family = Literal["Net1", "Net2", "Net3"]


@dataclass(frozen=True)
class GenTarget:
    """Declarative description of one generated network."""

    family: Family
    node_count: int
    mean_degree: float
    directedness_target: float
    attractivity_target: float = 1.0
    proportion_a: float = 0.7
    homophily_target: float | None = None
    assortativity_target: float | None = None
    rng_seed: int = 0
    max_restarts: int = 20

    def __post_init__(self) -> None:
        if self.family not in ("Net1", "Net2", "Net3"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.node_count <= 1:
            raise ValueError("node_count must be at least 2")
        if self.mean_degree <= 0:
            raise ValueError("mean_degree must be positive")
        lam = self.directedness_target
        if not 0.0 <= lam <= 1.0:
            raise ValueError("directedness_target must lie in [0, 1]")
        if self.family == "Net1" and 0.0 < lam < DIRECTEDNESS_FLOOR_NET1:
            raise ValueError("Net1 directedness_target must be 0 or in [0.2, 1]")
        if not 0.0 < self.proportion_a < 1.0:
            raise ValueError("proportion_a must lie in (0, 1)")
        if self.attractivity_target <= 0:
            raise ValueError("attractivity_target must be positive")
        if self.max_restarts < 1:
            raise ValueError("max_restarts must be positive")
        if self.family == "Net3" and self.assortativity_target is None:
            raise ValueError("Net3 requires assortativity_target")
        if self._needs_pairs():
            pairs = self.node_count * self.mean_degree / 2
            if abs(pairs - round(pairs)) > 1e-9:
                raise ValueError("node_count * mean_degree must be even for reciprocal-pair placement")

    def _needs_pairs(self) -> bool:
        return self.family != "Net1" or self.directedness_target == 0.0

    @property
    def edge_count(self) -> int:
        return int(round(self.node_count * self.mean_degree))

    def to_dict(self) -> dict:
        return asdict(self)


# -- mutable working structure ------------------------------------------------


class _Bag:
    """Set with O(1) insertion, removal and uniform random choice."""

    __slots__ = ("items", "pos")

    def __init__(self, items=()):
        self.items = list(items)
        self.pos = {x: i for i, x in enumerate(self.items)}

    def __len__(self) -> int:
        return len(self.items)

    def add(self, x) -> None:
        if x not in self.pos:
            self.pos[x] = len(self.items)
            self.items.append(x)

    def discard(self, x) -> None:
        i = self.pos.pop(x, None)
        if i is None:
            return
        last = self.items.pop()
        if i < len(self.items):
            self.items[i] = last
            self.pos[last] = i

    def choice(self, rnd: random.Random):
        return self.items[int(rnd.random() * len(self.items))]


class _Digraph:
    """Adjacency sets used while rewiring."""

    __slots__ = ("n", "out", "inn")

    def __init__(self, g: DirectedGraph):
        self.n = g.n_nodes
        self.out = [set() for _ in range(self.n)]
        self.inn = [set() for _ in range(self.n)]
        for u, v in zip(g.src.tolist(), g.dst.tolist()):
            self.out[u].add(v)
            self.inn[v].add(u)

    def has(self, u: int, v: int) -> bool:
        return v in self.out[u]

    def add(self, u: int, v: int) -> None:
        self.out[u].add(v)
        self.inn[v].add(u)

    def remove(self, u: int, v: int) -> None:
        self.out[u].remove(v)
        self.inn[v].remove(u)

    def edges(self):
        for u, nbrs in enumerate(self.out):
            for v in nbrs:
                yield u, v

    def to_graph(self, is_a=None) -> DirectedGraph:
        src, dst = [], []
        for u, nbrs in enumerate(self.out):
            src.extend([u] * len(nbrs))
            dst.extend(nbrs)
        return DirectedGraph(self.n, src, dst, is_a)


def _py_random(rng: np.random.Generator) -> random.Random:
    return random.Random(int(rng.integers(0, 2**63 - 1)))


def _check_failures(fails: int, what: str) -> None:
    if fails >= MAX_CONSECUTIVE_FAILURES:
        raise InfeasibleTargetError(
            f"{what}: {MAX_CONSECUTIVE_FAILURES} consecutive rejected rewiring attempts"
        )


# -- base networks -------------------------------------------------------------


def _random_unordered_pairs(n: int, count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``count`` distinct unordered pairs ``i < j`` uniformly."""
    total = n * (n - 1) // 2
    idx = np.sort(rng.choice(total, size=count, replace=False))
    # row offsets of the strict upper triangle, row-major
    rows = np.arange(n - 1, dtype=np.int64)
    offsets = rows * (2 * n - rows - 1) // 2
    i = np.searchsorted(offsets, idx, side="right") - 1
    j = idx - offsets[i] + i + 1
    return i.astype(np.int64), j.astype(np.int64)


def gen_random_directed(n: int, mean_degree: float, rng: np.random.Generator) -> DirectedGraph:
    """Random graph of ``n * mean_degree`` ordered edges with no reciprocal pair."""
    e = int(round(n * mean_degree))
    total = n * (n - 1) // 2
    if e > total:
        raise InfeasibleTargetError(
            f"{e} irreciprocal edges do not fit on {n} nodes (at most {total})"
        )
    i, j = _random_unordered_pairs(n, e, rng)
    flip = rng.random(e) < 0.5
    src = np.where(flip, j, i)
    dst = np.where(flip, i, j)
    return DirectedGraph(n, src, dst)


def gen_random_undirected(n: int, mean_degree: float, rng: np.random.Generator) -> DirectedGraph:
    """Random graph of ``n * mean_degree / 2`` reciprocal pairs."""
    pairs = n * mean_degree / 2
    if abs(pairs - round(pairs)) > 1e-9:
        raise ValueError("n * mean_degree must be even")
    pairs = int(round(pairs))
    total = n * (n - 1) // 2
    if pairs > total:
        raise InfeasibleTargetError(f"{pairs} reciprocal pairs do not fit on {n} nodes")
    i, j = _random_unordered_pairs(n, pairs, rng)
    return DirectedGraph(n, np.concatenate((i, j)), np.concatenate((j, i)))


# -- directedness ----------------------------------------------------------------


def reduce_directedness_net1(
    g: DirectedGraph,
    directedness_target: float,
    rng: np.random.Generator,
    tol: float = 0.005,
    stats: dict | None = None,
) -> DirectedGraph:
    """Turn irreciprocal edges into reciprocal pairs without changing any degree.

    One step picks an irreciprocal ``i -> j``, an irreciprocal in-edge
    ``k -> i`` and an irreciprocal out-edge ``j -> l`` and rewires them to
    ``k -> l`` and ``j -> i``. Steps repeat until the fraction of irreciprocal
    edges first drops to the target.

    Near the degree-imbalance floor random anchors rarely admit a move. After
    ``MAX_CONSECUTIVE_FAILURES`` rejections the remaining valid moves are
    enumerated and one is drawn uniformly; when none is left the result is
    accepted if it is within ``tol`` of the target.

    If ``stats`` is given, ``stats["steps"]`` receives the number of rewires.
    """
    if not DIRECTEDNESS_FLOOR_NET1 <= directedness_target <= 1.0:
        raise InfeasibleTargetError(
            f"directedness target {directedness_target} outside [{DIRECTEDNESS_FLOOR_NET1}, 1]"
        )
    dg = _Digraph(g)
    rnd = _py_random(rng)
    out, inn = dg.out, dg.inn
    irr = _Bag((u, v) for u, v in dg.edges() if u not in out[v])
    e = g.n_edges
    goal = directedness_target * e

    def candidates(i: int, j: int):
        ks = [k for k in inn[i] if k not in out[i]]
        ls = [l for l in out[j] if l not in inn[j]]
        return ks, ls

    fails = steps = 0
    while len(irr) > goal:
        if fails >= MAX_CONSECUTIVE_FAILURES:
            moves = []
            for i, j in irr.items:
                ks, ls = candidates(i, j)
                moves.extend((i, j, k, l) for k in ks for l in ls if k != l and l not in out[k])
            if not moves:
                lam = len(irr) / e
                if lam - directedness_target <= tol:
                    logger.info("directedness rewiring stalled at %.4f (target %.4f)", lam, directedness_target)
                    break
                raise InfeasibleTargetError(
                    f"no valid rewiring move left at directedness {lam:.4f} "
                    f"(target {directedness_target})"
                )
            i, j, k, l = moves[int(rnd.random() * len(moves))]
        else:
            i, j = irr.choice(rnd)
            ks, ls = candidates(i, j)
            if not ks or not ls:
                fails += 1
                continue
            k = ks[int(rnd.random() * len(ks))]
            l = ls[int(rnd.random() * len(ls))]
            if k == l or l in out[k]:
                fails += 1
                continue
        fails = 0
        steps += 1
        dg.remove(k, i)
        dg.remove(j, l)
        dg.add(k, l)
        dg.add(j, i)
        irr.discard((i, j))
        irr.discard((k, i))
        irr.discard((j, l))
        if k in out[l]:
            irr.discard((l, k))
        else:
            irr.add((k, l))
    if stats is not None:
        stats["steps"] = steps
    return dg.to_graph(g._is_a)


def increase_directedness_net2(
    g: DirectedGraph,
    directedness_target: float,
    rng: np.random.Generator,
    stats: dict | None = None,
) -> DirectedGraph:
    """Break reciprocal pairs by moving one of their links between unlinked nodes.

    One step picks a reciprocal pair ``i <-> j`` and two distinct nodes
    ``k, l`` with no link in either direction, then moves one of the two links
    (fair coin) to ``k -> l``. The total edge count is unchanged; in and out
    degrees drift apart so that their correlation falls roughly as
    ``1 - directedness``.
    """
    if not 0.0 <= directedness_target <= 1.0:
        raise InfeasibleTargetError("directedness target must lie in [0, 1]")
    dg = _Digraph(g)
    rnd = _py_random(rng)
    out = dg.out
    n = dg.n
    rec = _Bag((u, v) for u, v in dg.edges() if u < v and u in out[v])
    e = g.n_edges
    e_dir = e - 2 * len(rec)
    goal = directedness_target * e
    fails = steps = 0
    while e_dir < goal:
        if not rec:
            raise InfeasibleTargetError("no reciprocal pairs left to break")
        k = int(rnd.random() * n)
        l = int(rnd.random() * n)
        if k == l or l in out[k] or k in out[l]:
            fails += 1
            _check_failures(fails, "increase_directedness_net2")
            continue
        fails = 0
        i, j = rec.choice(rnd)
        rec.discard((i, j))
        if rnd.random() < 0.5:
            dg.remove(i, j)
        else:
            dg.remove(j, i)
        dg.add(k, l)
        e_dir += 2
        steps += 1
    if stats is not None:
        stats["steps"] = steps
    return dg.to_graph(g._is_a)


# -- traits ------------------------------------------------------------------------


def assign_traits_attractivity(
    g: DirectedGraph,
    proportion_a: float,
    attractivity_target: float,
    rng: np.random.Generator,
    tol: float = 0.002,
    max_swaps: int | None = None,
) -> DirectedGraph:
    """Assign ``floor(N * proportion_a)`` A-traits, then swap towards a target m*.

    Random A/B node pairs are drawn; a pair exchanges traits only when doing
    so moves the mean-indegree ratio towards the target. Stops once the ratio
    is within ``tol``. If the swap budget runs out the result is accepted
    when it is within 0.01 of the target and rejected otherwise.
    """
    if not 0.0 < proportion_a < 1.0:
        raise ValueError("proportion_a must lie in (0, 1)")
    n = g.n_nodes
    n_a = int(math.floor(n * proportion_a))
    n_b = n - n_a
    if n_a == 0 or n_b == 0:
        raise InfeasibleTargetError("both groups must be nonempty")
    din = g.in_degree.tolist()
    total_in = sum(din)
    perm = rng.permutation(n)
    a_nodes = perm[:n_a].tolist()
    b_nodes = perm[n_a:].tolist()
    sum_a = sum(din[i] for i in a_nodes)

    def ratio(s: int) -> float:
        in_b = (total_in - s) / n_b
        return math.inf if in_b == 0 else (s / n_a) / in_b

    rnd = _py_random(rng)
    budget = max_swaps if max_swaps is not None else 200 * n + 10_000
    m = ratio(sum_a)
    for _ in range(budget):
        if abs(m - attractivity_target) <= tol:
            break
        ia = int(rnd.random() * n_a)
        ib = int(rnd.random() * n_b)
        u, v = a_nodes[ia], b_nodes[ib]
        if (m > attractivity_target and din[u] > din[v]) or (
            m < attractivity_target and din[u] < din[v]
        ):
            a_nodes[ia], b_nodes[ib] = v, u
            sum_a += din[v] - din[u]
            m = ratio(sum_a)
    if abs(m - attractivity_target) > 0.01:
        raise InfeasibleTargetError(
            f"attractivity ratio {m:.4f} did not reach target {attractivity_target}"
        )
    is_a = np.zeros(n, dtype=bool)
    is_a[a_nodes] = True
    return g.with_traits(is_a)


# -- homophily -----------------------------------------------------------------------


def rewire_homophily(
    g: DirectedGraph,
    homophily_target: float,
    rng: np.random.Generator,
    stats: dict | None = None,
) -> DirectedGraph:
    """Degree-, trait- and reciprocity-preserving rewiring towards a homophily target.

    Irreciprocal edges are swapped in pairs (``A->A`` with ``B->B`` against
    ``A->B`` with ``B->A``) and reciprocal pairs likewise (``A<->A`` with
    ``B<->B`` against two ``A<->B`` pairs). The reciprocity class used in a
    step is drawn in proportion to its share of edges. Steps repeat until the
    homophily of group A first crosses the target.
    """
    is_a = g.is_a.tolist()
    dg = _Digraph(g)
    rnd = _py_random(rng)
    out = dg.out
    n = g.n_nodes
    n_a = sum(is_a)
    p_b = (n - n_a) / n
    if p_b == 0 or n_a == 0:
        raise InfeasibleTargetError("both groups must be nonempty")

    # irreciprocal bags keyed by (src is A, dst is A); reciprocal pairs by
    # number of A endpoints, stored with the A endpoint first for mixed pairs
    irr = {(x, y): _Bag() for x in (True, False) for y in (True, False)}
    rec = {2: _Bag(), 1: _Bag(), 0: _Bag()}
    out_a = 0
    x_ab = 0
    for u, v in dg.edges():
        au, av = is_a[u], is_a[v]
        if au:
            out_a += 1
            if not av:
                x_ab += 1
        if u in out[v]:
            if u < v:
                cnt = au + av
                rec[cnt].add((u, v) if (cnt != 1 or au) else (v, u))
        else:
            irr[(au, av)].add((u, v))
    if out_a == 0:
        raise InfeasibleTargetError("group A has no outgoing edges")

    def h_of(x: int) -> float:
        return 1.0 - (x / out_a) / p_b

    e_dir = sum(len(b) for b in irr.values())
    e_rec = 2 * sum(len(b) for b in rec.values())
    h = h_of(x_ab)
    decreasing = h > homophily_target
    fails = steps = 0

    def linked(u: int, v: int) -> bool:
        return v in out[u] or u in out[v]

    while (h > homophily_target) if decreasing else (h < homophily_target):
        use_rec = rnd.random() * (e_dir + e_rec) < e_rec
        if decreasing:
            bags_irr = (irr[(True, True)], irr[(False, False)])
            bags_rec = (rec[2], rec[0])
        else:
            bags_irr = (irr[(True, False)], irr[(False, True)])
            bags_rec = (rec[1], rec[1])
        if use_rec and (not bags_rec[0] or not bags_rec[1]):
            use_rec = False
        if not use_rec and (not bags_irr[0] or not bags_irr[1]):
            use_rec = bool(bags_rec[0]) and bool(bags_rec[1])
            if not use_rec:
                raise InfeasibleTargetError("homophily target unreachable: no edges left to rewire")
        ok = False
        if not use_rec:
            if decreasing:
                # i->k (A->A), l->j (B->B)  =>  i->j (A->B), l->k (B->A)
                i, k = bags_irr[0].choice(rnd)
                l, j = bags_irr[1].choice(rnd)
                if not linked(i, j) and not linked(l, k):
                    dg.remove(i, k)
                    dg.remove(l, j)
                    dg.add(i, j)
                    dg.add(l, k)
                    irr[(True, True)].discard((i, k))
                    irr[(False, False)].discard((l, j))
                    irr[(True, False)].add((i, j))
                    irr[(False, True)].add((l, k))
                    x_ab += 1
                    ok = True
            else:
                # i->j (A->B), l->k (B->A)  =>  i->k (A->A), l->j (B->B)
                i, j = bags_irr[0].choice(rnd)
                l, k = bags_irr[1].choice(rnd)
                if i != k and l != j and not linked(i, k) and not linked(l, j):
                    dg.remove(i, j)
                    dg.remove(l, k)
                    dg.add(i, k)
                    dg.add(l, j)
                    irr[(True, False)].discard((i, j))
                    irr[(False, True)].discard((l, k))
                    irr[(True, True)].add((i, k))
                    irr[(False, False)].add((l, j))
                    x_ab -= 1
                    ok = True
        else:
            if decreasing:
                # i<->k (A,A), l<->j (B,B)  =>  i<->j, k<->l
                i, k = bags_rec[0].choice(rnd)
                l, j = bags_rec[1].choice(rnd)
                if not linked(i, j) and not linked(k, l):
                    for u, v in ((i, k), (l, j)):
                        dg.remove(u, v)
                        dg.remove(v, u)
                    for u, v in ((i, j), (k, l)):
                        dg.add(u, v)
                        dg.add(v, u)
                    rec[2].discard((i, k))
                    rec[0].discard((l, j))
                    rec[1].add((i, j))
                    rec[1].add((k, l))
                    x_ab += 2
                    ok = True
            else:
                # i<->j (A,B), k<->l (A,B)  =>  i<->k (A,A), j<->l (B,B)
                i, j = bags_rec[0].choice(rnd)
                k, l = bags_rec[1].choice(rnd)
                if i != k and j != l and not linked(i, k) and not linked(j, l):
                    for u, v in ((i, j), (k, l)):
                        dg.remove(u, v)
                        dg.remove(v, u)
                    for u, v in ((i, k), (j, l)):
                        dg.add(u, v)
                        dg.add(v, u)
                    rec[1].discard((i, j))
                    rec[1].discard((k, l))
                    rec[2].add((min(i, k), max(i, k)))
                    rec[0].add((min(j, l), max(j, l)))
                    x_ab -= 2
                    ok = True
        if ok:
            fails = 0
            steps += 1
            h = h_of(x_ab)
        else:
            fails += 1
            _check_failures(fails, "rewire_homophily")
    if stats is not None:
        stats["steps"] = steps
    return dg.to_graph(g.is_a)


# -- indegree assortativity ---------------------------------------------------------------


def rewire_assortativity_net3(
    g: DirectedGraph,
    assortativity_target: float,
    rng: np.random.Generator,
    tol: float = 0.02,
    max_attempts: int | None = None,
    stats: dict | None = None,
) -> DirectedGraph:
    """Raise indegree assortativity by swapping targets of same-trait nodes.

    Two edges ``i -> j`` and ``k -> l`` with ``j`` and ``l`` sharing a trait
    are rewired to ``i -> l`` and ``k -> j`` when ``i`` and ``l`` hold the two
    largest or the two smallest indegrees of the four nodes. Degrees and the
    cross-group edge counts are unchanged and assortativity never decreases.
    """
    current = indegree_assortativity(g)
    if assortativity_target < current - tol:
        raise InfeasibleTargetError(
            f"target {assortativity_target} is below current assortativity {current:.4f}; "
            "the procedure only increases it"
        )
    if stats is not None:
        stats["steps"] = 0
    if current >= assortativity_target:
        return g
    is_a = g.is_a.tolist()
    din = g.in_degree.tolist()
    dg = _Digraph(g)
    out = dg.out
    rnd = _py_random(rng)
    edges = list(zip(g.src.tolist(), g.dst.tolist()))
    pos = {e: idx for idx, e in enumerate(edges)}
    e = len(edges)
    dinf = g.in_degree.astype(np.float64)
    j_arr = dinf[g.src]
    k_arr = dinf[g.dst]
    mean = float(np.sum(0.5 * (j_arr + k_arr))) / e
    den = float(np.sum(0.5 * (j_arr**2 + k_arr**2))) / e - mean * mean
    cross = int(np.sum(j_arr * k_arr))
    goal_cross = (assortativity_target * den + mean * mean) * e
    budget = max_attempts if max_attempts is not None else 2000 * e
    attempts = 0
    while cross < goal_cross:
        attempts += 1
        if attempts > budget:
            raise InfeasibleTargetError(
                f"assortativity target {assortativity_target} not reached after {budget} attempts"
            )
        p = int(rnd.random() * e)
        q = int(rnd.random() * e)
        if p == q:
            continue
        i, j = edges[p]
        k, l = edges[q]
        if j == l or is_a[j] != is_a[l] or i == l or k == j:
            continue
        di, dj, dk, dl = din[i], din[j], din[k], din[l]
        lo, hi = min(dj, dk), max(dj, dk)
        if not ((di >= hi and dl >= hi) or (di <= lo and dl <= lo)):
            continue
        gain = (di - dk) * (dl - dj)
        if gain <= 0 or l in out[i] or j in out[k]:
            continue
        dg.remove(i, j)
        dg.remove(k, l)
        dg.add(i, l)
        dg.add(k, j)
        del pos[(i, j)], pos[(k, l)]
        edges[p] = (i, l)
        edges[q] = (k, j)
        pos[(i, l)] = p
        pos[(k, j)] = q
        cross += gain
        if stats is not None:
            stats["steps"] += 1
    return dg.to_graph(g.is_a)


# -- pipelines ----------------------------------------------------------------------------


def _attempt(target: GenTarget, rng: np.random.Generator) -> DirectedGraph | None:
    n, d = target.node_count, target.mean_degree
    lam = target.directedness_target
    if target.family == "Net1":
        if lam == 0.0:
            g = gen_random_undirected(n, d, rng)
        else:
            g = gen_random_directed(n, d, rng)
            # degrees are preserved from here on, so an unreachable node is final
            if g.in_degree.min() == 0 or g.out_degree.min() == 0:
                return None
            if lam < 1.0:
                try:
                    g = reduce_directedness_net1(g, lam, rng)
                except InfeasibleTargetError as exc:
                    # stall points vary by realisation; a fresh draw usually gets through
                    logger.info("%s; restarting", exc)
                    return None
        if not is_strongly_connected(g):
            return None
        return assign_traits_attractivity(g, target.proportion_a, target.attractivity_target, rng)

    g = gen_random_undirected(n, d, rng)
    if lam > 0.0:
        g = increase_directedness_net2(g, lam, rng)
    if g.in_degree.min() == 0 or g.out_degree.min() == 0:
        return None
    g = assign_traits_attractivity(g, target.proportion_a, target.attractivity_target, rng)
    if target.homophily_target is not None:
        g = rewire_homophily(g, target.homophily_target, rng)
    if target.family == "Net3":
        g = rewire_assortativity_net3(g, target.assortativity_target, rng)
    if not is_strongly_connected(g):
        return None
    return g


def generate(target: GenTarget) -> DirectedGraph:
    """Build the network described by ``target``; deterministic in ``rng_seed``."""
    for attempt in range(target.max_restarts):
        ss = np.random.SeedSequence(target.rng_seed, spawn_key=(attempt,))
        g = _attempt(target, np.random.Generator(np.random.PCG64(ss)))
        if g is not None:
            if attempt:
                logger.info("generation succeeded after %d restart(s)", attempt)
            return g
        logger.info("generation attempt %d rejected; restarting", attempt + 1)
    raise GenerationError(f"no acceptable network after {target.max_restarts} attempts")
