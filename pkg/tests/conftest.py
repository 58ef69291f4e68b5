import io

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from rds_lab.graph import DirectedGraph, load_graph

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def graph_from(edges, traits=None, n=None):
    """Build a graph from ``[(u, v), ...]`` and an optional ``"AAB..."`` trait string."""
    if n is None:
        n = 1 + max(max(u, v) for u, v in edges)
    src = np.array([u for u, _ in edges], dtype=np.int64)
    dst = np.array([v for _, v in edges], dtype=np.int64)
    is_a = None if traits is None else np.array([c == "A" for c in traits], dtype=bool)
    return DirectedGraph(n, src, dst, is_a)


def parse(edge_text, trait_text):
    return load_graph(io.StringIO(edge_text), io.StringIO(trait_text))


def cycle(n, traits=None):
    return graph_from([(i, (i + 1) % n) for i in range(n)], traits)


def undirected(pairs, traits=None, n=None):
    return graph_from([e for u, v in pairs for e in ((u, v), (v, u))], traits, n)


@st.composite
def strong_graphs(draw, min_nodes=3, max_nodes=25, traited=True, both_groups=True):
    """Strongly connected simple digraphs: a random Hamiltonian cycle plus random extra edges."""
    n = draw(st.integers(min_nodes, max_nodes))
    perm = draw(st.permutations(range(n)))
    edges = {(perm[i], perm[(i + 1) % n]) for i in range(n)}
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=4 * n))
    edges |= {(u, v) for u, v in extra if u != v}
    is_a = None
    if traited:
        bits = draw(st.lists(st.booleans(), min_size=n, max_size=n))
        if both_groups:
            bits[0], bits[1] = True, False
        is_a = np.array(bits, dtype=bool)
    edges = sorted(edges)
    return DirectedGraph(
        n, np.array([u for u, _ in edges]), np.array([v for _, v in edges]), is_a
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def sample_from(rows, with_in=True):
    """RdsSample from ``(respondent, recruiter, wave, out_degree, in_degree, trait)`` tuples."""
    from rds_lab.sampling import RdsSample

    cols = list(zip(*rows))
    return RdsSample(
        respondent=np.array(cols[0], dtype=np.int64),
        recruiter=np.array(cols[1], dtype=np.int64),
        wave=np.array(cols[2], dtype=np.int64),
        out_degree=np.array(cols[3], dtype=np.int64),
        in_degree=np.array(cols[4], dtype=np.int64) if with_in else None,
        is_a=np.array([t == "A" for t in cols[5]], dtype=bool),
    )


def chain_sample(traits, out_degrees=None, in_degrees=None):
    """A single recruitment chain with the given trait string and degrees."""
    n = len(traits)
    out_degrees = out_degrees or [1] * n
    in_degrees = in_degrees or [1] * n
    rows = [(i, i - 1 if i else -1, i, out_degrees[i], in_degrees[i], traits[i]) for i in range(n)]
    return sample_from(rows)


@st.composite
def chain_samples(draw, min_size=4, max_size=60, max_degree=30):
    """Chains containing both traits and at least one recruitment out of each group."""
    n = draw(st.integers(min_size, max_size))
    traits = draw(st.lists(st.sampled_from("AB"), min_size=n, max_size=n))
    traits[:4] = list("AABB")
    d_out = draw(st.lists(st.integers(1, max_degree), min_size=n, max_size=n))
    d_in = draw(st.lists(st.integers(1, max_degree), min_size=n, max_size=n))
    return chain_sample("".join(traits), d_out, d_in)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
