import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from rds_lab.errors import GenerationError, InfeasibleTargetError
from rds_lab.graph import (
    directedness,
    group_degree_ratios,
    homophily,
    in_out_correlation,
    indegree_assortativity,
    is_strongly_connected,
)
from rds_lab.netgen import (
    GenTarget,
    assign_traits_attractivity,
    gen_random_directed,
    gen_random_undirected,
    generate,
    increase_directedness_net2,
    reduce_directedness_net1,
    rewire_assortativity_net3,
    rewire_homophily,
)


def degree_pairs(g):
    return np.stack([g.in_degree, g.out_degree])


@pytest.fixture(scope="module")
def net1_base():
    return gen_random_directed(10000, 10, np.random.default_rng(21))


@pytest.fixture(scope="module")
def und_base():
    return gen_random_undirected(10000, 10, np.random.default_rng(22))


class TestGenTarget:
    def test_net1_gap_rejected(self):
        with pytest.raises(ValueError):
            GenTarget("Net1", 100, 4, 0.1)

    def test_net3_needs_assortativity(self):
        with pytest.raises(ValueError):
            GenTarget("Net3", 100, 4, 0.5)

    def test_pairs_need_even_product(self):
        with pytest.raises(ValueError):
            GenTarget("Net2", 101, 3, 0.5)

    def test_proportion_bounds(self):
        with pytest.raises(ValueError):
            GenTarget("Net1", 100, 4, 1.0, proportion_a=1.0)


class TestRandomDirected:
    def test_contract(self, net1_base):
        g = net1_base
        assert g.n_edges == 100000
        assert directedness(g) == 1.0
        assert abs(in_out_correlation(g)) < 0.05

    def test_infeasible_density(self, rng):
        with pytest.raises(InfeasibleTargetError):
            gen_random_directed(3, 2, rng)

    def test_three_nodes_one_each(self, rng):
        g = gen_random_directed(3, 1, rng)
        assert g.n_edges == 3 and directedness(g) == 1.0


class TestRandomUndirected:
    def test_contract(self, und_base):
        g = und_base
        assert g.n_edges == 100000
        assert directedness(g) == 0.0
        assert np.array_equal(g.in_degree, g.out_degree)
        assert in_out_correlation(g) == pytest.approx(1.0)

    def test_poisson_degree_histogram(self, und_base):
        d = und_base.out_degree
        k = np.arange(3, 18)
        observed = np.array([np.sum(d == x) for x in k] + [np.sum((d < 3) | (d >= 18))])
        p = stats.poisson.pmf(k, 10)
        expected = np.append(p, 1 - p.sum()) * d.size
        assert stats.chisquare(observed, expected).pvalue > 1e-3

    def test_infeasible(self, rng):
        with pytest.raises(InfeasibleTargetError):
            gen_random_undirected(4, 4, rng)


class TestNet1Reciprocation:
    def test_target_one_is_identity(self, rng):
        g = gen_random_directed(200, 4, rng)
        assert reduce_directedness_net1(g, 1.0, rng) == g

    def test_floor_target(self, net1_base):
        rng = np.random.default_rng(5)
        stats_ = {}
        h = reduce_directedness_net1(net1_base, 0.2, rng, stats=stats_)
        assert abs(directedness(h) - 0.2) <= 0.005
        assert np.array_equal(degree_pairs(h), degree_pairs(net1_base))
        assert stats_["steps"] > 10_000

    def test_below_floor_rejected(self, rng):
        g = gen_random_directed(100, 4, rng)
        with pytest.raises(InfeasibleTargetError):
            reduce_directedness_net1(g, 0.1, rng)

    @given(st.integers(0, 2**32 - 1), st.floats(0.3, 0.95))
    @settings(max_examples=25)
    def test_small_instances_preserve_every_degree(self, seed, target):
        rng = np.random.default_rng(seed)
        g = gen_random_directed(40, 4, rng)
        try:
            h = reduce_directedness_net1(g, target, rng)
        except InfeasibleTargetError:
            return
        assert np.array_equal(degree_pairs(h), degree_pairs(g))
        # a stalled run may stop short of the target, but only within the default tolerance
        assert directedness(h) <= target + 0.005 + 1e-12

    def test_single_step_on_ten_nodes(self):
        rng = np.random.default_rng(0)
        g = gen_random_directed(10, 2, rng)
        e = g.n_edges
        # the smallest target above the current value forces exactly one rewire
        st_ = {}
        h = reduce_directedness_net1(g, 1.0 - 1.0 / e, rng, stats=st_)
        assert st_["steps"] == 1
        assert sorted(zip(h.in_degree, h.out_degree)) == sorted(zip(g.in_degree, g.out_degree))
        assert np.array_equal(degree_pairs(h), degree_pairs(g))


class TestNet2Directedness:
    def test_zero_target_no_change(self, rng):
        g = gen_random_undirected(100, 4, rng)
        assert increase_directedness_net2(g, 0.0, rng) == g

    def test_large_contract(self, und_base):
        h = increase_directedness_net2(und_base, 0.6, np.random.default_rng(9))
        assert abs(directedness(h) - 0.6) <= 0.005
        assert h.n_edges == und_base.n_edges
        assert in_out_correlation(h) == pytest.approx(0.4, abs=0.05)

    @given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.9))
    @settings(max_examples=25)
    def test_edge_count_preserved(self, seed, target):
        rng = np.random.default_rng(seed)
        g = gen_random_undirected(60, 4, rng)
        h = increase_directedness_net2(g, target, rng)
        assert h.n_edges == g.n_edges
        assert abs(directedness(h) - target) <= 2 / g.n_edges + 1e-12


class TestTraits:
    def test_count_and_ratio(self, net1_base):
        g = assign_traits_attractivity(net1_base, 0.7, 1.4, np.random.default_rng(1))
        assert g.is_a.sum() == 7000
        assert group_degree_ratios(g)[0] == pytest.approx(1.4, abs=0.01)
        assert np.array_equal(g.edges(), net1_base.edges())

    def test_unit_target(self, net1_base):
        g = assign_traits_attractivity(net1_base, 0.7, 1.0, np.random.default_rng(2))
        assert group_degree_ratios(g)[0] == pytest.approx(1.0, abs=0.01)

    @given(st.integers(0, 2**32 - 1), st.floats(0.2, 0.8))
    @settings(max_examples=20)
    def test_group_sizes_exact(self, seed, p):
        rng = np.random.default_rng(seed)
        g = gen_random_directed(200, 6, rng)
        try:
            h = assign_traits_attractivity(g, p, 1.1, rng)
        except InfeasibleTargetError:
            return
        assert h.is_a.sum() == int(np.floor(200 * p))

    def test_unreachable_ratio(self, rng):
        g = gen_random_undirected(200, 4, rng)
        with pytest.raises(InfeasibleTargetError):
            assign_traits_attractivity(g, 0.5, 20.0, rng)


class TestHomophilyRewire:
    def test_contract(self, und_base):
        rng = np.random.default_rng(4)
        g = increase_directedness_net2(und_base, 0.5, rng)
        g = assign_traits_attractivity(g, 0.7, 1.2, rng)
        lam = directedness(g)
        h = rewire_homophily(g, 0.4, rng)
        assert homophily(h) == pytest.approx(0.4, abs=0.02)
        assert directedness(h) == pytest.approx(lam, abs=1e-12)
        assert np.array_equal(degree_pairs(h), degree_pairs(g))
        assert np.array_equal(h.is_a, g.is_a)

    def test_current_value_no_change(self, rng):
        g = assign_traits_attractivity(gen_random_undirected(200, 6, rng), 0.5, 1.0, rng)
        assert rewire_homophily(g, homophily(g), rng) == g

    @given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.5), st.floats(0.0, 0.8))
    @settings(max_examples=20)
    def test_preserves_degrees_and_reciprocity(self, seed, target, lam):
        rng = np.random.default_rng(seed)
        g = increase_directedness_net2(gen_random_undirected(300, 6, rng), lam, rng)
        g = g.with_traits(rng.permutation(300) < 150)
        try:
            h = rewire_homophily(g, target, rng)
        except InfeasibleTargetError:
            return
        assert np.array_equal(degree_pairs(h), degree_pairs(g))
        assert directedness(h) == directedness(g)
        assert abs(homophily(h) - target) <= 0.02


class TestNet3:
    def _base(self, n=2000, seed=3):
        rng = np.random.default_rng(seed)
        g = increase_directedness_net2(gen_random_undirected(n, 10, rng), 0.5, rng)
        return assign_traits_attractivity(g, 0.7, 1.2, rng), rng

    def test_reaches_target_and_keeps_homophily(self):
        g, rng = self._base()
        h = rewire_assortativity_net3(g, 0.3, rng)
        assert indegree_assortativity(h) == pytest.approx(0.3, abs=0.02)
        assert homophily(h) == pytest.approx(homophily(g), abs=1e-9)
        assert np.array_equal(degree_pairs(h), degree_pairs(g))

    def test_two_hundred_nodes_homophily_exact(self):
        g, rng = self._base(200, 8)
        h = rewire_assortativity_net3(g, indegree_assortativity(g) + 0.1, rng)
        assert homophily(h) == pytest.approx(homophily(g), abs=1e-9)

    def test_current_target_no_change(self):
        g, rng = self._base(300, 1)
        assert rewire_assortativity_net3(g, indegree_assortativity(g), rng) == g

    def test_monotonicity(self):
        g, rng = self._base(300, 1)
        with pytest.raises(InfeasibleTargetError, match="only increases"):
            rewire_assortativity_net3(g, indegree_assortativity(g) - 0.2, rng)


class TestGenerate:
    def test_deterministic(self):
        t = GenTarget("Net2", 500, 6, 0.4, 1.1, homophily_target=0.2, rng_seed=77)
        a, b = generate(t), generate(t)
        assert a == b and np.array_equal(a.is_a, b.is_a)

    def test_seed_changes_output(self):
        a = generate(GenTarget("Net1", 500, 10, 0.6, 1.2, rng_seed=1))
        b = generate(GenTarget("Net1", 500, 10, 0.6, 1.2, rng_seed=2))
        assert a != b

    @pytest.mark.parametrize("family,lam", [("Net1", 0.0), ("Net1", 0.5), ("Net2", 0.3), ("Net1", 1.0)])
    def test_outputs_strongly_connected(self, family, lam):
        g = generate(GenTarget(family, 1000, 10, lam, 1.2, rng_seed=4))
        assert is_strongly_connected(g)

    def test_restart_budget(self):
        # at mean degree 1 almost every draw leaves a node without out-edges
        with pytest.raises(GenerationError):
            generate(GenTarget("Net1", 500, 1, 1.0, 1.0, max_restarts=2))
