import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqlearn import (GenSpec, classify, gen_almost_tree, gen_butterfly, gen_lower_bound_instance, gen_multitree,
                     gen_rooted_tree, gen_undirected_tree)
from pqlearn.exceptions import InfeasibleSpec
from pqlearn.generators import _cross_edge_ok, _tree_ancestry, butterfly_height, max_tree_size
from pqlearn.graph import arborescence_metrics

from conftest import brute_reduction, count_paths, roots_of


def _shape(g):
    return sorted(len(g.out_adj[v]) for v in range(g.n)), sorted(len(g.in_adj[v]) for v in range(g.n))


class TestRootedTree:
    def test_star_and_path_shapes(self):
        star = gen_rooted_tree(GenSpec(n=4, d=3, h=1))
        assert _shape(star) == ([0, 0, 0, 3], [0, 1, 1, 1])
        path = gen_rooted_tree(GenSpec(n=4, d=2, h=3))
        assert classify(path).height == 3 and max(len(a) for a in path.out_adj) == 1

    def test_classified(self):
        rep = classify(gen_rooted_tree(GenSpec(n=100, d=4, h=7, seed=1)))
        assert rep.is_arborescence and rep.height == 7 and rep.max_degree <= 4

    def test_infeasible(self):
        with pytest.raises(InfeasibleSpec):
            gen_rooted_tree(GenSpec(n=20, d=3, h=2))
        with pytest.raises(InfeasibleSpec):
            gen_rooted_tree(GenSpec(n=3, d=3, h=5))
        with pytest.raises(InfeasibleSpec):
            gen_rooted_tree(GenSpec(n=8, d=3, h=3), attach="sideways")

    def test_max_tree_size(self):
        # root has d children, every other internal vertex d - 1
        assert [max_tree_size(3, h) for h in range(4)] == [1, 4, 10, 22]
        assert max_tree_size(2, 5) == 11
        gen_rooted_tree(GenSpec(n=22, d=3, h=3))

    def test_deep_attachment_packs_depth(self):
        spec = GenSpec(n=1024, d=3, h=16, seed=3)
        avg = {}
        for rule in ("uniform", "deep"):
            g = gen_rooted_tree(spec, attach=rule)
            r = roots_of(g)[0]
            met = arborescence_metrics(g.edges, r)
            assert max(met.depth.values()) == 16
            avg[rule] = np.mean(list(met.depth.values()))
        assert avg["deep"] > 12 > avg["uniform"]

    @given(st.integers(1, 200), st.integers(2, 4), st.integers(1, 12), st.integers(0, 10**6),
           st.sampled_from(["uniform", "deep"]))
    @settings(max_examples=80, deadline=None)
    def test_any_feasible_spec(self, n, d, h, seed, rule):
        if not h + 1 <= n <= max_tree_size(d, h):
            return
        g = gen_rooted_tree(GenSpec(n=n, d=d, h=h, seed=seed), attach=rule)
        rep = classify(g)
        assert rep.is_arborescence and rep.height == h and rep.max_degree <= d and g.n == n


class TestMultitree:
    def test_single_root_is_arborescence(self):
        assert classify(gen_multitree(GenSpec(n=30, d=3, h=4, a=1, seed=2))).is_arborescence

    def test_all_roots_no_edges(self):
        g = gen_multitree(GenSpec(n=5, d=3, h=1, a=5))
        assert g.m == 0 and classify(g).is_multitree

    def test_classified(self):
        g = gen_multitree(GenSpec(n=60, d=4, a=3, seed=7))
        rep = classify(g)
        assert rep.is_multitree and len(rep.roots) == 3 and rep.max_degree <= 4
        assert (count_paths(g.n, g.edges) <= 1).all()

    def test_merge_edges_added(self):
        g = gen_multitree(GenSpec(n=80, d=4, h=5, a=3, seed=1))
        assert g.m > g.n - 3
        assert classify(g).max_root_paths >= 2


class TestButterfly:
    @pytest.mark.parametrize("h,n,m", [(0, 1, 0), (1, 4, 4), (2, 12, 16), (3, 32, 48), (4, 80, 128)])
    def test_sizes(self, h, n, m):
        g = gen_butterfly(h)
        assert (g.n, g.m) == (n, m)
        assert butterfly_height(n) == h

    def test_f2_class(self):
        rep = classify(gen_butterfly(2, seed=5))
        assert rep.is_multitree and len(rep.roots) == 4 and rep.max_degree == 4

    @pytest.mark.parametrize("h", [1, 2, 3, 4])
    def test_paths_unique(self, h):
        g = gen_butterfly(h, seed=h)
        assert count_paths(g.n, g.edges).max() <= 1

    def test_bad_cardinality(self):
        with pytest.raises(InfeasibleSpec):
            butterfly_height(13)


class TestAlmostTree:
    def test_cross_edge_rule(self):
        # r=0 -> a=1, r -> b=2, a -> c=3
        edges = [(0, 1), (0, 2), (1, 3)]
        parent, tin, tout = _tree_ancestry(4, edges, 0)
        deg = [2, 2, 1, 1]
        assert _cross_edge_ok(2, 3, parent, tin, tout, deg, 3)
        assert not _cross_edge_ok(0, 3, parent, tin, tout, deg, 3)  # would be transitive

    def test_classified(self):
        rep = classify(gen_almost_tree(GenSpec(n=64, d=3, h=6, seed=0)))
        assert rep.is_almost_tree and rep.max_degree <= 3 and not rep.has_transitive_edge

    def test_too_small(self):
        with pytest.raises(InfeasibleSpec):
            gen_almost_tree(GenSpec(n=3, d=3, h=1))


class TestLowerBound:
    def test_small_instance(self):
        g = gen_lower_bound_instance(20, 2, 3, seed=0)
        rep = classify(g)
        assert rep.is_almost_tree and g.n == 20 and rep.height >= 3

    def test_size_arithmetic(self):
        n, d, h = 60, 3, 6
        g = gen_lower_bound_instance(n, d, h, caterpillar_fraction=0.5)
        legs = min(max(1, round(0.5 * n) - (h + 1)), max(1, d - 2) * h)
        assert g.n == (h + 1) + legs + (n - (h + 1) - legs)

    def test_too_small(self):
        with pytest.raises(InfeasibleSpec):
            gen_lower_bound_instance(5, 2, 6)


def test_undirected_tree():
    edges = gen_undirected_tree(50, 3, seed=4)
    assert len(edges) == 49
    deg = np.bincount(np.array(edges).ravel(), minlength=50)
    assert deg.max() <= 3 and deg.min() >= 1


@pytest.mark.parametrize("make", [
    lambda s: gen_rooted_tree(GenSpec(n=40, d=3, h=6, seed=s)),
    lambda s: gen_almost_tree(GenSpec(n=40, d=3, h=6, seed=s)),
    lambda s: gen_multitree(GenSpec(n=40, d=3, h=4, a=3, seed=s)),
    lambda s: gen_butterfly(3, seed=s),
    lambda s: gen_lower_bound_instance(40, 3, 5, seed=s),
])
def test_deterministic_and_reduced(make):
    for seed in range(25):
        g = make(seed)
        assert make(seed) == g
        assert brute_reduction(g.n, g.edges) == set(g.edges)


def test_labels_do_not_leak_structure():
    roots = {roots_of(gen_rooted_tree(GenSpec(n=50, d=3, h=8, seed=s)))[0] for s in range(20)}
    assert len(roots) > 10
