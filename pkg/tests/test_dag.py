from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings

from pqlearn import (Digraph, GenSpec, LearnerConfig, PathOracle, SplitTrace, bernoulli_sample, build_reachability,
                     filter_separator, gen_almost_tree, gen_butterfly, gen_lower_bound_instance, gen_multitree,
                     gen_rooted_tree, is_even_separator, learn_almost_tree, learn_cross_edge, learn_parent,
                     learn_root, learn_separator, learn_spanning_tree, min_chain_cover)
from pqlearn.exceptions import NoCrossEdgeFound, NoParent, PQLError, PreconditionError

from conftest import random_dags, reach_matrix, roots_of

PATH4 = Digraph(4, [(0, 1), (1, 2), (2, 3)])  # r -> a -> b -> c
AT4 = Digraph(4, [(0, 1), (0, 2), (1, 3), (2, 3)])  # r=0, a=1, b=2, c=3, cross edge (b, c)


class TestConfig:
    def test_c1_bound(self):
        with pytest.raises(PreconditionError):
            LearnerConfig(C1=5.5)
        LearnerConfig(C1=5.6)

    def test_base_case_bound(self):
        with pytest.raises(PreconditionError):
            LearnerConfig(d=20, g_base=10)
        assert LearnerConfig(d=20).g_base == 22

    def test_probe_count(self):
        cfg = LearnerConfig(C2=24.0)
        assert cfg.probes(1) == cfg.probes(2) >= 1
        assert cfg.probes(1000) == round(24 * np.log(1000))


class TestBernoulli:
    def test_clamps_and_empty(self):
        rng = np.random.default_rng(0)
        Y = np.arange(10)
        assert np.array_equal(bernoulli_sample(Y, 10, rng), Y)
        assert bernoulli_sample([], 5, rng).size == 0

    def test_mean_size(self):
        rng = np.random.default_rng(1)
        Y, m, trials = np.arange(1000), 100.0, 10_000
        sizes = np.array([bernoulli_sample(Y, m, rng).size for _ in range(trials)])
        sigma = np.sqrt(1000 * 0.1 * 0.9)
        assert abs(sizes.mean() - m) <= 3 * sigma / np.sqrt(trials)
        assert abs(sizes.std() - sigma) < 0.5


class TestRootAndParent:
    def test_path_root(self):
        for seed in range(20):
            assert learn_root(range(4), PathOracle(PATH4), LearnerConfig(seed=seed)) == 0

    def test_almost_tree_root(self):
        assert learn_root(range(4), PathOracle(AT4), LearnerConfig()) == 0

    def test_two_root_multitree(self):
        g = gen_multitree(GenSpec(n=120, d=3, h=6, a=2, seed=3))
        roots = set(roots_of(g))
        for seed in range(200):
            assert learn_root(range(g.n), PathOracle(g), LearnerConfig(seed=seed)) in roots

    def test_root_large_tree_uses_few_rounds(self):
        g = gen_rooted_tree(GenSpec(n=2048, d=3, h=40, seed=1))
        o = PathOracle(g)
        assert learn_root(range(g.n), o, LearnerConfig(seed=1)) == roots_of(g)[0]
        assert o.ledger.rounds <= 2 + 2 * LearnerConfig().eps_cap

    def test_parent(self):
        assert learn_parent(2, range(4), PathOracle(PATH4), LearnerConfig()) == 1
        assert learn_parent(3, range(4), PathOracle(AT4), LearnerConfig()) in (1, 2)
        with pytest.raises(NoParent):
            learn_parent(0, range(4), PathOracle(PATH4), LearnerConfig())

    def test_parent_in_large_graph(self):
        g = gen_almost_tree(GenSpec(n=1024, d=3, h=30, seed=5))
        rng = np.random.default_rng(0)
        for v in rng.choice([v for v in range(g.n) if g.in_adj[v]], size=30, replace=False):
            assert learn_parent(int(v), range(g.n), PathOracle(g), LearnerConfig(seed=int(v))) in g.in_adj[v]


class TestSeparators:
    def test_even_separator_arithmetic(self):
        reach = build_reachability(PATH4).reach
        assert is_even_separator(1, range(4), reach, 2)
        assert not is_even_separator(0, range(4), reach, 2)
        assert is_even_separator(0, range(4), reach, 2, tolerance=1)

    def test_near_separator_exists(self):
        for seed in range(20):
            g = gen_rooted_tree(GenSpec(n=50, d=3, h=8, seed=seed))
            counts = build_reachability(g).reach.sum(axis=1) + 1
            assert ((counts >= 50 / 5) & (counts <= 50 * 4 / 5)).any()

    @given(random_dags(max_n=9))
    @settings(max_examples=80, deadline=None)
    def test_chain_cover_is_minimum(self, dag):
        n, edges = dag
        order = reach_matrix(n, edges)
        chains = min_chain_cover(order)
        assert sorted(i for c in chains for i in c) == list(range(n))
        assert all(order[a, b] for c in chains for a, b in zip(c, c[1:]))
        # Dilworth: minimum cover size equals the largest antichain
        width = max((k for k in range(1, n + 1) for sub in combinations(range(n), k)
                     if not order[np.ix_(sub, sub)].any()), default=0)
        assert len(chains) == width

    def test_filter_keeps_mid_range(self):
        o = PathOracle(PATH4)
        cfg = LearnerConfig(d=2)
        Y = np.arange(4)
        out = filter_separator(Y, np.array([5, 5, 5, 5]), Y, Y, o, cfg, K=10)
        assert np.array_equal(out, Y) and o.ledger.queries == 12  # only the pairwise order

    def test_filter_cuts_outside_the_interval(self):
        # path 0..5; sampled chain r=0 < x=1 < y=3 < v=5, counts (high, high, low, low)
        g = Digraph(6, [(i, i + 1) for i in range(5)])
        S = np.array([0, 1, 3, 5])
        V = np.arange(6)
        out = filter_separator(S, np.array([10, 10, 0, 0]), V, V, PathOracle(g), LearnerConfig(d=2), K=10)
        assert out.tolist() == [2]

    def test_filter_never_drops_even_separators_on_a_path(self):
        n = 64
        g = Digraph(n, [(i, i + 1) for i in range(n - 1)])
        reach = build_reachability(g).reach
        cfg = LearnerConfig(d=2)
        V = np.arange(n)
        shrunk = 0
        for seed in range(30):
            rng = np.random.default_rng(seed)
            K = cfg.probes(n)
            S = np.sort(bernoulli_sample(V, cfg.sample_size(n), rng))
            cnt = reach[S][:, rng.choice(V, size=K)].sum(axis=1)
            out = filter_separator(S, cnt, V, V, PathOracle(g), cfg, K)
            shrunk += out.size < n
            evens = [v for v in V if is_even_separator(v, V, reach, 2, tolerance=1)]
            assert set(evens) <= set(out.tolist())
        assert shrunk == 30

    def test_separator_search(self):
        cfg = LearnerConfig(d=2)
        V = np.arange(4)
        for seed in range(50):
            w = learn_separator(3, V, V, 0, PathOracle(PATH4), cfg, np.random.default_rng(seed))
            if w is not None:
                size = int(build_reachability(PATH4).reach[w].sum()) + 1
                assert w in V and 4 / 4 <= size <= 4 * 3 / 4
        n = 64
        line = Digraph(n, [(i, i + 1) for i in range(n - 1)])
        assert learn_separator(0, [0], np.arange(n), 0, PathOracle(line), cfg) is None

    def test_separator_success_rate(self):
        n, cfg = 256, LearnerConfig(d=3)
        hits = conditioned = 0
        for seed in range(500):
            g = gen_rooted_tree(GenSpec(n=n, d=3, h=12, seed=seed), validate=False)
            reach = build_reachability(g).reach
            rng = np.random.default_rng(seed)
            v = int(rng.integers(n))
            Y = np.append(np.flatnonzero(reach[:, v]), v)
            sizes = reach[Y].sum(axis=1) + 1
            if not ((sizes >= n / 3) & (sizes <= 2 * n / 3)).any():
                continue
            conditioned += 1
            w = learn_separator(v, Y, np.arange(n), roots_of(g)[0], PathOracle(g), cfg, rng)
            if w is not None and n / 5 <= reach[w].sum() + 1 <= 4 * n / 5:
                hits += 1
        assert conditioned > 100 and hits / conditioned >= 0.9


class TestSpanningTree:
    def test_tree_is_learned_exactly(self):
        g = gen_rooted_tree(GenSpec(n=300, d=3, h=12, seed=2))
        r = roots_of(g)[0]
        assert learn_spanning_tree(range(g.n), r, PathOracle(g), LearnerConfig(seed=2)) == set(g.edges)

    @pytest.mark.parametrize("seed", range(5))
    def test_almost_tree_spanning_arborescence(self, seed):
        g = gen_almost_tree(GenSpec(n=400, d=3, h=14, seed=seed))
        r = roots_of(g)[0]
        trace = SplitTrace()
        arb = learn_spanning_tree(range(g.n), r, PathOracle(g), LearnerConfig(seed=seed), trace=trace)
        assert len(arb) == g.n - 1 and arb <= g.edges
        heads = [w for _, w in arb]
        assert len(set(heads)) == len(heads) and r not in heads
        assert reach_matrix(g.n, arb)[r].sum() == g.n - 1
        d = 3
        assert trace.splits and all(nv / (d + 2) <= k <= nv * (d + 1) / (d + 2) for _, nv, k in trace.splits)

    def test_butterfly_source_subtree(self):
        g = gen_butterfly(4, seed=1)
        reach = build_reachability(g).reach
        s = roots_of(g)[0]
        below = np.append(np.flatnonzero(reach[s]), s)
        tree = learn_spanning_tree(below, s, PathOracle(g).restrict(below), LearnerConfig(d=4, c_paths=1))
        assert tree == {(u, v) for u, v in g.edges if u in set(below.tolist())}


class TestCrossEdge:
    def test_at4(self):
        o = PathOracle(AT4)
        assert learn_cross_edge(range(4), {(0, 1), (0, 2), (1, 3)}, o) == (2, 3)
        # six probes in the first round, one in the second
        assert (o.ledger.queries, o.ledger.rounds) == (7, 2)

    def test_no_cross_edge(self):
        star = Digraph(4, [(0, 1), (0, 2), (0, 3)])
        with pytest.raises(NoCrossEdgeFound):
            learn_cross_edge(range(4), set(star.edges), PathOracle(star))

    @pytest.mark.parametrize("seed", range(10))
    def test_two_rounds(self, seed):
        g = gen_almost_tree(GenSpec(n=300, d=3, h=20, seed=seed))
        t = next(v for v in range(g.n) if len(g.in_adj[v]) == 2)
        for s in g.in_adj[t]:
            o = PathOracle(g)
            assert learn_cross_edge(range(g.n), set(g.edges) - {(s, t)}, o) == (s, t)
            assert o.ledger.rounds == 2


class TestAlmostTree:
    def test_at4(self):
        o = PathOracle(AT4)
        res = learn_almost_tree(range(4), o, LearnerConfig())
        assert res.edges == set(AT4.edges) and res.root == 0
        assert res.ledger.phases["cross_edge"]["rounds"] == 2

    def test_monte_carlo_512(self):
        ok = 0
        for seed in range(100):
            g = gen_almost_tree(GenSpec(n=512, d=3, h=16, seed=seed))
            try:
                ok += learn_almost_tree(range(g.n), PathOracle(g), LearnerConfig(seed=seed)).edges == g.edges
            except PQLError:
                pass
        assert ok >= 99

    def test_lower_bound_instance(self):
        g = gen_lower_bound_instance(200, 2, 6, seed=3)
        assert learn_almost_tree(range(g.n), PathOracle(g), LearnerConfig(d=3)).edges == g.edges
