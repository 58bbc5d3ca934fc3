import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pqlearn import (GenSpec, PathOracle, SeparatorOracle, build_reachability, gen_almost_tree, gen_butterfly,
                     gen_multitree, gen_rooted_tree, gen_undirected_tree)
from pqlearn.estimators import (AlmostTreeLearner, ButterflyLearner, MultitreeLearner, ShortTreeLearner,
                                SpanningTreeLearner, UndirectedTreeLearner)
from pqlearn.exceptions import PreconditionError

from conftest import roots_of


def _all_pairs(n):
    return np.array([(u, v) for u in range(n) for v in range(n)])


@pytest.mark.parametrize("est,graph", [
    (ShortTreeLearner(d=3), gen_rooted_tree(GenSpec(n=60, d=3, h=6, seed=1))),
    (SpanningTreeLearner(d=3, c_paths=1), gen_rooted_tree(GenSpec(n=60, d=3, h=6, seed=2))),
    (AlmostTreeLearner(d=3), gen_almost_tree(GenSpec(n=60, d=3, h=6, seed=3))),
    (MultitreeLearner(d=4), gen_multitree(GenSpec(n=60, d=4, h=5, a=3, seed=4))),
    (ButterflyLearner(), gen_butterfly(3, seed=5)),
])
def test_fit_predict_matches_reachability(est, graph):
    model = est.fit(graph)
    assert set(model.edges_) == set(graph.edges)
    pairs = _all_pairs(graph.n)
    truth = build_reachability(graph).reach
    assert np.array_equal(model.predict(pairs), truth[pairs[:, 0], pairs[:, 1]])
    assert model.ledger_.queries > 0


def test_fit_accepts_an_oracle_and_charges_it():
    g = gen_rooted_tree(GenSpec(n=40, d=3, h=5, seed=0))
    oracle = PathOracle(g)
    model = ShortTreeLearner(d=3, root=roots_of(g)[0]).fit(oracle)
    assert model.root_ == roots_of(g)[0]
    assert oracle.ledger.queries == model.ledger_.queries


def test_params_and_clone():
    est = SpanningTreeLearner(d=4, C1=7.0, seed=3)
    assert est.get_params()["C1"] == 7.0
    twin = clone(est)
    assert twin.get_params() == est.get_params() and twin is not est
    est.set_params(d=5)
    assert est.d == 5


def test_not_fitted_and_bad_inputs():
    with pytest.raises(NotFittedError):
        ShortTreeLearner().predict([[0, 1]])
    with pytest.raises(PreconditionError):
        ShortTreeLearner().fit("not a graph")
    g = gen_rooted_tree(GenSpec(n=10, d=3, h=3, seed=0))
    model = ShortTreeLearner().fit(g)
    with pytest.raises(PreconditionError):
        model.predict([[0, 1, 2]])
    with pytest.raises(PreconditionError):
        model.predict([[0, 10]])
    with pytest.raises(PreconditionError):
        ShortTreeLearner().fit(g, vertices=[0, 11])


def test_multitree_extra_attributes():
    g = gen_multitree(GenSpec(n=50, d=4, h=5, a=2, seed=9))
    model = MultitreeLearner(d=4).fit(g)
    assert sorted(model.roots_) == roots_of(g)
    assert set(model.per_root_trees_) == set(model.roots_)


def test_undirected_learner():
    truth = gen_undirected_tree(40, 3, seed=2)
    model = UndirectedTreeLearner(d=3).fit(SeparatorOracle(40, truth))
    assert model.edges_ == truth
    ref = SeparatorOracle(40, truth)
    triples = np.random.default_rng(0).integers(0, 40, size=(200, 3))
    assert np.array_equal(model.predict(triples), ref._lookup(*triples.T))
    with pytest.raises(PreconditionError):
        UndirectedTreeLearner().fit(PathOracle(gen_rooted_tree(GenSpec(n=5, d=3, h=2))))
    with pytest.raises(PreconditionError):
        model.predict([[0, 1]])


def test_undirected_partial_fit_cannot_predict():
    # vertices 0..3 form a connected piece of the path 0-1-...-9
    sep = SeparatorOracle(10, [(i, i + 1) for i in range(9)])
    model = UndirectedTreeLearner(d=2).fit(sep, vertices=range(4))
    assert model.edges_ == [(0, 1), (1, 2), (2, 3)]
    with pytest.raises(PreconditionError):
        model.predict([[0, 1, 2]])
