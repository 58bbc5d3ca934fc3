"""Estimator-style wrappers around the learners.

``fit`` takes whatever gives access to the hidden graph (an :class:`Oracle`,
or a :class:`Digraph` / :class:`ReachabilityIndex` that is wrapped in a fresh
:class:`PathOracle`) and learns its edges; ``predict`` answers path queries
from the learned graph.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .dag import LearnerConfig, learn_almost_tree, learn_root, learn_spanning_tree
from .exceptions import PreconditionError
from .graph import Digraph, ReachabilityIndex, build_reachability
from .multitree import learn_butterfly, learn_multitree
from .oracle import Oracle, PathOracle, SeparatorOracle
from .tree import _vertex_array, learn_short_tree, learn_undirected_tree, sequential_find_root


def check_oracle(X) -> Oracle:
    """Return ``X`` as an oracle, wrapping ground-truth graphs."""
    if isinstance(X, Oracle):
        return X
    if isinstance(X, (Digraph, ReachabilityIndex)):
        return PathOracle(X)
    raise PreconditionError(f"expected an Oracle, Digraph or ReachabilityIndex, got {type(X).__name__}")


def check_vertices(vertices, n: int) -> np.ndarray:
    """Vertex set as a sorted id array; defaults to all ``n`` vertices."""
    if vertices is None:
        return np.arange(n, dtype=np.int64)
    V = _vertex_array(vertices)
    if V[0] < 0 or V[-1] >= n:
        raise PreconditionError(f"vertex set leaves 0..{n - 1}")
    return V


def check_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise PreconditionError("pairs must have shape (k, 2)")
    return arr


class _GraphLearner(BaseEstimator):
    """Shared ``predict``: strict reachability in the learned graph."""

    def _finish(self, n: int, edges, root, ledger):
        self.n_vertices_ = n
        self.edges_ = sorted(edges)
        self.root_ = root
        self.ledger_ = ledger
        self._reach = build_reachability(Digraph(n, self.edges_), require_dag=False).reach
        return self

    def predict(self, pairs) -> np.ndarray:
        check_is_fitted(self, "edges_")
        arr = check_pairs(pairs)
        if arr.size and (arr.min() < 0 or arr.max() >= self.n_vertices_):
            raise PreconditionError("pair mentions a vertex outside the fitted graph")
        return self._reach[arr[:, 0], arr[:, 1]]

    def _config(self) -> LearnerConfig:
        return LearnerConfig(C1=self.C1, C2=self.C2, d=self.d, seed=self.seed)


class ShortTreeLearner(_GraphLearner):
    """Deterministic learner for trees of small height.

    When ``root`` is None the root is found by a sequential scan first.
    """

    def __init__(self, d: int = 3, root: int | None = None):
        self.d = d
        self.root = root

    def fit(self, X, vertices=None):
        oracle = check_oracle(X)
        V = check_vertices(vertices, oracle.n)
        r = self.root if self.root is not None else sequential_find_root(V, oracle)
        return self._finish(oracle.n, learn_short_tree(V, r, self.d, oracle), r, oracle.ledger.snapshot())


class SpanningTreeLearner(_GraphLearner):
    """Randomized spanning-arborescence learner for DAGs with few root paths."""

    def __init__(self, d: int = 3, C1: float = 6.0, C2: float = 24.0, c_paths: int = 2,
                 root: int | None = None, seed: int | None = 0):
        self.d = d
        self.C1 = C1
        self.C2 = C2
        self.c_paths = c_paths
        self.root = root
        self.seed = seed

    def _config(self) -> LearnerConfig:
        return LearnerConfig(C1=self.C1, C2=self.C2, d=self.d, c_paths=self.c_paths, seed=self.seed)

    def fit(self, X, vertices=None):
        oracle = check_oracle(X)
        V = check_vertices(vertices, oracle.n)
        cfg = self._config()
        rng = cfg.rng()
        r = self.root if self.root is not None else learn_root(V, oracle, cfg, rng)
        edges = learn_spanning_tree(V, r, oracle, cfg, rng)
        return self._finish(oracle.n, edges, r, oracle.ledger.snapshot())


class AlmostTreeLearner(_GraphLearner):
    """Exact learner for a tree plus one cross edge."""

    def __init__(self, d: int = 3, C1: float = 6.0, C2: float = 24.0, seed: int | None = 0):
        self.d = d
        self.C1 = C1
        self.C2 = C2
        self.seed = seed

    def fit(self, X, vertices=None):
        oracle = check_oracle(X)
        V = check_vertices(vertices, oracle.n)
        res = learn_almost_tree(V, oracle, self._config())
        return self._finish(oracle.n, res.edges, res.root, res.ledger)


class MultitreeLearner(_GraphLearner):
    """Learns a multitree root by root; ``roots_`` lists them in discovery order."""

    def __init__(self, d: int = 3, C1: float = 6.0, C2: float = 24.0, seed: int | None = 0):
        self.d = d
        self.C1 = C1
        self.C2 = C2
        self.seed = seed

    def fit(self, X, vertices=None):
        oracle = check_oracle(X)
        V = check_vertices(vertices, oracle.n)
        res = learn_multitree(V, oracle, self._config())
        self.roots_ = list(res.roots)
        self.per_root_trees_ = {r: sorted(t) for r, t in res.per_root_trees.items()}
        return self._finish(oracle.n, res.edges, None, res.ledger)


class ButterflyLearner(_GraphLearner):
    def __init__(self, c_b: float = 2.0, seed: int | None = 0):
        self.c_b = c_b
        self.seed = seed

    def fit(self, X, vertices=None):
        oracle = check_oracle(X)
        V = check_vertices(vertices, oracle.n)
        res = learn_butterfly(V, oracle, c_b=self.c_b, seed=self.seed)
        return self._finish(oracle.n, res.edges, res.root, res.ledger)


class UndirectedTreeLearner(BaseEstimator):
    """Learns an undirected tree from separator queries.

    ``predict`` takes triples ``(a, b, c)`` and answers whether ``b``
    separates ``a`` from ``c`` in the learned tree.
    """

    def __init__(self, d: int = 3, method: str = "short-tree"):
        self.d = d
        self.method = method

    def fit(self, X, vertices=None):
        if not isinstance(X, SeparatorOracle):
            raise PreconditionError(f"expected a SeparatorOracle, got {type(X).__name__}")
        V = check_vertices(vertices, X.n)
        res = learn_undirected_tree(V, X, self.d, method=self.method)
        self.n_vertices_ = X.n
        self.edges_ = sorted(res.edges)
        self.ledger_ = res.ledger
        # separator answers need the whole tree
        self._learned = SeparatorOracle(X.n, self.edges_) if V.size == X.n else None
        return self

    def predict(self, triples) -> np.ndarray:
        check_is_fitted(self, "edges_")
        if self._learned is None:
            raise PreconditionError("predict needs a model fitted on every vertex")
        arr = np.asarray(triples, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise PreconditionError("triples must have shape (k, 3)")
        return self._learned._lookup(arr[:, 0], arr[:, 1], arr[:, 2])
