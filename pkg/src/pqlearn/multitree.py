"""Composite learners for multitrees and butterfly networks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dag import LearnerConfig, bernoulli_sample, learn_root, learn_spanning_tree
from .exceptions import NotButterflyCardinality, PreconditionError, RootNotProgressing
from .generators import butterfly_height
from .graph import Edge
from .oracle import Oracle, QueryLedger
from .tree import LearnResult, _vertex_array, learn_short_tree, sequential_find_root


@dataclass
class MultitreeResult:
    edges: set[Edge]
    roots: list[int]
    per_root_trees: dict[int, set[Edge]]
    ledger: QueryLedger = field(default_factory=QueryLedger)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def to_dict(self) -> dict:
        return {"edges": [list(e) for e in self.sorted_edges()],
                "roots": list(self.roots),
                "per_root_trees": {str(r): [list(e) for e in sorted(t)]
                                   for r, t in self.per_root_trees.items()},
                "ledger": self.ledger.to_dict()}


def learn_multitree(V, oracle: Oracle, cfg: LearnerConfig,
                    rng: np.random.Generator | None = None) -> MultitreeResult:
    """Peel roots one at a time and learn the tree each one reaches.

    Each reachable subgraph of a multitree is a tree, so a spanning
    arborescence of it (single-path setting) is that tree exactly.
    """
    rng = rng if rng is not None else cfg.rng()
    V = _vertex_array(V)
    tree_cfg = replace(cfg, c_paths=1)
    remaining = V.copy()
    roots: list[int] = []
    trees: dict[int, set[Edge]] = {}
    while remaining.size:
        with oracle.ledger.phase("root"):
            r = learn_root(remaining, oracle, cfg, rng)
        if r in trees or r not in set(remaining.tolist()):
            raise RootNotProgressing(f"learn_root returned eliminated vertex {r}")
        with oracle.ledger.phase("trees"):
            below = np.sort(np.append(oracle.descendants_among(r, V[V != r]), r))
            trees[r] = learn_spanning_tree(below, r, oracle.restrict(below), tree_cfg, rng)
        roots.append(r)
        remaining = np.setdiff1d(remaining, below, assume_unique=True)
    edges = set().union(*trees.values())
    return MultitreeResult(edges, roots, trees, oracle.ledger.snapshot())


def learn_root_via_inverse_tree(V, oracle: Oracle, cfg: LearnerConfig,
                                rng: np.random.Generator | None = None) -> int:
    """Root finder for multitrees with many roots: any leaf of the inverse tree at ``v``."""
    rng = rng if rng is not None else cfg.rng()
    V = _vertex_array(V)
    v = int(V[0])
    above = oracle.ancestors_among(v, V[V != v])
    if above.size == 0:
        return v
    scope = np.sort(np.append(above, v))
    inv = oracle.inverse().restrict(scope)
    arb = learn_spanning_tree(scope, v, inv, replace(cfg, c_paths=1), rng)
    inner = {u for u, _ in arb}
    return min(int(x) for x in scope if int(x) not in inner)


def butterfly_sample_size(h: int, c_b: float) -> float:
    return c_b * 2 ** (h / 2) * h


def learn_butterfly(V, oracle: Oracle, c_b: float = 2.0, seed: int | None = 0,
                    rng: np.random.Generator | None = None,
                    trees: dict | None = None) -> LearnResult:
    """Learn a depth-h butterfly from sampled forward and inverse trees.

    Forward trees from sampled sources cover edges near the sources; inverse
    trees from sampled sinks cover the rest.  With ``trees`` given, every
    per-tree edge set is stored there keyed by ``("out", s)`` / ``("in", t)``.
    """
    if c_b <= 0:
        raise PreconditionError("c_b must be positive")
    rng = rng if rng is not None else np.random.default_rng(seed)
    V = _vertex_array(V)
    try:
        h = butterfly_height(V.size)
    except PreconditionError as exc:
        raise NotButterflyCardinality(str(exc)) from exc
    ledger = oracle.ledger
    if h == 0:
        return LearnResult(set(), root=int(V[0]), ledger=ledger.snapshot())
    store = trees if trees is not None else {}

    def forward(s: int, below: np.ndarray) -> set[Edge]:
        scope = np.sort(np.append(below, s))
        out = learn_short_tree(scope, s, 4, oracle.restrict(scope))
        store[("out", s)] = out
        return out

    def backward(t: int, above: np.ndarray) -> set[Edge]:
        scope = np.sort(np.append(above, t))
        inv = learn_short_tree(scope, t, 4, oracle.inverse().restrict(scope))
        out = {(y, x) for x, y in inv}
        store[("in", t)] = out
        return out

    r = sequential_find_root(V, oracle)
    first = forward(r, oracle.descendants_among(r, V[V != r]))
    tails = {u for u, _ in first}
    sinks = np.array(sorted({w for _, w in first} - tails), dtype=np.int64)
    l = int(sinks[0])
    second = backward(l, oracle.ancestors_among(l, V[V != l]))
    heads = {w for _, w in second}
    sources = np.array(sorted({u for u, _ in second} - heads), dtype=np.int64)

    k = butterfly_sample_size(h, c_b)
    S = bernoulli_sample(sources, k, rng)
    T = bernoulli_sample(sinks, k, rng)

    # one round for every descendant set D(s) and ancestor set A(t)
    nv = V.size
    us = np.concatenate([np.repeat(S, nv), np.tile(V, T.size)])
    vs = np.concatenate([np.tile(V, S.size), np.repeat(T, nv)])
    edges = first | second
    if us.size:
        hit = oracle.batch_arrays(us, vs).reshape(S.size + T.size, nv)
        jobs = [(lambda s=int(s), row=hit[i]: forward(s, V[row])) for i, s in enumerate(S)]
        jobs += [(lambda t=int(t), row=hit[S.size + i]: backward(t, V[row])) for i, t in enumerate(T)]
        for part in ledger.fork_join(jobs):
            edges |= part
    return LearnResult(edges, root=r, ledger=ledger.snapshot())
