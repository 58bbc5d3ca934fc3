"""Randomized separator machinery for rooted DAGs and the almost-tree pipeline.

All learners here are Las Vegas with explicit retry caps: they either return
a verified-by-construction answer or raise a :class:`LearnerFailure`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .exceptions import (AmbiguousCandidate, IterationCapExceeded, LoopCapExceeded,
                         NoCrossEdgeFound, NoParent, PreconditionError, PreconditionViolated)
from .graph import Edge, arborescence_metrics, reduction_from_reach
from .oracle import Oracle
from .tree import LearnResult, _vertex_array

MIN_C1 = 8 * math.log(2)


@dataclass
class LearnerConfig:
    """Tunable constants of the randomized learners.

    ``C1`` scales sample sizes (``m = C1 * sqrt(|V|)``), ``C2`` the number of
    reachability probes per estimate (``K = C2 * ln |V|``).  The defaults
    are empirical choices, not values derived from any bound.
    """

    C1: float = 6.0
    C2: float = 24.0
    d: int = 3
    c_paths: int = 2
    g_base: int | None = None
    eps_cap: int = 4
    loop_cap: int | None = None
    seed: int | None = 0

    def __post_init__(self):
        if self.C1 <= MIN_C1:
            raise PreconditionError(f"C1 must exceed 8 ln 2 = {MIN_C1:.3f}, got {self.C1}")
        if self.C2 <= 0:
            raise PreconditionError("C2 must be positive")
        if self.d < 2:
            raise PreconditionError("d must be >= 2")
        if self.g_base is None:
            self.g_base = max(16, self.d + 2)
        if self.g_base < self.d + 2:
            raise PreconditionError(f"g_base must be >= d + 2 = {self.d + 2}")
        if self.loop_cap is None:
            self.loop_cap = 64 * self.d
        if self.eps_cap < 1 or self.loop_cap < 1:
            raise PreconditionError("iteration caps must be positive")

    def sample_size(self, nv: int) -> float:
        return self.C1 * math.sqrt(nv)

    def probes(self, nv: int) -> int:
        return max(1, int(round(self.C2 * math.log(max(nv, 2)))))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass
class SplitTrace:
    """Record of separators accepted by :func:`learn_spanning_tree`."""

    splits: list[tuple[int, int, int]] = field(default_factory=list)
    """``(w, |V|, |V_1|)`` per accepted split."""
    attempts: int = 0
    keep_sets: bool = False
    vertex_sets: list[np.ndarray] = field(default_factory=list)
    """The split's ``V``, parallel to ``splits``, when ``keep_sets`` is on."""


def bernoulli_sample(Y, m: float, rng: np.random.Generator) -> np.ndarray:
    """Keep each element independently with probability ``min(1, m/|Y|)``."""
    Y = np.asarray(Y, dtype=np.int64)
    if Y.size == 0:
        return Y
    p = min(1.0, m / Y.size)
    if p >= 1.0:
        return Y.copy()
    return Y[rng.random(Y.size) < p]


def _minimal(items: np.ndarray, order: np.ndarray) -> int:
    # order[i, j]: items[i] reaches items[j]; lowest id with no ancestor
    return int(items[np.flatnonzero(~order.any(axis=0))[0]])


def _maximal(items: np.ndarray, order: np.ndarray) -> int:
    return int(items[np.flatnonzero(~order.any(axis=1))[0]])


def learn_root(V, oracle: Oracle, cfg: LearnerConfig, rng: np.random.Generator | None = None) -> int:
    """Find a vertex of ``V`` with no ancestor in ``V`` in O(1) rounds w.h.p.

    Repeatedly samples the current ancestor set, moves to a minimal sampled
    element and keeps only its ancestors, until the set is small enough to
    sort exhaustively.
    """
    V = _vertex_array(V)
    rng = rng if rng is not None else cfg.rng()
    m = cfg.sample_size(V.size)
    pivot = int(V[0])
    Y = oracle.ancestors_among(pivot, V[V != pivot])
    iterations = 0
    while Y.size > m:
        if iterations >= cfg.eps_cap:
            raise IterationCapExceeded(f"learn_root: |Y|={Y.size} > m={m:.1f} after {iterations} rounds")
        iterations += 1
        S = bernoulli_sample(Y, m, rng)
        if S.size == 0:
            continue
        pivot = _minimal(S, oracle.pairwise(S))
        Y = oracle.ancestors_among(pivot, Y[Y != pivot])
    if Y.size == 0:
        return pivot
    return _minimal(Y, oracle.pairwise(Y))


def learn_parent(v: int, V, oracle: Oracle, cfg: LearnerConfig,
                 rng: np.random.Generator | None = None) -> int:
    """Find some in-neighbour of ``v`` inside ``V``; mirror image of :func:`learn_root`."""
    V = _vertex_array(V)
    rng = rng if rng is not None else cfg.rng()
    m = cfg.sample_size(V.size)
    Y = oracle.ancestors_among(v, V[V != v])
    if Y.size == 0:
        raise NoParent(f"vertex {v} has no ancestor in V")
    iterations = 0
    while Y.size > m:
        if iterations >= cfg.eps_cap:
            raise IterationCapExceeded(f"learn_parent: |Y|={Y.size} > m={m:.1f} after {iterations} rounds")
        iterations += 1
        S = bernoulli_sample(Y, m, rng)
        if S.size == 0:
            continue
        y = _maximal(S, oracle.pairwise(S))
        below = oracle.descendants_among(y, Y[Y != y])
        if below.size == 0:
            return y
        Y = below
    return _maximal(Y, oracle.pairwise(Y))


def is_even_separator(v: int, V, reach: np.ndarray, d: int, tolerance: int = 0) -> bool:
    """Exact check of ``|V|/d <= count(v, V) <= |V|(d-1)/d`` (test support, no oracle)."""
    V = np.asarray(list(V), dtype=np.int64)
    count = int(reach[v, V].sum())
    nv = V.size
    return nv / d - tolerance <= count <= nv * (d - 1) / d + tolerance


def min_chain_cover(order: np.ndarray) -> list[list[int]]:
    """Minimum chain cover of a strict partial order given as a closure matrix.

    Dilworth via maximum bipartite matching; chains are index lists ordered
    from the most ancestral element down.
    """
    k = order.shape[0]
    if k == 0:
        return []
    match = maximum_bipartite_matching(csr_matrix(order.astype(np.int8)), perm_type="column")
    nxt = {i: int(j) for i, j in enumerate(match) if j >= 0}
    has_pred = set(nxt.values())
    chains = []
    for i in range(k):
        if i in has_pred:
            continue
        chain = [i]
        while chain[-1] in nxt:
            chain.append(nxt[chain[-1]])
        chains.append(chain)
    return chains


def filter_separator(S: np.ndarray, counts: np.ndarray, Y: np.ndarray, V: np.ndarray,
                     oracle: Oracle, cfg: LearnerConfig, K: int) -> np.ndarray:
    """Drop candidates of ``Y`` that cannot be separators given the sample estimates.

    The sampled poset is split into chains; on each chain everything at or
    below the topmost low-count element and everything at or above the
    lowest high-count element is removed, in one batch.
    """
    d = cfg.d
    lo, hi = K / (d + 1), K * d / (d + 1)
    order = oracle.pairwise(S)
    low = counts < lo
    high = counts > hi
    cut_below, cut_above = set(), set()
    for chain in min_chain_cover(order):
        lows = [i for i in chain if low[i]]
        highs = [i for i in chain if high[i]]
        if lows:
            cut_below.add(int(S[lows[0]]))
        if highs:
            cut_above.add(int(S[highs[-1]]))
    if not cut_below and not cut_above:
        return Y
    below, above = sorted(cut_below), sorted(cut_above)
    nv = V.size
    us = np.concatenate([np.repeat(below, nv), np.tile(V, len(above))]).astype(np.int64)
    vs = np.concatenate([np.tile(V, len(below)), np.repeat(above, nv)]).astype(np.int64)
    ans = oracle.batch_arrays(us, vs)
    drop = np.zeros(nv, dtype=bool)
    split = len(below) * nv
    if below:
        drop |= ans[:split].reshape(len(below), nv).any(axis=0)
    if above:
        drop |= ans[split:].reshape(len(above), nv).any(axis=0)
    removed = set(V[drop].tolist()) | cut_below | cut_above
    return Y[~np.isin(Y, list(removed))]


def learn_separator(v: int, Y, V, r: int, oracle: Oracle, cfg: LearnerConfig,
                    rng: np.random.Generator | None = None) -> int | None:
    """Search the candidates ``Y`` (ancestors of ``v``) for a near-separator.

    Returns the vertex whose sampled descendant fraction lies within
    ``[1/(d+1), d/(d+1)]``, or ``None``.
    """
    rng = rng if rng is not None else cfg.rng()
    V = _vertex_array(V)
    Y = np.unique(np.asarray(Y, dtype=np.int64))
    nv, d = V.size, cfg.d
    K = cfg.probes(nv)
    lo, hi = K / (d + 1), K * d / (d + 1)
    if Y.size > nv / K:
        S = np.union1d(bernoulli_sample(Y, cfg.sample_size(nv), rng), [v, r])
        cnt = oracle.counts(S, rng.choice(V, size=(S.size, K)))
        if (cnt < lo).all() or (cnt > hi).all():
            return None
        # r splits nothing off, so it never qualifies however noisy its count
        inside = np.flatnonzero((cnt >= lo) & (cnt <= hi) & (S != r))
        if inside.size:
            return int(S[inside[0]])
        Y = filter_separator(S, cnt, Y, V, oracle, cfg, K)
    if Y.size == 0:
        return None
    cnt = oracle.counts(Y, rng.choice(V, size=(Y.size, K)))
    inside = np.flatnonzero((cnt >= lo) & (cnt <= hi) & (Y != r))
    return int(Y[inside[0]]) if inside.size else None


def _brute_force_arborescence(V: np.ndarray, r: int, oracle: Oracle) -> set[Edge]:
    order = oracle.pairwise(V)
    kids: dict[int, list[int]] = {}
    for i, j in reduction_from_reach(order):
        kids.setdefault(int(V[i]), []).append(int(V[j]))
    edges: set[Edge] = set()
    seen = {r}
    frontier = [r]
    for u in frontier:
        for w in kids.get(u, ()):
            if w not in seen:
                seen.add(w)
                edges.add((u, w))
                frontier.append(w)
    if len(seen) != V.size:
        raise PreconditionViolated(f"{V.size - len(seen)} vertices unreachable from root {r}")
    return edges


def learn_spanning_tree(V, r: int, oracle: Oracle, cfg: LearnerConfig,
                        rng: np.random.Generator | None = None,
                        trace: SplitTrace | None = None) -> set[Edge]:
    """Learn an arborescence of the sub-DAG on ``V`` rooted at ``r``.

    Divide and conquer on near-separators: ``V_1 = D(w) + {w}`` and
    ``V_2 = V - V_1`` are learned in parallel and joined by a learned
    in-edge of ``w``.
    """
    rng = rng if rng is not None else cfg.rng()
    V = _vertex_array(V)
    d = cfg.d
    ledger = oracle.ledger

    def solve(V: np.ndarray, r: int) -> set[Edge]:
        nv = V.size
        if nv <= cfg.g_base:
            return _brute_force_arborescence(V, r, oracle)
        for _ in range(cfg.loop_cap):
            if trace is not None:
                trace.attempts += 1
            v = int(V[rng.integers(nv)])
            Y = np.append(oracle.ancestors_among(v, V[V != v]), v)
            w = learn_separator(v, Y, V, r, oracle, cfg, rng)
            if w is None:
                continue
            V1 = np.append(oracle.descendants_among(w, V[V != w]), w)
            if nv / (d + 2) <= V1.size <= nv * (d + 1) / (d + 2):
                break
        else:
            raise LoopCapExceeded(f"no near-separator accepted in {cfg.loop_cap} attempts (|V|={nv})")
        if trace is not None:
            trace.splits.append((w, nv, int(V1.size)))
            if trace.keep_sets:
                trace.vertex_sets.append(V)
        u = learn_parent(w, V, oracle, cfg, rng)
        V1 = np.sort(V1)
        V2 = np.setdiff1d(V, V1, assume_unique=True)
        left, right = ledger.fork_join([lambda: solve(V1, w), lambda: solve(V2, r)])
        return {(u, w)} | left | right

    return solve(V, int(r))


def _preorder(root: int, children: dict[int, list[int]]):
    order, tin, size = [], {}, {}
    stack = [root]
    while stack:
        u = stack.pop()
        tin[u] = len(order)
        order.append(u)
        stack.extend(reversed(children[u]))
    for u in reversed(order):
        size[u] = 1 + sum(size[c] for c in children[u])
    return np.asarray(order, dtype=np.int64), tin, size


def learn_cross_edge(V, arb: set[Edge], oracle: Oracle, root: int | None = None) -> Edge:
    """Recover the single edge of an almost-tree missing from arborescence ``arb``.

    Round 1 probes ``path(c, t)`` for every tree edge ``(v, c)`` and every
    ``t`` in ``D(v) - D(c)``; exactly one child ``c`` answers positively and
    the topmost positive target is the cross-edge head.  Round 2 finds the
    tail as the deepest vertex below ``c`` that reaches the head.
    """
    V = _vertex_array(V)
    if root is None:
        heads = {w for _, w in arb}
        roots = [int(x) for x in V if int(x) not in heads]
        if len(roots) != 1:
            raise PreconditionError(f"arborescence has {len(roots)} roots")
        root = roots[0]
    met = arborescence_metrics(arb, root, V.tolist())
    order, tin, size = _preorder(root, met.children)

    src, dst = [], []
    for v, kids in met.children.items():
        lo_v, hi_v = tin[v], tin[v] + size[v]
        for c in kids:
            lo_c, hi_c = tin[c], tin[c] + size[c]
            targets = np.concatenate([order[lo_v:lo_c], order[hi_c:hi_v]])
            src.append(np.full(targets.size, c))
            dst.append(targets)
    if not src:
        raise NoCrossEdgeFound("arborescence has no edges")
    src_a, dst_a = np.concatenate(src), np.concatenate(dst)
    hit = oracle.batch_arrays(src_a, dst_a)
    cs = np.unique(src_a[hit])
    if cs.size == 0:
        raise NoCrossEdgeFound("no probe answered positively; the graph is a tree")
    if cs.size > 1:
        raise AmbiguousCandidate(f"several candidate children {cs[:5].tolist()}")
    c = int(cs[0])
    targets = dst_a[hit]
    t = int(min(targets.tolist(), key=lambda x: met.depth[x]))
    if not all(tin[t] <= tin[x] < tin[t] + size[t] for x in targets.tolist()):
        raise PreconditionViolated("positive targets do not share a topmost vertex")

    below_c = order[tin[c]:tin[c] + size[c]]
    reach_t = below_c[oracle.batch_arrays(below_c, np.full(below_c.size, t))]
    s = int(max(reach_t.tolist(), key=lambda x: met.depth[x]))
    if not all(tin[x] <= tin[s] < tin[x] + size[x] for x in reach_t.tolist()):
        raise PreconditionViolated("positive sources do not lie on one tree path")
    return s, t


def learn_almost_tree(V, oracle: Oracle, cfg: LearnerConfig,
                      rng: np.random.Generator | None = None,
                      trace: SplitTrace | None = None) -> LearnResult:
    """Root, then a spanning arborescence, then the one remaining cross edge."""
    rng = rng if rng is not None else cfg.rng()
    V = _vertex_array(V)
    ledger = oracle.ledger
    with ledger.phase("root"):
        r = learn_root(V, oracle, cfg, rng)
    with ledger.phase("spanning_tree"):
        arb = learn_spanning_tree(V, r, oracle, cfg, rng, trace)
    with ledger.phase("cross_edge"):
        s, t = learn_cross_edge(V, arb, oracle, root=r)
    return LearnResult(arb | {(s, t)}, root=r, ledger=ledger.snapshot())

