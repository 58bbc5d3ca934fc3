"""Seeded constructors for the graph families the learners target.

Every generator validates its output with :func:`pqlearn.graph.classify`
before returning it, and relabels vertices with a seeded permutation so that
ids carry no structural information.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import InfeasibleSpec, NoValidCrossEdge
from .graph import Digraph, Edge, classify


@dataclass(frozen=True)
class GenSpec:
    n: int
    d: int = 3
    h: int = 4
    a: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InfeasibleSpec(f"n must be >= 1, got {self.n}")
        if self.d < 2:
            raise InfeasibleSpec(f"d must be >= 2, got {self.d}")
        if self.h < 0:
            raise InfeasibleSpec(f"h must be >= 0, got {self.h}")
        if not 1 <= self.a <= self.n:
            raise InfeasibleSpec(f"need 1 <= a <= n, got a={self.a}, n={self.n}")

    def to_dict(self) -> dict:
        return asdict(self)


def max_tree_size(d: int, h: int) -> int:
    """Largest rooted tree of height h whose vertices have total degree <= d."""
    total, level = 1, d
    for _ in range(h):
        total += level
        level *= d - 1
        if total > 1 << 62:
            break
    return total


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _grow_tree(size: int, d: int, h: int, rng: np.random.Generator,
               exact_height: bool = True, attach: str = "uniform") -> list[Edge]:
    """Random attachment tree on vertices 0..size-1 rooted at 0.

    A spine 0 -> 1 -> ... -> h pins the height; the rest attach to vertices
    that still have degree room and depth < h: uniformly among all of them
    (``attach="uniform"``) or among the deepest ones (``attach="deep"``,
    which packs vertices close to depth h).
    """
    if attach not in ("uniform", "deep"):
        raise InfeasibleSpec(f"unknown attachment rule {attach!r}")
    if size < 1:
        return []
    spine = min(h, size - 1) if exact_height else 0
    edges = [(i, i + 1) for i in range(spine)]
    depth = list(range(spine + 1))
    room = [d - 1 if spine else d] + [d - 2] * max(spine - 1, 0)
    if spine:
        room.append(d - 1)
    if attach == "deep":
        return _grow_deep(size, h, spine, edges, depth, room, d, rng)
    open_ = [v for v in range(spine + 1) if depth[v] < h and room[v] > 0]
    for v in range(spine + 1, size):
        if not open_:
            raise InfeasibleSpec(f"no tree with {size} vertices, height {h}, degree <= {d}")
        i = int(rng.integers(len(open_)))
        p = open_[i]
        edges.append((p, v))
        depth.append(depth[p] + 1)
        room.append(d - 1)
        room[p] -= 1
        if room[p] == 0:
            open_[i] = open_[-1]
            open_.pop()
        if depth[v] < h and room[v] > 0:
            open_.append(v)
    return edges


def _grow_deep(size, h, spine, edges, depth, room, d, rng) -> list[Edge]:
    by_depth: list[list[int]] = [[] for _ in range(h + 1)]
    for v in range(spine + 1):
        if depth[v] < h and room[v] > 0:
            by_depth[depth[v]].append(v)
    for v in range(spine + 1, size):
        level = next((k for k in range(h - 1, -1, -1) if by_depth[k]), None)
        if level is None:
            raise InfeasibleSpec(f"no tree with {size} vertices, height {h}, degree <= {d}")
        bucket = by_depth[level]
        i = int(rng.integers(len(bucket)))
        p = bucket[i]
        edges.append((p, v))
        depth.append(level + 1)
        room.append(d - 1)
        room[p] -= 1
        if room[p] == 0:
            bucket[i] = bucket[-1]
            bucket.pop()
        if level + 1 < h:
            by_depth[level + 1].append(v)
    return edges


def _relabel(n: int, edges: list[Edge], rng: np.random.Generator) -> Digraph:
    perm = rng.permutation(n)
    return Digraph(n, ((int(perm[u]), int(perm[v])) for u, v in edges))


def _check(g: Digraph, **flags):
    rep = classify(g)
    for key, want in flags.items():
        got = getattr(rep, key)
        if got != want:
            raise AssertionError(f"generator produced {key}={got}, expected {want}")
    if rep.has_transitive_edge:
        raise AssertionError("generator produced a transitive edge")
    return rep


def gen_rooted_tree(spec: GenSpec, validate: bool = True, attach: str = "uniform") -> Digraph:
    """Arborescence with exactly ``spec.n`` vertices and height ``spec.h``.

    ``attach="deep"`` grows the tree from its deepest open vertices, so the
    average depth stays close to h whatever n is.
    """
    n, d, h = spec.n, spec.d, spec.h
    if n < h + 1 or n > max_tree_size(d, h) or (h == 0 and n != 1):
        raise InfeasibleSpec(f"no rooted tree with n={n}, height {h}, degree <= {d}")
    rng = _rng(spec.seed)
    g = _relabel(n, _grow_tree(n, d, h, rng, attach=attach), rng)
    if validate:
        rep = classify(g)
        if not rep.is_arborescence or rep.height != h or rep.max_degree > d:
            raise AssertionError(f"bad rooted tree: {rep}")
    return g


def gen_multitree(spec: GenSpec, merges: int | None = None, validate: bool = True) -> Digraph:
    """Multitree with exactly ``spec.a`` roots.

    ``a`` random trees are joined by merge edges ``u -> w`` (``w`` never a
    root) kept only while every vertex pair stays joined by <= 1 path.
    """
    n, d, a = spec.n, spec.d, spec.a
    rng = _rng(spec.seed)
    cuts = np.sort(rng.choice(np.arange(1, n), size=a - 1, replace=False)) if a > 1 else np.array([], int)
    bounds = [0, *cuts.tolist(), n]
    edges: list[Edge] = []
    roots = []
    height = max(spec.h, 1)
    for lo, hi in zip(bounds, bounds[1:]):
        size = hi - lo
        h = min(height, size - 1)
        while size > max_tree_size(d, h):
            h += 1
        roots.append(lo)
        edges += [(lo + u, lo + v) for u, v in _grow_tree(size, d, h, rng, exact_height=False)]

    deg = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    reach = np.zeros((n, n), dtype=bool)
    children: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        children[u].append(v)
    order: list[int] = []
    for r in roots:
        stack = [r]
        while stack:
            u = stack.pop()
            order.append(u)
            stack.extend(children[u])
    for u in reversed(order):
        for c in children[u]:
            reach[u] |= reach[c]
            reach[u, c] = True

    is_root = np.zeros(n, dtype=bool)
    is_root[roots] = True
    target = (2 * (a - 1)) if merges is None else merges
    done, attempts = 0, 0
    while done < target and attempts < 60 * max(target, 1):
        attempts += 1
        free = np.flatnonzero(deg < d)
        sinks = free[~is_root[free]]
        if free.size == 0 or sinks.size == 0:
            break
        u = int(free[rng.integers(free.size)])
        w = int(sinks[rng.integers(sinks.size)])
        up = reach[:, u].copy()
        up[u] = True
        down = reach[w].copy()
        down[w] = True
        if (up & down).any() or reach[np.ix_(up, down)].any():
            continue
        reach[np.ix_(up, down)] = True
        edges.append((u, w))
        deg[u] += 1
        deg[w] += 1
        done += 1
    g = _relabel(n, edges, rng)
    if validate:
        rep = _check(g, is_multitree=True)
        if len(rep.roots) != a or rep.max_degree > d:
            raise AssertionError(f"bad multitree: {rep}")
    return g


def gen_butterfly(h: int, seed: int | None = None) -> Digraph:
    """Depth-h FFT graph built by the two-copies-plus-new-level recursion.

    With ``seed=None`` labels are canonical: the copies come first, the new
    level ``v_0..v_{2m-1}`` last.
    """
    if h < 0:
        raise InfeasibleSpec("butterfly depth must be >= 0")

    def build(k: int, base: int) -> tuple[int, list[Edge], list[int]]:
        if k == 0:
            return 1, [], [base]
        na, ea, ta = build(k - 1, base)
        nb, eb, tb = build(k - 1, base + na)
        m = len(ta)
        t = ta + tb
        first = base + na + nb
        v = list(range(first, first + 2 * m))
        new = []
        for i in range(m):
            new += [(t[i], v[i]), (t[i], v[i + m]), (t[i + m], v[i]), (t[i + m], v[i + m])]
        return na + nb + 2 * m, ea + eb + new, v

    n, edges, _ = build(h, 0)
    if seed is None:
        return Digraph(n, edges)
    return _relabel(n, edges, _rng(seed))


def butterfly_height(n: int) -> int:
    """Inverse of ``n = 2**h * (h + 1)``; raises if no integer h fits."""
    h = 0
    while (1 << h) * (h + 1) < n:
        h += 1
    if (1 << h) * (h + 1) != n:
        raise InfeasibleSpec(f"{n} is not 2^h*(h+1) for any integer h")
    return h


def _tree_ancestry(n: int, edges: list[Edge], root: int):
    children: list[list[int]] = [[] for _ in range(n)]
    parent = [-1] * n
    for u, v in edges:
        children[u].append(v)
        parent[v] = u
    tin, tout = [0] * n, [0] * n
    clock = 0
    stack = [(root, False)]
    while stack:
        u, done = stack.pop()
        if done:
            tout[u] = clock
            continue
        tin[u] = clock
        clock += 1
        stack.append((u, True))
        stack.extend((c, False) for c in children[u])
    return parent, tin, tout


def _cross_edge_ok(s: int, t: int, parent, tin, tout, deg, d: int) -> bool:
    def anc(x, y):  # x is an ancestor of y, or x == y
        return tin[x] <= tin[y] and tout[y] <= tout[x]

    if s == t or parent[t] < 0 or deg[s] >= d or deg[t] >= d:
        return False
    if anc(t, s) or anc(s, t):
        return False
    # (parent(t), t) would become transitive through s
    return not anc(parent[t], s)


def gen_almost_tree(spec: GenSpec, retries: int = 16, validate: bool = True) -> Digraph:
    """Arborescence of height ``spec.h`` plus one uniformly chosen valid cross edge."""
    n, d, h = spec.n, spec.d, spec.h
    if n < 4:
        raise InfeasibleSpec("an almost-tree needs n >= 4")
    if n < h + 1 or n > max_tree_size(d, h):
        raise InfeasibleSpec(f"no tree with n={n}, height {h}, degree <= {d}")
    rng = _rng(spec.seed)
    for _ in range(retries):
        edges = _grow_tree(n, d, h, rng)
        parent, tin, tout = _tree_ancestry(n, edges, 0)
        deg = [0] * n
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        for _ in range(64 * n):
            s, t = (int(x) for x in rng.integers(n, size=2))
            if _cross_edge_ok(s, t, parent, tin, tout, deg, d):
                g = _relabel(n, edges + [(s, t)], rng)
                if validate:
                    rep = _check(g, is_almost_tree=True)
                    if rep.max_degree > d:
                        raise AssertionError(f"bad almost-tree: {rep}")
                return g
    raise NoValidCrossEdge(f"no valid cross edge after {retries} trees (n={n}, d={d}, h={h})")


def gen_lower_bound_instance(n: int, d: int, h: int, caterpillar_fraction: float = 0.5,
                             seed: int = 0, validate: bool = True) -> Digraph:
    """Caterpillar of height h with a complete d-ary tree below its last spine vertex.

    The spine ``s_0 -> ... -> s_h`` carries leaf legs on ``s_0..s_{h-1}`` (at
    most ``max(1, d-2)`` each); the remaining vertices fill a heap-ordered
    complete d-ary tree rooted at ``s_h``.  One cross edge joins a random leg
    to a random d-ary leaf.  Internal d-ary vertices have total degree d+1.
    """
    if h < 1 or d < 2:
        raise InfeasibleSpec("need h >= 1 and d >= 2")
    per_spine = max(1, d - 2)
    legs = max(1, int(round(caterpillar_fraction * n)) - (h + 1))
    legs = min(legs, per_spine * h)
    tree = n - (h + 1) - legs
    if tree < 1:
        raise InfeasibleSpec(f"n={n} too small for a height-{h} caterpillar plus a tree")
    rng = _rng(seed)
    edges: list[Edge] = [(i, i + 1) for i in range(h)]
    leg_ids = []
    nxt = h + 1
    for j in range(legs):
        edges.append((j % h, nxt))
        leg_ids.append(nxt)
        nxt += 1
    heap = [h] + list(range(nxt, nxt + tree))  # heap[0] is s_h
    for k in range(1, len(heap)):
        edges.append((heap[(k - 1) // d], heap[k]))
    leaves = [heap[k] for k in range(1, len(heap)) if d * k + 1 >= len(heap)]
    s = leg_ids[int(rng.integers(len(leg_ids)))]
    t = leaves[int(rng.integers(len(leaves)))]
    edges.append((s, t))
    g = _relabel(n, edges, rng)
    if validate:
        _check(g, is_almost_tree=True)
    return g


def gen_undirected_tree(n: int, d: int, seed: int = 0) -> list[tuple[int, int]]:
    """Random undirected tree on n vertices with every degree <= d."""
    if n < 1 or d < 2:
        raise InfeasibleSpec("need n >= 1 and d >= 2")
    rng = _rng(seed)
    edges = _grow_tree(n, d, n, rng, exact_height=False)
    perm = rng.permutation(n)
    return sorted(tuple(sorted((int(perm[u]), int(perm[v])))) for u, v in edges)
