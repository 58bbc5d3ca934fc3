"""Ground-truth digraphs, reachability, transitive reduction and class checks.

Vertices are dense integer ids ``0..n-1``.  Reachability is *strict*: a
vertex never reaches itself unless it sits on a cycle.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .exceptions import CyclicGraph, NotArborescence, PreconditionError

Edge = tuple[int, int]

PATH_COUNT_CAP = 1 << 16


class Digraph:
    """Immutable simple digraph on vertices ``0..n-1``."""

    __slots__ = ("n", "edges", "out_adj", "in_adj")

    def __init__(self, n: int, edges: Iterable[Edge] = ()):
        n = int(n)
        if n < 0:
            raise PreconditionError(f"vertex count must be non-negative, got {n}")
        out_adj: list[list[int]] = [[] for _ in range(n)]
        in_adj: list[list[int]] = [[] for _ in range(n)]
        seen: set[Edge] = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise PreconditionError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise PreconditionError(f"self-loop at {u}")
            if (u, v) in seen:
                raise PreconditionError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
            out_adj[u].append(v)
            in_adj[v].append(u)
        self.n = n
        self.edges = frozenset(seen)
        self.out_adj = tuple(tuple(sorted(a)) for a in out_adj)
        self.in_adj = tuple(tuple(sorted(a)) for a in in_adj)

    @property
    def m(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def degree(self, v: int) -> int:
        return len(self.out_adj[v]) + len(self.in_adj[v])

    def relabel(self, perm: np.ndarray | list[int]) -> "Digraph":
        """Return the graph with vertex ``v`` renamed to ``perm[v]``."""
        return Digraph(self.n, ((int(perm[u]), int(perm[v])) for u, v in self.edges))

    def reversed(self) -> "Digraph":
        return Digraph(self.n, ((v, u) for u, v in self.edges))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, m={self.m})"


def topological_order(g: Digraph) -> list[int] | None:
    """Kahn's algorithm; returns ``None`` when ``g`` has a cycle."""
    indeg = [len(p) for p in g.in_adj]
    queue = deque(v for v in range(g.n) if indeg[v] == 0)
    order: list[int] = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for w in g.out_adj[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return order if len(order) == g.n else None


class ReachabilityIndex:
    """Transitive closure of a digraph as a dense boolean matrix.

    ``reach[u, v]`` is true iff a directed path of length >= 1 leads from
    ``u`` to ``v``.
    """

    __slots__ = ("reach",)

    def __init__(self, reach: np.ndarray):
        reach = np.asarray(reach, dtype=bool)
        if reach.ndim != 2 or reach.shape[0] != reach.shape[1]:
            raise PreconditionError("reachability matrix must be square")
        reach.setflags(write=False)
        self.reach = reach

    @property
    def n(self) -> int:
        return self.reach.shape[0]

    def __call__(self, u: int, v: int) -> bool:
        return bool(self.reach[u, v])

    def descendants(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.reach[v])

    def ancestors(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.reach[:, v])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ReachabilityIndex):
            return NotImplemented
        return np.array_equal(self.reach, other.reach)

    __hash__ = None  # type: ignore[assignment]


def build_reachability(g: Digraph, require_dag: bool = True) -> ReachabilityIndex:
    order = topological_order(g)
    if order is None:
        if require_dag:
            raise CyclicGraph("graph contains a directed cycle")
        return ReachabilityIndex(_closure_general(g))
    reach = np.zeros((g.n, g.n), dtype=bool)
    for u in reversed(order):
        row = reach[u]
        for c in g.out_adj[u]:
            row |= reach[c]
            row[c] = True
    return ReachabilityIndex(reach)


def _closure_general(g: Digraph) -> np.ndarray:
    # Warshall on boolean rows; only used for cyclic inputs.
    reach = np.zeros((g.n, g.n), dtype=bool)
    for u, v in g.edges:
        reach[u, v] = True
    for k in range(g.n):
        col = reach[:, k].copy()
        if col.any():
            reach[col] |= reach[k]
    return reach


def transitive_edges(g: Digraph, index: ReachabilityIndex | None = None) -> set[Edge]:
    """Edges ``(u, v)`` for which a path of length > 1 also leads from u to v."""
    if index is None:
        index = build_reachability(g)
    reach = index.reach
    out = set()
    for u, v in g.edges:
        if any(w != v and reach[w, v] for w in g.out_adj[u]):
            out.add((u, v))
    return out


def transitive_reduction(g: Digraph) -> Digraph:
    index = build_reachability(g)
    return Digraph(g.n, g.edges - transitive_edges(g, index))


def reduction_from_reach(reach: np.ndarray) -> list[Edge]:
    """Cover relation of a strict closure matrix (the Hasse diagram)."""
    reach = np.asarray(reach, dtype=bool)
    f = reach.astype(np.float32)
    two_step = (f @ f) > 0
    us, vs = np.nonzero(reach & ~two_step)
    return list(zip(us.tolist(), vs.tolist()))


@dataclass(frozen=True)
class GraphClassReport:
    n: int
    m: int
    is_dag: bool
    roots: list[int]
    max_degree: int
    height: int
    is_arborescence: bool
    is_multitree: bool
    is_almost_tree: bool
    has_transitive_edge: bool
    max_root_paths: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def classify(g: Digraph, path_cap: int = PATH_COUNT_CAP) -> GraphClassReport:
    roots = [v for v in range(g.n) if not g.in_adj[v]]
    max_degree = max((g.degree(v) for v in range(g.n)), default=0)
    order = topological_order(g)
    if order is None:
        return GraphClassReport(g.n, g.m, False, roots, max_degree, -1,
                                False, False, False, False, path_cap)

    depth = [0] * g.n
    root_paths = [0] * g.n
    for v in roots:
        root_paths[v] = 1
    for u in order:
        for w in g.out_adj[u]:
            depth[w] = max(depth[w], depth[u] + 1)
            root_paths[w] = min(path_cap, root_paths[w] + root_paths[u])
    height = max(depth, default=0)

    index = build_reachability(g)
    has_transitive = bool(transitive_edges(g, index))

    # Two distinct u->v paths first diverge at some vertex into two distinct
    # children whose inclusive descendant sets then intersect.
    reach = index.reach
    is_multitree = True
    for u in range(g.n):
        kids = g.out_adj[u]
        if len(kids) < 2:
            continue
        covered = np.zeros(g.n, dtype=bool)
        for c in kids:
            mine = reach[c].copy()
            mine[c] = True
            if (covered & mine).any():
                is_multitree = False
                break
            covered |= mine
        if not is_multitree:
            break

    indeg = [len(p) for p in g.in_adj]
    single_root = len(roots) == 1
    is_arborescence = single_root and all(d <= 1 for d in indeg)
    is_almost_tree = (single_root and g.m == g.n
                      and sorted(indeg)[-1:] == [2]
                      and sum(1 for d in indeg if d == 2) == 1
                      and all(d <= 2 for d in indeg))
    return GraphClassReport(
        n=g.n, m=g.m, is_dag=True, roots=roots, max_degree=max_degree,
        height=height, is_arborescence=is_arborescence,
        is_multitree=is_multitree, is_almost_tree=is_almost_tree,
        has_transitive_edge=has_transitive,
        max_root_paths=max(root_paths, default=0),
    )


@dataclass
class ArborescenceMetrics:
    root: int
    parent: dict[int, int]
    depth: dict[int, int]
    children: dict[int, list[int]]
    descendants: dict[int, frozenset[int]] = field(repr=False)
    """Inclusive: ``v in descendants[v]``."""


def arborescence_metrics(edges: Iterable[Edge], root: int,
                         vertices: Iterable[int] | None = None) -> ArborescenceMetrics:
    edges = list(edges)
    verts = {root}
    if vertices is not None:
        verts.update(vertices)
    parent: dict[int, int] = {}
    children: dict[int, list[int]] = {}
    for u, v in edges:
        verts.update((u, v))
        if v in parent:
            raise NotArborescence(f"vertex {v} has two parents ({parent[v]}, {u})")
        if v == root:
            raise NotArborescence(f"root {root} has parent {u}")
        parent[v] = u
        children.setdefault(u, []).append(v)
    for v in verts:
        children.setdefault(v, [])
        children[v].sort()

    depth = {root: 0}
    order = [root]
    for u in order:
        for c in children[u]:
            depth[c] = depth[u] + 1
            order.append(c)
    if len(order) != len(verts):
        missing = sorted(verts - set(order))[:5]
        raise NotArborescence(f"vertices unreachable from root {root}: {missing}")

    desc: dict[int, set[int]] = {}
    for u in reversed(order):
        s = {u}
        for c in children[u]:
            s |= desc[c]
        desc[u] = s
    return ArborescenceMetrics(
        root=root, parent=parent, depth=depth, children=children,
        descendants={v: frozenset(s) for v, s in desc.items()},
    )


def undirected_tree_to_rooted(n: int, edges: Iterable[tuple[int, int]], root: int = 0) -> Digraph:
    """Orient an undirected tree away from ``root``."""
    adj: Mapping[int, list[int]] = {v: [] for v in range(n)}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {root}
    out: list[Edge] = []
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                out.append((u, w))
                queue.append(w)
    if len(seen) != n:
        raise PreconditionError("edge set is not a spanning tree")
    return Digraph(n, out)
