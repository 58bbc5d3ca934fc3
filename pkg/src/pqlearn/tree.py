"""Deterministic learners: sequential root finding, short trees, undirected trees."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import EmptyVertexSet, PreconditionViolated
from .graph import Edge
from .oracle import Oracle, QueryLedger, SeparatorOracle, sep_to_path_adapter


@dataclass
class LearnResult:
    edges: set[Edge]
    root: int | None = None
    ledger: QueryLedger = field(default_factory=QueryLedger)
    undirected: bool = False

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def to_dict(self) -> dict:
        out = {"edges": [list(e) for e in self.sorted_edges()],
               "root": self.root,
               "ledger": self.ledger.to_dict()}
        if self.undirected:
            out["undirected"] = True
        return out


def _vertex_array(V) -> np.ndarray:
    arr = np.unique(np.asarray(list(V) if not isinstance(V, np.ndarray) else V, dtype=np.int64))
    if arr.size == 0:
        raise EmptyVertexSet("vertex set is empty")
    return arr


def sequential_find_root(V, oracle: Oracle) -> int:
    """Walk to a vertex with no parent inside ``V`` using ``|V| - 1`` single queries.

    Starts from the lowest id and moves to ``z`` whenever ``path(z, x) = 1``.
    Correct on any DAG: the walk only ever climbs, so a parent of the final
    vertex would have triggered one more move.
    """
    V = _vertex_array(V)
    return oracle.scan_to_ancestor(int(V[0]), V)


def _run_starts(a: np.ndarray) -> np.ndarray:
    """Positions where a sorted array starts a new run of equal values."""
    head = np.empty(a.size, dtype=bool)
    if a.size:
        head[0] = True
        np.not_equal(a[1:], a[:-1], out=head[1:])
    return head.nonzero()[0]


def learn_short_tree(V, r: int, d: int, oracle: Oracle) -> set[Edge]:
    """Learn the edges of the tree hanging from ``r`` and spanning ``V``.

    For each of at most ``d`` children of a vertex: scan the remaining
    vertices (ascending id) for the topmost ancestor of the first one, which
    is a child; collect its subtree with one batch; repeat on what is left.
    Uses O(n h) queries for a height-h tree of bounded degree.

    All pending subtrees advance together, one child per step.  Each still
    issues its own sequential scans and batches, so the ledger matches a
    one-subtree-at-a-time run.
    """
    V = _vertex_array(V)
    if d < 1:
        raise PreconditionViolated("d must be positive")
    edges: set[Edge] = set()
    # segment k holds the unplaced vertices below roots[k], ascending;
    # segment ids are non-decreasing along ``items``
    items = V[V != r]
    seg = np.zeros(items.size, dtype=np.int64)
    roots = [np.array([r], dtype=np.int64)]
    found = [np.zeros(1, dtype=np.int64)]
    n_seg = 1
    while items.size:
        root_of = np.concatenate(roots) if len(roots) > 1 else roots[0]
        taken = np.concatenate(found) if len(found) > 1 else found[0]
        roots, found = [root_of], [taken]
        heads = _run_starts(seg)
        present = seg[heads]
        over = present[taken[present] >= d]
        if over.size:
            raise PreconditionViolated(
                f"vertex {int(root_of[over[0]])} has more than d={d} children (or the input is not a tree)")
        starts = np.zeros(n_seg, dtype=np.int64)
        starts[present] = items[heads]
        child = oracle.scan_segments(items, seg, starts)
        edges.update(zip(root_of[present].tolist(), child[present].tolist()))
        taken[present] += 1
        above = child[seg]
        keep = items != above
        items, seg, above = items[keep], seg[keep], above[keep]
        if items.size == 0:
            break
        hit = oracle.batch_segments(above, items, seg)
        if not hit.any():
            continue
        # each subtree found this step becomes a new segment at the end
        sub, owner = items[hit], above[hit]
        new_heads = _run_starts(seg[hit])
        sizes = np.empty(new_heads.size, dtype=np.int64)
        sizes[:-1] = new_heads[1:] - new_heads[:-1]
        sizes[-1] = sub.size - new_heads[-1]
        miss = ~hit
        items = np.concatenate([items[miss], sub])
        seg = np.concatenate([seg[miss], np.repeat(np.arange(n_seg, n_seg + new_heads.size), sizes)])
        roots.append(owner[new_heads])
        found.append(np.zeros(new_heads.size, dtype=np.int64))
        n_seg += new_heads.size
    return edges


def learn_undirected_tree(V, sep: SeparatorOracle, d: int, method: str = "short-tree",
                          cfg=None) -> LearnResult:
    """Learn an undirected tree from separator queries.

    Roots the tree at the lowest id ``r``, answers ``path(u, v)`` with
    ``sep(r, u, v)`` and runs a rooted-tree learner; directions are dropped
    from the result.
    """
    V = _vertex_array(V)
    r = int(V[0])
    po = sep_to_path_adapter(sep, r)
    if method == "short-tree":
        directed = learn_short_tree(V, r, d, po)
    elif method == "spanning-tree":
        from .dag import LearnerConfig, learn_spanning_tree

        cfg = cfg or LearnerConfig(d=d, c_paths=1)
        directed = learn_spanning_tree(V, r, po, cfg)
    else:
        raise ValueError(f"unknown method {method!r}")
    undirected = {(min(u, v), max(u, v)) for u, v in directed}
    return LearnResult(undirected, root=None, ledger=sep.ledger.snapshot(), undirected=True)
