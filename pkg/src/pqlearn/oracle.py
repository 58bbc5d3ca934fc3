"""Instrumented query oracles.

Learners see the hidden graph only through an :class:`Oracle`.  Every answer
is charged to a shared :class:`QueryLedger`, which also tracks rounds along
the parallel critical path (see :meth:`QueryLedger.parallel`).
"""
from __future__ import annotations

import json
from contextlib import contextmanager
from typing import Callable, Iterable, Iterator, Sequence, TypeVar

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .exceptions import EmptyBatch, PreconditionError, VertexNotInScope, VertexOutOfRange
from .graph import Digraph, ReachabilityIndex, build_reachability

T = TypeVar("T")


class QueryLedger:
    """Counts charged queries and rounds.

    ``raw_queries`` counts every answer delivered; ``queries`` counts the
    charged ones (they differ only when the dedup cache is on).
    """

    def __init__(self) -> None:
        self.queries = 0
        self.raw_queries = 0
        self.rounds = 0
        self.phases: dict[str, dict[str, int]] = {}
        self._active: list[str] = []

    def charge(self, charged: int, raw: int, rounds: int) -> None:
        self.queries += charged
        self.raw_queries += raw
        self.rounds += rounds
        for label in self._active:
            ph = self.phases[label]
            ph["queries"] += charged
            ph["raw_queries"] += raw

    @contextmanager
    def phase(self, label: str) -> Iterator[None]:
        """Attribute queries issued inside the block to ``label``.

        A phase's ``rounds`` is the growth of the critical path while it was open.
        """
        ph = self.phases.setdefault(label, {"queries": 0, "raw_queries": 0, "rounds": 0})
        ph.setdefault("rounds", 0)
        start = self.rounds
        self._active.append(label)
        try:
            yield
        finally:
            self._active.remove(label)
            ph["rounds"] += self.rounds - start

    @contextmanager
    def parallel(self) -> Iterator["_ParallelScope"]:
        """Fork/join scope: branches add the max of their rounds, the sum of their queries."""
        scope = _ParallelScope(self)
        yield scope
        self.rounds = scope.start + scope.longest

    def fork_join(self, branches: Sequence[Callable[[], T]]) -> list[T]:
        results = []
        with self.parallel() as par:
            for fn in branches:
                with par.branch():
                    results.append(fn())
        return results

    def snapshot(self) -> "QueryLedger":
        copy = QueryLedger()
        copy.queries, copy.raw_queries, copy.rounds = self.queries, self.raw_queries, self.rounds
        copy.phases = {k: dict(v) for k, v in self.phases.items()}
        return copy

    def to_dict(self) -> dict:
        return {"queries": self.queries, "rounds": self.rounds,
                "raw_queries": self.raw_queries,
                "phases": {k: dict(v) for k, v in sorted(self.phases.items())}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "QueryLedger":
        led = cls()
        led.queries = int(data["queries"])
        led.rounds = int(data["rounds"])
        led.raw_queries = int(data.get("raw_queries", led.queries))
        led.phases = {k: {kk: int(vv) for kk, vv in v.items()}
                      for k, v in data.get("phases", {}).items()}
        return led

    def __repr__(self) -> str:
        return f"QueryLedger(queries={self.queries}, rounds={self.rounds}, raw_queries={self.raw_queries})"


class _ParallelScope:
    def __init__(self, ledger: QueryLedger):
        self.ledger = ledger
        self.start = ledger.rounds
        self.longest = 0

    @contextmanager
    def branch(self) -> Iterator[None]:
        self.ledger.rounds = self.start
        yield
        self.longest = max(self.longest, self.ledger.rounds - self.start)


def fork_join(ledger: QueryLedger, branches: Sequence[Callable[[], T]]) -> list[T]:
    return ledger.fork_join(branches)


EACH = "each"
"""Segment marker: every query is its own round (a sequential loop)."""


def _as_index_array(xs) -> np.ndarray:
    if type(xs) is np.ndarray and xs.dtype == np.int64 and xs.ndim == 1:
        return xs
    return np.asarray(xs, dtype=np.int64).reshape(-1)


def _boundaries(a: np.ndarray) -> np.ndarray:
    """``True`` where a sorted array starts a new run of equal values."""
    out = np.empty(a.size, dtype=bool)
    if a.size:
        out[0] = True
        np.not_equal(a[1:], a[:-1], out=out[1:])
    return out


def _tally(raw: int, fresh: np.ndarray | None, seg: np.ndarray | None) -> tuple[int, int, int]:
    """``(charged, raw, rounds)`` for ``raw`` answers of which ``fresh`` are charged."""
    if fresh is None:
        charged = raw
        live = seg
    else:
        charged = int(fresh.sum())
        live = seg if seg is None or seg is EACH else seg[fresh]
    if not charged:
        return 0, raw, 0
    if seg is None:
        return charged, raw, 1
    if seg is EACH:
        return charged, raw, charged
    # seg is non-decreasing, so distinct batches are counted by boundaries
    return charged, raw, 1 + int(np.count_nonzero(live[1:] != live[:-1]))


class Oracle:
    """Path-query interface shared by the ground-truth oracle and its adapters."""

    n: int
    ledger: QueryLedger
    # whether charging depends on the exact (u, v) pairs, not just their count
    _pair_sensitive: bool = True

    # -- hooks -----------------------------------------------------------
    def _translate(self, us: np.ndarray, vs: np.ndarray) -> tuple["Oracle", np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _lookup(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _charge(self, us: np.ndarray, vs: np.ndarray, seg: np.ndarray | None = None) -> None:
        """Charge answered queries.

        ``seg`` (non-decreasing) splits them into back-to-back batches;
        :data:`EACH` makes every query its own round.
        """
        raise NotImplementedError

    # -- shared machinery -------------------------------------------------
    def _check_range(self, *arrs: np.ndarray) -> None:
        for a in arrs:
            # negatives wrap to huge values under the unsigned view
            if a.size and a.view(np.uint64).max() >= self.n:
                bad = [int(x) for x in a if not 0 <= x < self.n][:3]
                raise VertexOutOfRange(f"vertices {bad} outside 0..{self.n - 1}")

    def _resolve(self, us: np.ndarray, vs: np.ndarray):
        self._check_range(us, vs)
        return self._translate(us, vs)

    def batch_arrays(self, us, vs) -> np.ndarray:
        """Answer ``path(us[i], vs[i])`` for all i in a single round."""
        us, vs = _as_index_array(us), _as_index_array(vs)
        if us.size == 0:
            raise EmptyBatch("a batch needs at least one query")
        if us.shape != vs.shape:
            raise PreconditionError("source and target arrays differ in length")
        root, bu, bv = self._resolve(us, vs)
        ans = root._lookup(bu, bv)
        root._charge(bu, bv)
        return ans

    def query(self, u: int, v: int) -> int:
        return int(self.batch_arrays([u], [v])[0])

    def batch(self, pairs: Iterable[tuple[int, int]]) -> list[int]:
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        return self.batch_arrays(arr[:, 0], arr[:, 1]).astype(int).tolist()

    def count(self, s: int, xs: Sequence[int]) -> int:
        xs = _as_index_array(xs)
        return int(self.batch_arrays(np.full(xs.size, s), xs).sum())

    def counts(self, sources, samples) -> np.ndarray:
        """``count(sources[i], samples[i])`` for every i, issued as one batch."""
        sources = _as_index_array(sources)
        samples = np.asarray(samples, dtype=np.int64).reshape(sources.size, -1)
        ans = self.batch_arrays(np.repeat(sources, samples.shape[1]), samples.reshape(-1))
        return ans.reshape(samples.shape).sum(axis=1)

    def descendants_among(self, v: int, candidates) -> np.ndarray:
        """One batch of ``path(v, z)``; returns the candidates answering 1."""
        cand = _as_index_array(candidates)
        if cand.size == 0:
            return cand
        return cand[self.batch_arrays(np.full(cand.size, v), cand)]

    def ancestors_among(self, v: int, candidates) -> np.ndarray:
        """One batch of ``path(z, v)``; returns the candidates answering 1."""
        cand = _as_index_array(candidates)
        if cand.size == 0:
            return cand
        return cand[self.batch_arrays(cand, np.full(cand.size, v))]

    def pairwise(self, items) -> np.ndarray:
        """All ordered pairs of ``items`` in one batch; ``M[i, j] = path(items[i], items[j])``."""
        items = _as_index_array(items)
        k = items.size
        if k < 2:
            return np.zeros((k, k), dtype=bool)
        ii, jj = np.nonzero(~np.eye(k, dtype=bool))
        out = np.zeros((k, k), dtype=bool)
        out[ii, jj] = self.batch_arrays(items[ii], items[jj])
        return out

    def scan_to_ancestor(self, start: int, candidates) -> int:
        """Sequential scan: for z in order, ``if path(z, cur): cur = z``.

        One query per round; exactly ``len(candidates)`` queries (``start``
        is skipped if present).
        """
        cand = _as_index_array(candidates)
        return int(self.scan_segments(cand, np.zeros(cand.size, dtype=np.int64), [start])[0])

    def batch_segments(self, us, vs, seg) -> np.ndarray:
        """Several independent batches issued one after another.

        ``seg[i]`` (non-decreasing) names the batch of query i; each distinct
        batch costs a round, exactly as if sent by separate calls.
        """
        us, vs, seg = _as_index_array(us), _as_index_array(vs), _as_index_array(seg)
        if us.size == 0:
            raise EmptyBatch("a batch needs at least one query")
        root, bu, bv = self._resolve(us, vs)
        ans = root._lookup(bu, bv)
        root._charge(bu, bv, seg)
        return ans

    def scan_segments(self, items, seg, starts) -> np.ndarray:
        """Run :meth:`scan_to_ancestor` once per segment.

        ``items`` is grouped by the non-decreasing segment id ``seg``;
        ``starts[k]`` is the starting vertex of segment k.  Charged queries
        and rounds are exactly those of the separate scans.

        A candidate that is not an ancestor of the start is not an ancestor
        of anything the walk reaches later, so only the start's ancestors
        ``H`` need their answers resolved against later walk positions.
        """
        items, seg = _as_index_array(items), _as_index_array(seg)
        cur = _as_index_array(starts).copy()
        keep = items != cur[seg]
        if not keep.all():
            items, seg = items[keep], seg[keep]
        k = items.size
        if k == 0:
            return cur
        self._check_range(items, cur)
        root, bu, bv = self._translate(items, cur[seg])
        H = root._lookup(bu, bv).nonzero()[0]
        if H.size:
            hseg = seg[H]
            bound = _boundaries(hseg)
            heads = bound.nonzero()[0]
            # on_walk: positions where the scan moves; nxt[j]: next move after H[j]
            on_walk = np.zeros(k, dtype=bool)
            on_walk[H[heads]] = True
            if heads.size < H.size:
                # pairs (later y, earlier z) of H inside one segment
                ends = np.empty(heads.size, dtype=np.int64)
                ends[:-1] = heads[1:]
                ends[-1] = H.size
                later = np.repeat(ends, ends - heads) - np.arange(H.size) - 1
                zi = np.repeat(np.arange(H.size), later)
                yi = np.arange(zi.size) - np.repeat(np.cumsum(later) - later - np.arange(H.size) - 1, later)
                _, pu, pv = self._translate(items[H[yi]], items[H[zi]])
                up = root._lookup(pu, pv)
                zs, ys = zi[up], yi[up]
                first = _boundaries(zs)
                nxt = np.full(H.size, -1, dtype=np.int64)
                nxt[zs[first]] = ys[first]
                live = nxt[heads]
                live = live[live >= 0]
                while live.size:
                    on_walk[H[live]] = True
                    live = nxt[live]
                    live = live[live >= 0]
            moves = on_walk.nonzero()[0]
            ms = seg[moves]
            final = np.empty(ms.size, dtype=bool)
            final[-1] = True
            np.not_equal(ms[1:], ms[:-1], out=final[:-1])
            cur[ms[final]] = items[moves[final]]
            if root._pair_sensitive:
                # query i is asked against the last move strictly before it
                last = np.where(on_walk, np.arange(k), -1)
                np.maximum.accumulate(last, out=last)
                before = np.empty(k, dtype=np.int64)
                before[0] = -1
                before[1:] = last[:-1]
                moved = (before >= 0) & (seg[np.maximum(before, 0)] == seg)
                asked_to = np.where(moved, items[np.maximum(before, 0)], _as_index_array(starts)[seg])
                _, bu, bv = self._translate(items, asked_to)
        root._charge(bu, bv, EACH)
        return cur

    # adapters ------------------------------------------------------------
    def inverse(self) -> "Oracle":
        return InverseOracle(self)

    def restrict(self, allowed) -> "Oracle":
        return RestrictedOracle(self, allowed)


class PathOracle(Oracle):
    """Ground-truth path oracle backed by a :class:`ReachabilityIndex`."""

    def __init__(self, source: Digraph | ReachabilityIndex, dedup_cache: bool = False,
                 ledger: QueryLedger | None = None):
        index = build_reachability(source) if isinstance(source, Digraph) else source
        self._reach = index.reach
        self.n = index.n
        self.ledger = ledger if ledger is not None else QueryLedger()
        self.dedup_cache = dedup_cache
        self._pair_sensitive = dedup_cache
        self._seen: set[int] = set()

    def _translate(self, us, vs):
        return self, us, vs

    def _lookup(self, us, vs):
        return self._reach[us, vs]

    def _charge(self, us, vs, seg=None):
        raw = int(us.size)
        if self.dedup_cache:
            fresh = np.zeros(raw, dtype=bool)
            for i, code in enumerate((us * self.n + vs).tolist()):
                if code not in self._seen:
                    self._seen.add(code)
                    fresh[i] = True
        else:
            fresh = None
        self.ledger.charge(*_tally(raw, fresh, seg))


class InverseOracle(Oracle):
    """``path'(u, v) = path(v, u)``; shares the base ledger."""

    def __init__(self, base: Oracle):
        self.base = base
        self.n = base.n

    @property
    def ledger(self) -> QueryLedger:  # type: ignore[override]
        return self.base.ledger

    def _translate(self, us, vs):
        return self.base._translate(vs, us)

    def inverse(self) -> Oracle:
        return self.base


class RestrictedOracle(Oracle):
    """Rejects queries touching vertices outside ``allowed``."""

    def __init__(self, base: Oracle, allowed):
        self.base = base
        self.n = base.n
        mask = np.zeros(base.n, dtype=bool)
        idx = _as_index_array(list(allowed) if not isinstance(allowed, np.ndarray) else allowed)
        if idx.size and (idx.min() < 0 or idx.max() >= base.n):
            raise VertexOutOfRange("restriction mentions vertices out of range")
        mask[idx] = True
        self.allowed = mask

    @property
    def ledger(self) -> QueryLedger:  # type: ignore[override]
        return self.base.ledger

    def _translate(self, us, vs):
        ok = self.allowed[us] & self.allowed[vs]
        if not ok.all():
            i = int(np.flatnonzero(~ok)[0])
            raise VertexNotInScope(f"query ({int(us[i])}, {int(vs[i])}) leaves the allowed vertex set")
        return self.base._translate(us, vs)


class SeparatorOracle:
    """Separator queries on a hidden undirected tree.

    ``sep(a, b, c) = 1`` iff deleting ``b`` disconnects ``a`` from ``c``.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int]], ledger: QueryLedger | None = None):
        edges = list(edges)
        if len(edges) != max(n - 1, 0):
            raise PreconditionError("an undirected tree on n vertices has n-1 edges")
        self.n = n
        self.ledger = ledger if ledger is not None else QueryLedger()
        if n:
            rows = [a for a, b in edges] + [b for a, b in edges]
            cols = [b for a, b in edges] + [a for a, b in edges]
            adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
            dist = shortest_path(adj, unweighted=True, directed=False)
            if np.isinf(dist).any():
                raise PreconditionError("edge set is not connected")
            self._dist = dist.astype(np.int64)
        else:
            self._dist = np.zeros((0, 0), dtype=np.int64)

    def _check(self, *arrs: np.ndarray) -> None:
        for a in arrs:
            if a.size and (a.min() < 0 or a.max() >= self.n):
                raise VertexOutOfRange(f"vertex outside 0..{self.n - 1}")

    def _lookup(self, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
        d = self._dist
        on_path = d[a, b] + d[b, c] == d[a, c]
        return on_path & (b != a) & (b != c)

    def sep_batch(self, a, b, c, sequential: bool = False) -> np.ndarray:
        a, b, c = (_as_index_array(x) for x in (a, b, c))
        if a.size == 0:
            raise EmptyBatch("a batch needs at least one query")
        self._check(a, b, c)
        ans = self._lookup(a, b, c)
        k = int(a.size)
        self.ledger.charge(k, k, k if sequential else 1)
        return ans

    def sep(self, a: int, b: int, c: int) -> int:
        return int(self.sep_batch([a], [b], [c])[0])


class SepPathOracle(Oracle):
    """Path oracle simulated by separator queries, oriented away from ``r``.

    ``path(u, v) := sep(r, u, v)``; the degenerate ``u == r`` case is
    answered without a query (``r`` is an ancestor of every other vertex).
    """

    def __init__(self, sep: SeparatorOracle, r: int):
        if not 0 <= r < sep.n:
            raise VertexOutOfRange(f"root {r} outside 0..{sep.n - 1}")
        self.sep_oracle = sep
        self.r = r
        self.n = sep.n

    @property
    def ledger(self) -> QueryLedger:  # type: ignore[override]
        return self.sep_oracle.ledger

    def _translate(self, us, vs):
        return self, us, vs

    def _lookup(self, us, vs):
        out = np.empty(us.size, dtype=bool)
        special = us == self.r
        out[special] = vs[special] != self.r
        rest = ~special
        if rest.any():
            out[rest] = self.sep_oracle._lookup(np.full(int(rest.sum()), self.r), us[rest], vs[rest])
        return out

    def _charge(self, us, vs, seg=None):
        # queries issued by the root itself are answered for free
        real = us != self.r
        charged, _, rounds = _tally(us.size, real, seg)
        if charged:
            self.sep_oracle.ledger.charge(charged, charged, rounds)


def sep_to_path_adapter(sep: SeparatorOracle, r: int) -> SepPathOracle:
    return SepPathOracle(sep, r)


def inverse_adapter(oracle: Oracle) -> Oracle:
    return oracle.inverse()


def restrict_adapter(oracle: Oracle, allowed) -> Oracle:
    return RestrictedOracle(oracle, allowed)
