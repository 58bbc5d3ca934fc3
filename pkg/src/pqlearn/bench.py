"""Seeded experiment runner: one trial per (algorithm, instance spec, seed).

Trial ``i`` of a sweep uses seed ``seed0 + i`` for both the instance and the
learner, so rerunning a sweep reproduces every record.
"""
from __future__ import annotations

import csv
import io
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .dag import LearnerConfig, learn_almost_tree, learn_cross_edge, learn_root, learn_spanning_tree
from .exceptions import PQLError
from .generators import (GenSpec, gen_almost_tree, gen_butterfly, gen_multitree, gen_rooted_tree,
                         gen_undirected_tree)
from .graph import Digraph, arborescence_metrics
from .multitree import learn_butterfly, learn_multitree
from .oracle import PathOracle, SeparatorOracle
from .tree import learn_short_tree, learn_undirected_tree, sequential_find_root

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

TARGET_CURVES = {
    "short-tree": "n*h",
    "undirected-tree": "n*h",
    "spanning-tree": "n*log n",
    "almost-tree": "n*log n",
    "cross-edge": "n*h",
    "multitree": "a*n*log n",
    "butterfly": "2^(3h/2)*h^2",
}
SWEEP_ALGORITHMS = tuple(TARGET_CURVES)
CSV_COLUMNS = ("n", "h", "a", "median_q", "p95_q", "median_rounds", "success_rate", "ratio")


def load_thresholds(path: str | Path | None = None) -> dict:
    """Read the acceptance thresholds (the packaged file by default)."""
    if path is None:
        text = resources.files("pqlearn").joinpath("thresholds.toml").read_text()
    else:
        text = Path(path).read_text()
    return tomllib.loads(text)


@dataclass
class BenchRecord:
    alg: str
    spec: GenSpec
    seed: int
    queries: int
    raw_queries: int
    rounds: int
    exact: bool
    wall_ms: float
    error: str | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["spec"] = self.spec.to_dict()
        return out


def _is_spanning_arborescence(edges: set, g: Digraph, root: int) -> bool:
    if not edges <= g.edges or len(edges) != g.n - 1:
        return False
    try:
        arborescence_metrics(edges, root, range(g.n))
    except PQLError:
        return False
    return True


def _tree_part(g: Digraph) -> tuple[set, tuple[int, int]]:
    """Split an almost-tree into an arborescence and the edge it leaves out."""
    t = next(v for v in range(g.n) if len(g.in_adj[v]) == 2)
    s = max(g.in_adj[t])
    return set(g.edges) - {(s, t)}, (s, t)


def run_trial(alg: str, spec: GenSpec, C1: float = 6.0, C2: float = 24.0, c_b: float = 2.0,
              attach: str = "uniform") -> BenchRecord:
    """Generate one instance, learn it through a fresh oracle and score it.

    ``attach`` picks the rooted-tree shape for ``short-tree`` trials.
    """
    if alg not in TARGET_CURVES:
        raise ValueError(f"unknown algorithm {alg!r}")
    seed = spec.seed
    cfg = LearnerConfig(C1=C1, C2=C2, d=spec.d, seed=seed)
    error = None
    if alg == "undirected-tree":
        truth_u = gen_undirected_tree(spec.n, spec.d, seed)
        sep = SeparatorOracle(spec.n, truth_u)
        ledger = sep.ledger
        t0 = time.perf_counter()
        try:
            res = learn_undirected_tree(range(spec.n), sep, spec.d)
            exact = sorted(res.edges) == truth_u
        except PQLError as exc:
            exact, error = False, f"{type(exc).__name__}: {exc}"
    else:
        if alg == "short-tree":
            g = gen_rooted_tree(spec, attach=attach)
        elif alg == "multitree":
            g = gen_multitree(spec)
        elif alg == "butterfly":
            g = gen_butterfly(spec.h, seed=seed)
        else:
            g = gen_almost_tree(spec)
        oracle = PathOracle(g)
        ledger = oracle.ledger
        V = np.arange(g.n)
        t0 = time.perf_counter()
        try:
            if alg == "short-tree":
                r = sequential_find_root(V, oracle)
                exact = learn_short_tree(V, r, spec.d, oracle) == g.edges
            elif alg == "spanning-tree":
                rng = cfg.rng()
                r = learn_root(V, oracle, cfg, rng)
                exact = _is_spanning_arborescence(learn_spanning_tree(V, r, oracle, cfg, rng), g, r)
            elif alg == "almost-tree":
                exact = learn_almost_tree(V, oracle, cfg).edges == g.edges
            elif alg == "cross-edge":
                arb, missing = _tree_part(g)
                exact = learn_cross_edge(V, arb, oracle) == missing
            elif alg == "multitree":
                exact = learn_multitree(V, oracle, cfg).edges == g.edges
            else:
                exact = learn_butterfly(V, oracle, c_b=c_b, seed=seed).edges == g.edges
        except PQLError as exc:
            exact, error = False, f"{type(exc).__name__}: {exc}"
    wall = (time.perf_counter() - t0) * 1000.0
    return BenchRecord(alg, spec, seed, ledger.queries, ledger.raw_queries, ledger.rounds,
                       bool(exact), wall, error)


@dataclass
class SweepReport:
    alg: str
    target_curve: str
    rows: list[dict] = field(default_factory=list)
    records: list[BenchRecord] = field(default_factory=list)

    def ratios(self) -> list[float]:
        return [row["ratio"] for row in self.rows if row["ratio"] != ""]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row)
        return buf.getvalue()


def aggregate(records: list[BenchRecord], previous: dict | None) -> dict:
    q = np.array([r.queries for r in records], dtype=float)
    rounds = np.array([r.rounds for r in records], dtype=float)
    spec = records[0].spec
    n = 2 ** spec.h * (spec.h + 1) if records[0].alg == "butterfly" else spec.n
    med = float(np.median(q))
    ratio = "" if previous is None else round(med / previous["median_q"], 4)
    return {"n": n, "h": spec.h, "a": spec.a, "median_q": med,
            "p95_q": float(np.percentile(q, 95)), "median_rounds": float(np.median(rounds)),
            "success_rate": sum(r.exact for r in records) / len(records), "ratio": ratio}


def sweep(alg: str, sizes: Iterable[int], trials: int = 30, seed0: int = 0, d: int = 3,
          h: int = 16, a: int = 1, C1: float = 6.0, C2: float = 24.0, c_b: float = 2.0,
          attach: str = "uniform", on_row: Callable[[dict], None] | None = None) -> SweepReport:
    """Run ``trials`` seeded trials per size and aggregate per size.

    ``sizes`` are vertex counts, except for the butterfly where they are
    depths ``h``.  ``on_row`` sees each aggregate as soon as it is final.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    report = SweepReport(alg, TARGET_CURVES[alg])
    prev = None
    for size in sizes:
        batch = []
        for i in range(trials):
            if alg == "butterfly":
                spec = GenSpec(n=2 ** size * (size + 1), d=4, h=size, seed=seed0 + i)
            else:
                spec = GenSpec(n=size, d=d, h=min(h, size - 1), a=a, seed=seed0 + i)
            batch.append(run_trial(alg, spec, C1=C1, C2=C2, c_b=c_b, attach=attach))
        row = aggregate(batch, prev)
        report.rows.append(row)
        report.records.extend(batch)
        prev = row
        if on_row is not None:
            on_row(row)
    return report


def butterfly_growth(h: int) -> float:
    """Expected Q(h+1)/Q(h) for queries growing like 2^(3h/2) * h^2."""
    return 2 ** 1.5 * ((h + 1) / h) ** 2


def doubling_verdict(report: SweepReport, thresholds: dict) -> tuple[bool, str]:
    """Check the ratio column against the target curve's doubling bound."""
    ratios = report.ratios()
    if not ratios:
        return True, "no ratios (single size)"
    alg = report.alg
    if alg == "butterfly":
        tol = thresholds["butterfly"]["ratio_tolerance"]
        rel = [r / butterfly_growth(row_prev["h"])
               for r, row_prev in zip(ratios, report.rows[:-1])]
        ok = all(abs(x - 1) <= tol for x in rel)
        return ok, f"ratio / 2^1.5((h+1)/h)^2 in {[round(x, 3) for x in rel]} (tolerance {tol})"
    if alg == "short-tree":
        lo, hi = thresholds["short_tree"]["ratio_min"], thresholds["short_tree"]["ratio_max"]
        ok = all(lo <= r <= hi for r in ratios)
        return ok, f"ratios {ratios} within [{lo}, {hi}]"
    key = "multitree" if alg == "multitree" else "spanning_tree"
    hi = thresholds[key]["ratio_max"]
    return all(r <= hi for r in ratios), f"ratios {ratios} <= {hi}"


def gnuplot_script(csv_path: str, report: SweepReport) -> str:
    """Plot script for a sweep CSV: median queries against n on log axes."""
    # gnuplot expression and the same curve in Python, for scaling to the data
    curve, f = {
        "n*h": ("x", lambda x: x),
        "n*log n": ("x*log(x)", lambda x: x * math.log(x)),
        "a*n*log n": ("x*log(x)", lambda x: x * math.log(x)),
        "2^(3h/2)*h^2": ("x**1.5", lambda x: x ** 1.5),
    }[report.target_curve]
    first = report.rows[0]
    scale = first["median_q"] / f(float(first["n"]))
    return "\n".join([
        "set datafile separator ','",
        "set logscale xy",
        "set key left top",
        "set xlabel 'n'",
        "set ylabel 'charged queries'",
        f"set title '{report.alg}: median queries vs {report.target_curve}'",
        f"plot '{csv_path}' every ::1 using 1:4 with linespoints title 'median', \\",
        f"     '{csv_path}' every ::1 using 1:5 with points title 'p95', \\",
        f"     {scale:.6g}*{curve} title '{report.target_curve} (scaled)'",
        "",
    ])
