"""Command-line front end: ``pqlearn generate | learn | verify | sweep``.

Exit codes: 0 ok, 1 verify found a mismatch, 2 usage or precondition error,
3 learner failure, 130 interrupted sweep.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .bench import (CSV_COLUMNS, SWEEP_ALGORITHMS, doubling_verdict, gnuplot_script, load_thresholds,
                    sweep)
from .dag import LearnerConfig, learn_almost_tree, learn_cross_edge, learn_parent, learn_root, learn_spanning_tree
from .exceptions import LearnerFailure, PQLError, PreconditionError
from .generators import (GenSpec, gen_almost_tree, gen_butterfly, gen_lower_bound_instance,
                         gen_multitree, gen_rooted_tree, gen_undirected_tree)
from .graph import Digraph, classify
from .io import graph_to_json, read_graph
from .multitree import learn_butterfly, learn_multitree
from .oracle import PathOracle, SeparatorOracle
from .tree import learn_short_tree, learn_undirected_tree, sequential_find_root

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_LEARNER, EXIT_INTERRUPTED = 0, 1, 2, 3, 130

CLASSES = ("tree", "almost-tree", "multitree", "butterfly", "lower-bound", "undirected-tree")
LEARN_ALGORITHMS = ("short-tree", "undirected-tree", "root", "parent", "spanning-tree",
                    "cross-edge", "almost-tree", "multitree", "butterfly")


def _seed(value: int) -> int:
    env = os.environ.get("PQL_SEED")
    return int(env) if env not in (None, "") else value


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _meta_path(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json")


def cmd_generate(args) -> int:
    seed = _seed(args.seed)
    cls = args.graph_class
    if cls == "butterfly":
        g = gen_butterfly(args.h, seed=seed)
        spec = {"h": args.h, "seed": seed}
    elif cls == "lower-bound":
        g = gen_lower_bound_instance(args.n, args.d, args.h, seed=seed)
        spec = {"n": args.n, "d": args.d, "h": args.h, "seed": seed}
    elif cls == "undirected-tree":
        g = Digraph(args.n, gen_undirected_tree(args.n, args.d, seed))
        spec = {"n": args.n, "d": args.d, "seed": seed}
    else:
        gs = GenSpec(n=args.n, d=args.d, h=args.h, a=args.a, seed=seed)
        if cls == "tree":
            g = gen_rooted_tree(gs, attach=args.attach)
        elif cls == "almost-tree":
            g = gen_almost_tree(gs)
        else:
            g = gen_multitree(gs)
        spec = gs.to_dict()
    meta = {"class": cls, "spec": spec, "undirected": cls == "undirected-tree"}
    if cls != "undirected-tree":
        meta["report"] = classify(g).to_dict()
    out = Path(args.out)
    out.write_text(graph_to_json(g))
    _meta_path(out).write_text(_dump(meta))
    print(f"wrote {out} (n={g.n}, m={g.m})", file=sys.stderr)
    return EXIT_OK


def _learn(args, g: Digraph) -> dict:
    alg = args.alg
    cfg = LearnerConfig(C1=args.c1, C2=args.c2, d=args.d, seed=_seed(args.seed))
    if alg == "undirected-tree":
        sep = SeparatorOracle(g.n, g.edges)
        return learn_undirected_tree(range(g.n), sep, args.d).to_dict()
    oracle = PathOracle(g)
    V = np.arange(g.n)
    rng = cfg.rng()
    if alg == "short-tree":
        r = sequential_find_root(V, oracle)
        return {"edges": sorted(map(list, learn_short_tree(V, r, args.d, oracle))), "root": r,
                "ledger": oracle.ledger.to_dict()}
    if alg == "root":
        return {"root": learn_root(V, oracle, cfg, rng), "ledger": oracle.ledger.to_dict()}
    if alg == "parent":
        if args.vertex is None:
            raise PreconditionError("--alg parent needs --vertex")
        p = learn_parent(args.vertex, V, oracle, cfg, rng)
        return {"vertex": args.vertex, "parent": p, "ledger": oracle.ledger.to_dict()}
    if alg == "spanning-tree":
        r = learn_root(V, oracle, cfg, rng)
        edges = learn_spanning_tree(V, r, oracle, cfg, rng)
        return {"edges": sorted(map(list, edges)), "root": r, "ledger": oracle.ledger.to_dict()}
    if alg == "cross-edge":
        if args.arb is not None:
            arb_data = json.loads(Path(args.arb).read_text())
            arb = {tuple(e) for e in arb_data["edges"]}
            r = arb_data.get("root")
        else:
            r = learn_root(V, oracle, cfg, rng)
            arb = learn_spanning_tree(V, r, oracle, cfg, rng)
        with oracle.ledger.phase("cross_edge"):
            s, t = learn_cross_edge(V, arb, oracle, root=r)
        return {"cross_edge": [s, t], "edges": sorted(map(list, arb | {(s, t)})), "root": r,
                "ledger": oracle.ledger.to_dict()}
    if alg == "almost-tree":
        return learn_almost_tree(V, oracle, cfg, rng).to_dict()
    if alg == "multitree":
        return learn_multitree(V, oracle, cfg, rng).to_dict()
    return learn_butterfly(V, oracle, c_b=args.c_b, seed=_seed(args.seed)).to_dict()


def cmd_learn(args) -> int:
    g = read_graph(args.input)
    out = _learn(args, g)
    if args.truth is not None:
        out["verified"] = verify_report(out, read_graph(args.truth), _is_undirected(args.truth))["exact"]
    sys.stdout.write(_dump(out))
    return EXIT_OK


def _is_undirected(truth_path) -> bool:
    meta = _meta_path(Path(truth_path))
    return meta.exists() and bool(json.loads(meta.read_text()).get("undirected"))


def verify_report(learned: dict, truth: Digraph, undirected: bool = False) -> dict:
    """Compare a learner's JSON output with the ground-truth graph."""
    undirected = undirected or bool(learned.get("undirected"))

    def norm(edges):
        return {(min(u, v), max(u, v)) if undirected else (u, v) for u, v in map(tuple, edges)}

    report: dict = {}
    if "edges" in learned:
        got, want = norm(learned["edges"]), norm(truth.edges)
        report["missing"] = sorted(map(list, want - got))
        report["extra"] = sorted(map(list, got - want))
        exact = not report["missing"] and not report["extra"]
        if not undirected:
            try:
                report["class"] = classify(Digraph(truth.n, got)).to_dict()
            except PQLError as exc:
                report["class"] = {"error": str(exc)}
    else:
        exact = True
    roots = sorted(v for v in range(truth.n) if not truth.in_adj[v])
    if learned.get("root") is not None and not undirected:
        report["root_ok"] = learned["root"] in roots
        exact = exact and report["root_ok"]
    if "parent" in learned:
        report["parent_ok"] = learned["parent"] in truth.in_adj[learned["vertex"]]
        exact = exact and report["parent_ok"]
    report["exact"] = exact
    return report


def cmd_verify(args) -> int:
    learned = json.loads(Path(args.learned).read_text())
    report = verify_report(learned, read_graph(args.truth), _is_undirected(args.truth))
    sys.stdout.write(_dump(report))
    return EXIT_OK if report["exact"] else EXIT_MISMATCH


def _sizes(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def cmd_sweep(args) -> int:
    thresholds = load_thresholds(args.thresholds)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    out.write(",".join(CSV_COLUMNS) + "\n")
    out.flush()

    def on_row(row: dict) -> None:
        out.write(",".join(str(row[c]) for c in CSV_COLUMNS) + "\n")
        out.flush()

    try:
        report = sweep(args.alg, args.sizes, trials=args.trials, seed0=_seed(args.seed0), d=args.d,
                       h=args.h, a=args.a, C1=args.c1, C2=args.c2, c_b=args.c_b,
                       attach=args.attach, on_row=on_row)
    except KeyboardInterrupt:
        print("interrupted: partial results flushed", file=sys.stderr)
        return EXIT_INTERRUPTED
    finally:
        if out is not sys.stdout:
            out.close()
    ok, msg = doubling_verdict(report, thresholds)
    print(f"doubling test {'PASS' if ok else 'FAIL'}: {msg}", file=sys.stderr)
    if args.gnuplot:
        Path(args.gnuplot).write_text(gnuplot_script(args.out or "sweep.csv", report))
    return EXIT_OK


def _add_learner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, default=3, help="degree bound")
    p.add_argument("--c1", type=float, default=6.0, help="sample-size constant")
    p.add_argument("--c2", type=float, default=24.0, help="probe-count constant")
    p.add_argument("--c-b", dest="c_b", type=float, default=2.0, help="butterfly sample constant")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pqlearn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded instance and its metadata")
    p.add_argument("--class", dest="graph_class", choices=CLASSES, required=True)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--h", type=int, default=4)
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--attach", choices=("uniform", "deep"), default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="graph JSON path; metadata goes to <stem>.meta.json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("learn", help="run a learner against an oracle over a graph file")
    p.add_argument("--alg", choices=LEARN_ALGORITHMS, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--vertex", type=int, help="target vertex for --alg parent")
    p.add_argument("--arb", help="JSON with the arborescence for --alg cross-edge")
    p.add_argument("--truth", help="ground truth to verify against")
    p.add_argument("--seed", type=int, default=0)
    _add_learner_flags(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("verify", help="compare learned output with ground truth")
    p.add_argument("--learned", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="seeded size sweep, CSV of per-size aggregates")
    p.add_argument("--alg", choices=SWEEP_ALGORITHMS, required=True)
    p.add_argument("--sizes", type=_sizes, required=True,
                   help="comma-separated n values (h values for butterfly)")
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--seed0", type=int, default=0)
    p.add_argument("--h", type=int, default=16)
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--attach", choices=("uniform", "deep"), default="uniform")
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.add_argument("--gnuplot", help="also write a gnuplot script here")
    p.add_argument("--thresholds", help="alternative thresholds TOML")
    _add_learner_flags(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LearnerFailure as exc:
        print(f"learner failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_LEARNER
    except (PreconditionError, ValueError, OSError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
