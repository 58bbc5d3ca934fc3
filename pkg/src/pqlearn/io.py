"""Edge-list readers and writers (JSON and CSV)."""
from __future__ import annotations

import json
from pathlib import Path

from .exceptions import PreconditionError
from .graph import Digraph


def graph_to_json(g: Digraph) -> str:
    payload = {"n": g.n, "edges": [list(e) for e in g.sorted_edges()]}
    return json.dumps(payload, separators=(",", ":")) + "\n"


def graph_from_json(text: str) -> Digraph:
    try:
        data = json.loads(text)
        return Digraph(int(data["n"]), (tuple(e) for e in data["edges"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise PreconditionError(f"malformed graph JSON: {exc}") from exc


def graph_to_csv(g: Digraph) -> str:
    # The header comment keeps isolated vertices across a round trip.
    lines = [f"# n={g.n}"] + [f"{u},{v}" for u, v in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def graph_from_csv(text: str, n: int | None = None) -> Digraph:
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            if key.strip() == "n" and n is None:
                n = int(val)
            continue
        try:
            u, v = (int(x) for x in line.split(","))
        except ValueError as exc:
            raise PreconditionError(f"line {lineno}: expected 'u,v', got {raw!r}") from exc
        edges.append((u, v))
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    return Digraph(n, edges)


def read_graph(path: str | Path) -> Digraph:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return graph_from_csv(text)
    return graph_from_json(text)


def write_graph(g: Digraph, path: str | Path) -> None:
    path = Path(path)
    text = graph_to_csv(g) if path.suffix.lower() == ".csv" else graph_to_json(g)
    path.write_text(text)
