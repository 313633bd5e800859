"""Graph files (JSON and edge-list CSV) and tabular outputs."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .graph import Graph, GraphError


class GraphFormatError(GraphError):
    pass


def graph_to_dict(g):
    d = {"n": g.n, "edges": g.edges.tolist()}
    if g.x is not None:
        d["x"] = [float(v) for v in g.x]
    if g.w is not None:
        d["w"] = [[int(u), int(v), float(w)] for (u, v), w in zip(g.edges, g.w)]
    return d


def graph_from_dict(d):
    try:
        n = int(d["n"])
        edges = np.array(d.get("edges", []), dtype=np.int64).reshape(-1, 2)
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"malformed graph record: {exc}") from None
    x = d.get("x")
    w = None
    if d.get("w") is not None:
        lookup = {}
        for item in d["w"]:
            if len(item) != 3:
                raise GraphFormatError("edge weights must be [u, v, weight] triples")
            u, v, wt = item
            lookup[frozenset((int(u), int(v)))] = float(wt)
        try:
            w = [lookup[frozenset((int(u), int(v)))] for u, v in edges]
        except KeyError:
            raise GraphFormatError("edge weight list does not cover every edge") from None
        if len(lookup) != len(edges):
            raise GraphFormatError("weights given for edges not in the graph")
    return Graph(n, edges, x, w)


def read_graph(path):
    """Read a graph from ``.json`` or edge-list ``.csv`` (anything else is tried as CSV)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            return graph_from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"{path}: {exc}") from None
    return parse_edge_csv(text)


def parse_edge_csv(text):
    """Rows ``u,v[,w]``; an optional header and ``# n=<int>`` comment line."""
    n = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            body = s[1:].strip()
            if body.startswith("n="):
                n = int(body[2:])
            continue
        parts = [p.strip() for p in next(csv.reader([s]))]
        if not rows and not parts[0].lstrip("-").isdigit():
            continue  # header
        if len(parts) not in (2, 3):
            raise GraphFormatError(f"line {lineno}: expected u,v[,w]")
        try:
            rows.append((int(parts[0]), int(parts[1]), float(parts[2]) if len(parts) == 3 else None))
        except ValueError:
            raise GraphFormatError(f"line {lineno}: not a number") from None
    weighted = {r[2] is not None for r in rows}
    if len(weighted) > 1:
        raise GraphFormatError("either all edges carry a weight or none does")
    edges = np.array([r[:2] for r in rows], dtype=np.int64).reshape(-1, 2)
    if n is None:
        n = int(edges.max()) + 1 if edges.size else 0
    w = [r[2] for r in rows] if weighted == {True} else None
    return Graph(n, edges, None, w)


def write_graph(g, path):
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(graph_to_dict(g)) + "\n")
        return
    if g.x is not None:
        raise GraphFormatError("edge-list CSV cannot carry vertex weights; use JSON")
    buf = io.StringIO()
    buf.write(f"# n={g.n}\n")
    wr = csv.writer(buf, lineterminator="\n")
    for i, (u, v) in enumerate(g.edges):
        wr.writerow([u, v] if g.w is None else [u, v, repr(float(g.w[i]))])
    path.write_text(buf.getvalue())


def format_table(rows, columns, fmt="csv", meta=None):
    """Render dict rows; CSV puts ``meta`` on a leading ``#`` JSON line."""
    if fmt == "json":
        return json.dumps({"config": meta, "rows": [{c: r.get(c) for c in columns} for r in rows]}, indent=1) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    if meta is not None:
        buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    wr = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    wr.writeheader()
    for r in rows:
        wr.writerow({c: _cell(r.get(c)) for c in columns})
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


def read_table(text):
    """Inverse of ``format_table`` for CSV: returns ``(meta, rows)``."""
    lines = text.splitlines()
    meta = None
    if lines and lines[0].startswith("# "):
        meta = json.loads(lines[0][2:])
        lines = lines[1:]
    return meta, list(csv.DictReader(lines))
