"""JSON documents exchanged between CLI subcommands.

Graph and path documents hold pixel coordinates; proposal documents hold
normalised [0, 1] coordinates, matching what a prediction head emits.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .graph import LaneGraph, Node, errors
from .matching import GroundTruthPath, PathProposal

SCHEMA_VERSION = "1.0"
SUPPORTED_VERSIONS = {"1.0"}
REPRESENTATIONS = ("polyline", "bezier")


class DocumentError(ValueError):
    """Malformed or invalid document; ``where`` names the offending field."""

    def __init__(self, message: str, where: str | None = None, source: str | os.PathLike | None = None):
        self.where = where
        self.source = source
        prefix = f"{source}: " if source else ""
        loc = f"{where}: " if where else ""
        super().__init__(f"{prefix}{loc}{message}")


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file in the target directory and rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def read_json(path: str | os.PathLike) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read: {exc.strerror}", source=path) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}", source=path) from exc


# -- field helpers -------------------------------------------------------------


def _field(obj, key: str, where: str):
    if not isinstance(obj, dict):
        raise DocumentError("expected an object", where)
    if key not in obj:
        raise DocumentError(f"missing field {key!r}", where)
    return obj[key]


def _int(val, where: str) -> int:
    if isinstance(val, bool) or not isinstance(val, int):
        raise DocumentError(f"expected an integer, got {val!r}", where)
    return val


def _num(val, where: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise DocumentError(f"expected a finite number, got {val!r}", where)
    return float(val)


def _list(val, where: str) -> list:
    if not isinstance(val, list):
        raise DocumentError("expected a list", where)
    return val


def _version(doc, where: str = "schema_version") -> None:
    v = _field(doc, "schema_version", "")
    if v not in SUPPORTED_VERSIONS:
        raise DocumentError(f"unsupported schema version {v!r}", where)


def _extent(val, where: str = "extent") -> tuple[float, float]:
    val = _list(val, where)
    if len(val) != 2:
        raise DocumentError("expected [width, height]", where)
    w, h = _num(val[0], f"{where}[0]"), _num(val[1], f"{where}[1]")
    if w <= 0 or h <= 0:
        raise DocumentError("extent must be positive", where)
    return w, h


def _point(val, where: str) -> tuple[float, float]:
    val = _list(val, where)
    if len(val) != 2:
        raise DocumentError("expected [x, y]", where)
    return _num(val[0], f"{where}[0]"), _num(val[1], f"{where}[1]")


# -- graphs ----------------------------------------------------------------------


def graph_to_document(g: LaneGraph) -> dict:
    if g.extent is None:
        raise ValueError("graph documents need an extent")
    return {
        "schema_version": SCHEMA_VERSION,
        "extent": list(g.extent),
        "root": g.root,
        "nodes": [{"id": n.id, "x": n.x, "y": n.y} for n in g.nodes],
        "edges": [{"src": a, "dst": b} for a, b in g.edges],
    }


def document_to_graph(doc, source=None) -> LaneGraph:
    try:
        _version(doc)
        extent = _extent(_field(doc, "extent", ""))
        root = _field(doc, "root", "")
        if root is not None:
            root = _int(root, "root")
        nodes = []
        seen = set()
        for k, item in enumerate(_list(_field(doc, "nodes", ""), "nodes")):
            where = f"nodes[{k}]"
            nid = _int(_field(item, "id", where), f"{where}.id")
            if nid < 0:
                raise DocumentError(f"negative node id {nid}", f"{where}.id")
            if nid in seen:
                raise DocumentError(f"duplicate node id {nid}", f"{where}.id")
            seen.add(nid)
            nodes.append(Node(nid, _num(_field(item, "x", where), f"{where}.x"), _num(_field(item, "y", where), f"{where}.y")))
        edges = []
        for k, item in enumerate(_list(_field(doc, "edges", ""), "edges")):
            where = f"edges[{k}]"
            edges.append((_int(_field(item, "src", where), f"{where}.src"), _int(_field(item, "dst", where), f"{where}.dst")))
    except DocumentError as exc:
        raise DocumentError(str(exc), exc.where, source) from None
    g = LaneGraph(nodes, edges, root, extent)
    bad = errors(g)
    if bad:
        first = bad[0]
        raise DocumentError(f"validation failure: {'; '.join(str(v) for v in bad)}", first.kind, source)
    return g


def save_graph(g: LaneGraph, path) -> None:
    atomic_write_text(path, dumps(graph_to_document(g)))


def load_graph(path) -> LaneGraph:
    return document_to_graph(read_json(path), source=path)


# -- decomposed paths ------------------------------------------------------------


@dataclass(frozen=True)
class PathSet:
    extent: tuple[float, float]
    root: int | None
    node_paths: tuple[tuple[int, ...], ...]
    points: tuple[tuple[tuple[float, float], ...], ...]


def pathset_to_document(ps: PathSet) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "paths",
        "extent": list(ps.extent),
        "root": ps.root,
        "paths": [
            {"node_ids": list(ids), "points": [list(p) for p in pts]}
            for ids, pts in zip(ps.node_paths, ps.points)
        ],
    }


def document_to_pathset(doc, source=None) -> PathSet:
    try:
        _version(doc)
        if _field(doc, "kind", "") != "paths":
            raise DocumentError("expected kind 'paths'", "kind")
        extent = _extent(_field(doc, "extent", ""))
        root = _field(doc, "root", "")
        node_paths, points = [], []
        for k, item in enumerate(_list(_field(doc, "paths", ""), "paths")):
            where = f"paths[{k}]"
            ids = [_int(v, f"{where}.node_ids[{i}]") for i, v in enumerate(_list(_field(item, "node_ids", where), f"{where}.node_ids"))]
            pts = [_point(v, f"{where}.points[{i}]") for i, v in enumerate(_list(_field(item, "points", where), f"{where}.points"))]
            if len(ids) != len(pts) or not pts:
                raise DocumentError("node_ids and points must be non-empty and of equal length", where)
            node_paths.append(tuple(ids))
            points.append(tuple(pts))
    except DocumentError as exc:
        raise DocumentError(str(exc), exc.where, source) from None
    return PathSet(extent, root, tuple(node_paths), tuple(points))


def save_paths(ps: PathSet, path) -> None:
    atomic_write_text(path, dumps(pathset_to_document(ps)))


def load_paths(path) -> PathSet:
    return document_to_pathset(read_json(path), source=path)


# -- proposals ---------------------------------------------------------------------


@dataclass(frozen=True)
class ProposalSet:
    """Proposals (or ground-truth paths, likelihood 1) in normalised coordinates.

    ``n_cp`` is None when paths keep their own vertex counts.
    """

    representation: str
    n_cp: int | None
    proposals: tuple[PathProposal, ...]

    def ground_truth(self) -> list[GroundTruthPath]:
        return [GroundTruthPath(p.control_points) for p in self.proposals]


def proposalset_to_document(ps: ProposalSet) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "representation": ps.representation,
        "n_cp": ps.n_cp,
        "proposals": [
            {"likelihood": p.likelihood, "points": p.control_points.tolist()} for p in ps.proposals
        ],
    }


def document_to_proposalset(doc, source=None) -> ProposalSet:
    try:
        _version(doc)
        rep = _field(doc, "representation", "")
        if rep not in REPRESENTATIONS:
            raise DocumentError(f"representation must be one of {REPRESENTATIONS}", "representation")
        n_cp = _field(doc, "n_cp", "")
        if n_cp is not None:
            n_cp = _int(n_cp, "n_cp")
            if n_cp < 2:
                raise DocumentError("n_cp must be at least 2", "n_cp")
        props = []
        for k, item in enumerate(_list(_field(doc, "proposals", ""), "proposals")):
            where = f"proposals[{k}]"
            lik = _num(_field(item, "likelihood", where), f"{where}.likelihood")
            if not 0.0 <= lik <= 1.0:
                raise DocumentError(f"likelihood {lik} outside [0, 1]", f"{where}.likelihood")
            raw = _list(_field(item, "points", where), f"{where}.points")
            pts = [_point(v, f"{where}.points[{i}]") for i, v in enumerate(raw)]
            if n_cp is not None and len(pts) != n_cp:
                raise DocumentError(f"expected {n_cp} points, got {len(pts)}", f"{where}.points")
            if len(pts) < 2:
                raise DocumentError("a path needs at least 2 points", f"{where}.points")
            if rep == "polyline" and any(not (0.0 <= c <= 1.0) for p in pts for c in p):
                raise DocumentError("polyline points must be normalised to [0, 1]", f"{where}.points")
            props.append(PathProposal(lik, pts))
    except DocumentError as exc:
        raise DocumentError(str(exc), exc.where, source) from None
    return ProposalSet(rep, n_cp, tuple(props))


def save_proposals(ps: ProposalSet, path) -> None:
    atomic_write_text(path, dumps(proposalset_to_document(ps)))


def load_proposals(path) -> ProposalSet:
    return document_to_proposalset(read_json(path), source=path)
