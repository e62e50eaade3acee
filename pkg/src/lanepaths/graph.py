"""Directed lane graph with an ego root node.

Positions live in RoI pixel space (x right, y down).  A graph is an
immutable value: every query below is a pure function of it.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Mapping

Point = tuple[float, float]
Edge = tuple[int, int]


class UnknownNodeError(KeyError):
    pass


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float

    @property
    def position(self) -> Point:
        return (self.x, self.y)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.severity}: {self.kind}: {self.message}"


class LaneGraph:
    """Lane graph value.

    ``nodes`` is either an iterable of :class:`Node` or a mapping from id to
    an ``(x, y)`` pair.  Structural problems (cycles, dangling edges, ...) are
    accepted here and reported by :func:`validate`; only duplicate node ids
    are rejected outright because they cannot be represented.
    """

    __slots__ = ("_pos", "_edges", "_succ", "_pred", "root", "extent", "_reach")

    def __init__(
        self,
        nodes: Iterable[Node] | Mapping[int, Point],
        edges: Iterable[Edge] = (),
        root: int | None = None,
        extent: tuple[float, float] | None = None,
    ):
        pos: dict[int, Point] = {}
        if isinstance(nodes, Mapping):
            items = [(int(k), (float(v[0]), float(v[1]))) for k, v in nodes.items()]
        else:
            items = [(int(n.id), (float(n.x), float(n.y))) for n in nodes]
        for nid, p in items:
            if nid in pos:
                raise ValueError(f"duplicate node id {nid}")
            if nid < 0:
                raise ValueError(f"negative node id {nid}")
            pos[nid] = p
        self._pos = dict(sorted(pos.items()))
        self._edges = tuple(sorted((int(a), int(b)) for a, b in edges))
        succ: dict[int, list[int]] = {v: [] for v in self._pos}
        pred: dict[int, list[int]] = {v: [] for v in self._pos}
        for a, b in self._edges:
            if a in succ and b in pred:
                succ[a].append(b)
                pred[b].append(a)
        self._succ = {v: tuple(sorted(set(s))) for v, s in succ.items()}
        self._pred = {v: tuple(sorted(set(s))) for v, s in pred.items()}
        self.root = None if root is None else int(root)
        self.extent = None if extent is None else (float(extent[0]), float(extent[1]))
        self._reach: frozenset[int] | None = None

    @classmethod
    def empty(cls, extent: tuple[float, float] | None = None) -> "LaneGraph":
        return cls({}, (), None, extent)

    def __setattr__(self, name, value):
        if name != "_reach" and hasattr(self, name):
            raise AttributeError("LaneGraph is immutable")
        object.__setattr__(self, name, value)

    # -- basic accessors -------------------------------------------------
    @property
    def node_ids(self) -> tuple[int, ...]:
        return tuple(self._pos)

    @property
    def nodes(self) -> tuple[Node, ...]:
        return tuple(Node(i, p[0], p[1]) for i, p in self._pos.items())

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    def position(self, v: int) -> Point:
        try:
            return self._pos[v]
        except KeyError:
            raise UnknownNodeError(v) from None

    def __contains__(self, v) -> bool:
        return v in self._pos

    def __len__(self) -> int:
        return len(self._pos)

    def is_empty(self) -> bool:
        return not self._pos

    def successors(self, v: int) -> list[int]:
        if v not in self._succ:
            raise UnknownNodeError(v)
        return list(self._succ[v])

    def predecessors(self, v: int) -> list[int]:
        if v not in self._pred:
            raise UnknownNodeError(v)
        return list(self._pred[v])

    def out_degree(self, v: int) -> int:
        return len(self.successors(v))

    def edge_length(self, a: int, b: int) -> float:
        (x0, y0), (x1, y1) = self.position(a), self.position(b)
        return math.hypot(x1 - x0, y1 - y0)

    def reachable(self) -> frozenset[int]:
        """Node ids reachable from the root (root included)."""
        if self._reach is None:
            seen: set[int] = set()
            if self.root is not None and self.root in self._pos:
                seen.add(self.root)
                todo = deque([self.root])
                while todo:
                    v = todo.popleft()
                    for w in self._succ[v]:
                        if w not in seen:
                            seen.add(w)
                            todo.append(w)
            self._reach = frozenset(seen)
        return self._reach

    def reachable_edges(self) -> tuple[Edge, ...]:
        reach = self.reachable()
        return tuple(e for e in self._edges if e[0] in reach and e[1] in reach)

    def reachable_subgraph(self) -> "LaneGraph":
        reach = self.reachable()
        return LaneGraph(
            {v: p for v, p in self._pos.items() if v in reach},
            sorted(set(self.reachable_edges())),
            self.root,
            self.extent,
        )

    def canonical(self) -> tuple:
        """Hashable canonical form used for equality."""
        return (tuple(self._pos.items()), self._edges, self.root, self.extent)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaneGraph):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())

    def __repr__(self) -> str:
        return (
            f"LaneGraph(n_nodes={len(self._pos)}, n_edges={len(self._edges)}, "
            f"root={self.root}, extent={self.extent})"
        )


def validate(g: LaneGraph) -> list[Violation]:
    """Return every invariant violation of ``g``.

    Errors break a LaneGraph invariant.  Nodes unreachable from the root
    are reported with severity ``"warning"`` only.
    """
    out: list[Violation] = []
    ids = set(g.node_ids)
    if g.root is None:
        if ids:
            out.append(Violation("root", "graph has nodes but no root"))
    elif g.root not in ids:
        out.append(Violation("root", f"root {g.root} is not a node"))

    for v in g.node_ids:
        x, y = g.position(v)
        if not (math.isfinite(x) and math.isfinite(y)):
            out.append(Violation("position", f"node {v} has non-finite position"))
        elif g.extent is not None and (x < 0 or y < 0):
            out.append(Violation("position", f"node {v} has negative coordinate"))

    seen: set[Edge] = set()
    for a, b in g.edges:
        if a not in ids or b not in ids:
            out.append(Violation("dangling edge", f"edge ({a}, {b}) references a missing node"))
        if a == b:
            out.append(Violation("self-loop", f"self-loop on node {a}"))
        if (a, b) in seen:
            out.append(Violation("duplicate edge", f"edge ({a}, {b}) appears twice"))
        seen.add((a, b))

    ts = TopologicalSorter({v: [a for a in g.predecessors(v) if a != v] for v in ids})
    try:
        ts.prepare()
    except CycleError as exc:
        cyc = exc.args[1] if len(exc.args) > 1 else []
        out.append(Violation("cycle", f"cycle through nodes {list(cyc)}"))

    if g.root in ids:
        unreachable = sorted(ids - g.reachable())
        if unreachable:
            out.append(
                Violation("unreachable", f"nodes {unreachable} are unreachable from root", "warning")
            )
    return out


def errors(g: LaneGraph) -> list[Violation]:
    return [v for v in validate(g) if v.severity == "error"]


def is_valid(g: LaneGraph) -> bool:
    return not errors(g)


def successors(g: LaneGraph, v: int) -> list[int]:
    return g.successors(v)


def terminal_nodes(g: LaneGraph) -> set[int]:
    return {v for v in g.reachable() if g.out_degree(v) == 0}


def split_nodes(g: LaneGraph) -> set[int]:
    return {v for v in g.reachable() if g.out_degree(v) >= 2}


def has_path(g: LaneGraph, src: int, dst: int) -> bool:
    if src == dst:
        return True
    seen = {src}
    todo = [src]
    while todo:
        v = todo.pop()
        for w in g.successors(v):
            if w == dst:
                return True
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return False
