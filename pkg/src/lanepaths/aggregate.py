"""Fuse scored path proposals into one successor lane graph."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curves import (
    DEFAULT_POLYLINE_POINTS,
    BezierCurve,
    Polyline,
    bezier_sample,
    resample_polyline,
)
from .graph import LaneGraph, has_path
from .matching import PathProposal

DEFAULT_P_MIN = 0.5
DEFAULT_D_MAX = 10.0


class AggregationWarning(UserWarning):
    pass


class EmptyGraphError(ValueError):
    code = "EMPTY_GRAPH"

    def __init__(self, message="no path proposal survived filtering"):
        super().__init__(f"[{self.code}] {message}")


@dataclass(frozen=True)
class AggregationConfig:
    p_min: float = DEFAULT_P_MIN
    d_max: float = DEFAULT_D_MAX
    n_cp_out: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.p_min) and 0.0 <= self.p_min <= 1.0):
            raise ValueError("p_min must lie in [0, 1]")
        if not (math.isfinite(self.d_max) and self.d_max >= 0.0):
            raise ValueError("d_max must be finite and >= 0")
        if self.n_cp_out is not None and self.n_cp_out < 2:
            raise ValueError("n_cp_out must be at least 2")


def filter_paths(props: Sequence[PathProposal], p_min: float) -> list[PathProposal]:
    return [p for p in props if p.likelihood >= p_min]


def aggregate(
    paths: Sequence[tuple[float, Polyline]],
    cfg: AggregationConfig = AggregationConfig(),
    roi_extent: tuple[float, float] | None = None,
) -> LaneGraph:
    """Merge pixel-space polylines into a DAG, most likely path first.

    Points of each later path snap to the nearest node that existed before
    that path was added when it lies within ``cfg.d_max``; otherwise they
    become new nodes.  Consecutive points are then joined by directed edges,
    skipping self-loops, duplicates, and edges that would close a cycle.
    """
    if not paths:
        raise EmptyGraphError()
    order = sorted(range(len(paths)), key=lambda k: -paths[k][0])  # stable: ties keep input order

    pos: list[tuple[float, float]] = []
    edges: set[tuple[int, int]] = set()
    dropped = 0
    for rank, k in enumerate(order):
        pts = np.asarray(paths[k][1].points if isinstance(paths[k][1], Polyline) else paths[k][1], dtype=float)
        if rank == 0:
            ids = list(range(len(pts)))
            pos.extend(map(tuple, pts.tolist()))
        else:
            existing = np.array(pos)
            ids = []
            for x, y in pts.tolist():
                d = np.hypot(existing[:, 0] - x, existing[:, 1] - y)
                j = int(np.argmin(d))  # lowest id among equidistant nodes
                if d[j] <= cfg.d_max:
                    ids.append(j)
                else:
                    ids.append(len(pos))
                    pos.append((x, y))
        for a, b in zip(ids, ids[1:]):
            if a == b or (a, b) in edges:
                continue
            if _creates_cycle(edges, a, b):
                dropped += 1
                continue
            edges.add((a, b))

    if dropped:
        warnings.warn(f"dropped {dropped} edge(s) that would have closed a cycle", AggregationWarning, stacklevel=2)
    g = LaneGraph(dict(enumerate(pos)), sorted(edges), 0, roi_extent)
    if roi_extent is not None:
        bottom_center = (roi_extent[0] / 2.0, roi_extent[1])
        dev = math.dist(pos[0], bottom_center)
        if dev > cfg.d_max:
            warnings.warn(
                f"root {pos[0]} is {dev:.1f} px from the RoI bottom centre", AggregationWarning, stacklevel=2
            )
    return g


def _creates_cycle(edges: set[tuple[int, int]], a: int, b: int) -> bool:
    # adding a->b closes a cycle iff b already reaches a
    succ: dict[int, list[int]] = {}
    for s, t in edges:
        succ.setdefault(s, []).append(t)
    seen = {b}
    todo = [b]
    while todo:
        v = todo.pop()
        if v == a:
            return True
        for w in succ.get(v, ()):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return False


def decode_proposal(prop: PathProposal, representation: str, n_cp_out: int | None) -> Polyline:
    """Normalised polyline for one proposal."""
    if representation == "bezier":
        return bezier_sample(BezierCurve(prop.control_points), n_cp_out or DEFAULT_POLYLINE_POINTS)
    if representation == "polyline":
        line = Polyline(prop.control_points)
        return resample_polyline(line, n_cp_out) if n_cp_out else line
    raise ValueError(f"unknown representation {representation!r}")


def proposals_to_graph(
    props: Sequence[PathProposal],
    representation: str,
    cfg: AggregationConfig,
    roi_extent: tuple[float, float],
) -> LaneGraph:
    """Threshold, decode, denormalise to pixels and aggregate."""
    kept = filter_paths(props, cfg.p_min)
    if not kept:
        raise EmptyGraphError()
    scale = np.array([float(roi_extent[0]), float(roi_extent[1])])
    paths = []
    for p in kept:
        line = decode_proposal(p, representation, cfg.n_cp_out)
        paths.append((p.likelihood, Polyline(line.points * scale)))
    return aggregate(paths, cfg, roi_extent)
