"""Seeded synthetic successor graphs for tests and benchmarks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import LaneGraph

MAX_SPLITS = 6
MAX_DEPTH = 50


@dataclass(frozen=True)
class SyntheticSpec:
    """Binary split tree growing upward from the bottom centre.

    ``n_splits`` is the number of split levels (2**n_splits leaves) and
    ``depth`` the number of edges in every branch between splits.
    ``jitter`` is the half-width in px of uniform noise on non-root nodes.
    """

    n_splits: int = 1
    depth: int = 3
    jitter: float = 0.0
    extent: tuple[float, float] = (256.0, 256.0)

    def step(self) -> float:
        return 0.9 * self.extent[1] / ((self.n_splits + 1) * self.depth)

    def check(self) -> None:
        if not 0 <= self.n_splits <= MAX_SPLITS:
            raise ValueError(f"n_splits must be in 0..{MAX_SPLITS}")
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in 1..{MAX_DEPTH}")
        w, h = self.extent
        if w < 8 or h < 8:
            raise ValueError("extent must be at least 8x8 px")
        if not 0 <= self.jitter <= self.step() / 4:
            raise ValueError(f"jitter must be in [0, {self.step() / 4:.3g}] for this spec")


def generate_synthetic(seed: int, spec: SyntheticSpec = SyntheticSpec()) -> LaneGraph:
    spec.check()
    rng = np.random.default_rng(seed)
    w, h = map(float, spec.extent)
    dy = spec.step()
    pos: dict[int, tuple[float, float]] = {0: (w / 2.0, h)}
    edges: list[tuple[int, int]] = []

    # (start node, level, lateral direction); direction 0 for the trunk
    todo = [(0, 0, 0)]
    while todo:
        start, level, direction = todo.pop(0)
        spread = 0.225 * w / 2 ** max(level - 1, 0) if direction else 0.0
        x0, y0 = pos[start]
        prev = start
        for k in range(1, spec.depth + 1):
            nid = len(pos)
            bend = rng.uniform(-0.15, 0.15) * dy
            pos[nid] = (x0 + direction * spread * k / spec.depth + (bend if direction == 0 else 0.0), y0 - dy * k)
            edges.append((prev, nid))
            prev = nid
        if level < spec.n_splits:
            todo.append((prev, level + 1, -1))
            todo.append((prev, level + 1, 1))

    if spec.jitter > 0:
        for nid in range(1, len(pos)):
            jx, jy = rng.uniform(-spec.jitter, spec.jitter, 2)
            x, y = pos[nid]
            pos[nid] = (x + jx, y + jy)
    pos = {k: (float(np.clip(x, 0.0, w)), float(np.clip(y, 0.0, h))) for k, (x, y) in pos.items()}
    return LaneGraph(pos, edges, 0, (w, h))


def jitter_graph(g: LaneGraph, sigma: float, rng: np.random.Generator) -> LaneGraph:
    """Same topology, every node displaced by isotropic Gaussian noise."""
    noise = rng.standard_normal((len(g), 2)) * sigma
    pos = {v: (x + dx, y + dy) for (v, (x, y)), (dx, dy) in zip(((v, g.position(v)) for v in g.node_ids), noise)}
    return LaneGraph(pos, g.edges, g.root, g.extent)


def min_node_distance(g: LaneGraph) -> float:
    pts = np.array([g.position(v) for v in g.node_ids])
    if len(pts) < 2:
        return float("inf")
    d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    d[np.diag_indices(len(pts))] = np.inf
    return float(d.min())
