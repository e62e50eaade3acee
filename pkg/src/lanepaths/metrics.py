"""Graph-vs-graph scores: GEO, TOPO, APLS, SDA and Graph IoU.

All distances are in RoI pixels.  Matching is greedy, closest pair first.
Default radii are assumptions, not benchmark-calibrated values.
"""
from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np
from scipy.spatial.distance import cdist

from .graph import LaneGraph, split_nodes


class MetricWarning(UserWarning):
    pass


@dataclass(frozen=True)
class MetricConfig:
    interp_dist: float = 5.0
    match_dist: float = 8.0
    topo_radius: float = 50.0
    sda_thresholds: tuple[float, ...] = (20.0, 50.0)
    lane_halfwidth: float = 5.0
    raster_extent: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "sda_thresholds", tuple(float(t) for t in self.sda_thresholds))
        for name in ("interp_dist", "match_dist", "topo_radius", "lane_halfwidth"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive")
        if not self.sda_thresholds or any(t <= 0 for t in self.sda_thresholds):
            raise ValueError("sda_thresholds must be positive")
        if list(self.sda_thresholds) != sorted(self.sda_thresholds):
            raise ValueError("sda_thresholds must be sorted ascending")
        if self.raster_extent is not None:
            w, h = self.raster_extent
            if w <= 0 or h <= 0:
                raise ValueError("raster_extent must be positive")
            object.__setattr__(self, "raster_extent", (int(math.ceil(w)), int(math.ceil(h))))


@dataclass(frozen=True)
class MetricReport:
    topo_precision: float
    topo_recall: float
    geo_precision: float
    geo_recall: float
    apls: float
    sda: dict[float, float] = field(default_factory=dict)
    graph_iou: float = 0.0

    def as_dict(self) -> dict:
        d = asdict(self)
        d["sda"] = {f"{k:g}": v for k, v in sorted(self.sda.items())}
        return d

    def values(self) -> list[float]:
        return [
            self.topo_precision,
            self.topo_recall,
            self.geo_precision,
            self.geo_recall,
            self.apls,
            *self.sda.values(),
            self.graph_iou,
        ]


# -- dense sampling ----------------------------------------------------------


class DenseGraph:
    """Points sampled along the reachable edges of a lane graph.

    ``parents[i]`` is the source edge of an interior sample, or None for a
    sample sitting on a graph node.  ``succ[i]`` lists ``(j, length)``.
    """

    def __init__(self, points: np.ndarray, parents: list, succ: list[list[tuple[int, float]]]):
        self.points = points
        self.parents = parents
        self.succ = succ

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[tuple[tuple[float, float], tuple[int, int] | None]]:
        for p, e in zip(self.points.tolist(), self.parents):
            yield (p[0], p[1]), e

    def reachable_within(self, start: int, radius: float) -> list[int]:
        return sorted(_dijkstra(self.succ, start, radius))


def interpolate_graph(g: LaneGraph, interp_dist: float) -> DenseGraph:
    if interp_dist <= 0:
        raise ValueError("interp_dist must be positive")
    nodes = sorted(g.reachable())
    index = {v: i for i, v in enumerate(nodes)}
    pts = [g.position(v) for v in nodes]
    parents: list = [None] * len(nodes)
    succ: list[list[tuple[int, float]]] = [[] for _ in nodes]
    for a, b in sorted(set(g.reachable_edges())):
        (x0, y0), (x1, y1) = g.position(a), g.position(b)
        length = math.hypot(x1 - x0, y1 - y0)
        k = max(1, math.ceil(length / interp_dist))
        step = length / k
        prev = index[a]
        for j in range(1, k):
            f = j / k
            pts.append((x0 + (x1 - x0) * f, y0 + (y1 - y0) * f))
            parents.append((a, b))
            succ.append([])
            succ[prev].append((len(pts) - 1, step))
            prev = len(pts) - 1
        succ[prev].append((index[b], step))
    arr = np.array(pts, dtype=float).reshape(-1, 2)
    return DenseGraph(arr, parents, succ)


def _dijkstra(succ, start: int, limit: float = math.inf) -> dict[int, float]:
    dist = {start: 0.0}
    heap = [(0.0, start)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for w, length in succ[v]:
            nd = d + length
            if nd <= limit and nd < dist.get(w, math.inf):
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


# -- matching ----------------------------------------------------------------


def greedy_match(a: np.ndarray, b: np.ndarray, radius: float) -> list[tuple[int, int]]:
    """One-to-one closest-first matching of rows of ``a`` to rows of ``b``.

    Equal distances are ordered by the coordinates of the two points, not by
    which side they came from, so swapping ``a`` and ``b`` yields the mirrored
    matching.
    """
    if len(a) == 0 or len(b) == 0:
        return []
    d = cdist(a, b)
    ii, jj = np.nonzero(d <= radius)
    if len(ii) == 0:
        return []
    pa, pb = a[ii], b[jj]
    a_first = (pa[:, 0] < pb[:, 0]) | ((pa[:, 0] == pb[:, 0]) & (pa[:, 1] <= pb[:, 1]))
    lo = np.where(a_first[:, None], pa, pb)
    hi = np.where(a_first[:, None], pb, pa)
    order = np.lexsort((hi[:, 1], hi[:, 0], lo[:, 1], lo[:, 0], d[ii, jj]))
    used_a: set[int] = set()
    used_b: set[int] = set()
    out = []
    for k in order.tolist():
        i, j = int(ii[k]), int(jj[k])
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        out.append((i, j))
    return out


def _pr(n_matched: int, n_pred: int, n_gt: int) -> tuple[float, float]:
    if n_pred == 0 and n_gt == 0:
        return 1.0, 1.0
    if n_pred == 0:
        return 1.0, 0.0
    if n_gt == 0:
        return 0.0, 1.0
    return n_matched / n_pred, n_matched / n_gt


# -- GEO / TOPO ----------------------------------------------------------------


def geo_scores(pred: LaneGraph, gt: LaneGraph, cfg: MetricConfig = MetricConfig()) -> tuple[float, float]:
    dp = interpolate_graph(pred, cfg.interp_dist)
    dg = interpolate_graph(gt, cfg.interp_dist)
    m = greedy_match(dp.points, dg.points, cfg.match_dist)
    return _pr(len(m), len(dp), len(dg))


def topo_scores(pred: LaneGraph, gt: LaneGraph, cfg: MetricConfig = MetricConfig()) -> tuple[float, float]:
    """Local-subgraph precision/recall averaged over GEO-matched points.

    For each matched pair the samples forward-reachable within
    ``topo_radius`` (along the graph) are compared with the GEO rule.
    Unmatched samples add zero to the sums.
    """
    dp = interpolate_graph(pred, cfg.interp_dist)
    dg = interpolate_graph(gt, cfg.interp_dist)
    if len(dp) == 0 or len(dg) == 0:
        return _pr(0, len(dp), len(dg))
    matches = greedy_match(dp.points, dg.points, cfg.match_dist)
    p_sum = r_sum = 0.0
    for i, j in matches:
        sp = dp.reachable_within(i, cfg.topo_radius)
        sg = dg.reachable_within(j, cfg.topo_radius)
        n = len(greedy_match(dp.points[sp], dg.points[sg], cfg.match_dist))
        p_sum += n / len(sp)
        r_sum += n / len(sg)
    return p_sum / len(dp), r_sum / len(dg)


# -- APLS ----------------------------------------------------------------------


def _node_arrays(g: LaneGraph):
    nodes = sorted(g.reachable())
    index = {v: i for i, v in enumerate(nodes)}
    pts = np.array([g.position(v) for v in nodes], dtype=float).reshape(-1, 2)
    succ: list[list[tuple[int, float]]] = [[] for _ in nodes]
    for a, b in sorted(set(g.reachable_edges())):
        succ[index[a]].append((index[b], g.edge_length(a, b)))
    return pts, succ


def _apls_direction(src, dst, match_dist: float) -> tuple[float, int]:
    """Sum of per-pair scores from ``src`` onto ``dst`` and the pair count."""
    s_pts, s_succ = src
    d_pts, d_succ = dst
    if len(d_pts):
        dd = cdist(s_pts, d_pts)
        near = np.argmin(dd, axis=1)
        ok = dd[np.arange(len(s_pts)), near] <= match_dist
        image = [int(near[i]) if ok[i] else None for i in range(len(s_pts))]
    else:
        image = [None] * len(s_pts)
    d_cache: dict[int, dict[int, float]] = {}
    total = 0.0
    count = 0
    for a in range(len(s_pts)):
        lengths = _dijkstra(s_succ, a)
        for b, length in sorted(lengths.items()):
            if b == a:
                continue
            count += 1
            a2, b2 = image[a], image[b]
            if a2 is None or b2 is None:
                continue
            if a2 not in d_cache:
                d_cache[a2] = _dijkstra(d_succ, a2)
            if b2 not in d_cache[a2] or (a2 == b2 and length > 0):
                continue
            length2 = d_cache[a2][b2]
            if length == 0.0:
                total += 1.0 if length2 == 0.0 else 0.0
            else:
                total += 1.0 - min(1.0, abs(length - length2) / length)
    return total, count


def apls(pred: LaneGraph, gt: LaneGraph, cfg: MetricConfig = MetricConfig()) -> float:
    """Symmetric average path length similarity over node pairs.

    Every ordered pair of reachable nodes joined by a directed path is
    scored by the relative difference of its shortest-path length and that
    of the nearest counterpart nodes in the other graph.
    """
    ap, ag = _node_arrays(pred), _node_arrays(gt)
    if len(ap[0]) == 0 and len(ag[0]) == 0:
        return 1.0
    if len(ap[0]) == 0 or len(ag[0]) == 0:
        return 0.0
    s1, c1 = _apls_direction(ag, ap, cfg.match_dist)
    s2, c2 = _apls_direction(ap, ag, cfg.match_dist)
    if c1 and c2:
        return 0.5 * (s1 / c1 + s2 / c2)
    if c1 or c2:
        return (s1 + s2) / (c1 + c2)
    # both graphs are single points
    return 1.0 if float(cdist(ap[0], ag[0]).min()) <= cfg.match_dist else 0.0


# -- SDA -----------------------------------------------------------------------


def sda(pred: LaneGraph, gt: LaneGraph, threshold: float) -> float:
    gs = sorted(split_nodes(gt))
    if not gs:
        return 1.0
    ps = sorted(split_nodes(pred))
    a = np.array([pred.position(v) for v in ps], dtype=float).reshape(-1, 2)
    b = np.array([gt.position(v) for v in gs], dtype=float).reshape(-1, 2)
    return len(greedy_match(a, b, threshold)) / len(gs)


# -- Graph IoU -------------------------------------------------------------------


def _resolve_extent(pred: LaneGraph, gt: LaneGraph, cfg: MetricConfig) -> tuple[int, int]:
    ext = cfg.raster_extent or gt.extent or pred.extent
    if ext is None:
        raise ValueError("graph_iou needs a raster extent")
    return int(math.ceil(ext[0])), int(math.ceil(ext[1]))


def rasterize(g: LaneGraph, extent: tuple[int, int], halfwidth: float) -> np.ndarray:
    """Boolean (h, w) mask of pixels whose centre lies within ``halfwidth`` of an edge."""
    w, h = extent
    mask = np.zeros((h, w), dtype=bool)
    outside = [v for v in g.reachable() if not (0 <= g.position(v)[0] <= w and 0 <= g.position(v)[1] <= h)]
    if outside:
        warnings.warn(f"{len(outside)} node(s) outside the raster extent are clipped", MetricWarning, stacklevel=3)
    for a, b in sorted(set(g.reachable_edges())):
        p0 = np.array(g.position(a))
        p1 = np.array(g.position(b))
        lo = np.floor(np.minimum(p0, p1) - halfwidth).astype(int)
        hi = np.ceil(np.maximum(p0, p1) + halfwidth).astype(int)
        c0, r0 = max(lo[0], 0), max(lo[1], 0)
        c1, r1 = min(hi[0] + 1, w), min(hi[1] + 1, h)
        if c0 >= c1 or r0 >= r1:
            continue
        cx, cy = np.meshgrid(np.arange(c0, c1) + 0.5, np.arange(r0, r1) + 0.5)
        d = _segment_distance(cx, cy, p0, p1)
        mask[r0:r1, c0:c1] |= d <= halfwidth
    return mask


def _segment_distance(x: np.ndarray, y: np.ndarray, p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    v = p1 - p0
    vv = float(v @ v)
    if vv == 0.0:
        return np.hypot(x - p0[0], y - p0[1])
    t = np.clip(((x - p0[0]) * v[0] + (y - p0[1]) * v[1]) / vv, 0.0, 1.0)
    return np.hypot(x - (p0[0] + t * v[0]), y - (p0[1] + t * v[1]))


def graph_iou(pred: LaneGraph, gt: LaneGraph, cfg: MetricConfig = MetricConfig()) -> float:
    extent = _resolve_extent(pred, gt, cfg)
    mp = rasterize(pred, extent, cfg.lane_halfwidth)
    mg = rasterize(gt, extent, cfg.lane_halfwidth)
    union = int(np.count_nonzero(mp | mg))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(mp & mg)) / union


def evaluate(pred: LaneGraph, gt: LaneGraph, cfg: MetricConfig = MetricConfig()) -> MetricReport:
    tp, tr = topo_scores(pred, gt, cfg)
    gp, gr = geo_scores(pred, gt, cfg)
    return MetricReport(
        topo_precision=tp,
        topo_recall=tr,
        geo_precision=gp,
        geo_recall=gr,
        apls=apls(pred, gt, cfg),
        sda={t: sda(pred, gt, t) for t in cfg.sda_thresholds},
        graph_iou=graph_iou(pred, gt, cfg),
    )
