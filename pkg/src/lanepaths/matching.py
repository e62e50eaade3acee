"""Set matching between ground-truth paths and path proposals, and the set loss.

Control points are in normalised [0, 1] image coordinates on both sides.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Sequence

import numpy as np

BCE_EPS = 1e-7
BRUTE_FORCE_MAX_ROWS = 8


class MatchingError(ValueError):
    pass


def _points(points) -> np.ndarray:
    arr = np.array(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 1:
        raise ValueError("control points must be a non-empty sequence of 2-D points")
    if not np.all(np.isfinite(arr)):
        raise ValueError("control points must be finite")
    arr.setflags(write=False)
    return arr


class GroundTruthPath:
    __slots__ = ("control_points",)

    def __init__(self, control_points):
        self.control_points = _points(control_points)

    @property
    def n_cp(self) -> int:
        return len(self.control_points)

    def __repr__(self) -> str:
        return f"GroundTruthPath(n_cp={self.n_cp})"


class PathProposal:
    """One model output: existence likelihood plus control points."""

    __slots__ = ("likelihood", "control_points")

    def __init__(self, likelihood: float, control_points):
        likelihood = float(likelihood)
        if not 0.0 <= likelihood <= 1.0:
            raise ValueError(f"likelihood {likelihood} outside [0, 1]")
        self.likelihood = likelihood
        self.control_points = _points(control_points)

    @property
    def n_cp(self) -> int:
        return len(self.control_points)

    def __repr__(self) -> str:
        return f"PathProposal(likelihood={self.likelihood}, n_cp={self.n_cp})"


@dataclass(frozen=True)
class MatchWeights:
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("alpha must be finite and > 0")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValueError("beta must be finite and >= 0")


@dataclass(frozen=True)
class Assignment:
    pairs: tuple[tuple[int, int], ...]
    total_cost: float

    def proposal_for(self, gt_index: int) -> int:
        return dict(self.pairs)[gt_index]


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    regression: float
    classification: float
    assignment: Assignment


def match_cost(gt: GroundTruthPath, prop: PathProposal, w: MatchWeights = MatchWeights()) -> float:
    """Summed L1 control-point distance plus the likelihood penalty.

    The likelihood term is added once per pair, not once per control point.
    """
    if gt.n_cp != prop.n_cp:
        raise MatchingError(f"control point count mismatch: {gt.n_cp} vs {prop.n_cp}")
    l1 = float(np.abs(gt.control_points - prop.control_points).sum())
    return w.alpha * l1 + w.beta * (1.0 - prop.likelihood)


def cost_matrix(
    gts: Sequence[GroundTruthPath], props: Sequence[PathProposal], w: MatchWeights = MatchWeights()
) -> np.ndarray:
    if not gts or not props:
        return np.zeros((len(gts), len(props)))
    n_cp = {p.n_cp for p in gts} | {p.n_cp for p in props}
    if len(n_cp) != 1:
        raise MatchingError(f"inconsistent control point counts {sorted(n_cp)}")
    Y = np.stack([g.control_points for g in gts])
    A = np.stack([p.control_points for p in props])
    lik = np.array([p.likelihood for p in props])
    l1 = np.abs(Y[:, None] - A[None]).sum(axis=(2, 3))
    return w.alpha * l1 + w.beta * (1.0 - lik)[None, :]


def _check_costs(costs) -> np.ndarray:
    C = np.asarray(costs, dtype=float)
    if C.ndim != 2:
        raise MatchingError("cost matrix must be 2-D")
    if C.shape[0] > C.shape[1]:
        raise MatchingError(
            f"more ground-truth paths ({C.shape[0]}) than proposals ({C.shape[1]})"
        )
    if not np.all(np.isfinite(C)):
        raise MatchingError("cost matrix has non-finite entries")
    return C


def _total(C: np.ndarray, pairs) -> float:
    total = 0.0
    for i, j in pairs:
        total += float(C[i, j])
    return total


def hungarian(costs) -> Assignment:
    """Minimum-cost assignment of every row (ground truth) to a distinct column.

    Shortest-augmenting-path Hungarian method, O(n^2 m).  Costs are paired
    with a secondary integer key that encodes the column sequence, so among
    exactly tied optima the lexicographically smallest pair list wins.
    """
    C = _check_costs(costs)
    n, m = C.shape
    if n == 0:
        return Assignment((), 0.0)
    prim = C.tolist()
    weights = [m ** (n - 1 - i) for i in range(n)]

    inf = (math.inf, 0)
    zero = (0.0, 0)
    u = [zero] * (n + 1)
    v = [zero] * (m + 1)
    row_of = [0] * (m + 1)  # row_of[j]: 1-based row matched to column j, 0 if free
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        row_of[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = row_of[j0]
            ui = u[i0]
            crow = prim[i0 - 1]
            wi = weights[i0 - 1]
            delta = inf
            j1 = 0
            for j in range(1, m + 1):
                if used[j]:
                    continue
                vj = v[j]
                cur = (crow[j - 1] - ui[0] - vj[0], (j - 1) * wi - ui[1] - vj[1])
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    r = row_of[j]
                    u[r] = (u[r][0] + delta[0], u[r][1] + delta[1])
                    v[j] = (v[j][0] - delta[0], v[j][1] - delta[1])
                else:
                    minv[j] = (minv[j][0] - delta[0], minv[j][1] - delta[1])
            j0 = j1
            if row_of[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            row_of[j0] = row_of[j1]
            j0 = j1

    pairs = tuple(sorted((row_of[j] - 1, j - 1) for j in range(1, m + 1) if row_of[j]))
    return Assignment(pairs, _total(C, pairs))


@lru_cache(maxsize=128)
def _injections(n: int, m: int) -> np.ndarray:
    # itertools yields these in lexicographic order
    return np.array(list(permutations(range(m), n)), dtype=np.int64).reshape(-1, n)


def brute_force_assignment(costs) -> Assignment:
    """Exhaustive search over all injective row->column maps.

    Ties resolve to the lexicographically smallest pair list.
    """
    C = _check_costs(costs)
    n, m = C.shape
    if n > BRUTE_FORCE_MAX_ROWS:
        raise MatchingError(f"brute force limited to {BRUTE_FORCE_MAX_ROWS} rows, got {n}")
    if n == 0:
        return Assignment((), 0.0)
    cols = _injections(n, m)
    totals = np.zeros(len(cols))
    for i in range(n):  # accumulate in row order, same as _total
        totals += C[i, cols[:, i]]
    best = int(np.argmin(totals))  # first minimum = lexicographically smallest
    pairs = tuple((i, int(cols[best, i])) for i in range(n))
    return Assignment(pairs, _total(C, pairs))


def _bce(likelihood: float, target: int) -> float:
    q = likelihood if target else 1.0 - likelihood
    return -math.log(max(q, BCE_EPS))


def set_loss(
    gts: Sequence[GroundTruthPath], props: Sequence[PathProposal], w: MatchWeights = MatchWeights()
) -> LossBreakdown:
    """Matched set loss.

    regression: per matched pair, mean squared error over all 2*n_cp
    coordinates, summed over ground-truth paths.
    classification: mean binary cross-entropy over every proposal, target 1
    when matched and 0 otherwise.  Log arguments are floored at BCE_EPS, so
    saturated correct predictions cost exactly 0 and wrong ones stay finite.
    """
    C = cost_matrix(gts, props, w)
    asg = hungarian(C)
    regression = 0.0
    for i, j in asg.pairs:
        d = gts[i].control_points - props[j].control_points
        regression += float(np.mean(d**2))
    matched = {j for _, j in asg.pairs}
    if props:
        classification = sum(_bce(p.likelihood, int(k in matched)) for k, p in enumerate(props)) / len(props)
    else:
        classification = 0.0
    total = w.alpha * regression + w.beta * classification
    return LossBreakdown(total, regression, classification, asg)
