"""Polyline and Bezier path parametrizations.

Bezier curves are evaluated with De Casteljau's recursion.  The explicit
Bernstein basis is used to build least-squares design matrices and as a
cross-check in tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_BEZIER_DEGREE = 10
DEFAULT_POLYLINE_POINTS = 20


class DegeneratePolylineError(ValueError):
    pass


class FitError(ValueError):
    pass


def _as_points(points, min_len: int, what: str) -> np.ndarray:
    arr = np.array(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{what} must be a sequence of 2-D points")
    if len(arr) < min_len:
        raise ValueError(f"{what} needs at least {min_len} points, got {len(arr)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} has non-finite coordinates")
    arr.setflags(write=False)
    return arr


class Polyline:
    """Piecewise-linear path through at least two points."""

    __slots__ = ("points",)

    def __init__(self, points):
        pts = _as_points(points, 2, "polyline")
        if arc_lengths(pts)[-1] <= 0.0:
            raise DegeneratePolylineError("polyline has zero length")
        self.points = pts

    def __len__(self) -> int:
        return len(self.points)

    @property
    def length(self) -> float:
        return float(arc_lengths(self.points)[-1])

    def __eq__(self, other) -> bool:
        return isinstance(other, Polyline) and np.array_equal(self.points, other.points)

    def __repr__(self) -> str:
        return f"Polyline({self.points.tolist()})"


class BezierCurve:
    """Bezier curve given by its ``degree + 1`` control points."""

    __slots__ = ("control_points",)

    def __init__(self, control_points):
        self.control_points = _as_points(control_points, 2, "Bezier control polygon")

    @property
    def degree(self) -> int:
        return len(self.control_points) - 1

    def __call__(self, t):
        return bezier_eval(self, t)

    def __eq__(self, other) -> bool:
        return isinstance(other, BezierCurve) and np.array_equal(
            self.control_points, other.control_points
        )

    def __repr__(self) -> str:
        return f"BezierCurve(degree={self.degree}, control_points={self.control_points.tolist()})"


@dataclass(frozen=True)
class BezierFit:
    curve: BezierCurve
    rmse: float
    params: np.ndarray


def arc_lengths(points) -> np.ndarray:
    """Cumulative arc length at every vertex, starting at 0."""
    pts = np.asarray(points, dtype=float)
    seg = np.hypot(*np.diff(pts, axis=0).T)
    return np.concatenate([[0.0], np.cumsum(seg)])


def bernstein(i: int, n: int, t: float) -> float:
    if not 0 <= i <= n:
        raise ValueError(f"Bernstein index {i} outside 0..{n}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t} outside [0, 1]")
    return math.comb(n, i) * t**i * (1.0 - t) ** (n - i)


def bernstein_matrix(n: int, t) -> np.ndarray:
    """Rows are parameters, columns are basis functions ``B_{i,n}``."""
    t = np.asarray(t, dtype=float)[:, None]
    i = np.arange(n + 1)[None, :]
    binom = np.array([math.comb(n, k) for k in range(n + 1)], dtype=float)
    return binom * t**i * (1.0 - t) ** (n - i)


def _check_t(t: np.ndarray) -> None:
    if np.any(~np.isfinite(t)) or np.any(t < 0.0) or np.any(t > 1.0):
        raise ValueError("curve parameter outside [0, 1]")


def de_casteljau(control_points, t) -> np.ndarray:
    """Vectorised De Casteljau evaluation at parameters ``t`` -> (len(t), 2)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    pts = np.broadcast_to(np.asarray(control_points, dtype=float), (len(t),) + np.shape(control_points)).copy()
    tt = t[:, None, None]
    for r in range(pts.shape[1] - 1, 0, -1):
        pts[:, :r] = (1.0 - tt) * pts[:, :r] + tt * pts[:, 1 : r + 1]
    return pts[:, 0]


def bezier_eval(c: BezierCurve, t):
    """Point(s) on ``c``.  Scalar ``t`` gives a length-2 array.

    The endpoints are returned verbatim at t=0 and t=1.
    """
    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    _check_t(ts)
    out = de_casteljau(c.control_points, ts)
    out[ts == 0.0] = c.control_points[0]
    out[ts == 1.0] = c.control_points[-1]
    return out[0] if scalar else out


def bezier_derivative(c: BezierCurve, t) -> np.ndarray:
    cp = c.control_points
    n = len(cp) - 1
    return n * de_casteljau(np.diff(cp, axis=0), np.atleast_1d(t))


def bezier_sample(c: BezierCurve, k: int = DEFAULT_POLYLINE_POINTS) -> Polyline:
    if k < 2:
        raise ValueError("need at least 2 samples")
    return Polyline(bezier_eval(c, np.linspace(0.0, 1.0, k)))


def resample_polyline(p: Polyline, k: int = DEFAULT_POLYLINE_POINTS) -> Polyline:
    """``k`` points equally spaced by arc length along ``p``."""
    if k < 2:
        raise ValueError("need at least 2 samples")
    pts = np.asarray(p.points if isinstance(p, Polyline) else p, dtype=float)
    s = arc_lengths(pts)
    if s[-1] <= 0.0:
        raise DegeneratePolylineError("cannot resample a zero-length polyline")
    keep = np.concatenate([[True], np.diff(s) > 0.0])
    pts, s = pts[keep], s[keep]
    targets = np.linspace(0.0, s[-1], k)
    out = np.column_stack([np.interp(targets, s, pts[:, 0]), np.interp(targets, s, pts[:, 1])])
    out[0], out[-1] = pts[0], pts[-1]
    return Polyline(out)


def chord_length_params(points) -> np.ndarray:
    s = arc_lengths(points)
    if s[-1] <= 0.0:
        raise FitError("points span zero length")
    t = s / s[-1]
    t[-1] = 1.0
    return t


def _solve_interior(points: np.ndarray, t: np.ndarray, n: int) -> np.ndarray:
    """Least-squares control points with both endpoints clamped."""
    B = bernstein_matrix(n, t)
    first, last = points[0], points[-1]
    if n == 1:
        return np.array([first, last])
    rhs = points - np.outer(B[:, 0], first) - np.outer(B[:, n], last)
    A = B[:, 1:n]
    if np.linalg.matrix_rank(A) < n - 1:
        raise FitError("rank-deficient Bezier design matrix")
    inner, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return np.vstack([first, inner, last])


def _residual(points, cp, t):
    return (bernstein_matrix(len(cp) - 1, t) @ cp - points).ravel()


def uniform_params(m: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, m)


_PARAMS = {"chord": chord_length_params, "uniform": lambda pts: uniform_params(len(pts))}


def fit_bezier(
    p: Polyline,
    degree: int = DEFAULT_BEZIER_DEGREE,
    params: str = "auto",
    refine: bool = False,
    max_iter: int = 200,
    tol: float = 1e-15,
) -> BezierFit:
    """Least-squares Bezier fit with both endpoints clamped.

    ``params`` picks the parameter assignment of the input points:
    ``"chord"`` (chord length), ``"uniform"`` (t = j/(m-1), the spacing
    :func:`bezier_sample` produces) or ``"auto"``, which fits both and keeps
    the one with the smaller residual, preferring chord length on ties.

    ``refine`` additionally optimises the interior parameters jointly with
    the control points (damped Gauss-Newton).  It lowers the residual but
    is poorly conditioned for high degrees, hence off by default.
    """
    pts = np.asarray(p.points if isinstance(p, Polyline) else p, dtype=float)
    n = int(degree)
    if n < 1:
        raise ValueError("degree must be at least 1")
    m = len(pts)
    if m < n + 1:
        raise FitError(f"underdetermined fit: {m} points for degree {n}")
    if params == "auto":
        names = ["chord", "uniform"]
    elif params in _PARAMS:
        names = [params]
    else:
        raise ValueError(f"unknown parameter assignment {params!r}")

    best = None
    err: FitError | None = None
    for name in names:
        try:
            t = _PARAMS[name](pts)
            cp = _solve_interior(pts, t, n)
        except FitError as exc:
            err = exc
            continue
        if refine and n >= 2 and m > 2 and 2 * m >= 2 * (n - 1) + (m - 2):
            cp, t = _refine(pts, cp, t, max_iter, tol)
        r = _residual(pts, cp, t).reshape(-1, 2)
        rmse = float(np.sqrt(np.mean(np.sum(r**2, axis=1))))
        if best is None or rmse < best.rmse:
            best = BezierFit(BezierCurve(cp), rmse, t)
    if best is None:
        raise err
    return best


def _refine(pts, cp, t, max_iter, tol):
    n = len(cp) - 1
    m = len(pts)
    scale = max(float(np.ptp(pts, axis=0).max()), 1e-300)
    r = _residual(pts, cp, t)
    cost = float(r @ r)
    lam = 1e-6
    for _ in range(max_iter):
        if cost <= tol * scale**2 * m:
            break
        B = bernstein_matrix(n, t)
        d = n * (bernstein_matrix(n - 1, t) @ np.diff(cp, axis=0))
        J = np.zeros((2 * m, 2 * (n - 1) + (m - 2)))
        for axis in (0, 1):
            J[axis::2, axis : 2 * (n - 1) : 2] = B[:, 1:n]
        rows = np.arange(1, m - 1)
        J[2 * rows, 2 * (n - 1) + rows - 1] = d[1:-1, 0]
        J[2 * rows + 1, 2 * (n - 1) + rows - 1] = d[1:-1, 1]
        g = J.T @ r
        H = J.T @ J
        improved = False
        while lam < 1e12:
            step = np.linalg.solve(H + lam * np.diag(np.diag(H) + 1e-12), -g)
            new_cp = cp.copy()
            new_cp[1:n] += step[: 2 * (n - 1)].reshape(-1, 2)
            new_t = t.copy()
            new_t[1:-1] = np.clip(t[1:-1] + step[2 * (n - 1) :], 0.0, 1.0)
            new_r = _residual(pts, new_cp, new_t)
            new_cost = float(new_r @ new_r)
            if new_cost < cost:
                improved = True
                lam = max(lam / 10.0, 1e-15)
                break
            lam *= 10.0
        if not improved:
            break
        done = cost - new_cost <= 1e-16 * cost
        cp, t, r, cost = new_cp, new_t, new_r, new_cost
        if done:
            break
    return cp, t
