import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import MultiPoint, Point

from lanepaths.curves import (
    BezierCurve,
    DegeneratePolylineError,
    FitError,
    Polyline,
    arc_lengths,
    bernstein,
    bezier_eval,
    bezier_sample,
    fit_bezier,
    resample_polyline,
)


def direct_sum(cp, t):
    cp = np.asarray(cp, float)
    n = len(cp) - 1
    return sum(math.comb(n, i) * t**i * (1 - t) ** (n - i) * cp[i] for i in range(n + 1))


def test_bernstein_values():
    assert bernstein(0, 1, 0.5) == 0.5
    assert bernstein(2, 2, 1.0) == 1.0
    assert abs(sum(bernstein(i, 10, 0.37) for i in range(11)) - 1.0) <= 1e-12


@pytest.mark.parametrize("i,n,t", [(-1, 2, 0.5), (3, 2, 0.5), (0, 2, 1.5), (0, 2, -0.1)])
def test_bernstein_domain(i, n, t):
    with pytest.raises(ValueError):
        bernstein(i, n, t)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 16), st.floats(0, 1))
def test_partition_of_unity(n, t):
    vals = [bernstein(i, n, t) for i in range(n + 1)]
    assert min(vals) >= 0
    assert abs(math.fsum(vals) - 1.0) <= 1e-12


def test_linear_eval():
    c = BezierCurve([(0, 0), (1, 1)])
    assert bezier_eval(c, 0.5).tolist() == [0.5, 0.5]


def test_endpoints_exact():
    rng = np.random.default_rng(3)
    c = BezierCurve(rng.random((11, 2)) * 100)
    assert bezier_eval(c, 0.0).tolist() == c.control_points[0].tolist()
    assert bezier_eval(c, 1.0).tolist() == c.control_points[-1].tolist()


def test_de_casteljau_matches_bernstein_sum():
    rng = np.random.default_rng(4)
    for _ in range(20):
        cp = rng.random((11, 2)) * 200
        c = BezierCurve(cp)
        np.testing.assert_allclose(bezier_eval(c, 0.3), direct_sum(cp, 0.3), atol=1e-10)


def test_eval_domain():
    with pytest.raises(ValueError):
        bezier_eval(BezierCurve([(0, 0), (1, 1)]), 1.2)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=3, max_size=12),
    st.floats(0, 1),
)
def test_convex_hull(cp, t):
    pts = np.array(cp)
    if np.linalg.matrix_rank(pts - pts[0]) < 2:
        return  # hull has no area
    p = bezier_eval(BezierCurve(pts), t)
    assert MultiPoint([tuple(q) for q in cp]).convex_hull.buffer(1e-9).contains(Point(*p))


def test_sample():
    c = BezierCurve([(0, 0), (1, 1)])
    assert bezier_sample(c, 3).points.tolist() == [[0, 0], [0.5, 0.5], [1, 1]]
    assert bezier_sample(c, 2).points.tolist() == [[0, 0], [1, 1]]
    with pytest.raises(ValueError):
        bezier_sample(c, 1)


def test_sample_pointwise():
    c = BezierCurve(np.random.default_rng(5).random((11, 2)))
    line = bezier_sample(c, 20)
    for j, p in enumerate(line.points):
        np.testing.assert_allclose(p, bezier_eval(c, j / 19), rtol=0, atol=1e-12)


def test_resample_uniform_segment():
    assert resample_polyline(Polyline([(0, 0), (2, 0)]), 3).points.tolist() == [[0, 0], [1, 0], [2, 0]]


def test_resample_identity_on_uniform():
    pts = [(0, 0), (1, 0), (2, 0), (3, 0)]
    assert resample_polyline(Polyline(pts), 4).points.tolist() == [list(p) for p in pts]


def cumulative_oracle(pts, s):
    """Point at arc length ``s`` by walking segments."""
    for a, b in zip(pts, pts[1:]):
        seg = math.dist(a, b)
        if s <= seg:
            f = s / seg
            return (a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]))
        s -= seg
    return pts[-1]


def test_resample_corner():
    pts = [(0, 0), (1, 0), (1, 1)]
    out = resample_polyline(Polyline(pts), 3).points.tolist()
    assert out == [list(cumulative_oracle(pts, s)) for s in (0, 1, 2)] == [[0, 0], [1, 0], [1, 1]]


def test_resample_matches_walk_oracle():
    rng = np.random.default_rng(6)
    pts = [tuple(p) for p in rng.random((7, 2)) * 100]
    total = arc_lengths(pts)[-1]
    out = resample_polyline(Polyline(pts), 13).points
    for k, p in enumerate(out):
        np.testing.assert_allclose(p, cumulative_oracle(pts, total * k / 12), atol=1e-9)
    assert out[0].tolist() == list(pts[0]) and out[-1].tolist() == list(pts[-1])


def test_resample_preserves_length_on_straight_line():
    pts = [(0, 0), (0.3, 0.6), (2.0, 4.0), (2.5, 5.0)]
    out = resample_polyline(Polyline(pts), 9)
    assert abs(out.length - Polyline(pts).length) / Polyline(pts).length <= 1e-9


def test_resample_skips_repeated_vertices():
    out = resample_polyline(Polyline([(0, 0), (1, 0), (1, 0), (2, 0)]), 5)
    np.testing.assert_allclose(out.points[:, 0], [0, 0.5, 1, 1.5, 2])


def test_degenerate_polyline():
    with pytest.raises(DegeneratePolylineError):
        Polyline([(1, 1), (1, 1)])


@pytest.mark.parametrize("degree", [1, 2, 3, 5, 10])
def test_fit_round_trip(degree):
    rng = np.random.default_rng(degree)
    c = BezierCurve(rng.random((degree + 1, 2)))
    fit = fit_bezier(bezier_sample(c, 20), degree)
    np.testing.assert_allclose(fit.curve.control_points, c.control_points, atol=1e-6)
    assert fit.rmse < 1e-9


def test_fit_recovers_cubic_from_sparse_samples():
    c = BezierCurve([(0, 0), (1, 3), (4, 3), (5, 0)])
    fit = fit_bezier(bezier_sample(c, 4), 3)
    np.testing.assert_allclose(fit.curve.control_points, c.control_points, atol=1e-6)


def test_fit_two_points_degree_one():
    fit = fit_bezier(Polyline([(1, 2), (3, 5)]), 1)
    assert fit.curve.control_points.tolist() == [[1, 2], [3, 5]]


def test_fit_straight_line_degree_ten():
    s = np.linspace(0, 1, 20) ** 1.5
    pts = np.column_stack([10 * s, 3 * (10 * s) + 2])
    fit = fit_bezier(Polyline(pts), 10)
    cp = fit.curve.control_points
    assert np.max(np.abs(cp[:, 1] - (3 * cp[:, 0] + 2))) <= 1e-6
    t = np.linspace(0, 1, 101)
    ev = bezier_eval(fit.curve, t)
    assert np.max(np.abs(ev[:, 1] - (3 * ev[:, 0] + 2))) <= 1e-6


def test_fit_endpoints_clamped():
    rng = np.random.default_rng(8)
    pts = np.cumsum(rng.random((25, 2)), axis=0)
    fit = fit_bezier(Polyline(pts), 6)
    assert fit.curve.control_points[0].tolist() == pts[0].tolist()
    assert fit.curve.control_points[-1].tolist() == pts[-1].tolist()


def test_fit_chord_only_not_exact_on_uniform_samples():
    # uniform-t samples of a curved cubic are not chord-length spaced
    c = BezierCurve([(0, 0), (0, 3), (5, 3), (5, 0)])
    line = bezier_sample(c, 20)
    assert fit_bezier(line, 3, params="chord").rmse > 1e-4
    assert fit_bezier(line, 3, params="chord", refine=True).rmse < fit_bezier(line, 3, params="chord").rmse


def test_fit_errors():
    with pytest.raises(FitError, match="underdetermined"):
        fit_bezier(Polyline([(0, 0), (1, 0), (2, 0)]), 3)
    with pytest.raises(ValueError):
        fit_bezier(Polyline([(0, 0), (1, 0)]), 0)
    with pytest.raises(ValueError):
        fit_bezier(Polyline([(0, 0), (1, 0)]), 1, params="bogus")
