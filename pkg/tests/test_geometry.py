import numpy as np
import pytest

from pvg.geometry import (
    evaluate_spline,
    fill_polygon_mask,
    flatten_spline,
    points_in_polygon,
    polyline_hausdorff_from_curve,
    segments_intersect,
    side_of_segment,
    supercover_pixels,
)

from conftest import circle_spline


def test_collinear_spline_flattens_to_segment():
    control = np.array([[0.0, 0.0], [10.0, 5.0], [20.0, 10.0], [30.0, 15.0]])
    verts, params = flatten_spline(control, closed=False, tol=0.25)
    assert len(verts) == 2
    assert np.allclose(verts[0], [0, 0])
    assert np.allclose(verts[-1], [30, 15])
    assert params[0] == 0.0 and params[-1] == 1.0


def test_open_spline_interpolates_endpoints():
    control = np.array([[1.0, 2.0], [5.0, 9.0], [9.0, 1.0], [13.0, 6.0]])
    p = evaluate_spline(control, False, np.array([0.0, 1.0]))
    assert np.allclose(p[0], control[0], atol=1e-12)
    assert np.allclose(p[1], control[-1], atol=1e-12)


def test_circle_flatten_within_tolerance():
    spline = circle_spline(50, 50, 30, n=10)
    control = spline.control_array()
    verts, _ = flatten_spline(control, closed=True, tol=0.1)
    assert np.allclose(verts[0], verts[-1])
    err = polyline_hausdorff_from_curve(verts, control, True)
    assert err <= 0.1


def test_halving_tolerance_never_increases_error():
    spline = circle_spline(0, 0, 40, n=8)
    control = spline.control_array()
    errs = []
    for tol in (0.8, 0.4, 0.2, 0.1):
        verts, _ = flatten_spline(control, closed=True, tol=tol)
        errs.append(polyline_hausdorff_from_curve(verts, control, True))
    assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("seed", range(8))
def test_supercover_is_four_connected(seed):
    rng = np.random.default_rng(seed)
    p0 = rng.uniform(0, 30, 2)
    p1 = rng.uniform(0, 30, 2)
    pix = supercover_pixels(p0, p1)
    assert pix[0][:2] == (int(np.floor(p0[0])), int(np.floor(p0[1])))
    assert pix[-1][:2] == (int(np.floor(p1[0])), int(np.floor(p1[1])))
    for (x0, y0, _), (x1, y1, _) in zip(pix, pix[1:]):
        assert abs(x1 - x0) + abs(y1 - y0) == 1


def test_supercover_diagonal_inserts_corner():
    pix = [(x, y) for x, y, _ in supercover_pixels((0.5, 0.5), (2.5, 2.5))]
    assert (0, 0) in pix and (2, 2) in pix
    assert len(pix) == 5  # 3 diagonal pixels + 2 corner fills


def test_side_of_segment():
    assert side_of_segment((0, 1), (0, 0), (1, 0)) == 1
    assert side_of_segment((0, -1), (0, 0), (1, 0)) == -1
    # ties go left
    assert side_of_segment((0.5, 0), (0, 0), (1, 0)) == 1


def test_points_in_polygon_square():
    poly = np.array([[0, 0], [10, 0], [10, 10], [0, 10]], float)
    pts = np.array([[5, 5], [15, 5], [-1, 3], [9.5, 9.5]])
    assert points_in_polygon(pts, poly).tolist() == [True, False, False, True]


def test_fill_polygon_mask_area():
    poly = np.array([[2, 2], [12, 2], [12, 12], [2, 12]], float)
    mask = fill_polygon_mask(poly, 16, 16)
    assert mask.sum() == 100  # pixel centers in (2,12)^2


def test_segments_intersect():
    p = segments_intersect((0, 0), (2, 2), (0, 2), (2, 0))
    assert p is not None and np.allclose(p, [1, 1])
    assert segments_intersect((0, 0), (1, 0), (0, 1), (1, 1)) is None
    # shared endpoint counts as intersection (filtering is the caller's job)
    p = segments_intersect((0, 0), (1, 1), (1, 1), (2, 0))
    assert p is not None and np.allclose(p, [1, 1])
