"""Cubic B-spline curves and low-level 2D raster geometry.

Conventions used across the package:

* Points are ``(x, y)`` float pairs; arrays of points have shape ``(n, 2)``.
* Pixel ``(ix, iy)`` covers the square ``[ix, ix+1) x [iy, iy+1)`` and its
  center is ``(ix + 0.5, iy + 0.5)``. Arrays are indexed ``[iy, ix]``.
* The left side of a directed segment with tangent ``t`` is the side of the
  counterclockwise normal ``(-t_y, t_x)``.
"""

from __future__ import annotations

import numpy as np

FLATTEN_TOL = 0.25  # px; default flattening tolerance for rasterization

# Cubic uniform B-spline span: p(t) = [t^3 t^2 t 1] * M * [P0 P1 P2 P3]
_BSPLINE_M = np.array(
    [
        [-1.0, 3.0, -3.0, 1.0],
        [3.0, -6.0, 3.0, 0.0],
        [-3.0, 0.0, 3.0, 0.0],
        [1.0, 4.0, 1.0, 0.0],
    ]
) / 6.0


def _span_points(control: np.ndarray, closed: bool) -> np.ndarray:
    """Control points padded so span i uses rows i..i+3.

    Closed curves wrap periodically; open curves repeat their endpoints
    twice so the curve interpolates them.
    """
    p = np.asarray(control, dtype=float)
    if closed:
        return np.vstack([p, p[:3]])
    return np.vstack([p[:1], p[:1], p, p[-1:], p[-1:]])


def spline_num_spans(n_control: int, closed: bool) -> int:
    return n_control if closed else n_control + 1


def evaluate_spline(control: np.ndarray, closed: bool, t: np.ndarray) -> np.ndarray:
    """Evaluate the cubic B-spline at parameters ``t`` in [0, 1].

    The parameter is uniform over spans: t = (span + local) / n_spans.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    pts = _span_points(control, closed)
    n_spans = spline_num_spans(len(control), closed)
    u = np.clip(t, 0.0, 1.0) * n_spans
    span = np.minimum(u.astype(int), n_spans - 1)
    lo = u - span
    powers = np.stack([lo**3, lo**2, lo, np.ones_like(lo)], axis=1)
    weights = powers @ _BSPLINE_M  # (m, 4)
    ctrl = np.stack([pts[span + k] for k in range(4)], axis=1)  # (m, 4, 2)
    return np.einsum("mk,mkd->md", weights, ctrl)


def _span_to_bezier(p0, p1, p2, p3):
    """Convert one B-spline span to cubic Bezier control points."""
    b0 = (p0 + 4.0 * p1 + p2) / 6.0
    b1 = (4.0 * p1 + 2.0 * p2) / 6.0
    b2 = (2.0 * p1 + 4.0 * p2) / 6.0
    b3 = (p1 + 4.0 * p2 + p3) / 6.0
    return b0, b1, b2, b3


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom <= 0.0:
        return float(np.hypot(*(p - a)))
    s = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.hypot(*(p - a - s * ab)))


def _flatten_bezier(b0, b1, b2, b3, t0, t1, tol, out, depth=0):
    """Adaptive subdivision; appends (t, point) pairs excluding the start."""
    # curve lies in the control hull, so hull-to-chord distance bounds error
    d = max(
        _point_segment_distance(b1, b0, b3),
        _point_segment_distance(b2, b0, b3),
    )
    if d <= tol or depth >= 24:
        out.append((t1, b3))
        return
    m01 = 0.5 * (b0 + b1)
    m12 = 0.5 * (b1 + b2)
    m23 = 0.5 * (b2 + b3)
    m012 = 0.5 * (m01 + m12)
    m123 = 0.5 * (m12 + m23)
    mid = 0.5 * (m012 + m123)
    tm = 0.5 * (t0 + t1)
    _flatten_bezier(b0, m01, m012, mid, t0, tm, tol, out, depth + 1)
    _flatten_bezier(mid, m123, m23, b3, tm, t1, tol, out, depth + 1)


def _simplify_collinear(verts: np.ndarray, params: np.ndarray, eps: float = 1e-9):
    """Drop interior vertices that lie on the segment of their neighbours."""
    if len(verts) <= 2:
        return verts, params
    keep = [0]
    anchor = 0
    for i in range(1, len(verts) - 1):
        if _point_segment_distance(verts[i], verts[anchor], verts[i + 1]) > eps:
            keep.append(i)
            anchor = i
    keep.append(len(verts) - 1)
    idx = np.array(keep)
    return verts[idx], params[idx]


def flatten_spline(control: np.ndarray, closed: bool, tol: float = FLATTEN_TOL):
    """Flatten a cubic B-spline into a polyline within ``tol`` of the curve.

    Returns ``(vertices, params)`` where ``params`` holds the spline
    parameter of each vertex. Closed curves come back as closed rings
    (last vertex equals the first).
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    pts = _span_points(control, closed)
    n_spans = spline_num_spans(len(control), closed)
    start = (pts[0] + 4.0 * pts[1] + pts[2]) / 6.0
    out = [(0.0, start)]
    for i in range(n_spans):
        b0, b1, b2, b3 = _span_to_bezier(pts[i], pts[i + 1], pts[i + 2], pts[i + 3])
        _flatten_bezier(b0, b1, b2, b3, i / n_spans, (i + 1) / n_spans, tol, out)
    params = np.array([t for t, _ in out])
    verts = np.array([p for _, p in out])
    # drop duplicate consecutive vertices
    d = np.hypot(*(np.diff(verts, axis=0).T))
    keep = np.concatenate([[True], d > 1e-12])
    verts, params = verts[keep], params[keep]
    verts, params = _simplify_collinear(verts, params)
    if closed and len(verts) > 1 and np.hypot(*(verts[0] - verts[-1])) > 1e-12:
        verts = np.vstack([verts, verts[:1]])
        params = np.append(params, 1.0)
    return verts, params


def polyline_seg_lengths(verts: np.ndarray) -> np.ndarray:
    return np.hypot(*(np.diff(verts, axis=0).T))


def supercover_pixels(p0, p1):
    """4-connected pixel chain traversed by the segment p0 -> p1.

    Axis crossings that coincide step x before y, inserting the corner
    pixel, which keeps the chain 4-connected. Returns a list of
    ``(ix, iy, s)`` where ``s`` in [0, 1] is the segment parameter at
    which the pixel was entered.
    """
    x0, y0 = float(p0[0]), float(p0[1])
    x1, y1 = float(p1[0]), float(p1[1])
    ix, iy = int(np.floor(x0)), int(np.floor(y0))
    jx, jy = int(np.floor(x1)), int(np.floor(y1))
    pixels = [(ix, iy, 0.0)]
    dx, dy = x1 - x0, y1 - y0
    if dx == 0.0 and dy == 0.0:
        return pixels
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    inf = np.inf
    t_max_x = ((ix + (sx > 0)) - x0) / dx if dx != 0.0 else inf
    t_max_y = ((iy + (sy > 0)) - y0) / dy if dy != 0.0 else inf
    t_dx = abs(1.0 / dx) if dx != 0.0 else inf
    t_dy = abs(1.0 / dy) if dy != 0.0 else inf
    limit = abs(jx - ix) + abs(jy - iy) + 4
    steps = 0
    while (ix, iy) != (jx, jy) and steps < limit:
        if t_max_x <= t_max_y:
            ix += sx
            t = t_max_x
            t_max_x += t_dx
        else:
            iy += sy
            t = t_max_y
            t_max_y += t_dy
        pixels.append((ix, iy, min(max(t, 0.0), 1.0)))
        steps += 1
    return pixels


def signed_distance_to_segment(p, a, b):
    """Perpendicular signed distance of p from line a->b (positive = left),
    clamped to the segment's slab along its tangent."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    t = b - a
    n = np.hypot(*t)
    if n == 0.0:
        return float(np.hypot(*(np.asarray(p) - a)))
    t = t / n
    v = np.asarray(p, float) - a
    return float(t[0] * v[1] - t[1] * v[0])


def side_of_segment(p, a, b) -> int:
    """+1 if p is left of a->b, -1 if right; ties count as left."""
    return 1 if signed_distance_to_segment(p, a, b) >= 0.0 else -1


def points_in_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Even-odd point-in-polygon test, vectorized over ``points``.

    ``polygon`` is a closed or open ring; the closing edge is implied.
    Points exactly on an edge may land on either side.
    """
    pts = np.asarray(points, dtype=float)
    poly = np.asarray(polygon, dtype=float)
    if len(poly) > 1 and np.allclose(poly[0], poly[-1]):
        poly = poly[:-1]
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    px, py = poly[:, 0], poly[:, 1]
    qx, qy = np.roll(px, -1), np.roll(py, -1)
    for k in range(len(poly)):
        x0, y0, x1, y1 = px[k], py[k], qx[k], qy[k]
        if y0 == y1:
            continue
        crosses = (y0 > y) != (y1 > y)
        with np.errstate(invalid="ignore"):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (x < xi)
    return inside


def fill_polygon_mask(polygon: np.ndarray, width: int, height: int) -> np.ndarray:
    """Boolean (height, width) mask of pixels whose centers fall inside."""
    poly = np.asarray(polygon, dtype=float)
    x0 = max(int(np.floor(poly[:, 0].min())), 0)
    x1 = min(int(np.ceil(poly[:, 0].max())) + 1, width)
    y0 = max(int(np.floor(poly[:, 1].min())), 0)
    y1 = min(int(np.ceil(poly[:, 1].max())) + 1, height)
    mask = np.zeros((height, width), dtype=bool)
    if x0 >= x1 or y0 >= y1:
        return mask
    ys, xs = np.mgrid[y0:y1, x0:x1]
    centers = np.stack([xs.ravel() + 0.5, ys.ravel() + 0.5], axis=1)
    mask[y0:y1, x0:x1] = points_in_polygon(centers, poly).reshape(y1 - y0, x1 - x0)
    return mask


def segments_intersect(a0, a1, b0, b1):
    """Intersection point of two segments, or None.

    Collinear overlap reports the midpoint of the shared part.
    """
    a0 = np.asarray(a0, float)
    a1 = np.asarray(a1, float)
    b0 = np.asarray(b0, float)
    b1 = np.asarray(b1, float)
    r = a1 - a0
    s = b1 - b0
    denom = r[0] * s[1] - r[1] * s[0]
    qp = b0 - a0
    if denom == 0.0:
        if abs(qp[0] * r[1] - qp[1] * r[0]) > 1e-12:
            return None
        rr = float(r @ r)
        if rr == 0.0:
            return None
        t0 = float(qp @ r) / rr
        t1 = float((b1 - a0) @ r) / rr
        lo, hi = max(min(t0, t1), 0.0), min(max(t0, t1), 1.0)
        if lo > hi:
            return None
        return a0 + 0.5 * (lo + hi) * r
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * r[1] - qp[1] * r[0]) / denom
    if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
        return a0 + t * r
    return None


def polyline_hausdorff_from_curve(verts, control, closed, n_samples=4000):
    """Max distance from densely sampled curve points to the polyline."""
    t = np.linspace(0.0, 1.0, n_samples)
    curve = evaluate_spline(control, closed, t)
    worst = 0.0
    for p in curve:
        best = min(
            _point_segment_distance(p, verts[i], verts[i + 1])
            for i in range(len(verts) - 1)
        )
        worst = max(worst, best)
    return worst
