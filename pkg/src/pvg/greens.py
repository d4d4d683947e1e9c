"""Log-kernel machinery: the free-space Green's function of the 2D
Laplacian and its exact mean over axis-aligned squares.

``avg_greens`` integrates ln|x-y| over a square in closed form via the
antiderivative

    H(x, y) = (xy/2) ln(x^2+y^2) - (3/2) xy
              + (y^2/2) atan(x/y) + (x^2/2) atan(y/x)

whose mixed partial is ln r; corner inclusion-exclusion gives the
rectangle integral, valid also when x sits inside the cell (the
singularity is integrable and H is continuous). Far from the cell the
mean is indistinguishable from the kernel at the cell center, so beyond
FAR_FIELD_FACTOR cell sizes the plain kernel is returned.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import jit

TWO_PI = 2.0 * math.pi

# |x - center| > FAR_FIELD_FACTOR * size  ->  point-kernel approximation;
# the switch error is below 1e-4 (validated in tests)
FAR_FIELD_FACTOR = 4.0


@jit
def _corner(x: float, y: float) -> float:
    if x == 0.0 and y == 0.0:
        return 0.0
    r2 = x * x + y * y
    t = 0.5 * x * y * math.log(r2) - 1.5 * x * y
    if y != 0.0:
        t += 0.5 * y * y * math.atan(x / y)
    if x != 0.0:
        t += 0.5 * x * x * math.atan(y / x)
    return t


@jit
def greens_scalar(px: float, py: float, qx: float, qy: float) -> float:
    dx = px - qx
    dy = py - qy
    return 0.5 * math.log(dx * dx + dy * dy) / TWO_PI


@jit
def avg_greens_scalar(px: float, py: float, cx: float, cy: float, half: float) -> float:
    dx = px - cx
    dy = py - cy
    d2 = dx * dx + dy * dy
    lim = 2.0 * FAR_FIELD_FACTOR * half  # factor * size, size = 2*half
    if d2 > lim * lim:
        return 0.5 * math.log(d2) / TWO_PI
    a = (cx - half) - px
    b = (cx + half) - px
    c = (cy - half) - py
    d = (cy + half) - py
    val = _corner(b, d) - _corner(a, d) - _corner(b, c) + _corner(a, c)
    return val / (TWO_PI * 4.0 * half * half)


def greens_kernel(x, y) -> float:
    """G(x, y) = ln|x - y| / 2pi. Undefined at x == y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(greens_scalar(x[0], x[1], y[0], y[1]))


def avg_greens(x, center, half_size: float) -> float:
    """Mean of G(x, .) over the square centered at ``center`` with half
    side ``half_size``. Exact in the near field, point kernel beyond
    FAR_FIELD_FACTOR cell sizes."""
    x = np.asarray(x, dtype=float)
    c = np.asarray(center, dtype=float)
    return float(avg_greens_scalar(x[0], x[1], c[0], c[1], float(half_size)))


@jit
def _segment_log_integral(sa: float, sb: float, d: float) -> float:
    """ln|y| integrated along a segment in foot coordinates.

    The segment runs from tangential offset ``sa`` to ``sb`` at
    perpendicular distance ``d`` from the origin.
    """
    total = 0.0
    for sign, s in ((1.0, sb), (-1.0, sa)):
        if d != 0.0:
            total += sign * (0.5 * s * math.log(s * s + d * d) - s
                             + d * math.atan(s / d))
        elif s != 0.0:
            total += sign * (s * math.log(abs(s)) - s)
    return total


@jit
def polygon_log_area_integral(px: float, py: float, verts: np.ndarray) -> float:
    """Integral of ln|x - y| over a polygon (divergence theorem form).

    ``verts`` is (k, 2), counterclockwise. Valid for x inside, outside,
    or on the boundary (the singularity is integrable).
    """
    total = 0.0
    k = verts.shape[0]
    for i in range(k):
        ax = verts[i, 0] - px
        ay = verts[i, 1] - py
        bx = verts[(i + 1) % k, 0] - px
        by = verts[(i + 1) % k, 1] - py
        ex = bx - ax
        ey = by - ay
        length = math.sqrt(ex * ex + ey * ey)
        if length == 0.0:
            continue
        tx = ex / length
        ty = ey / length
        # outward normal of a CCW polygon
        nx = ty
        ny = -tx
        d = ax * nx + ay * ny
        sa = ax * tx + ay * ty
        sb = bx * tx + by * ty
        j = _segment_log_integral(sa, sb, d)
        total += d * (0.5 * j - 0.25 * length)
    return total


@jit
def avg_greens_polygon_scalar(px: float, py: float, verts: np.ndarray,
                              area: float, cx: float, cy: float,
                              radius: float) -> float:
    """Mean of the log kernel over a convex polygon.

    ``cx, cy`` is the polygon centroid and ``radius`` its circumradius;
    far from the polygon the point kernel at the centroid is returned
    (centering at the centroid keeps the switch error second order).
    """
    dx = px - cx
    dy = py - cy
    d2 = dx * dx + dy * dy
    lim = 2.0 * FAR_FIELD_FACTOR * radius
    if d2 > lim * lim:
        return 0.5 * math.log(d2) / TWO_PI
    return polygon_log_area_integral(px, py, verts) / (TWO_PI * area)


def polygon_centroid(verts: np.ndarray) -> tuple[float, float, float]:
    """(cx, cy, signed_area) of a polygon."""
    x = verts[:, 0]
    y = verts[:, 1]
    xr = np.roll(x, -1)
    yr = np.roll(y, -1)
    cross = x * yr - xr * y
    a = 0.5 * cross.sum()
    cx = ((x + xr) * cross).sum() / (6.0 * a)
    cy = ((y + yr) * cross).sum() / (6.0 * a)
    return float(cx), float(cy), float(a)


def ensure_ccw(verts: np.ndarray) -> np.ndarray:
    x = verts[:, 0]
    y = verts[:, 1]
    a = (x * np.roll(y, -1) - np.roll(x, -1) * y).sum()
    return verts if a >= 0 else verts[::-1].copy()


def _corner_array(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    r2 = x * x + y * y
    safe = np.where(r2 > 0.0, r2, 1.0)
    t = np.where(r2 > 0.0, 0.5 * x * y * np.log(safe) - 1.5 * x * y, 0.0)
    ys = np.where(y != 0.0, y, 1.0)
    t = t + np.where(y != 0.0, 0.5 * y * y * np.arctan(x / ys), 0.0)
    xs = np.where(x != 0.0, x, 1.0)
    t = t + np.where(x != 0.0, 0.5 * x * x * np.arctan(y / xs), 0.0)
    return t


def avg_greens_matrix(points: np.ndarray, centers: np.ndarray,
                      halves: np.ndarray) -> np.ndarray:
    """(n_points, n_cells) matrix of square-averaged kernel values.

    Vectorized numpy twin of :func:`avg_greens_scalar`; the hot render
    path uses it when numba is disabled.
    """
    px = points[:, 0][:, None]
    py = points[:, 1][:, None]
    cx = centers[:, 0][None, :]
    cy = centers[:, 1][None, :]
    hh = halves[None, :]
    dx = px - cx
    dy = py - cy
    d2 = dx * dx + dy * dy
    lim = 2.0 * FAR_FIELD_FACTOR * hh
    out = 0.5 * np.log(np.maximum(d2, 1e-300)) / TWO_PI
    near = d2 <= lim * lim
    if near.any():
        rows, cols = np.nonzero(near)
        pxn, pyn = points[rows, 0], points[rows, 1]
        cxn, cyn = centers[cols, 0], centers[cols, 1]
        hn = halves[cols]
        a = (cxn - hn) - pxn
        b = (cxn + hn) - pxn
        c = (cyn - hn) - pyn
        d = (cyn + hn) - pyn
        val = (
            _corner_array(b, d)
            - _corner_array(a, d)
            - _corner_array(b, c)
            + _corner_array(a, c)
        )
        out[rows, cols] = val / (TWO_PI * 4.0 * hn * hn)
    return out
