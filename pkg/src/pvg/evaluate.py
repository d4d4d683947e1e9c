"""Random-access spline evaluation.

The flattened term lists of a solved subdomain reduce every color lookup
to one pass over (kernel region, coefficient) pairs:

    u(x) = offset + sum_k coef_k * avgG(x, region_k)

Regions are squares, or Voronoi polygons for graded source cells. Two
interchangeable kernels compute the sum over batches of points: a numba
scalar loop and a chunked vectorized numpy fallback (see ``pvg._accel``).
Per-point accumulation runs in fixed term order, so results are
bit-identical no matter how points are batched or threaded.
"""

from __future__ import annotations

import numpy as np

from ._accel import NUMBA_ENABLED, jit
from .greens import (
    TWO_PI,
    FAR_FIELD_FACTOR,
    avg_greens_matrix,
    avg_greens_polygon_scalar,
    avg_greens_scalar,
)
from .solver import SplineSolution

_NUMPY_CHUNK = 4096


@jit
def _eval_terms_loop(points, centers, halves, coefs, poly_index, poly_points,
                     poly_start, poly_count, poly_centroid, poly_radius,
                     poly_area, out):
    for m in range(points.shape[0]):
        px = points[m, 0]
        py = points[m, 1]
        a0 = 0.0
        a1 = 0.0
        a2 = 0.0
        for k in range(centers.shape[0]):
            p = poly_index[k]
            if p < 0:
                g = avg_greens_scalar(px, py, centers[k, 0], centers[k, 1],
                                      halves[k])
            else:
                s = poly_start[p]
                g = avg_greens_polygon_scalar(
                    px, py, poly_points[s : s + poly_count[p]], poly_area[p],
                    poly_centroid[p, 0], poly_centroid[p, 1], poly_radius[p],
                )
            a0 += coefs[k, 0] * g
            a1 += coefs[k, 1] * g
            a2 += coefs[k, 2] * g
        out[m, 0] = a0
        out[m, 1] = a1
        out[m, 2] = a2


def eval_terms_numba(points, sol: SplineSolution):
    out = np.empty((len(points), 3))
    _eval_terms_loop(
        np.ascontiguousarray(points, dtype=np.float64),
        np.ascontiguousarray(sol.term_centers, dtype=np.float64),
        np.ascontiguousarray(sol.term_halves, dtype=np.float64),
        np.ascontiguousarray(sol.term_coefs, dtype=np.float64),
        sol.term_poly_index,
        np.ascontiguousarray(sol.poly_points, dtype=np.float64),
        sol.poly_start,
        sol.poly_count,
        np.ascontiguousarray(sol.poly_centroid, dtype=np.float64),
        sol.poly_radius,
        sol.poly_area,
        out,
    )
    return out


def _polygon_kernel_points(points, verts, area, centroid, radius):
    """Vectorized polygon kernel over many points (numpy fallback)."""
    px = points[:, 0]
    py = points[:, 1]
    d2 = (px - centroid[0]) ** 2 + (py - centroid[1]) ** 2
    lim = 2.0 * FAR_FIELD_FACTOR * radius
    out = 0.5 * np.log(np.maximum(d2, 1e-300)) / TWO_PI
    near = d2 <= lim * lim
    if near.any():
        npx = px[near]
        npy = py[near]
        total = np.zeros(len(npx))
        k = len(verts)
        for i in range(k):
            ax = verts[i, 0] - npx
            ay = verts[i, 1] - npy
            bx = verts[(i + 1) % k, 0] - npx
            by = verts[(i + 1) % k, 1] - npy
            ex = verts[(i + 1) % k, 0] - verts[i, 0]
            ey = verts[(i + 1) % k, 1] - verts[i, 1]
            length = float(np.hypot(ex, ey))
            if length == 0.0:
                continue
            tx, ty = ex / length, ey / length
            nx, ny = ty, -tx
            d = ax * nx + ay * ny
            sa = ax * tx + ay * ty
            sb = bx * tx + by * ty
            j = np.zeros(len(npx))
            for sign, s in ((1.0, sb), (-1.0, sa)):
                r2 = s * s + d * d
                safe_d = np.where(d != 0.0, d, 1.0)
                term = np.where(
                    d != 0.0,
                    0.5 * s * np.log(np.maximum(r2, 1e-300)) - s
                    + d * np.arctan(s / safe_d),
                    np.where(
                        s != 0.0,
                        s * np.log(np.maximum(np.abs(s), 1e-300)) - s,
                        0.0,
                    ),
                )
                j = j + sign * term
            total += d * (0.5 * j - 0.25 * length)
        out[near] = total / (TWO_PI * area)
    return out


def eval_terms_numpy(points, sol: SplineSolution):
    points = np.asarray(points, dtype=np.float64)
    square = sol.term_poly_index < 0
    out = np.zeros((len(points), 3))
    centers = sol.term_centers[square]
    halves = sol.term_halves[square]
    coefs = sol.term_coefs[square]
    for s in range(0, len(points), _NUMPY_CHUNK):
        block = points[s : s + _NUMPY_CHUNK]
        if len(centers):
            g = avg_greens_matrix(block, centers, halves)
            out[s : s + _NUMPY_CHUNK] = g @ coefs
    for k in np.nonzero(~square)[0]:
        p = sol.term_poly_index[k]
        st = sol.poly_start[p]
        verts = sol.poly_points[st : st + sol.poly_count[p]]
        g = _polygon_kernel_points(
            points, verts, sol.poly_area[p], sol.poly_centroid[p],
            sol.poly_radius[p],
        )
        out += g[:, None] * sol.term_coefs[k][None, :]
    return out


if NUMBA_ENABLED:
    eval_terms = eval_terms_numba
else:
    eval_terms = eval_terms_numpy


def eval_points(sol: SplineSolution, points: np.ndarray) -> np.ndarray:
    """Evaluate the solved spline at arbitrary points (local pixel coords).

    Returns (n, 3). Callers are responsible for point-in-subdomain
    classification; see :func:`eval_point` for the checked scalar form.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if len(sol.term_centers) == 0:
        return np.tile(sol.offset, (len(points), 1))
    out = eval_terms(points, sol)
    if sol.offset.any():
        out = out + sol.offset
    return out


class OutsideSubdomainError(ValueError):
    pass


def eval_point(sol: SplineSolution, sub, x) -> np.ndarray:
    """Color at one point of a solved subdomain (local coordinates).

    Points falling on a boundary pixel return that pixel's Dirichlet
    color directly (the layer sums are not meaningful on the layer
    itself); anywhere else the closed-form sum is evaluated.
    """
    px, py = float(x[0]), float(x[1])
    ix, iy = int(np.floor(px)), int(np.floor(py))
    h, w = sub.shape
    if not (0 <= ix < w and 0 <= iy < h) or not sub.pixel_mask[iy, ix]:
        raise OutsideSubdomainError(f"point {x} is outside the subdomain")
    if sub.boundary_mask[iy, ix]:
        return sub.boundary_color_for((ix, iy))
    return eval_points(sol, np.array([[px, py]]))[0]
