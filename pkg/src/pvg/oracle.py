"""Ground-truth finite-difference solver and the error metric.

``fd_solve`` solves the 5-point Poisson stencil on a subdomain's full
pixel grid (one unknown per interior pixel, Dirichlet at boundary
pixels) with a direct sparse factorization. On a uniform pixel grid
this matches a bilinear finite-element discretization up to right-hand
side lumping, so it serves as the exact reference the engine is
measured against.

``relative_mean_error`` is the mean absolute difference expressed on
the 0-255 scale, divided by 255, in percent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import splu

from .discretize import DiscretizedSubdomain, partition_subdomains
from .model import PvgDocument
from .render import RasterImage, antialias

# direct factorization memory cap; larger subdomains must be cropped
FD_MAX_PIXELS = 512 * 512


class OracleError(RuntimeError):
    pass


@dataclass
class FdSolution:
    subdomain_id: int
    u: np.ndarray  # (h, w, 3), defined on pixel_mask


def fd_solve(sub: DiscretizedSubdomain) -> FdSolution:
    """Solve the 5-point discrete Poisson equation on the subdomain.

    Interior pixels are unknowns; boundary pixels carry their Dirichlet
    colors (slit pixels use the mean of their two sides). Pixels outside
    the subdomain stay zero.
    """
    h, w = sub.shape
    if h * w > FD_MAX_PIXELS:
        raise OracleError(
            f"subdomain {sub.id} has {h * w} pixels, above the "
            f"{FD_MAX_PIXELS} oracle cap; compare on a cropped window"
        )
    interior = sub.interior_mask
    boundary = sub.boundary_mask
    ys, xs = np.nonzero(interior)
    n = len(ys)
    u = np.zeros((h, w, 3))
    bc = np.zeros((h, w, 3))
    for (lx, ly), entries in sub.boundary_colors.items():
        bc[ly, lx] = np.mean([c for _, c in entries], axis=0)
    u[boundary] = bc[boundary]
    if n == 0:
        return FdSolution(subdomain_id=sub.id, u=u)

    index = -np.ones((h, w), dtype=np.int64)
    index[ys, xs] = np.arange(n)
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    rhs = -sub.f_field[ys, xs].astype(np.float64)
    isolated = []
    for k in range(n):
        y, x = int(ys[k]), int(xs[k])
        rows.append(k)
        cols.append(k)
        vals.append(4.0)
        links = 0
        for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            qy, qx = y + dy, x + dx
            if not (0 <= qx < w and 0 <= qy < h):
                continue
            if interior[qy, qx]:
                rows.append(k)
                cols.append(index[qy, qx])
                vals.append(-1.0)
                links += 1
            elif boundary[qy, qx]:
                rhs[k] += bc[qy, qx]
                links += 1
        if links == 0:
            isolated.append((x, y))
    if isolated:
        raise OracleError(f"isolated interior pixels: {isolated[:5]}")

    mat = csc_matrix((vals, (rows, cols)), shape=(n, n))
    lu = splu(mat)
    for ch in range(3):
        u[ys, xs, ch] = lu.solve(rhs[:, ch])
    return FdSolution(subdomain_id=sub.id, u=u)


def reference_render(doc: PvgDocument, width: int, height: int) -> RasterImage:
    """Full-canvas FD reference image with the same curve-pixel
    anti-aliasing convention as the engine."""
    scene = partition_subdomains(doc, width, height)
    channels = np.empty((height, width, 3), dtype=np.float64)
    channels[:] = np.asarray(doc.background)
    for sub in scene.subdomains:
        sol = fd_solve(sub)
        ox, oy = sub.origin
        paint = sub.interior_mask | (sub.boundary_mask & ~_curve_pixels(sub))
        ys, xs = np.nonzero(paint)
        channels[ys + oy, xs + ox] = sol.u[ys, xs]
    img = RasterImage(width=width, height=height, channels=channels,
                      viewport=(width / doc.canvas_width,
                                height / doc.canvas_height, 0.0, 0.0))
    return antialias(img, doc, scene)


def _curve_pixels(sub: DiscretizedSubdomain) -> np.ndarray:
    mask = np.zeros(sub.shape, dtype=bool)
    for (lx, ly) in sub.curve_segments:
        mask[ly, lx] = True
    return mask


def relative_mean_error(a: RasterImage, b: RasterImage) -> np.ndarray:
    """Per-channel relative mean error in percent.

    Mean |a - b| on the 0-255 scale divided by 255; a uniform difference
    of 0.77/255 reads as 0.301%.
    """
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError("image dimensions differ")
    diff = np.abs(a.channels - b.channels)
    return diff.reshape(-1, 3).mean(axis=0) * 100.0
