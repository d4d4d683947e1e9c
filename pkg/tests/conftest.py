"""Shared scene builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from pvg.discretize import DiscretizedSubdomain
from pvg.model import (
    ColorStop,
    CubicBSpline,
    DiffusionCurve,
    LaplacianStop,
    PoissonCurve,
    PoissonRegion,
    PvgDocument,
)


def circle_spline(cx, cy, r, n=12, closed=True):
    ang = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    pts = tuple((cx + r * np.cos(a), cy + r * np.sin(a)) for a in ang)
    return CubicBSpline(control_points=pts, closed=closed)


def rect_spline(x0, y0, x1, y1):
    return CubicBSpline(
        control_points=((x0, y0), (x1, y0), (x1, y1), (x0, y1)), closed=True
    )


def line_spline(p0, p1, n=4):
    t = np.linspace(0.0, 1.0, n)
    pts = tuple(
        (p0[0] + tt * (p1[0] - p0[0]), p0[1] + tt * (p1[1] - p0[1])) for tt in t
    )
    return CubicBSpline(control_points=pts, closed=False)


def solid_dc(spline, left, right):
    return DiffusionCurve(
        spline=spline,
        left_colors=(ColorStop(0.0, tuple(left)),),
        right_colors=(ColorStop(0.0, tuple(right)),),
    )


def const_pc(spline, f_plus):
    if np.isscalar(f_plus):
        f_plus = (f_plus,) * 3
    return PoissonCurve(
        spline=spline, laplacian_stops=(LaplacianStop(0.0, tuple(f_plus)),)
    )


def simple_rect_doc(size=64, inside=(0.8, 0.2, 0.2), outside=(0.2, 0.2, 0.8)):
    """One closed rectangle-ish DC; inside takes the left color."""
    m = size // 8
    dc = solid_dc(rect_spline(m, m, size - m, size - m), inside, outside)
    return PvgDocument(
        canvas_width=size,
        canvas_height=size,
        background=(1.0, 1.0, 1.0),
        diffusion_curves=(dc,),
        border=(1.0, 1.0, 1.0),
    )


def full_scene_doc(seed=0, size=128):
    """A closed DC with varying side colors, one gentle-arc PC, one PR.

    Magnitudes follow typical authored scenes: Laplacian strengths in the
    tens on the 0-255 scale and smooth strokes.
    """
    rng = np.random.default_rng(seed)
    cx = cy = size / 2
    r = size * 0.41
    left = (
        ColorStop(0.0, tuple(rng.uniform(0.2, 0.9, 3))),
        ColorStop(0.5, tuple(rng.uniform(0.2, 0.9, 3))),
    )
    dc = DiffusionCurve(
        spline=circle_spline(cx, cy, r),
        left_colors=left,
        right_colors=(ColorStop(0.0, (0.95, 0.95, 0.95)),),
    )
    a0 = rng.uniform(0, 2 * np.pi)
    arc = rng.uniform(0.5, 0.9)
    rr = size * rng.uniform(0.16, 0.24)
    pc_pts = tuple(
        (cx + rr * np.cos(a0 + arc * t), cy + rr * np.sin(a0 + arc * t))
        for t in np.linspace(0.0, 1.0, 5)
    )
    pc = const_pc(CubicBSpline(control_points=pc_pts, closed=False),
                  float(rng.uniform(0.10, 0.18)))
    ang = a0 + np.pi  # keep the region clear of the stroke
    pr = PoissonRegion(
        boundary=circle_spline(
            cx + 0.18 * size * np.cos(ang), cy + 0.18 * size * np.sin(ang),
            size * 0.12,
        ),
        f_outer=tuple(rng.uniform(0.02, 0.08, 3)),
    )
    return PvgDocument(
        canvas_width=size,
        canvas_height=size,
        background=(1.0, 1.0, 1.0),
        diffusion_curves=(dc,),
        poisson_curves=(pc,),
        poisson_regions=(pr,),
        border=(1.0, 1.0, 1.0),
    )


def nested_dc_pc_doc(size=128, f_plus=41.0 / 255.0):
    """A short PC inside a closed DC inside a larger closed DC."""
    c = size / 2
    outer = solid_dc(circle_spline(c, c, size * 0.45), (0.9, 0.9, 0.6), (1, 1, 1))
    inner = solid_dc(circle_spline(c, c, size * 0.33), (0.55, 0.6, 0.7), (0.8, 0.75, 0.5))
    pc = const_pc(line_spline((c - size * 0.04, c), (c + size * 0.04, c)), f_plus)
    return PvgDocument(
        canvas_width=size,
        canvas_height=size,
        background=(1.0, 1.0, 1.0),
        diffusion_curves=(outer, inner),
        poisson_curves=(pc,),
        border=(1.0, 1.0, 1.0),
    )


def single_pr_doc(size=256, f_outer=0.002, radius=85.0):
    """Constant gray boundary with one large centered Poisson region.

    The default radius keeps the distance band several pixels thick, the
    scale the banding rule is meant for.
    """
    c = size / 2
    dc = solid_dc(rect_spline(4, 4, size - 4, size - 4), (0.5, 0.5, 0.5), (1, 1, 1))
    pr = PoissonRegion(
        boundary=circle_spline(c, c, radius, n=16), f_outer=(f_outer,) * 3
    )
    return PvgDocument(
        canvas_width=size,
        canvas_height=size,
        background=(1.0, 1.0, 1.0),
        diffusion_curves=(dc,),
        poisson_regions=(pr,),
        border=(1.0, 1.0, 1.0),
    )


def synthetic_square_subdomain(n, g_fn, f_fn):
    """Hand-built bordered square for analytic solver tests.

    ``g_fn``/``f_fn`` take pixel-center coordinates and return scalars
    applied to all three channels.
    """
    interior = np.zeros((n, n), bool)
    interior[1:-1, 1:-1] = True
    boundary = np.zeros((n, n), bool)
    boundary[0, :] = boundary[-1, :] = True
    boundary[:, 0] = boundary[:, -1] = True
    f = np.zeros((n, n, 3))
    ys, xs = np.nonzero(interior)
    f[ys, xs] = np.array(
        [f_fn(x + 0.5, y + 0.5) for x, y in zip(xs, ys)]
    ).reshape(-1, 1)
    colors = {}
    for y, x in zip(*np.nonzero(boundary)):
        colors[(int(x), int(y))] = [(0, np.full(3, g_fn(x + 0.5, y + 0.5)))]
    return DiscretizedSubdomain(
        id=0,
        origin=(0, 0),
        pixel_mask=interior | boundary,
        interior_mask=interior,
        boundary_mask=boundary,
        boundary_samples=[],
        f_field=f,
        region_partition=np.zeros((n, n), np.int32),
        boundary_colors=colors,
        curve_segments={},
    )


def random_small_doc(rng):
    """A small random bordered scene for structural audits."""
    size = int(rng.integers(40, 64))
    c = size / 2
    prims = {"diffusion_curves": [], "poisson_curves": [], "poisson_regions": []}
    r = size * rng.uniform(0.3, 0.42)
    prims["diffusion_curves"].append(
        solid_dc(circle_spline(c, c, r, n=int(rng.integers(6, 14))),
                 tuple(rng.uniform(0.1, 0.9, 3)), tuple(rng.uniform(0.1, 0.9, 3)))
    )
    if rng.random() < 0.7:
        p0 = (c + rng.uniform(-0.2, 0.2) * size, c + rng.uniform(-0.2, 0.2) * size)
        p1 = (c + rng.uniform(-0.2, 0.2) * size, c + rng.uniform(-0.2, 0.2) * size)
        prims["poisson_curves"].append(
            const_pc(line_spline(p0, p1), float(rng.uniform(-0.3, 0.3)))
        )
    if rng.random() < 0.7:
        prims["poisson_regions"].append(
            PoissonRegion(
                boundary=circle_spline(
                    c + rng.uniform(-0.15, 0.15) * size,
                    c + rng.uniform(-0.15, 0.15) * size,
                    size * rng.uniform(0.08, 0.16),
                ),
                f_outer=tuple(rng.uniform(-0.1, 0.1, 3)),
            )
        )
    return PvgDocument(
        canvas_width=size,
        canvas_height=size,
        background=(1.0, 1.0, 1.0),
        border=(1.0, 1.0, 1.0),
        diffusion_curves=tuple(prims["diffusion_curves"]),
        poisson_curves=tuple(prims["poisson_curves"]),
        poisson_regions=tuple(prims["poisson_regions"]),
    )


@pytest.fixture
def rect_doc():
    return simple_rect_doc()


@pytest.fixture
def scene_doc():
    return full_scene_doc(seed=3)
