"""End-to-end rendering.

``render`` runs the pipeline: partition the canvas into subdomains, then
per subdomain rasterize constraints, build the quad-tree and Voronoi
adjacency, solve for control points, and evaluate every interior pixel
through the flattened term lists. A final anti-aliasing pass rewrites
curve pixels: diffusion-curve pixels become the coverage-weighted blend
of their two side colors, Poisson-curve pixels are redrawn from their
two sides, Poisson regions need nothing (soft boundaries).

``render_zoom`` reuses a retained base solve for arbitrary viewports:
interior sub-pixels evaluate the spline directly; sub-pixels whose base
pixel is on a curve are relocated to the nearest base pixel on the same
curve side, then a short Jacobi smoothing pass cleans the relocation
band. No re-discretization or re-factorization happens while zooming.

Subdomains are independent: a primitive edit strictly inside one leaves
every pixel of the others bit-identical. Per-pixel sums accumulate in
fixed term order, so renders are byte-stable across thread counts.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .discretize import DiscretizedScene, partition_subdomains
from .evaluate import eval_points
from .geometry import supercover_pixels
from .model import Diagnostic, PvgDocument, has_errors, validate
from .quadtree import build_quadtree
from .adjacency import build_adjacency
from .solver import (
    SingularSystemError,
    SplineSolution,
    assemble_system,
    build_solution,
    solve_control_points,
)

_EVAL_CHUNK = 8192
JACOBI_BAND = 3
JACOBI_ITERATIONS = 20


class RenderError(RuntimeError):
    pass


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("PVG_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class RasterImage:
    width: int
    height: int
    channels: np.ndarray  # (H, W, 3) float, clamped only at encode time
    viewport: tuple[float, float, float, float] = (1.0, 1.0, 0.0, 0.0)
    # (sx, sy, ox, oy): pixel = doc * s + o

    def copy(self) -> "RasterImage":
        return RasterImage(self.width, self.height, self.channels.copy(),
                           self.viewport)


@dataclass
class ZoomRequest:
    viewport_rect: tuple[float, float, float, float]  # doc coords x, y, w, h
    out_width: int
    out_height: int


@dataclass
class RenderTimings:
    discretize: float = 0.0
    solve: float = 0.0
    total: float = 0.0


@dataclass
class RenderState:
    """Retained artifacts of a base render, enough to zoom from."""

    doc: PvgDocument
    width: int
    height: int
    scene: DiscretizedScene
    solutions: dict[int, SplineSolution]
    image: RasterImage
    diagnostics: list[Diagnostic] = field(default_factory=list)
    timings: RenderTimings = field(default_factory=RenderTimings)


def _eval_subdomain_pixels(sol, sub, threads: int, out: np.ndarray) -> None:
    """Fill all interior pixels of one subdomain into the canvas image."""
    ys, xs = np.nonzero(sub.interior_mask)
    if len(ys) == 0:
        return
    pts = np.stack([xs + 0.5, ys + 0.5], axis=1).astype(np.float64)
    ox, oy = sub.origin
    chunks = [slice(s, s + _EVAL_CHUNK) for s in range(0, len(pts), _EVAL_CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda sl: eval_points(sol, pts[sl]), chunks))
    else:
        results = [eval_points(sol, pts[sl]) for sl in chunks]
    vals = np.vstack(results)
    out[ys + oy, xs + ox] = vals


def _fill_dirichlet_pixels(sub, out: np.ndarray) -> None:
    """Boundary pixels that belong to the component (canvas-border
    Dirichlet) take their boundary color directly."""
    inside_boundary = sub.boundary_mask & ~sub.interior_mask
    ys, xs = np.nonzero(inside_boundary)
    ox, oy = sub.origin
    for iy, ix in zip(ys, xs):
        gx, gy = ix + ox, iy + oy
        # curve pixels are painted by the anti-aliasing pass instead
        if (ix, iy) in sub.curve_segments:
            continue
        out[gy, gx] = sub.boundary_color_for((ix, iy))


def solve_scene(scene: DiscretizedScene):
    """Solve every subdomain; returns (solutions, diagnostics)."""
    solutions: dict[int, SplineSolution] = {}
    diags: list[Diagnostic] = []
    for sub in scene.subdomains:
        cells = build_quadtree(sub)
        adj = build_adjacency(cells, sub)
        sys = assemble_system(adj, sub)
        try:
            lam = solve_control_points(sys)
        except SingularSystemError as exc:
            diags.append(
                Diagnostic(
                    severity="warning",
                    code="singular-subdomain",
                    message=f"subdomain {sub.id}: {exc}; filled with background",
                    primitive_index=sub.id,
                )
            )
            continue
        solutions[sub.id] = build_solution(lam, sys, adj, sub)
    return solutions, diags


def antialias(img: RasterImage, doc: PvgDocument, scene: DiscretizedScene) -> RasterImage:
    """Rewrite curve pixels with coverage-weighted colors.

    DC pixels blend their two side colors by the pixel center's signed
    distance to the local segment; PC pixels blend the already-rendered
    colors of their two side neighbours the same way. PR boundaries are
    left untouched.
    """
    from .discretize import interp_stops

    out = img.copy()
    raster = scene.curve_raster
    ys, xs = np.nonzero(raster.mask)
    for iy, ix in zip(ys, xs):
        ci = int(raster.curve_id[iy, ix])
        si = int(raster.seg_index[iy, ix])
        t = float(raster.param[iy, ix])
        verts, _ = raster.polylines[ci]
        a, b = verts[si], verts[si + 1]
        tangent = b - a
        norm = np.hypot(*tangent)
        if norm == 0.0:
            continue
        tangent = tangent / norm
        center = np.array([ix + 0.5, iy + 0.5])
        v = center - a
        dist = tangent[0] * v[1] - tangent[1] * v[0]  # + on the left
        cov_left = min(max(0.5 + dist, 0.0), 1.0)
        dc = doc.diffusion_curves[ci]
        lts = np.array([s.t for s in dc.left_colors])
        lvs = np.array([s.color for s in dc.left_colors])
        rts = np.array([s.t for s in dc.right_colors])
        rvs = np.array([s.color for s in dc.right_colors])
        g_left = interp_stops(lts, lvs, t, dc.spline.closed)
        g_right = interp_stops(rts, rvs, t, dc.spline.closed)
        out.channels[iy, ix] = cov_left * g_left + (1.0 - cov_left) * g_right

    # redraw both sides of every Poisson curve
    h, w = raster.mask.shape
    sx = img.width / doc.canvas_width
    sy = img.height / doc.canvas_height
    scale = np.array([sx, sy])
    for pc in doc.poisson_curves:
        verts, params = pc.spline.flatten()
        verts = verts * scale
        for si in range(len(verts) - 1):
            a, b = verts[si], verts[si + 1]
            tangent = b - a
            norm = np.hypot(*tangent)
            if norm == 0.0:
                continue
            tangent = tangent / norm
            left = np.array([-tangent[1], tangent[0]])
            lo = (int(np.round(left[0])), int(np.round(left[1])))
            for ix, iy, _ in supercover_pixels(a, b):
                if not (0 <= ix < w and 0 <= iy < h):
                    continue
                if raster.mask[iy, ix]:
                    continue  # DC pixel wins
                lx, ly = ix + lo[0], iy + lo[1]
                rx, ry = ix - lo[0], iy - lo[1]
                if not (0 <= lx < w and 0 <= ly < h and 0 <= rx < w and 0 <= ry < h):
                    continue
                if raster.mask[ly, lx] or raster.mask[ry, rx]:
                    continue
                center = np.array([ix + 0.5, iy + 0.5])
                v = center - a
                dist = tangent[0] * v[1] - tangent[1] * v[0]
                cov_left = min(max(0.5 + dist, 0.0), 1.0)
                out.channels[iy, ix] = (
                    cov_left * out.channels[ly, lx]
                    + (1.0 - cov_left) * out.channels[ry, rx]
                )
    return out


def render_state(doc: PvgDocument, width: int, height: int,
                 threads: int | None = None) -> RenderState:
    """Full pipeline, returning the retained state (image included)."""
    diags = validate(doc)
    if has_errors(diags):
        msgs = "; ".join(d.message for d in diags if d.is_error)
        raise RenderError(f"document has validation errors: {msgs}")
    threads = threads or default_threads()

    t_start = time.perf_counter()
    scene = partition_subdomains(doc, width, height)
    t_disc = time.perf_counter() - t_start

    t0 = time.perf_counter()
    solutions, solve_diags = solve_scene(scene)
    diags = diags + solve_diags

    channels = np.empty((height, width, 3), dtype=np.float64)
    channels[:] = np.asarray(doc.background)
    for sub in scene.subdomains:
        sol = solutions.get(sub.id)
        if sol is None:
            continue  # singular: stays background
        _eval_subdomain_pixels(sol, sub, threads, channels)
        _fill_dirichlet_pixels(sub, channels)
    t_solve = time.perf_counter() - t0

    img = RasterImage(
        width=width,
        height=height,
        channels=channels,
        viewport=(width / doc.canvas_width, height / doc.canvas_height, 0.0, 0.0),
    )
    img = antialias(img, doc, scene)
    total = time.perf_counter() - t_start
    return RenderState(
        doc=doc,
        width=width,
        height=height,
        scene=scene,
        solutions=solutions,
        image=img,
        diagnostics=diags,
        timings=RenderTimings(discretize=t_disc, solve=t_solve, total=total),
    )


def render(doc: PvgDocument, width: int, height: int,
           threads: int | None = None, supersample: int = 1) -> RasterImage:
    """Render the document at the given resolution.

    ``supersample`` renders at an integer multiple and box-downsamples;
    it exists for validation, not as the default quality path.
    """
    if supersample < 1:
        raise ValueError("supersample must be >= 1")
    if supersample > 1:
        hi = render_state(doc, width * supersample, height * supersample, threads)
        return RasterImage(width, height,
                           box_downsample(hi.image.channels, supersample),
                           (width / doc.canvas_width, height / doc.canvas_height,
                            0.0, 0.0))
    return render_state(doc, width, height, threads).image


def box_downsample(channels: np.ndarray, factor: int) -> np.ndarray:
    h, w, c = channels.shape
    return channels.reshape(h // factor, factor, w // factor, factor, c).mean(axis=(1, 3))


# --------------------------------------------------------------------------
# zooming


def _relocate(state: RenderState, bx: float, by: float):
    """Nearest base pixel on the same curve side as the sub-pixel point.

    Returns (ix, iy) of a component pixel of the base render or None.
    """
    scene = state.scene
    raster = scene.curve_raster
    h, w = raster.mask.shape
    cx, cy = int(np.floor(bx)), int(np.floor(by))
    cx = min(max(cx, 0), w - 1)
    cy = min(max(cy, 0), h - 1)
    if raster.mask[cy, cx]:
        ci = int(raster.curve_id[cy, cx])
        si = int(raster.seg_index[cy, cx])
        verts, _ = raster.polylines[ci]
        a, b = verts[si], verts[si + 1]
        t = b - a
        v = np.array([bx, by]) - a
        want_side = 1 if (t[0] * v[1] - t[1] * v[0]) >= 0.0 else -1
    else:
        a = b = None
        want_side = 0

    best = None
    best_d2 = np.inf
    for radius in range(1, 6):
        for dy in range(-radius, radius + 1):
            for dx in range(-radius, radius + 1):
                if max(abs(dx), abs(dy)) != radius:
                    continue
                qx, qy = cx + dx, cy + dy
                if not (0 <= qx < w and 0 <= qy < h):
                    continue
                if scene.label_map[qy, qx] < 0:
                    continue
                if a is not None:
                    qc = np.array([qx + 0.5, qy + 0.5])
                    v = qc - a
                    t = b - a
                    side = 1 if (t[0] * v[1] - t[1] * v[0]) >= 0.0 else -1
                    if side != want_side:
                        continue
                d2 = (qx + 0.5 - bx) ** 2 + (qy + 0.5 - by) ** 2
                if d2 < best_d2:
                    best_d2 = d2
                    best = (qx, qy)
        if best is not None:
            return best
    return best


def render_zoom(state: RenderState, req: ZoomRequest,
                threads: int | None = None) -> RasterImage:
    """Render a viewport using the retained base solve.

    Interior sub-pixels evaluate the spline at full precision; sub-pixels
    over base curve pixels take the color of the nearest same-side base
    pixel and a Jacobi pass smooths the relocation band. The base
    quad-trees, adjacencies and factorizations are reused untouched.
    """
    rx, ry, rw, rh = req.viewport_rect
    doc = state.doc
    if not (0 <= rx and 0 <= ry and rx + rw <= doc.canvas_width
            and ry + rh <= doc.canvas_height and rw > 0 and rh > 0):
        raise ValueError("viewport must lie inside the canvas")
    threads = threads or default_threads()
    ow, oh = req.out_width, req.out_height
    # doc -> base pixel scale
    bsx = state.width / doc.canvas_width
    bsy = state.height / doc.canvas_height

    js = np.arange(ow)
    docx = rx + (js + 0.5) * (rw / ow)
    bxs = docx * bsx
    out = np.empty((oh, ow, 3), dtype=np.float64)
    relocated = np.zeros((oh, ow), dtype=bool)

    scene = state.scene
    label_map = scene.label_map
    curve_mask = scene.curve_raster.mask
    base_img = state.image.channels
    h, w = label_map.shape

    sub_by_id = {s.id: s for s in scene.subdomains}

    def do_row(i: int):
        docy = ry + (i + 0.5) * (rh / oh)
        by = docy * bsy
        iy = min(max(int(np.floor(by)), 0), h - 1)
        row = np.empty((ow, 3))
        row_reloc = np.zeros(ow, dtype=bool)
        # group interior-evaluable pixels per subdomain for batching
        pending: dict[int, list[int]] = {}
        for j in range(ow):
            bx = bxs[j]
            ix = min(max(int(np.floor(bx)), 0), w - 1)
            comp = label_map[iy, ix]
            if comp >= 0 and not curve_mask[iy, ix]:
                sub = sub_by_id[comp]
                lx = ix - sub.origin[0]
                ly = iy - sub.origin[1]
                if sub.boundary_mask[ly, lx]:
                    row[j] = sub.boundary_color_for((lx, ly))
                elif comp in state.solutions:
                    pending.setdefault(comp, []).append(j)
                else:
                    row[j] = np.asarray(doc.background)
            else:
                q = _relocate(state, bx, by)
                if q is None:
                    row[j] = np.asarray(doc.background)
                else:
                    row[j] = base_img[q[1], q[0]]
                row_reloc[j] = True
        for comp, cols in pending.items():
            sub = sub_by_id[comp]
            pts = np.stack(
                [bxs[cols] - sub.origin[0], np.full(len(cols), by - sub.origin[1])],
                axis=1,
            )
            row[cols] = eval_points(state.solutions[comp], pts)
        return i, row, row_reloc

    rows = range(oh)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for i, row, row_reloc in pool.map(do_row, rows):
                out[i] = row
                relocated[i] = row_reloc
    else:
        for i, row, row_reloc in map(do_row, rows):
            out[i] = row
            relocated[i] = row_reloc

    out = _jacobi_smooth(out, relocated)
    return RasterImage(
        width=ow,
        height=oh,
        channels=out,
        viewport=(ow / rw, oh / rh, -rx * ow / rw, -ry * oh / rh),
    )


def _jacobi_smooth(img: np.ndarray, relocated: np.ndarray) -> np.ndarray:
    """Average-of-neighbours smoothing on the relocation band; pixels
    outside the band act as fixed anchors."""
    if not relocated.any():
        return img
    band = relocated.copy()
    for _ in range(JACOBI_BAND):
        grown = band.copy()
        grown[1:, :] |= band[:-1, :]
        grown[:-1, :] |= band[1:, :]
        grown[:, 1:] |= band[:, :-1]
        grown[:, :-1] |= band[:, 1:]
        band = grown
    out = img.copy()
    ys, xs = np.nonzero(band)
    h, w = band.shape
    for _ in range(JACOBI_ITERATIONS):
        acc = np.zeros((len(ys), 3))
        cnt = np.zeros(len(ys))
        for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            qy = ys + dy
            qx = xs + dx
            ok = (qy >= 0) & (qy < h) & (qx >= 0) & (qx < w)
            acc[ok] += out[qy[ok], qx[ok]]
            cnt[ok] += 1
        vals = acc / np.maximum(cnt, 1)[:, None]
        out[ys, xs] = vals
    return out


# --------------------------------------------------------------------------
# encoding


def encode_image(img: RasterImage, path: str, bits16: bool = False) -> None:
    """Clamp, quantize (round half up) and write a raster file.

    ``.ppm`` gets a binary portable pixmap (P6, 8- or 16-bit); anything
    else goes through Pillow as PNG-style formats. 16-bit output is only
    supported for PPM.
    """
    data = np.clip(img.channels, 0.0, 1.0)
    path = str(path)
    if path.lower().endswith(".ppm"):
        if bits16:
            q = np.floor(data * 65535.0 + 0.5).astype(np.uint16)
            header = f"P6\n{img.width} {img.height}\n65535\n".encode()
            body = q.astype(">u2").tobytes()
        else:
            q = np.floor(data * 255.0 + 0.5).astype(np.uint8)
            header = f"P6\n{img.width} {img.height}\n255\n".encode()
            body = q.tobytes()
        with open(path, "wb") as fh:
            fh.write(header + body)
        return
    if bits16:
        raise ValueError("16-bit output is only supported for .ppm")
    from PIL import Image

    q = np.floor(data * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(q, mode="RGB").save(path)


def decode_image(path: str) -> RasterImage:
    """Read an 8-bit raster file back into [0, 1] floats."""
    from PIL import Image

    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    h, w, _ = arr.shape
    return RasterImage(width=w, height=h, channels=arr)
