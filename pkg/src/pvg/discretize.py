"""Document rasterization: subdomain partition and constraint fields.

At a target resolution the document becomes:

* a curve mask: 1-px 4-connected chains for every diffusion curve,
* a label map: 4-connected components of the non-curve pixels, one
  subdomain per component (color cannot diffuse across a DC),
* per-subdomain boundary samples: every curve (or colored-border) pixel
  bordering the component, with the side color facing it,
* a piecewise-constant Laplacian field stamped from Poisson curves
  (two 1-px strips of opposite sign) and Poisson regions (two distance
  bands whose area-weighted values sum to zero), plus a region-id map
  identifying the constant pieces.

Overlapping nonzero stamps add; pixels owned by a diffusion curve are
never stamped (Dirichlet data wins).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .geometry import fill_polygon_mask, supercover_pixels
from .model import PvgDocument

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

# side codes for boundary samples
SIDE_LEFT = 1
SIDE_RIGHT = -1
SIDE_BORDER = 0

PR_BAND_FRACTION = 0.05


def euclidean_distance_transform(mask: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance from every pixel to the nearest True pixel.

    Distances are between pixel centers; True pixels map to 0.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("distance transform needs a non-empty source mask")
    return ndimage.distance_transform_edt(~mask)


@dataclass
class CurveRaster:
    """Rasterized curve network with per-pixel provenance."""

    mask: np.ndarray                      # (H, W) bool, True on curve pixels
    curve_id: np.ndarray                  # (H, W) int32, -1 off-curve
    seg_index: np.ndarray                 # (H, W) int32, segment that drew it
    param: np.ndarray                     # (H, W) float32, spline parameter
    polylines: list                       # per curve: (verts, params)


def rasterize_curves(polylines, width: int, height: int) -> CurveRaster:
    """Supercover-rasterize flattened curves into a shared pixel grid.

    First writer wins on contested pixels (legal touches between curves).
    """
    mask = np.zeros((height, width), dtype=bool)
    curve_id = np.full((height, width), -1, dtype=np.int32)
    seg_index = np.full((height, width), -1, dtype=np.int32)
    param = np.zeros((height, width), dtype=np.float32)
    for ci, (verts, params) in enumerate(polylines):
        for si in range(len(verts) - 1):
            p0, p1 = verts[si], verts[si + 1]
            t0, t1 = params[si], params[si + 1]
            for ix, iy, s in supercover_pixels(p0, p1):
                if not (0 <= ix < width and 0 <= iy < height):
                    continue
                if not mask[iy, ix]:
                    mask[iy, ix] = True
                    curve_id[iy, ix] = ci
                    seg_index[iy, ix] = si
                    param[iy, ix] = t0 + s * (t1 - t0)
    return CurveRaster(mask, curve_id, seg_index, param, list(polylines))


def interp_stops(ts: np.ndarray, values: np.ndarray, t: float, closed: bool):
    """Piecewise-linear interpolation of stop values at parameter t.

    Open curves clamp beyond the end stops; closed curves wrap across the
    t = 0/1 seam.
    """
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(ts) == 1:
        return values[0]
    if closed:
        period_gap = ts[0] + 1.0 - ts[-1]
        if t < ts[0]:
            w = (t + 1.0 - ts[-1]) / period_gap
            return values[-1] * (1 - w) + values[0] * w
        if t > ts[-1]:
            w = (t - ts[-1]) / period_gap
            return values[-1] * (1 - w) + values[0] * w
    if t <= ts[0]:
        return values[0]
    if t >= ts[-1]:
        return values[-1]
    k = int(np.searchsorted(ts, t) - 1)
    w = (t - ts[k]) / (ts[k + 1] - ts[k])
    return values[k] * (1 - w) + values[k + 1] * w


@dataclass
class BandedRegion:
    """Distance-split Poisson region with the zero-sum inner value."""

    d1_mask: np.ndarray
    d2_mask: np.ndarray
    a1: int
    a2: int
    f1: np.ndarray  # per channel, halo increment applied
    f2: np.ndarray


@dataclass
class ConstraintField:
    f: np.ndarray            # (H, W, 3) Laplacian per pixel
    region_ids: np.ndarray   # (H, W) int32, constant-f piece labels
    banded_regions: list[BandedRegion] = field(default_factory=list)


def band_region(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a region into its thin outer band D1 and the rest D2.

    The band is the set of region pixels within 5% of the maximum
    distance-to-boundary; boundary pixels are the region pixels adjacent
    to the outside.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return mask.copy(), mask.copy()
    eroded = ndimage.binary_erosion(mask, structure=FOUR_CONNECTED, border_value=0)
    edge = mask & ~eroded
    dist = euclidean_distance_transform(edge)
    d_max = dist[mask].max()
    d1 = mask & (dist <= PR_BAND_FRACTION * d_max)
    d2 = mask & ~d1
    return d1, d2


def _stamp_poisson_curve(pc, polyline, f_img, curve_mask, width, height, f_scale):
    verts, params = polyline
    ts = np.array([s.t for s in pc.laplacian_stops])
    vals = np.array([s.f_plus for s in pc.laplacian_stops])
    closed = pc.spline.closed
    seen = {}
    for si in range(len(verts) - 1):
        p0, p1 = verts[si], verts[si + 1]
        tangent = p1 - p0
        norm = np.hypot(*tangent)
        if norm == 0.0:
            continue
        tangent = tangent / norm
        left = np.array([-tangent[1], tangent[0]])
        t0, t1 = params[si], params[si + 1]
        for ix, iy, s in supercover_pixels(p0, p1):
            t = t0 + s * (t1 - t0)
            f_plus = interp_stops(ts, vals, t, closed) * f_scale
            for sign, normal in ((1.0, left), (-1.0, -left)):
                qx = ix + int(np.round(normal[0]))
                qy = iy + int(np.round(normal[1]))
                if not (0 <= qx < width and 0 <= qy < height):
                    continue
                if curve_mask[qy, qx]:
                    continue  # Dirichlet wins
                key = (sign > 0, qx, qy)
                if key in seen:
                    continue
                seen[key] = True
                f_img[qy, qx] += sign * f_plus
    return f_img


def rasterize_constraints(doc: PvgDocument, width: int, height: int,
                          curve_mask: np.ndarray) -> ConstraintField:
    """Stamp all PC strips and PR bands into a canvas-size Laplacian field.

    Laplacian units follow the canvas scale: PR values are rescaled by the
    pixel-area ratio so the region's integrated effect is resolution
    independent, while PC strips keep their nominal per-pixel value (the
    strip is one pixel wide at any output resolution, preserving the edge
    step).
    """
    f_img = np.zeros((height, width, 3), dtype=np.float64)
    sx = width / doc.canvas_width
    sy = height / doc.canvas_height
    scale = np.array([sx, sy])

    banded: list[BandedRegion] = []
    for pc in doc.poisson_curves:
        verts, params = pc.spline.flatten()
        _stamp_poisson_curve(pc, (verts * scale, params), f_img,
                             curve_mask, width, height, f_scale=1.0)

    area_scale = 1.0 / (sx * sy)
    for pr in doc.poisson_regions:
        verts, _ = pr.boundary.flatten()
        mask = fill_polygon_mask(verts * scale, width, height)
        mask &= ~curve_mask  # Dirichlet wins
        if not mask.any():
            banded.append(BandedRegion(mask, mask.copy(), 0, 0,
                                       np.zeros(3), np.zeros(3)))
            continue
        d1, d2 = band_region(mask)
        a1, a2 = int(d1.sum()), int(d2.sum())
        f_outer = np.asarray(pr.f_outer, dtype=float) * area_scale
        if a2 > 0:
            f_inner = -(a1 / a2) * f_outer
        else:
            f_inner = np.zeros(3)
        f1 = f_outer + np.asarray(pr.delta_outer, dtype=float) * area_scale
        f2 = f_inner + np.asarray(pr.delta_inner, dtype=float) * area_scale
        f_img[d1] += f1
        f_img[d2] += f2
        banded.append(BandedRegion(d1, d2, a1, a2, f1, f2))

    # label the constant-f pieces: identical triples share an id
    flat = f_img.reshape(-1, 3)
    _, inverse = np.unique(flat, axis=0, return_inverse=True)
    region_ids = inverse.reshape(height, width).astype(np.int32)
    return ConstraintField(f=f_img, region_ids=region_ids, banded_regions=banded)


@dataclass
class BoundarySample:
    pixel: tuple[int, int]
    side: int                     # SIDE_LEFT / SIDE_RIGHT / SIDE_BORDER
    color: tuple[float, float, float]
    curve_index: int = -1


@dataclass
class DiscretizedSubdomain:
    """One connected component with everything the solver needs.

    Masks are cropped to the component's bounding box (including its
    boundary pixels); ``origin`` maps local pixel (0,0) back to canvas
    coordinates.
    """

    id: int
    origin: tuple[int, int]
    pixel_mask: np.ndarray        # (h, w) bool: component + boundary pixels
    interior_mask: np.ndarray     # (h, w) bool: component minus boundary
    boundary_mask: np.ndarray     # (h, w) bool
    boundary_samples: list[BoundarySample]
    f_field: np.ndarray           # (h, w, 3)
    region_partition: np.ndarray  # (h, w) int32

    # per boundary pixel (local coords): list of (side, color) entries
    boundary_colors: dict = field(default_factory=dict)
    # per curve pixel (local coords): local segment endpoints for side tests
    curve_segments: dict = field(default_factory=dict)
    # True when the Dirichlet data does not enclose the component (the
    # component reaches the canvas edge of a borderless document)
    open_boundary: bool = False

    @property
    def shape(self):
        return self.pixel_mask.shape

    def boundary_color_for(self, pixel: tuple[int, int]) -> np.ndarray:
        """Mean Dirichlet color at a local boundary pixel (slit pixels
        average their two sides)."""
        entries = self.boundary_colors[pixel]
        return np.mean([c for _, c in entries], axis=0)


@dataclass
class DiscretizedScene:
    width: int
    height: int
    background: tuple[float, float, float]
    curve_raster: CurveRaster
    label_map: np.ndarray          # (H, W) int32: component id, -1 on curves
    subdomains: list[DiscretizedSubdomain]
    constraints: ConstraintField
    dc_polyline_scaled: list       # flattened DC vertices in output px
    border: tuple[float, float, float] | None


def _side_color(dc, verts, params, seg, t, side):
    stops = dc.left_colors if side == SIDE_LEFT else dc.right_colors
    ts = np.array([s.t for s in stops])
    vals = np.array([s.color for s in stops])
    return tuple(interp_stops(ts, vals, t, dc.spline.closed))


def partition_subdomains(doc: PvgDocument, width: int, height: int) -> DiscretizedScene:
    """Rasterize DCs, flood-fill components, attach boundary data and
    constraint fields.

    Every curve pixel bordering a component contributes one boundary
    sample with the color of the side facing that component; an open DC
    dangling inside a component contributes both sides (interior slit).
    Pixels of a component on the canvas edge become border samples when
    the document has a colored border.
    """
    sx = width / doc.canvas_width
    sy = height / doc.canvas_height
    scale = np.array([sx, sy])

    polylines = []
    for dc in doc.diffusion_curves:
        verts, params = dc.spline.flatten()
        polylines.append((verts * scale, params))
    raster = rasterize_curves(polylines, width, height)

    label_map, n_comp = ndimage.label(~raster.mask, structure=FOUR_CONNECTED)
    label_map = label_map.astype(np.int32) - 1  # components 0.., curves -1

    constraints = rasterize_constraints(doc, width, height, raster.mask)

    # collect boundary samples per component
    samples: list[list[BoundarySample]] = [[] for _ in range(n_comp)]
    sides_seen: list[dict] = [dict() for _ in range(n_comp)]
    ys, xs = np.nonzero(raster.mask)
    for iy, ix in zip(ys, xs):
        ci = int(raster.curve_id[iy, ix])
        si = int(raster.seg_index[iy, ix])
        t = float(raster.param[iy, ix])
        verts, params = raster.polylines[ci]
        a, b = verts[si], verts[si + 1]
        dc = doc.diffusion_curves[ci]
        for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            qy, qx = iy + dy, ix + dx
            if not (0 <= qx < width and 0 <= qy < height):
                continue
            comp = label_map[qy, qx]
            if comp < 0:
                continue
            qc = (qx + 0.5, qy + 0.5)
            tangent = b - a
            cross = tangent[0] * (qc[1] - a[1]) - tangent[1] * (qc[0] - a[0])
            side = SIDE_LEFT if cross >= 0.0 else SIDE_RIGHT
            key = (ix, iy, side)
            if key in sides_seen[comp]:
                continue
            sides_seen[comp][key] = True
            color = _side_color(dc, verts, params, si, t, side)
            samples[comp].append(
                BoundarySample(pixel=(ix, iy), side=side, color=color, curve_index=ci)
            )

    # canvas border Dirichlet
    if doc.border is not None:
        on_border = np.zeros_like(raster.mask)
        on_border[0, :] = on_border[-1, :] = True
        on_border[:, 0] = on_border[:, -1] = True
        bys, bxs = np.nonzero(on_border & ~raster.mask)
        for iy, ix in zip(bys, bxs):
            comp = label_map[iy, ix]
            if comp < 0:
                continue
            key = (int(ix), int(iy), SIDE_BORDER)
            if key in sides_seen[comp]:
                continue
            sides_seen[comp][key] = True
            samples[comp].append(
                BoundarySample(pixel=(int(ix), int(iy)), side=SIDE_BORDER,
                               color=doc.border)
            )

    subdomains = []
    for comp in range(n_comp):
        comp_mask = label_map == comp
        xs_any = np.nonzero(comp_mask.any(axis=0))[0]
        ys_any = np.nonzero(comp_mask.any(axis=1))[0]
        x0, x1 = int(xs_any.min()), int(xs_any.max()) + 1
        y0, y1 = int(ys_any.min()), int(ys_any.max()) + 1
        bpix = {s.pixel for s in samples[comp]}
        if bpix:
            bx = np.array([p[0] for p in bpix])
            by = np.array([p[1] for p in bpix])
            x0, x1 = min(x0, int(bx.min())), max(x1, int(bx.max()) + 1)
            y0, y1 = min(y0, int(by.min())), max(y1, int(by.max()) + 1)

        touches_edge = bool(
            comp_mask[0, :].any()
            or comp_mask[-1, :].any()
            or comp_mask[:, 0].any()
            or comp_mask[:, -1].any()
        )
        local_comp = comp_mask[y0:y1, x0:x1]
        h, w = local_comp.shape
        boundary_mask = np.zeros((h, w), dtype=bool)
        boundary_colors: dict = {}
        curve_segments: dict = {}
        local_samples = []
        shift = np.array([x0, y0], dtype=float)
        for s in samples[comp]:
            lx, ly = s.pixel[0] - x0, s.pixel[1] - y0
            boundary_mask[ly, lx] = True
            boundary_colors.setdefault((lx, ly), []).append(
                (s.side, np.asarray(s.color, dtype=float))
            )
            if s.curve_index >= 0 and (lx, ly) not in curve_segments:
                gx, gy = s.pixel
                si = int(raster.seg_index[gy, gx])
                verts, _ = raster.polylines[s.curve_index]
                curve_segments[(lx, ly)] = (verts[si] - shift, verts[si + 1] - shift)
            local_samples.append(s)

        border_pixel = boundary_mask & local_comp  # border samples sit inside
        interior_mask = local_comp & ~border_pixel
        pixel_mask = local_comp | boundary_mask
        subdomains.append(
            DiscretizedSubdomain(
                id=comp,
                origin=(x0, y0),
                pixel_mask=pixel_mask,
                interior_mask=interior_mask,
                boundary_mask=boundary_mask,
                boundary_samples=local_samples,
                f_field=constraints.f[y0:y1, x0:x1],
                region_partition=constraints.region_ids[y0:y1, x0:x1],
                boundary_colors=boundary_colors,
                curve_segments=curve_segments,
                open_boundary=doc.border is None and touches_edge,
            )
        )

    return DiscretizedScene(
        width=width,
        height=height,
        background=doc.background,
        curve_raster=raster,
        label_map=label_map,
        subdomains=subdomains,
        constraints=constraints,
        dc_polyline_scaled=polylines,
        border=doc.border,
    )
