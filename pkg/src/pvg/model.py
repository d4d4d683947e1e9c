"""PVG document model: primitives, canonical text format, validation.

A document is a canvas plus three primitive lists:

* diffusion curves (DCs) carry per-side colors and act as Dirichlet data,
* Poisson curves (PCs) carry a per-side Laplacian with the opposite side
  implied as its negation (never stored),
* Poisson regions (PRs) carry a Laplacian for their thin outer band; the
  inner band value is derived at rasterization time so the area-weighted
  sum over the region vanishes.

Colors are linear-light floats in [0, 1]. Laplacian values are color
units per pixel^2 at the document's nominal canvas resolution.

Documents are immutable values: parsing produces frozen dataclasses and
every mutation must build a new document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .geometry import (
    FLATTEN_TOL,
    flatten_spline,
    points_in_polygon,
    segments_intersect,
)

FORMAT_VERSION = 1

# endpoint / T-junction contacts closer than this do not count as crossings
DC_INTERSECT_TOL = 0.25


class DocumentError(ValueError):
    """Raised for malformed or structurally invalid documents."""


@dataclass(frozen=True)
class CubicBSpline:
    control_points: tuple[tuple[float, float], ...]
    closed: bool = False

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.control_points)
        object.__setattr__(self, "control_points", pts)
        object.__setattr__(self, "closed", bool(self.closed))
        if len(pts) < 4:
            raise DocumentError("spline needs at least 4 control points")

    def control_array(self) -> np.ndarray:
        return np.array(self.control_points, dtype=float)

    def flatten(self, tol: float = FLATTEN_TOL):
        return flatten_spline(self.control_array(), self.closed, tol)


def _check_stops(ts: Iterable[float], what: str) -> None:
    ts = list(ts)
    if not ts:
        raise DocumentError(f"{what} must have at least one stop")
    for t in ts:
        if not (0.0 <= t <= 1.0):
            raise DocumentError(f"{what} parameter {t} outside [0, 1]")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise DocumentError(f"{what} must be strictly increasing in t")


def _check_color(c, what: str) -> tuple[float, float, float]:
    c = tuple(float(v) for v in c)
    if len(c) != 3:
        raise DocumentError(f"{what} must be an RGB triple")
    if any(not (0.0 <= v <= 1.0) for v in c):
        raise DocumentError(f"{what} components must lie in [0, 1]")
    return c


def _float3(v) -> tuple[float, float, float]:
    t = tuple(float(c) for c in v)
    if len(t) != 3:
        raise DocumentError("expected a triple")
    return t


@dataclass(frozen=True)
class ColorStop:
    t: float
    color: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "color", _float3(self.color))


@dataclass(frozen=True)
class DiffusionCurve:
    spline: CubicBSpline
    left_colors: tuple[ColorStop, ...]
    right_colors: tuple[ColorStop, ...]

    def __post_init__(self):
        _check_stops([s.t for s in self.left_colors], "left color stops")
        _check_stops([s.t for s in self.right_colors], "right color stops")


@dataclass(frozen=True)
class LaplacianStop:
    t: float
    f_plus: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "f_plus", _float3(self.f_plus))


@dataclass(frozen=True)
class PoissonCurve:
    spline: CubicBSpline
    laplacian_stops: tuple[LaplacianStop, ...]

    def __post_init__(self):
        _check_stops([s.t for s in self.laplacian_stops], "laplacian stops")


@dataclass(frozen=True)
class PoissonRegion:
    boundary: CubicBSpline
    f_outer: tuple[float, float, float]
    delta_outer: tuple[float, float, float] = (0.0, 0.0, 0.0)
    delta_inner: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "f_outer", _float3(self.f_outer))
        object.__setattr__(self, "delta_outer", _float3(self.delta_outer))
        object.__setattr__(self, "delta_inner", _float3(self.delta_inner))
        if not self.boundary.closed:
            raise DocumentError("PR boundary must be closed")


@dataclass(frozen=True)
class PvgDocument:
    canvas_width: int
    canvas_height: int
    background: tuple[float, float, float]
    diffusion_curves: tuple[DiffusionCurve, ...] = ()
    poisson_curves: tuple[PoissonCurve, ...] = ()
    poisson_regions: tuple[PoissonRegion, ...] = ()
    border: tuple[float, float, float] | None = None
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "canvas_width", int(self.canvas_width))
        object.__setattr__(self, "canvas_height", int(self.canvas_height))
        object.__setattr__(self, "background", _float3(self.background))
        if self.border is not None:
            object.__setattr__(self, "border", _float3(self.border))
        if self.canvas_width <= 0 or self.canvas_height <= 0:
            raise DocumentError("canvas dimensions must be positive")

    def with_(self, **kw) -> "PvgDocument":
        return replace(self, **kw)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    primitive_index: int = -1

    @property
    def is_error(self) -> bool:
        return self.severity == "error"


# --------------------------------------------------------------------------
# parsing / serialization


def _parse_spline(obj, what: str) -> CubicBSpline:
    try:
        pts = tuple((float(x), float(y)) for x, y in obj["control_points"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"{what}: bad control_points") from exc
    closed = bool(obj.get("closed", False))
    return CubicBSpline(control_points=pts, closed=closed)


def _parse_triple(obj, what: str) -> tuple[float, float, float]:
    try:
        t = tuple(float(v) for v in obj)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"{what}: expected a numeric triple") from exc
    if len(t) != 3:
        raise DocumentError(f"{what}: expected exactly 3 components")
    return t


def parse_document(data: bytes | str) -> PvgDocument:
    """Parse the canonical ``.pvg.json`` format into a document.

    Raises :class:`DocumentError` for malformed syntax, unknown versions,
    or any structural invariant violation.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentError("document is not valid UTF-8") from exc
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed document: {exc}") from exc
    if not isinstance(obj, dict):
        raise DocumentError("document root must be an object")
    version = obj.get("version")
    if version != FORMAT_VERSION:
        raise DocumentError(f"unknown format version {version!r}")
    canvas = obj.get("canvas")
    if not isinstance(canvas, dict):
        raise DocumentError("missing canvas object")
    try:
        width = int(canvas["width"])
        height = int(canvas["height"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError("canvas width/height must be integers") from exc
    background = _check_color(canvas.get("background", (1.0, 1.0, 1.0)), "background")
    border_raw = canvas.get("border", "background")
    if border_raw is None:
        border = None
    elif border_raw == "background":
        border = background
    else:
        border = _check_color(border_raw, "border")

    dcs = []
    for i, c in enumerate(obj.get("diffusion_curves", [])):
        spline = _parse_spline(c.get("spline", {}), f"diffusion curve {i}")
        left = tuple(
            ColorStop(float(s["t"]), _check_color(s["color"], f"DC {i} left color"))
            for s in c.get("left_colors", [])
        )
        right = tuple(
            ColorStop(float(s["t"]), _check_color(s["color"], f"DC {i} right color"))
            for s in c.get("right_colors", [])
        )
        dcs.append(DiffusionCurve(spline=spline, left_colors=left, right_colors=right))

    pcs = []
    for i, c in enumerate(obj.get("poisson_curves", [])):
        spline = _parse_spline(c.get("spline", {}), f"poisson curve {i}")
        stops = tuple(
            LaplacianStop(float(s["t"]), _parse_triple(s["f_plus"], f"PC {i} f_plus"))
            for s in c.get("laplacian_stops", [])
        )
        pcs.append(PoissonCurve(spline=spline, laplacian_stops=stops))

    prs = []
    for i, c in enumerate(obj.get("poisson_regions", [])):
        boundary = _parse_spline(c.get("boundary", {}), f"poisson region {i}")
        bands = int(c.get("bands", 2))
        if bands != 2:
            raise DocumentError(f"poisson region {i}: only 2 bands are supported")
        prs.append(
            PoissonRegion(
                boundary=boundary,
                f_outer=_parse_triple(c.get("f_outer", (0, 0, 0)), f"PR {i} f_outer"),
                delta_outer=_parse_triple(
                    c.get("delta_outer", (0, 0, 0)), f"PR {i} delta_outer"
                ),
                delta_inner=_parse_triple(
                    c.get("delta_inner", (0, 0, 0)), f"PR {i} delta_inner"
                ),
            )
        )

    return PvgDocument(
        canvas_width=width,
        canvas_height=height,
        background=background,
        diffusion_curves=tuple(dcs),
        poisson_curves=tuple(pcs),
        poisson_regions=tuple(prs),
        border=border,
        format_version=version,
    )


def _spline_obj(s: CubicBSpline) -> dict:
    return {
        "closed": s.closed,
        "control_points": [[x, y] for x, y in s.control_points],
    }


def serialize_document(doc: PvgDocument) -> bytes:
    """Canonical byte serialization; ``parse(serialize(doc)) == doc``."""
    obj = {
        "version": doc.format_version,
        "canvas": {
            "width": doc.canvas_width,
            "height": doc.canvas_height,
            "background": list(doc.background),
            "border": None if doc.border is None else list(doc.border),
        },
        "diffusion_curves": [
            {
                "spline": _spline_obj(c.spline),
                "left_colors": [{"t": s.t, "color": list(s.color)} for s in c.left_colors],
                "right_colors": [
                    {"t": s.t, "color": list(s.color)} for s in c.right_colors
                ],
            }
            for c in doc.diffusion_curves
        ],
        "poisson_curves": [
            {
                "spline": _spline_obj(c.spline),
                "laplacian_stops": [
                    {"t": s.t, "f_plus": list(s.f_plus)} for s in c.laplacian_stops
                ],
            }
            for c in doc.poisson_curves
        ],
        "poisson_regions": [
            {
                "boundary": _spline_obj(c.boundary),
                "f_outer": list(c.f_outer),
                "delta_outer": list(c.delta_outer),
                "delta_inner": list(c.delta_inner),
            }
            for c in doc.poisson_regions
        ],
    }
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return (text + "\n").encode("utf-8")


# --------------------------------------------------------------------------
# validation


def _closed_dc_polygons(doc: PvgDocument):
    out = []
    for i, dc in enumerate(doc.diffusion_curves):
        if dc.spline.closed:
            verts, _ = dc.spline.flatten(DC_INTERSECT_TOL)
            out.append((i, verts))
    return out


def _curve_endpoints(dc: DiffusionCurve, verts: np.ndarray) -> list[np.ndarray]:
    if dc.spline.closed:
        return []
    return [verts[0], verts[-1]]


def _dc_dc_crossings(doc: PvgDocument) -> list[Diagnostic]:
    flat = []
    for i, dc in enumerate(doc.diffusion_curves):
        verts, _ = dc.spline.flatten(DC_INTERSECT_TOL)
        flat.append((i, dc, verts))
    diags = []
    for a in range(len(flat)):
        ia, dca, va = flat[a]
        for b in range(a + 1, len(flat)):
            ib, dcb, vb = flat[b]
            # bbox reject
            if (
                va[:, 0].max() < vb[:, 0].min() - DC_INTERSECT_TOL
                or vb[:, 0].max() < va[:, 0].min() - DC_INTERSECT_TOL
                or va[:, 1].max() < vb[:, 1].min() - DC_INTERSECT_TOL
                or vb[:, 1].max() < va[:, 1].min() - DC_INTERSECT_TOL
            ):
                continue
            ends = _curve_endpoints(dca, va) + _curve_endpoints(dcb, vb)
            hit = None
            for s in range(len(va) - 1):
                for t in range(len(vb) - 1):
                    p = segments_intersect(va[s], va[s + 1], vb[t], vb[t + 1])
                    if p is None:
                        continue
                    if any(np.hypot(*(p - e)) <= DC_INTERSECT_TOL for e in ends):
                        continue
                    hit = p
                    break
                if hit is not None:
                    break
            if hit is not None:
                diags.append(
                    Diagnostic(
                        severity="error",
                        code="dc-dc-intersection",
                        message=(
                            f"diffusion curves {ia} and {ib} intersect near "
                            f"({hit[0]:.1f}, {hit[1]:.1f}); DC-DC intersections "
                            "are not allowed"
                        ),
                        primitive_index=ia,
                    )
                )
    return diags


def _enclosure_errors(doc: PvgDocument) -> list[Diagnostic]:
    polygons = _closed_dc_polygons(doc)
    bordered = doc.border is not None
    diags = []

    def enclosed(verts: np.ndarray) -> bool:
        for _, poly in polygons:
            if points_in_polygon(verts, poly).all():
                return True
        if bordered:
            in_canvas = (
                (verts[:, 0] >= 0)
                & (verts[:, 0] <= doc.canvas_width)
                & (verts[:, 1] >= 0)
                & (verts[:, 1] <= doc.canvas_height)
            )
            return bool(in_canvas.all())
        return False

    for kind, primitives in (("PC", doc.poisson_curves), ("PR", doc.poisson_regions)):
        for i, prim in enumerate(primitives):
            spline = prim.spline if kind == "PC" else prim.boundary
            verts, _ = spline.flatten(DC_INTERSECT_TOL)
            if not enclosed(verts):
                diags.append(
                    Diagnostic(
                        severity="error",
                        code="no-enclosure",
                        message=(
                            f"{kind} {i} is not enclosed by any closed diffusion "
                            "curve or colored canvas border; it has no boundary "
                            "condition"
                        ),
                        primitive_index=i,
                    )
                )
    return diags


def validate(doc: PvgDocument) -> list[Diagnostic]:
    """Semantic validation. Errors block rendering; warnings do not.

    Checks: DC-DC crossings (on flattened polylines), PC/PR enclosure by a
    closed DC or colored border, no-op Poisson regions, and the presence
    of any Dirichlet data at all.
    """
    diags: list[Diagnostic] = []
    has_closed_dc = any(dc.spline.closed for dc in doc.diffusion_curves)
    if not has_closed_dc and doc.border is None:
        diags.append(
            Diagnostic(
                severity="error",
                code="no-boundary",
                message=(
                    "document has no closed diffusion curve and no colored "
                    "canvas border; nothing provides a boundary condition"
                ),
            )
        )
    diags.extend(_dc_dc_crossings(doc))
    diags.extend(_enclosure_errors(doc))
    for i, pr in enumerate(doc.poisson_regions):
        if all(v == 0.0 for v in pr.f_outer):
            diags.append(
                Diagnostic(
                    severity="warning",
                    code="pr-zero-laplacian",
                    message=f"PR {i} has zero Laplacian on all channels (no-op)",
                    primitive_index=i,
                )
            )
    return diags


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)
