"""Poisson vector graphics: documents, closed-form solver, renderer."""

__version__ = "0.1.0"

from .model import (
    ColorStop,
    CubicBSpline,
    Diagnostic,
    DiffusionCurve,
    DocumentError,
    LaplacianStop,
    PoissonCurve,
    PoissonRegion,
    PvgDocument,
    has_errors,
    parse_document,
    serialize_document,
    validate,
)
from .render import (
    RasterImage,
    RenderError,
    ZoomRequest,
    decode_image,
    encode_image,
    render,
    render_state,
    render_zoom,
)
from .oracle import fd_solve, reference_render, relative_mean_error

__all__ = [
    "ColorStop",
    "CubicBSpline",
    "Diagnostic",
    "DiffusionCurve",
    "DocumentError",
    "LaplacianStop",
    "PoissonCurve",
    "PoissonRegion",
    "PvgDocument",
    "RasterImage",
    "RenderError",
    "ZoomRequest",
    "decode_image",
    "encode_image",
    "fd_solve",
    "has_errors",
    "parse_document",
    "reference_render",
    "relative_mean_error",
    "render",
    "render_state",
    "render_zoom",
    "serialize_document",
    "validate",
]
