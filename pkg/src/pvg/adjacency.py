"""Voronoi adjacency over quad-tree leaves.

Generators are the centers of interior and boundary cells plus the unit
exterior pixels touching boundary cells (the outer fence). Edge weights
are Voronoi edge length over generator distance:

* interior-interior edges use the true Voronoi diagram,
* edges touching a boundary cell treat that cell as its unit pixel
  square (face contact of length 1, so weight = 1 / center distance),
* boundary-exterior fence edges are unit/unit contacts with weight 1.

Each interior generator also gets the integral of the Laplacian field
over its Voronoi polygon. That integral is the source term the flux
balance demands: where f is locally uniform it is f * polygon area, and
across f transitions the polygon is clipped pixel by pixel, so source
mass is conserved exactly no matter how cell sizes grade.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import Voronoi, QhullError

from .discretize import DiscretizedSubdomain
from .greens import ensure_ccw, polygon_centroid
from .quadtree import CLS_BOUNDARY, CLS_EXTERIOR, CLS_INTERIOR, QuadCell

EDGE_INTERIOR = 0   # interior-interior
EDGE_INNER = 1      # touching >= 1 boundary cell, no exterior
EDGE_OUTER = 2      # boundary-exterior fence

_MIN_EDGE_LEN = 1e-9


@dataclass
class AdjacencyGraph:
    cells: list[QuadCell]          # non-exterior cells, graph node order
    centers: np.ndarray            # (n, 2) generator positions
    sizes: np.ndarray              # (n,) cell sizes
    cls: np.ndarray                # (n,) CLS_INTERIOR / CLS_BOUNDARY
    edges: np.ndarray              # (m, 2); EDGE_OUTER rows are
                                   # (boundary node, ext_centers index)
    weights: np.ndarray            # (m,) positive
    edge_cls: np.ndarray           # (m,) EDGE_*
    ext_centers: np.ndarray        # (k, 2) fence generator positions
    vor_area: np.ndarray           # (n,) Voronoi polygon area (interior), else size^2
    source_integral: np.ndarray    # (n, 3) integral of f over the Voronoi cell
    # interior cells whose Voronoi polygon deviates from their square use
    # the polygon as their kernel region: node -> (ccw verts, centroid,
    # circumradius, area); every other cell averages over its square
    polygons: dict = None

    def node_edges(self, i: int):
        m = (self.edges[:, 0] == i) | (self.edges[:, 1] == i)
        return np.nonzero(m)[0]

    def kernel_polygon(self, i: int):
        if self.polygons is None:
            return None
        return self.polygons.get(int(i))


def _polygon_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, 1)) - np.dot(y, np.roll(x, 1)))


def _is_own_square(poly: np.ndarray, cell: QuadCell, tol: float = 1e-9) -> bool:
    """True when the Voronoi polygon coincides with the cell's square."""
    x0, y0 = float(cell.x), float(cell.y)
    x1, y1 = x0 + cell.size, y0 + cell.size
    if abs(_polygon_area(poly) - cell.size**2) > tol:
        return False
    inside = (
        (poly[:, 0] >= x0 - tol)
        & (poly[:, 0] <= x1 + tol)
        & (poly[:, 1] >= y0 - tol)
        & (poly[:, 1] <= y1 + tol)
    )
    return bool(inside.all())


def _clip_halfplane(poly, axis, bound, keep_below):
    """Sutherland-Hodgman clip against an axis-aligned half plane."""
    out = []
    n = len(poly)
    for k in range(n):
        a = poly[k]
        b = poly[(k + 1) % n]
        ain = (a[axis] <= bound) if keep_below else (a[axis] >= bound)
        bin_ = (b[axis] <= bound) if keep_below else (b[axis] >= bound)
        if ain:
            out.append(a)
        if ain != bin_:
            t = (bound - a[axis]) / (b[axis] - a[axis])
            out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    return out


def clip_polygon_to_pixel(poly, ix: int, iy: int) -> float:
    """Area of polygon ∩ unit pixel [ix, ix+1] x [iy, iy+1]."""
    p = [tuple(v) for v in poly]
    for axis, bound, below in ((0, ix, False), (0, ix + 1, True),
                               (1, iy, False), (1, iy + 1, True)):
        p = _clip_halfplane(p, axis, float(bound), below)
        if len(p) < 3:
            return 0.0
    return _polygon_area(np.asarray(p))


def _integrate_f(poly: np.ndarray, area: float, f_img: np.ndarray,
                 interior: np.ndarray) -> np.ndarray:
    """Integral of the pixel-constant field over the polygon.

    The field is zero outside interior pixels (Dirichlet pixels never
    carry sources). Uniform slabs shortcut to value * area.
    """
    h, w = interior.shape
    x0 = max(int(np.floor(poly[:, 0].min())), 0)
    x1 = min(int(np.ceil(poly[:, 0].max())), w)
    y0 = max(int(np.floor(poly[:, 1].min())), 0)
    y1 = min(int(np.ceil(poly[:, 1].max())), h)
    if x0 >= x1 or y0 >= y1:
        return np.zeros(3)
    slab_f = f_img[y0:y1, x0:x1]
    slab_i = interior[y0:y1, x0:x1]
    if slab_i.all():
        flat = slab_f.reshape(-1, 3)
        if (flat == flat[0]).all():
            return flat[0] * area
    if not slab_f[slab_i].any():
        return np.zeros(3)
    total = np.zeros(3)
    for iy in range(y0, y1):
        for ix in range(x0, x1):
            if not interior[iy, ix]:
                continue
            fv = f_img[iy, ix]
            if not fv.any():
                continue
            a = clip_polygon_to_pixel(poly, ix, iy)
            if a > 0.0:
                total += fv * a
    return total


def build_adjacency(cells: list[QuadCell], sub: DiscretizedSubdomain) -> AdjacencyGraph:
    """Adjacency graph of a subdomain's quad-tree leaves."""
    keep = [c for c in cells if c.cls != CLS_EXTERIOR]
    n = len(keep)
    centers = np.array([c.center for c in keep]) if keep else np.zeros((0, 2))
    sizes = np.array([c.size for c in keep], dtype=float)
    cls = np.array([c.cls for c in keep], dtype=np.int8)
    h, w = sub.shape

    # pixel -> owning cell (boundary cells are single pixels)
    owner = {}
    for i, c in enumerate(keep):
        for px in range(c.x, c.x + c.size):
            for py in range(c.y, c.y + c.size):
                owner[(px, py)] = i

    boundary_idx = np.nonzero(cls == CLS_BOUNDARY)[0]
    interior_idx = np.nonzero(cls == CLS_INTERIOR)[0]

    edges: dict[tuple[int, int], float] = {}
    edge_kind: dict[tuple[int, int], int] = {}

    def add_edge(i, j, a, kind):
        key = (min(i, j), max(i, j))
        edges[key] = a
        edge_kind[key] = kind

    # fence generators and outer edges
    ext_centers = []
    ext_of: list[tuple[int, int]] = []  # (boundary node, ext generator index)
    fence_seen: dict[tuple[int, int], int] = {}
    for i in boundary_idx:
        c = keep[i]
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            qx, qy = c.x + dx, c.y + dy
            if 0 <= qx < w and 0 <= qy < h and sub.pixel_mask[qy, qx]:
                continue
            key = (qx, qy)
            if key not in fence_seen:
                fence_seen[key] = len(ext_centers)
                ext_centers.append((qx + 0.5, qy + 0.5))
            ext_of.append((int(i), fence_seen[key]))
    ext_centers = np.array(ext_centers) if ext_centers else np.zeros((0, 2))

    # boundary-involved edges from grid contact (unit squares verbatim)
    for i in boundary_idx:
        c = keep[i]
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            qx, qy = c.x + dx, c.y + dy
            j = owner.get((qx, qy))
            if j is None or j == i:
                continue
            d = float(np.hypot(*(centers[i] - centers[j])))
            add_edge(int(i), int(j), 1.0 / d, EDGE_INNER)

    # interior-interior edges and interior source integrals from the
    # Voronoi diagram of all generators (fence included so cells stay
    # bounded)
    vor_area = sizes**2
    source_integral = np.zeros((n, 3))
    polygons: dict = {}
    for i in np.nonzero(cls == CLS_INTERIOR)[0]:
        source_integral[i] = keep[i].f_value * vor_area[i]
    if len(interior_idx) > 0:
        pts = np.vstack([centers, ext_centers]) if len(ext_centers) else centers
        vor = None
        if len(pts) >= 5:
            try:
                vor = Voronoi(pts)
            except QhullError:
                vor = None
        if vor is not None:
            for (p, q), verts in zip(vor.ridge_points, vor.ridge_vertices):
                if p >= n or q >= n:
                    continue
                if cls[p] != CLS_INTERIOR or cls[q] != CLS_INTERIOR:
                    continue
                if -1 in verts:
                    continue
                v = vor.vertices[verts]
                elen = float(np.hypot(*(v[0] - v[1])))
                if elen < _MIN_EDGE_LEN:
                    continue
                d = float(np.hypot(*(pts[p] - pts[q])))
                add_edge(int(p), int(q), elen / d, EDGE_INTERIOR)
            for i in interior_idx:
                region = vor.regions[vor.point_region[i]]
                if len(region) and -1 not in region:
                    poly = vor.vertices[region]
                    vor_area[i] = _polygon_area(poly)
                    source_integral[i] = _integrate_f(
                        poly, vor_area[i], sub.f_field, sub.interior_mask
                    )
                    if not _is_own_square(poly, keep[i]):
                        verts = ensure_ccw(poly)
                        cx_, cy_, _ = polygon_centroid(verts)
                        radius = float(
                            np.hypot(verts[:, 0] - cx_, verts[:, 1] - cy_).max()
                        )
                        polygons[int(i)] = (
                            np.ascontiguousarray(verts),
                            (cx_, cy_),
                            radius,
                            vor_area[i],
                        )
        else:
            # degenerate tiny domains: everything is unit pixels
            for i in interior_idx:
                c = keep[i]
                for dx, dy in ((1, 0), (0, 1)):
                    j = owner.get((c.x + dx * c.size, c.y + dy * c.size))
                    if j is not None and cls[j] == CLS_INTERIOR and keep[j].size == c.size:
                        add_edge(int(i), int(j), 1.0, EDGE_INTERIOR)

    edge_arr = np.array(sorted(edges), dtype=np.int64).reshape(-1, 2)
    weight_arr = np.array([edges[tuple(e)] for e in edge_arr])
    kind_arr = np.array([edge_kind[tuple(e)] for e in edge_arr], dtype=np.int8)

    if ext_of:
        ob = np.array([[i, k] for i, k in ext_of], dtype=np.int64)
        edge_arr = np.vstack([edge_arr, ob]) if len(edge_arr) else ob
        weight_arr = np.concatenate([weight_arr, np.ones(len(ob))])
        kind_arr = np.concatenate([kind_arr, np.full(len(ob), EDGE_OUTER, np.int8)])

    return AdjacencyGraph(
        cells=keep,
        centers=centers,
        sizes=sizes,
        cls=cls,
        edges=edge_arr,
        weights=weight_arr,
        edge_cls=kind_arr,
        ext_centers=ext_centers,
        vor_area=vor_area,
        source_integral=source_integral,
        polygons=polygons,
    )
