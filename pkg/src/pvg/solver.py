"""Control-point solve and spline term lists.

The graph Laplacian L over the adjacency weights (diagonal = weight sum,
off-diagonal = -weight) restricted to interior rows gives the linear
system for the interior control points:

    L_II lam_I = -(b) - L_IB lam_B,       b_j = integral of f over V_j

with lam_B pinned to the Dirichlet colors. L_II is symmetric positive
definite and diagonally dominant, so a direct sparse factorization is
cheap and reused across the three color channels. The source entry is
the integral of the Laplacian field over the generator's Voronoi
polygon (f * cell area wherever f is locally uniform), which keeps the
discrete flux balance and the total source mass exact on graded cells.

After the solve, evaluation collapses into flat term lists: a source
term per nonzero-f interior cell, a flux term per boundary cell (its
inner-edge flux imbalance), and a Dirichlet double-layer term per
boundary/exterior fence pair. Point evaluation is then a single
weighted sum of square-averaged log kernels, independent of interior
cell count.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csc_matrix
from scipy.sparse import csgraph
from scipy.sparse.linalg import splu

from .adjacency import EDGE_OUTER, AdjacencyGraph
from .discretize import SIDE_LEFT, SIDE_RIGHT, DiscretizedSubdomain
from .greens import avg_greens_polygon_scalar, avg_greens_scalar
from .quadtree import CLS_BOUNDARY, CLS_INTERIOR

RESIDUAL_RTOL = 1e-8


class SingularSystemError(RuntimeError):
    """Interior cells with no path to any Dirichlet data."""


_factorization_lock = threading.Lock()
_factorization_count = 0


def factorization_count() -> int:
    return _factorization_count


def _count_factorization() -> None:
    global _factorization_count
    with _factorization_lock:
        _factorization_count += 1


def _edge_dirichlet_color(sub: DiscretizedSubdomain, adj: AdjacencyGraph,
                          j: int, other_center) -> np.ndarray:
    """Dirichlet color of boundary cell j as seen from ``other_center``.

    Cells with one sample return it directly. Interior-slit cells carry
    both sides; the side of the neighbor's center against the local
    curve tangent picks one, and genuine on-curve neighbors average.
    """
    c = adj.cells[j]
    entries = sub.boundary_colors[(c.x, c.y)]
    if len(entries) == 1:
        return entries[0][1]
    sides = {side: color for side, color in entries}
    seg = sub.curve_segments.get((c.x, c.y))
    if other_center is not None and seg is not None:
        a, b = seg
        t = b - a
        v = np.asarray(other_center) - a
        cross = t[0] * v[1] - t[1] * v[0]
        side = SIDE_LEFT if cross >= 0.0 else SIDE_RIGHT
        if side in sides:
            return sides[side]
    return np.mean([c for _, c in entries], axis=0)


@dataclass
class LinearSystem:
    interior_index: np.ndarray     # node ids of the interior rows
    boundary_index: np.ndarray
    l_interior: csc_matrix         # L_II
    l_boundary: csc_matrix         # L_IB (columns over boundary cells)
    b: np.ndarray                  # (n_i, 3): area * f per channel
    lambda_boundary: np.ndarray    # (n_b, 3) Dirichlet colors
    rhs_boundary: np.ndarray       # (n_i, 3) edge-accumulated +w*g terms


def assemble_system(adj: AdjacencyGraph, sub: DiscretizedSubdomain) -> LinearSystem:
    """Build the interior system and boundary coupling for a subdomain."""
    n = len(adj.cells)
    interior_index = np.nonzero(adj.cls == CLS_INTERIOR)[0]
    boundary_index = np.nonzero(adj.cls == CLS_BOUNDARY)[0]
    imap = np.full(n, -1, dtype=np.int64)
    imap[interior_index] = np.arange(len(interior_index))
    bmap = np.full(n, -1, dtype=np.int64)
    bmap[boundary_index] = np.arange(len(boundary_index))

    lam_b = np.zeros((len(boundary_index), 3))
    for k, j in enumerate(boundary_index):
        c = adj.cells[j]
        lam_b[k] = sub.boundary_color_for((c.x, c.y))

    diag = np.zeros(len(interior_index))
    rows, cols, vals = [], [], []
    brows, bcols, bvals = [], [], []
    rhs_b = np.zeros((len(interior_index), 3))

    for (i, j), wgt, kind in zip(adj.edges, adj.weights, adj.edge_cls):
        if kind == EDGE_OUTER:
            continue
        for p, q in ((i, j), (j, i)):
            if adj.cls[p] != CLS_INTERIOR:
                continue
            k = imap[p]
            diag[k] += wgt
            if adj.cls[q] == CLS_INTERIOR:
                rows.append(k)
                cols.append(imap[q])
                vals.append(-wgt)
            else:
                brows.append(k)
                bcols.append(bmap[q])
                bvals.append(-wgt)
                g = _edge_dirichlet_color(sub, adj, int(q), adj.centers[p])
                rhs_b[k] += wgt * np.asarray(g)

    ni = len(interior_index)
    rows.extend(range(ni))
    cols.extend(range(ni))
    vals.extend(diag)
    l_interior = csc_matrix((vals, (rows, cols)), shape=(ni, ni))
    l_boundary = csc_matrix((bvals, (brows, bcols)), shape=(ni, len(boundary_index)))

    b = adj.source_integral[interior_index].copy()

    return LinearSystem(
        interior_index=interior_index,
        boundary_index=boundary_index,
        l_interior=l_interior,
        l_boundary=l_boundary,
        b=b,
        lambda_boundary=lam_b,
        rhs_boundary=rhs_b,
    )


def _check_connectivity(sys: LinearSystem) -> None:
    ni = sys.l_interior.shape[0]
    if ni == 0:
        return
    ncomp, labels = csgraph.connected_components(sys.l_interior, directed=False)
    coupled = np.zeros(ncomp, dtype=bool)
    touched = np.unique(sys.l_boundary.nonzero()[0])
    coupled[np.unique(labels[touched])] = True
    bad = np.nonzero(~coupled)[0]
    if len(bad):
        raise SingularSystemError(
            f"interior component(s) {bad.tolist()} have no path to any "
            "boundary cell; the system is singular"
        )


def solve_control_points(sys: LinearSystem) -> np.ndarray:
    """Solve for the interior control points, one RHS per color channel.

    Returns (n_interior, 3). A single factorization is shared by the
    three channels; the residual is checked against RESIDUAL_RTOL.
    """
    ni = sys.l_interior.shape[0]
    if ni == 0:
        return np.zeros((0, 3))
    _check_connectivity(sys)
    lu = splu(sys.l_interior)
    _count_factorization()
    rhs = -sys.b + sys.rhs_boundary
    lam = np.stack([lu.solve(rhs[:, ch]) for ch in range(3)], axis=1)
    residual = np.abs(sys.l_interior @ lam - rhs).max()
    scale = np.abs(sys.b).max(initial=0.0) + np.abs(sys.rhs_boundary).max(initial=0.0) + 1.0
    if residual > RESIDUAL_RTOL * scale:
        raise RuntimeError(
            f"solver residual {residual:.3e} above tolerance "
            f"{RESIDUAL_RTOL * scale:.3e}"
        )
    return lam


@dataclass
class SplineSolution:
    """Solved subdomain ready for random-access evaluation.

    The structured lists mirror the three sums of the closed form;
    ``term_*`` arrays are their flattened union: every entry is a square
    (center, half size) with one kernel coefficient per channel, so

        u(x) = sum_k coef_k * avgG(x, square_k).
    """

    lam: np.ndarray                 # (n_cells, 3) control points
    adjacency: AdjacencyGraph
    source_cells: np.ndarray        # node ids with f != 0
    source_values: np.ndarray       # (k, 3) area * f
    flux_cells: np.ndarray          # boundary node ids
    flux_values: np.ndarray         # (m, 3) inner-edge flux imbalance
    dirichlet_cells: np.ndarray     # boundary node ids with fence edges
    dirichlet_values: np.ndarray    # (p, 3) their lambda
    term_centers: np.ndarray        # (T, 2)
    term_halves: np.ndarray         # (T,)
    term_coefs: np.ndarray          # (T, 3)
    # free constant of the representation; zero for enclosed subdomains.
    # Components whose Dirichlet data does not surround them (borderless
    # canvas edge, slit-only boundaries) use the exterior form
    # u = offset + sum((lam - offset) * psi).
    offset: np.ndarray = None
    # kernel regions: term_poly_index[k] < 0 averages over the square
    # (term_centers/term_halves); otherwise over the Voronoi polygon in
    # the flattened storage below
    term_poly_index: np.ndarray = None
    poly_points: np.ndarray = None   # (K, 2) vertex storage
    poly_start: np.ndarray = None
    poly_count: np.ndarray = None
    poly_centroid: np.ndarray = None
    poly_radius: np.ndarray = None
    poly_area: np.ndarray = None


def build_solution(lam_interior: np.ndarray, sys: LinearSystem,
                   adj: AdjacencyGraph, sub: DiscretizedSubdomain) -> SplineSolution:
    """Assemble the evaluation term lists from the solved control points."""
    n = len(adj.cells)
    lam = np.zeros((n, 3))
    lam[sys.interior_index] = lam_interior
    lam[sys.boundary_index] = sys.lambda_boundary

    flux = np.zeros((n, 3))
    n_ob = np.zeros(n)
    ext_terms: list[tuple[int, int]] = []  # (boundary node, ext index)
    for (i, j), wgt, kind in zip(adj.edges, adj.weights, adj.edge_cls):
        if kind == EDGE_OUTER:
            n_ob[i] += wgt
            ext_terms.append((int(i), int(j)))
            continue
        li = lam[i]
        lj = lam[j]
        if adj.cls[i] == CLS_BOUNDARY:
            lj_here = (
                _edge_dirichlet_color(sub, adj, int(j), adj.centers[i])
                if adj.cls[j] == CLS_BOUNDARY
                else lj
            )
            flux[i] += wgt * (lj_here - _edge_dirichlet_color(sub, adj, int(i),
                                                              adj.centers[j]))
        if adj.cls[j] == CLS_BOUNDARY:
            li_here = (
                _edge_dirichlet_color(sub, adj, int(i), adj.centers[j])
                if adj.cls[i] == CLS_BOUNDARY
                else li
            )
            flux[j] += wgt * (li_here - _edge_dirichlet_color(sub, adj, int(j),
                                                              adj.centers[i]))

    interior = np.nonzero(adj.cls == CLS_INTERIOR)[0]
    src_mask = (
        np.any(adj.source_integral[interior] != 0.0, axis=1)
        if len(interior)
        else np.zeros(0, dtype=bool)
    )
    source_cells = interior[src_mask]
    source_values = adj.source_integral[source_cells].reshape(-1, 3)

    boundary = np.nonzero(adj.cls == CLS_BOUNDARY)[0]
    flux_cells = boundary
    flux_values = flux[boundary]

    dirichlet_cells = np.array(sorted({i for i, _ in ext_terms}), dtype=np.int64)
    dirichlet_values = lam[dirichlet_cells] if len(dirichlet_cells) else np.zeros((0, 3))

    open_domain = sub.open_boundary or len(ext_terms) == 0
    if open_domain and n > 0:
        weights = adj.vor_area[:, None]
        offset = (lam * weights).sum(axis=0) / weights.sum()
    else:
        offset = np.zeros(3)

    # flattened kernel terms (Dirichlet entries shifted by the offset)
    centers = []
    halves = []
    coefs = []
    poly_idx = []
    poly_points_list = []
    poly_start = []
    poly_count = []
    poly_centroid = []
    poly_radius = []
    poly_area = []

    def polygon_slot(i: int) -> int:
        info = adj.kernel_polygon(i)
        if info is None:
            return -1
        verts, centroid, radius, area = info
        slot = len(poly_start)
        poly_start.append(sum(len(p) for p in poly_points_list))
        poly_count.append(len(verts))
        poly_points_list.append(verts)
        poly_centroid.append(centroid)
        poly_radius.append(radius)
        poly_area.append(area)
        return slot

    for k, i in enumerate(source_cells):
        centers.append(adj.centers[i])
        halves.append(adj.sizes[i] / 2.0)
        coefs.append(source_values[k])
        poly_idx.append(polygon_slot(int(i)))
    for k, i in enumerate(boundary):
        centers.append(adj.centers[i])
        halves.append(adj.sizes[i] / 2.0)
        coefs.append(flux_values[k] - (lam[i] - offset) * n_ob[i])
        poly_idx.append(-1)
    for i, e in ext_terms:
        centers.append(adj.ext_centers[e])
        halves.append(0.5)
        coefs.append(lam[i] - offset)
        poly_idx.append(-1)

    term_centers = np.array(centers) if centers else np.zeros((0, 2))
    term_halves = np.array(halves) if halves else np.zeros(0)
    term_coefs = np.array(coefs) if coefs else np.zeros((0, 3))
    term_poly_index = np.array(poly_idx, dtype=np.int64) if poly_idx else np.zeros(0, np.int64)
    poly_points_arr = (
        np.vstack(poly_points_list) if poly_points_list else np.zeros((0, 2))
    )

    return SplineSolution(
        lam=lam,
        adjacency=adj,
        source_cells=source_cells,
        source_values=source_values,
        flux_cells=flux_cells,
        flux_values=flux_values,
        dirichlet_cells=dirichlet_cells,
        dirichlet_values=dirichlet_values,
        term_centers=term_centers,
        term_halves=term_halves,
        term_coefs=term_coefs,
        offset=offset,
        term_poly_index=term_poly_index,
        poly_points=poly_points_arr,
        poly_start=np.array(poly_start, dtype=np.int64),
        poly_count=np.array(poly_count, dtype=np.int64),
        poly_centroid=np.array(poly_centroid).reshape(-1, 2),
        poly_radius=np.array(poly_radius, dtype=np.float64),
        poly_area=np.array(poly_area, dtype=np.float64),
    )


def _cell_kernel(adj: AdjacencyGraph, i: int, px: float, py: float) -> float:
    """Averaged log kernel of cell i: over its Voronoi polygon when one
    is stored, else over its square."""
    info = adj.kernel_polygon(i)
    if info is not None:
        verts, (cx, cy), radius, area = info
        return avg_greens_polygon_scalar(px, py, verts, area, cx, cy, radius)
    c = adj.centers[i]
    return avg_greens_scalar(px, py, c[0], c[1], adj.sizes[i] / 2.0)


def basis_eval(j: int, x, adj: AdjacencyGraph) -> float:
    """Harmonic B-spline basis value of cell j at point x: the weighted
    sum of neighbor-minus-own averaged kernels over j's edges."""
    px, py = float(x[0]), float(x[1])
    own = _cell_kernel(adj, int(j), px, py)
    total = 0.0
    for (a, b), wgt, kind in zip(adj.edges, adj.weights, adj.edge_cls):
        if kind == EDGE_OUTER:
            if a != j:
                continue
            oc = adj.ext_centers[b]
            other = avg_greens_scalar(px, py, oc[0], oc[1], 0.5)
        elif a == j:
            other = _cell_kernel(adj, int(b), px, py)
        elif b == j:
            other = _cell_kernel(adj, int(a), px, py)
        else:
            continue
        total += wgt * (other - own)
    return total


def direct_eval(lam: np.ndarray, x, adj: AdjacencyGraph) -> np.ndarray:
    """Direct spline evaluation sum(lam_j * psi_j(x)) over all cells.

    Expanded over the edges each basis function is built from, which is
    algebraically the same sum ordered differently. Reference path for
    the regrouped term lists; used by tests only.
    """
    px, py = float(x[0]), float(x[1])
    kernels = np.array([_cell_kernel(adj, i, px, py) for i in range(len(adj.cells))])
    out = np.zeros(3)
    for (i, j), wgt, kind in zip(adj.edges, adj.weights, adj.edge_cls):
        if kind == EDGE_OUTER:
            oc = adj.ext_centers[j]
            g_ext = avg_greens_scalar(px, py, oc[0], oc[1], 0.5)
            out += wgt * lam[i] * (g_ext - kernels[i])
        else:
            diff = kernels[j] - kernels[i]
            out += wgt * (lam[i] * diff - lam[j] * diff)
    return out
