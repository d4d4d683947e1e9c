"""Developer dumps: discretization rasters, tree/diagram overlays,
system matrices. Everything here is best-effort visualization support;
nothing in the render path depends on it."""

from __future__ import annotations

import os

import numpy as np

from .adjacency import EDGE_OUTER, build_adjacency
from .discretize import DiscretizedScene
from .geometry import supercover_pixels
from .quadtree import CLS_EXTERIOR, build_quadtree
from .solver import LinearSystem


def _write_pgm(path: str, img: np.ndarray) -> None:
    lo, hi = float(img.min()), float(img.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    q = np.floor((img - lo) * scale + 0.5).astype(np.uint8)
    h, w = q.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(q.tobytes())


def _draw_segment(img: np.ndarray, p0, p1, value=255) -> None:
    h, w = img.shape
    for ix, iy, _ in supercover_pixels(p0, p1):
        if 0 <= ix < w and 0 <= iy < h:
            img[iy, ix] = value


def dump_scene(scene: DiscretizedScene, out_dir: str) -> None:
    """Write label map, Laplacian field, quad-tree and Voronoi overlays."""
    os.makedirs(out_dir, exist_ok=True)
    _write_pgm(os.path.join(out_dir, "label_map.pgm"),
               scene.label_map.astype(np.float64))
    f_mag = np.abs(scene.constraints.f).max(axis=2)
    _write_pgm(os.path.join(out_dir, "f_field.pgm"), f_mag)

    h, w = scene.label_map.shape
    tree_img = np.zeros((h, w), dtype=np.uint8)
    vor_img = np.zeros((h, w), dtype=np.uint8)
    for sub in scene.subdomains:
        cells = build_quadtree(sub)
        ox, oy = sub.origin
        for c in cells:
            if c.cls == CLS_EXTERIOR:
                continue
            x0, y0 = c.x + ox, c.y + oy
            x1, y1 = x0 + c.size, y0 + c.size
            _draw_segment(tree_img, (x0 + 0.5, y0 + 0.5), (x1 - 0.5, y0 + 0.5))
            _draw_segment(tree_img, (x0 + 0.5, y0 + 0.5), (x0 + 0.5, y1 - 0.5))
        adj = build_adjacency(cells, sub)
        shift = np.array([ox, oy], dtype=float)
        for i, info in (adj.polygons or {}).items():
            verts = info[0] + shift
            for k in range(len(verts)):
                _draw_segment(vor_img, verts[k], verts[(k + 1) % len(verts)])
        for (i, j), kind in zip(adj.edges, adj.edge_cls):
            if kind == EDGE_OUTER:
                continue
            _draw_segment(vor_img, adj.centers[i] + shift,
                          adj.centers[j] + shift, value=128)
    _write_pgm(os.path.join(out_dir, "quadtree.pgm"), tree_img.astype(float))
    _write_pgm(os.path.join(out_dir, "voronoi.pgm"), vor_img.astype(float))


def dump_system(sys: LinearSystem, path: str) -> None:
    """Sparse triplet text: `i j value` rows of [L_II | L_IB], boundary
    columns offset by the interior count."""
    ni = sys.l_interior.shape[0]
    with open(path, "w") as fh:
        fh.write(f"% {ni} interior rows; boundary columns start at {ni}\n")
        coo = sys.l_interior.tocoo()
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j} {float(v)!r}\n")
        coo = sys.l_boundary.tocoo()
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j + ni} {float(v)!r}\n")
