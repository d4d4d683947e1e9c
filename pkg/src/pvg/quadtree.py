"""Adaptive quad-tree over a subdomain.

A cell splits when its Laplacian field is not constant, when it contains
a boundary pixel (recursing to size 1), or when it mixes domain and
non-domain pixels. Leaves are classified interior / boundary / exterior;
boundary leaves are always single pixels.

Splitting predicates run on integral images, so a build is O(cells).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretize import DiscretizedSubdomain

CLS_INTERIOR = 0
CLS_BOUNDARY = 1
CLS_EXTERIOR = 2


@dataclass
class QuadCell:
    x: int            # local pixel coords of the cell origin
    y: int
    size: int         # power of two
    cls: int
    f_value: np.ndarray  # (3,) Laplacian, zero for non-interior cells
    area: int

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.size / 2.0, self.y + self.size / 2.0)


def _integral(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    out = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(img, axis=0, dtype=np.int64), axis=1, out=out[1:, 1:])
    return out


def _box_sum(ii: np.ndarray, x: int, y: int, size: int) -> int:
    h, w = ii.shape[0] - 1, ii.shape[1] - 1
    x0, y0 = min(x, w), min(y, h)
    x1, y1 = min(x + size, w), min(y + size, h)
    if x1 <= x0 or y1 <= y0:
        return 0
    return int(ii[y1, x1] - ii[y0, x1] - ii[y1, x0] + ii[y0, x0])


def build_quadtree(sub: DiscretizedSubdomain) -> list[QuadCell]:
    """Quad-tree leaves covering the subdomain's bounding box.

    The root is the smallest power-of-two square covering the box;
    padding beyond it comes back as exterior leaves.
    """
    h, w = sub.shape
    if h == 0 or w == 0:
        return []
    root = 1
    while root < max(h, w):
        root *= 2

    interior = sub.interior_mask
    boundary = sub.boundary_mask
    in_domain = sub.pixel_mask

    ii_b = _integral(boundary)
    ii_i = _integral(interior)
    ii_d = _integral(in_domain)
    rid = np.where(interior, sub.region_partition.astype(np.int64), 0)
    ii_r = _integral(rid)
    ii_r2 = _integral(rid * rid)

    cells: list[QuadCell] = []
    stack = [(0, 0, root)]
    while stack:
        x, y, size = stack.pop()
        n_b = _box_sum(ii_b, x, y, size)
        n_i = _box_sum(ii_i, x, y, size)
        n_d = _box_sum(ii_d, x, y, size)
        area = size * size
        if n_d == 0:
            cells.append(QuadCell(x, y, size, CLS_EXTERIOR, np.zeros(3), area))
            continue
        if size == 1:
            if n_b:
                cells.append(QuadCell(x, y, 1, CLS_BOUNDARY, np.zeros(3), 1))
            else:
                cells.append(QuadCell(x, y, 1, CLS_INTERIOR,
                                      sub.f_field[y, x].copy(), 1))
            continue
        split = n_b > 0 or n_d < area
        if not split:
            # constant region id <=> zero variance of the integer labels
            s1 = _box_sum(ii_r, x, y, size)
            s2 = _box_sum(ii_r2, x, y, size)
            split = n_i * s2 != s1 * s1
        if split:
            half = size // 2
            stack.extend(
                (
                    (x, y, half),
                    (x + half, y, half),
                    (x, y + half, half),
                    (x + half, y + half, half),
                )
            )
        else:
            cells.append(QuadCell(x, y, size, CLS_INTERIOR,
                                  sub.f_field[y, x].copy(), area))
    return cells
