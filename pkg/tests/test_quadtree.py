import numpy as np

from pvg.discretize import partition_subdomains
from pvg.model import PvgDocument
from pvg.quadtree import CLS_BOUNDARY, CLS_EXTERIOR, CLS_INTERIOR, build_quadtree

from conftest import (
    const_pc,
    line_spline,
    rect_spline,
    simple_rect_doc,
    solid_dc,
    synthetic_square_subdomain,
)


def test_uniform_square_coarsens_inward():
    sub = synthetic_square_subdomain(64, lambda x, y: 1.0, lambda x, y: 0.0)
    cells = build_quadtree(sub)
    boundary = [c for c in cells if c.cls == CLS_BOUNDARY]
    interior = [c for c in cells if c.cls == CLS_INTERIOR]
    assert all(c.size == 1 for c in boundary)
    assert max(c.size for c in interior) >= 8
    # the coarse cells sit centrally
    big = max(interior, key=lambda c: c.size)
    assert 8 <= big.x < 56 and 8 <= big.y < 56


def test_leaves_tile_root_exactly():
    sub = synthetic_square_subdomain(48, lambda x, y: 0.5, lambda x, y: 0.0)
    cells = build_quadtree(sub)
    root = 64  # next power of two
    assert sum(c.size**2 for c in cells) == root * root
    covered = np.zeros((root, root), dtype=np.int32)
    for c in cells:
        covered[c.y : c.y + c.size, c.x : c.x + c.size] += 1
    assert covered.max() == covered.min() == 1


def test_non_exterior_area_matches_mask():
    sub = synthetic_square_subdomain(64, lambda x, y: 0.0, lambda x, y: 0.0)
    cells = build_quadtree(sub)
    area = sum(c.size**2 for c in cells if c.cls != CLS_EXTERIOR)
    assert area == int(sub.pixel_mask.sum())


def test_every_boundary_pixel_in_one_unit_leaf():
    sub = synthetic_square_subdomain(32, lambda x, y: 0.0, lambda x, y: 0.0)
    cells = build_quadtree(sub)
    seen = set()
    for c in cells:
        if c.cls == CLS_BOUNDARY:
            assert c.size == 1
            assert (c.x, c.y) not in seen
            seen.add((c.x, c.y))
    ys, xs = np.nonzero(sub.boundary_mask)
    assert seen == {(int(x), int(y)) for x, y in zip(xs, ys)}


def test_cells_straddling_strip_split_to_isolation():
    doc = simple_rect_doc()
    pc = const_pc(line_spline((24, 32), (40, 32)), 0.25)
    scene = partition_subdomains(doc.with_(poisson_curves=(pc,)), 64, 64)
    inner = next(s for s in scene.subdomains if scene.label_map[0, 0] != s.id)
    cells = build_quadtree(inner)
    for c in cells:
        if c.cls != CLS_INTERIOR:
            continue
        block = inner.region_partition[c.y : c.y + c.size, c.x : c.x + c.size]
        m = inner.interior_mask[c.y : c.y + c.size, c.x : c.x + c.size]
        assert len(np.unique(block[m])) == 1
        fv = inner.f_field[c.y : c.y + c.size, c.x : c.x + c.size][m]
        assert np.all(fv == fv[0])


def test_leaf_count_much_smaller_than_pixels():
    doc = PvgDocument(
        canvas_width=512, canvas_height=512, background=(1, 1, 1),
        diffusion_curves=(solid_dc(rect_spline(8, 8, 504, 504),
                                   (0.4,) * 3, (1.0,) * 3),),
        border=(1, 1, 1),
    )
    scene = partition_subdomains(doc, 512, 512)
    total = 0
    for sub in scene.subdomains:
        total += sum(1 for c in build_quadtree(sub) if c.cls != CLS_EXTERIOR)
    assert total < 0.05 * 512 * 512


def test_empty_subdomain_yields_no_cells():
    sub = synthetic_square_subdomain(8, lambda x, y: 0.0, lambda x, y: 0.0)
    sub.pixel_mask[:] = False
    sub.interior_mask[:] = False
    sub.boundary_mask[:] = False
    cells = build_quadtree(sub)
    assert all(c.cls == CLS_EXTERIOR for c in cells)
