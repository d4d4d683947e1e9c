import numpy as np
from hypothesis import given, settings, strategies as st

from pvg.discretize import (
    SIDE_BORDER,
    band_region,
    euclidean_distance_transform,
    partition_subdomains,
)
from pvg.model import PoissonRegion, PvgDocument

from conftest import (
    circle_spline,
    const_pc,
    line_spline,
    rect_spline,
    simple_rect_doc,
    solid_dc,
)


def test_rect_doc_splits_into_two_subdomains(rect_doc):
    scene = partition_subdomains(rect_doc, 64, 64)
    assert len(scene.subdomains) == 2
    raster = scene.curve_raster
    # every curve pixel bordering a component appears in its samples
    for sub in scene.subdomains:
        assert len(sub.boundary_samples) > 0
        for s in sub.boundary_samples:
            x, y = s.pixel
            if s.side != SIDE_BORDER:
                assert raster.mask[y, x]


def test_side_colors_face_their_component(rect_doc):
    scene = partition_subdomains(rect_doc, 64, 64)
    # the inner subdomain is the one not touching the canvas corner
    inner = next(s for s in scene.subdomains
                 if scene.label_map[0, 0] != s.id)
    colors = {
        tuple(np.round(c, 3))
        for _, entries in inner.boundary_colors.items()
        for _, c in entries
    }
    assert colors == {(0.8, 0.2, 0.2)}


def test_pc_partition_counts():
    """A closed DC with a PC inside: 2 subdomains, 3 constant-f pieces."""
    doc = simple_rect_doc()
    pc = const_pc(line_spline((24, 32), (40, 32)), 0.2)
    doc = doc.with_(poisson_curves=(pc,))
    scene = partition_subdomains(doc, 64, 64)
    assert len(scene.subdomains) == 2
    inner = next(s for s in scene.subdomains
                 if scene.label_map[0, 0] != s.id)
    ids = np.unique(inner.region_partition[inner.interior_mask])
    assert len(ids) == 3  # +strip, -strip, zero


def test_thirty_subdomains():
    rng = np.random.default_rng(1)
    dcs = tuple(
        solid_dc(
            circle_spline(30 + (k % 6) * 42, 30 + (k // 6) * 42, 16, n=8),
            tuple(rng.uniform(0.2, 0.8, 3)),
            tuple(rng.uniform(0.2, 0.8, 3)),
        )
        for k in range(29)
    )
    doc = PvgDocument(
        canvas_width=256, canvas_height=256, background=(1, 1, 1),
        diffusion_curves=dcs, border=(1, 1, 1),
    )
    scene = partition_subdomains(doc, 256, 256)
    assert len(scene.subdomains) == 30  # 29 insides + the shared outside


def test_pc_strips_have_opposite_signs():
    doc = simple_rect_doc()
    pc = const_pc(line_spline((24, 32), (40, 32)), 41.0 / 255.0)
    doc = doc.with_(poisson_curves=(pc,))
    scene = partition_subdomains(doc, 64, 64)
    f = scene.constraints.f[..., 0]
    assert np.isclose(f.max(), 41.0 / 255.0)
    assert np.isclose(f.min(), -41.0 / 255.0)
    assert abs(f.sum()) < 1e-9 or (f > 0).sum() != (f < 0).sum()
    # strips sit on opposite sides of the horizontal curve
    ys_pos = np.nonzero(f == f.max())[0]
    ys_neg = np.nonzero(f == f.min())[0]
    assert set(ys_pos) & set(ys_neg) == set()


def test_pc_reversal_swaps_strip_signs_exactly():
    doc = simple_rect_doc()
    fwd = const_pc(line_spline((24, 32), (40, 32)), 0.2)
    rev = const_pc(line_spline((40, 32), (24, 32)), 0.2)
    f_fwd = partition_subdomains(doc.with_(poisson_curves=(fwd,)), 64, 64)
    f_rev = partition_subdomains(doc.with_(poisson_curves=(rev,)), 64, 64)
    assert np.array_equal(f_fwd.constraints.f, -f_rev.constraints.f)


def test_overlapping_prs_add():
    doc = simple_rect_doc()
    pr1 = PoissonRegion(boundary=circle_spline(30, 32, 10), f_outer=(0.1,) * 3)
    pr2 = PoissonRegion(boundary=circle_spline(36, 32, 10), f_outer=(0.1,) * 3)
    s1 = partition_subdomains(doc.with_(poisson_regions=(pr1,)), 64, 64)
    s2 = partition_subdomains(doc.with_(poisson_regions=(pr2,)), 64, 64)
    s12 = partition_subdomains(doc.with_(poisson_regions=(pr1, pr2)), 64, 64)
    assert np.allclose(s12.constraints.f, s1.constraints.f + s2.constraints.f)


def test_dirichlet_wins_over_pc_strip():
    doc = simple_rect_doc()
    # PC crossing the DC: strip pixels that fall on DC pixels stay zero
    pc = const_pc(line_spline((2, 32), (62, 32)), 0.3)
    scene = partition_subdomains(doc.with_(poisson_curves=(pc,)), 64, 64)
    f = scene.constraints.f[..., 0]
    assert np.all(f[scene.curve_raster.mask] == 0.0)


def test_pr_band_width_follows_distance_rule():
    doc = PvgDocument(
        canvas_width=256, canvas_height=256, background=(1, 1, 1),
        diffusion_curves=(solid_dc(rect_spline(4, 4, 252, 252),
                                   (0.5,) * 3, (1.0,) * 3),),
        poisson_regions=(PoissonRegion(boundary=circle_spline(128, 128, 100, n=24),
                                       f_outer=(0.1,) * 3),),
        border=(1, 1, 1),
    )
    scene = partition_subdomains(doc, 256, 256)
    br = scene.constraints.banded_regions[0]
    d1 = br.d1_mask
    # band thickness ~ 0.05 * 100 = 5 px measured radially
    ys, xs = np.nonzero(d1)
    rr = np.hypot(xs + 0.5 - 128, ys + 0.5 - 128)
    assert rr.max() <= 100.5
    assert 3.5 <= rr.max() - rr.min() <= 6.5


def test_banded_region_zero_sum():
    doc = simple_rect_doc()
    pr = PoissonRegion(boundary=circle_spline(32, 32, 12), f_outer=(0.08, 0.04, 0.02))
    scene = partition_subdomains(doc.with_(poisson_regions=(pr,)), 64, 64)
    br = scene.constraints.banded_regions[0]
    f1_raw = np.array([0.08, 0.04, 0.02])
    f2_raw = br.f2  # no deltas in this document
    assert np.all(np.abs(br.a1 * f1_raw + br.a2 * f2_raw)
                  <= 1e-12 * (br.a1 + br.a2))


def test_pr_halo_deltas_offset_bands():
    doc = simple_rect_doc()
    pr = PoissonRegion(
        boundary=circle_spline(32, 32, 12),
        f_outer=(0.08,) * 3,
        delta_outer=(0.02,) * 3,
        delta_inner=(0.01,) * 3,
    )
    scene = partition_subdomains(doc.with_(poisson_regions=(pr,)), 64, 64)
    br = scene.constraints.banded_regions[0]
    assert np.allclose(br.f1, 0.08 + 0.02)
    assert np.allclose(br.f2, -(br.a1 / br.a2) * 0.08 + 0.01)


def test_open_dc_becomes_interior_slit():
    doc = simple_rect_doc()
    slit = solid_dc(line_spline((24, 32), (40, 32)), (0.1, 0.1, 0.1),
                    (0.9, 0.9, 0.9))
    doc = doc.with_(diffusion_curves=doc.diffusion_curves + (slit,))
    scene = partition_subdomains(doc, 64, 64)
    assert len(scene.subdomains) == 2  # the slit does not split the region
    inner = next(s for s in scene.subdomains
                 if scene.label_map[0, 0] != s.id)
    two_sided = [p for p, entries in inner.boundary_colors.items()
                 if len(entries) == 2]
    assert len(two_sided) >= 10  # slit pixels carry both side colors


# ------------------------------------------------------------- EDT


def test_edt_single_pixel():
    mask = np.zeros((5, 5), bool)
    mask[2, 2] = True
    d = euclidean_distance_transform(mask)
    assert d[2, 2] == 0.0
    assert np.isclose(d[2, 4], 2.0)


def test_edt_square_center():
    mask = np.zeros((21, 21), bool)
    mask[0, :] = mask[-1, :] = True
    mask[:, 0] = mask[:, -1] = True
    d = euclidean_distance_transform(mask)
    assert np.isclose(d[10, 10], 10.0)


def _brute_edt(mask):
    src = np.argwhere(mask)
    h, w = mask.shape
    out = np.empty((h, w))
    for y in range(h):
        for x in range(w):
            out[y, x] = np.sqrt(((src - [y, x]) ** 2).sum(axis=1)).min()
    return out


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_edt_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    h, w = rng.integers(2, 24, 2)
    mask = rng.random((h, w)) < 0.15
    if not mask.any():
        mask[rng.integers(h), rng.integers(w)] = True
    assert np.allclose(euclidean_distance_transform(mask), _brute_edt(mask))


def test_band_region_disjoint_cover():
    mask = np.zeros((40, 40), bool)
    ys, xs = np.mgrid[0:40, 0:40]
    mask[(xs - 20) ** 2 + (ys - 20) ** 2 < 15**2] = True
    d1, d2 = band_region(mask)
    assert not (d1 & d2).any()
    assert np.array_equal(d1 | d2, mask)
