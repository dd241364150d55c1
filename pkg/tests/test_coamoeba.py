import math

import numpy as np
import pytest

from amoebalinks import coamoeba as co
from amoebalinks.numeric import solve_fiber
from amoebalinks.poly import newton_polygon, parse_polynomial
from oracles import bfs_torus_components, chebyshev_torus_distance, line_coamoeba_mask

TWO_PI = 2 * math.pi
LINE = parse_polynomial("1+z+w")
F1 = parse_polynomial("1+z1^2*z2^3+z1^3*z2")


@pytest.fixture(scope="module")
def line_cloud():
    return co.sample_coamoeba(LINE)


@pytest.fixture(scope="module")
def f1_cloud():
    return co.sample_coamoeba(F1)


def circ(a, b):
    d = np.mod(np.asarray(a) - np.asarray(b), TWO_PI)
    return np.minimum(d, TWO_PI - d)


# --------------------------------------------------------------------------
# clouds and sampling


def test_wrap_angle_and_torus_point():
    assert co.wrap_angle(-0.5) == pytest.approx(TWO_PI - 0.5)
    assert co.wrap_angle(TWO_PI) == 0.0
    p = co.TorusPoint.reduce(7.0, -1.0)
    assert 0 <= p.theta1 < TWO_PI and 0 <= p.theta2 < TWO_PI


def test_cloud_dump_load_round_trip(tmp_path):
    pts = np.array([[0.1, 0.2], [1 / 3, math.pi]])
    cloud = co.PointCloud(pts, co.CloudKind.COAMOEBA, {"polynomial": "z - w"})
    cloud.dump(tmp_path / "c.txt")
    back = co.PointCloud.load(tmp_path / "c.txt")
    assert back.kind is co.CloudKind.COAMOEBA and back.meta["polynomial"] == "z - w"
    assert np.array_equal(back.points, pts)


def test_lee_yang_unit_point():
    p = parse_polynomial("1+0.5z+0.5w+zw")
    cloud = co.sample_coamoeba(p, 3, 8, (-1, 1), max_arg_gap=None)
    # the middle radius is rho = 0 and theta = 0 is the first angle
    d = np.hypot(*circ(cloud.points, [[0.0, math.pi]]).T)
    assert d.min() < 1e-12


def test_diagonal_line():
    cloud = co.sample_coamoeba(parse_polynomial("z - w"), 20, 50)
    assert np.max(circ(cloud.points[:, 0], cloud.points[:, 1])) < 1e-12
    am = co.sample_amoeba(parse_polynomial("z - w"), 20, 50)
    assert np.max(np.abs(am.points[:, 0] - am.points[:, 1])) < 1e-12


def test_lee_yang_amoeba_reaches_origin():
    am = co.sample_amoeba(parse_polynomial("1+0.5z+0.5w+zw"), 101, 400, (-1, 1))
    assert np.min(np.hypot(am.points[:, 0], am.points[:, 1])) < 1e-3


def test_line_amoeba_avoids_lower_left():
    am = co.sample_amoeba(LINE, 200, 400)
    x, y = am.points.T
    # |z| + |w| >= 1 on the curve
    assert not np.any((x < -math.log(2) - 1e-9) & (y < -math.log(2) - 1e-9))


def test_spot_check_samples():
    p = parse_polynomial("1 + (0.5,0.5)*z*w^2 - z^2 + w^3")
    s = co.sample_curve(p, 60, 180, max_arg_gap=co.DEFAULT_ARG_GAP)
    rng = np.random.default_rng(0)
    idx = rng.choice(s.w.size, size=max(1, s.w.size // 100), replace=False)
    for k in idx:
        roots = solve_fiber(p, np.exp(s.log_z[k])).roots
        assert np.min(circ(np.angle(roots), np.angle(s.w[k]))) < 1e-9


def test_worker_count_does_not_change_output(monkeypatch):
    p = parse_polynomial("1+z^2*w+z*w^3")
    a = co.sample_coamoeba(p, 80, 400, workers=1)
    b = co.sample_coamoeba(p, 80, 400, workers=3)
    assert np.array_equal(a.points, b.points)
    monkeypatch.setenv("COAMOEBA_THREADS", "2")
    assert co.worker_count() == 2


def test_refinement_only_adds_points():
    p = parse_polynomial("1+z+w")
    plain = co.sample_coamoeba(p, 40, 120, max_arg_gap=None)
    fine = co.sample_coamoeba(p, 40, 120)
    assert int(fine.meta["refined"]) > 0
    assert np.array_equal(fine.points[: len(plain)], plain.points)


# --------------------------------------------------------------------------
# logarithmic Gauss map and contour


def test_log_gauss_values():
    assert co.log_gauss(LINE, -0.5, -0.5) == pytest.approx(1)
    cusp = parse_polynomial("w^2 - z^3")
    for z in (1, 2j, 0.3 - 0.7j):
        w = complex(z) ** 1.5
        assert co.log_gauss(cusp, z, w) == pytest.approx(-1.5)
    assert co.log_gauss(parse_polynomial("z - w"), 2 + 1j, 2 + 1j) == pytest.approx(-1)


def test_log_gauss_errors():
    with pytest.raises(ValueError):
        co.log_gauss(LINE, 1, 1)
    # (w - z)^2 is singular along w = z
    node = parse_polynomial("w^2 - 2*z*w + z^2")
    with pytest.raises(co.SingularPointError):
        co.log_gauss(node, 1, 1)


def test_contour_of_cusp_is_the_trefoil_lines():
    cloud = co.contour_sample(parse_polynomial("w^2 - z^3"), 40, 200)
    t1, t2 = cloud.points.T
    # arg w = 1.5 arg z  modulo pi
    d = np.mod(t2 - 1.5 * t1, math.pi)
    assert len(cloud) > 0 and np.max(np.minimum(d, math.pi - d)) < 1e-9


def test_contour_of_line_sits_at_the_vertices():
    cloud = co.contour_sample(LINE, 300, 1000)
    verts = np.array([[0, math.pi], [math.pi, 0], [math.pi, math.pi]])
    d = np.min(np.max(circ(cloud.points[:, None, :], verts[None, :, :]), axis=2), axis=1)
    assert len(cloud) > 0 and np.max(d) < 0.1


def test_contour_im_tol_validation():
    with pytest.raises(ValueError):
        co.contour_sample(LINE, 4, 4, im_tol=0)


# --------------------------------------------------------------------------
# rasters


def cloud_of(pts):
    return co.PointCloud(np.asarray(pts, dtype=float), co.CloudKind.COAMOEBA)


def test_rasterize_single_point_and_wrap():
    r = co.rasterize(cloud_of([[0.0, 0.0]]), 4)
    expected = np.zeros((4, 4), int)
    expected[0, 0] = 1
    assert np.array_equal(r.counts, expected)
    r = co.rasterize(cloud_of([[1.0, 2.0], [1.0 + TWO_PI, 2.0]]), 8)
    assert r.counts.max() == 2 and r.total == 2


def test_rasterize_uniform_binomial():
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, TWO_PI, size=(10**6, 2))
    r = co.rasterize(cloud_of(pts), 16)
    mean = 10**6 / 256
    sigma = math.sqrt(10**6 * (1 / 256) * (255 / 256))
    assert np.all(np.abs(r.counts - mean) < 5 * sigma)


def test_rasterize_rejects_amoeba():
    with pytest.raises(ValueError):
        co.rasterize(co.PointCloud(np.zeros((1, 2)), co.CloudKind.AMOEBA), 4)


def test_complement_components_trivial():
    assert co.complement_components(co.TorusRaster(np.zeros((8, 8), int))) == 1
    assert co.complement_components(co.TorusRaster(np.ones((8, 8), int))) == 0


def test_complement_components_against_bfs():
    rng = np.random.default_rng(3)
    for density in (0.3, 0.45, 0.55, 0.7):
        for _ in range(10):
            counts = (rng.random((23, 31)) < density).astype(int)
            r = co.TorusRaster(counts)
            assert co.complement_components(r) == bfs_torus_components(counts == 0)


def test_complement_components_threshold():
    counts = np.zeros((6, 6), int)
    counts[2, :] = 1
    counts[4, :] = 3
    assert co.complement_components(co.TorusRaster(counts)) == 2
    assert co.complement_components(co.TorusRaster(counts), occupancy_threshold=2) == 1


def test_seam_bands():
    counts = np.zeros((10, 10), int)
    counts[:, 0] = 1
    counts[:, 5] = 1
    # two occupied circles cut the torus into two annuli
    assert co.complement_components(co.TorusRaster(counts)) == 2


def test_line_coamoeba_oracle():
    mask = line_coamoeba_mask(256)
    assert bfs_torus_components(~mask) == 1


def test_line_coamoeba(line_cloud):
    r = co.rasterize(line_cloud)
    assert co.complement_components(r) == 1
    # sampled cells lie in the analytic coamoeba up to one cell
    exact = line_coamoeba_mask(512)
    assert co.directed_cell_distance(r.occupied(), exact) <= 1
    # the thin tips of the triangles need |log|z|| > 3 and stay unsampled
    assert co.directed_cell_distance(exact, r.occupied()) <= 6


def test_f1_components_and_invariance(f1_cloud):
    r = co.rasterize(f1_cloud)
    assert co.complement_components(r) == 7 == newton_polygon(F1).twice_area
    rot = co.TorusRaster(np.rot90(r.counts).copy())
    shifted = co.TorusRaster(np.roll(r.counts, (137, -61), axis=(0, 1)))
    assert co.complement_components(rot) == 7
    assert co.complement_components(shifted) == 7


@pytest.mark.parametrize("text", ["1+z^2+w^2", "1+z*w^2+z^2*w"])
def test_simplex_complement_equals_twice_area(text):
    p = parse_polynomial(text)
    r = co.rasterize(co.sample_coamoeba(p))
    assert co.complement_components(r) == newton_polygon(p).twice_area


def test_distance_against_brute_force():
    rng = np.random.default_rng(4)
    for _ in range(10):
        a = rng.random((20, 24)) < 0.05
        b = rng.random((20, 24)) < 0.1
        assert co.directed_cell_distance(a, b) == chebyshev_torus_distance(a, b)


# --------------------------------------------------------------------------
# transforms


def test_transform_identity_and_translation():
    cloud = cloud_of([[0.3, 1.2], [5.0, 6.0]])
    same = co.transform_cloud(cloud, co.AffineTorusMap.identity())
    assert np.allclose(same.points, cloud.points)
    moved = co.transform_cloud(cloud_of([[0.0, 0.0]]), co.AffineTorusMap(((1, 0), (0, 1)), (math.pi, 0.0)))
    assert np.allclose(moved.points, [[math.pi, 0.0]])


def test_branch_shifts_count():
    from fractions import Fraction as F

    m = co.AffineTorusMap(((F(3, 7), F(-1, 7)), (F(-2, 7), F(3, 7))))
    assert len(m.branch_shifts()) == 7
    assert len(co.AffineTorusMap(((F(1, 2), 0), (0, F(1, 2)))).branch_shifts()) == 4


def test_transform_line_onto_f1(line_cloud, f1_cloud):
    from fractions import Fraction as F

    m = co.AffineTorusMap(((F(3, 7), F(-1, 7)), (F(-2, 7), F(3, 7))))
    moved = co.rasterize(co.transform_cloud(line_cloud, m)).occupied()
    direct = co.rasterize(f1_cloud).occupied()
    assert co.hausdorff_cells(moved, direct) <= 2
    derived = co.rasterize(co.transform_cloud(line_cloud, co.simplex_transform(F1))).occupied()
    assert co.hausdorff_cells(derived, direct) <= 2


def test_simplex_transform_with_phases():
    p = parse_polynomial("1 - z^2*w - (0,1)*z*w^3")
    base = co.sample_coamoeba(LINE, 200, 600)
    moved = co.rasterize(co.transform_cloud(base, co.simplex_transform(p)), 256).occupied()
    direct = co.rasterize(co.sample_coamoeba(p, 200, 600), 256).occupied()
    assert co.hausdorff_cells(moved, direct) <= 2
