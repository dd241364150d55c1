import math

import numpy as np
import pytest

from amoebalinks.links import (
    NotQuasiHomogeneous,
    RationalSlope,
    Regime,
    TorusGeodesic,
    TorusLink,
    LinkSource,
    UnsupportedOrientation,
    _merge_phases,
    classify_link,
    corollary_pq_link,
    count_components_closed_form,
    count_components_lee_yang,
    lee_yang_base_curve,
    lee_yang_polynomial,
    link_report,
    quasi_homogeneous_decompose,
    singularity_link,
    unit_fiber_link,
)
from amoebalinks.poly import LatticeMatrix, evaluate, parse_polynomial

TWO_PI = 2 * math.pi

BATTERY = [LatticeMatrix.diag(p, q) for p in range(1, 5) for q in range(1, 5)] + [
    LatticeMatrix(2, 2, 2, 3),
    LatticeMatrix(3, 1, 3, 2),
    LatticeMatrix(1, 2, 1, 3),
    LatticeMatrix(2, 1, 3, 2),
    LatticeMatrix(1, 1, 0, 1),
    LatticeMatrix(2, -1, 1, 3),
]


def test_rational_slope_reduces():
    s = RationalSlope(6, -4)
    assert (s.p, s.q) == (-3, 2) and str(RationalSlope(4, 2)) == "2"


def test_decompose_examples():
    qh = quasi_homogeneous_decompose(parse_polynomial("w^2 + z^3*w - 2z^6"))
    assert (qh.mu.p, qh.mu.q) == (3, 1) and qh.c == 6
    assert qh.h_coeffs == (-2, 1, 1)
    qh = quasi_homogeneous_decompose(parse_polynomial("z^5 - w^2"))
    assert (qh.mu.p, qh.mu.q) == (5, 2) and qh.h_coeffs == (1, 0, -1)
    qh = quasi_homogeneous_decompose(parse_polynomial("z - w"))
    assert (qh.mu.p, qh.mu.q) == (1, 1) and qh.c == 1 and qh.h_coeffs == (1, -1)


def test_decompose_errors():
    with pytest.raises(NotQuasiHomogeneous):
        quasi_homogeneous_decompose(parse_polynomial("1 + z + w"))
    with pytest.raises(NotQuasiHomogeneous):
        quasi_homogeneous_decompose(parse_polynomial("z*w"))
    with pytest.raises(UnsupportedOrientation):
        quasi_homogeneous_decompose(parse_polynomial("z + z^2"))
    with pytest.raises(UnsupportedOrientation):
        quasi_homogeneous_decompose(parse_polynomial("w + w^3"))
    with pytest.raises(UnsupportedOrientation):
        quasi_homogeneous_decompose(parse_polynomial("1 + z*w"))


def test_decompose_exact_line():
    for text in ("w^2 + z^3*w - 2z^6", "z^7 - 3*z^4*w^2 + w^4*z", "z^2*w - w^3 * z^(-1)"):
        p = parse_polynomial(text)
        qh = quasi_homogeneous_decompose(p)
        for i, j in p.support:
            assert i + qh.mu.value * j == qh.c


def test_singularity_examples():
    link = singularity_link(parse_polynomial("w^2 - z^3"))
    assert link.homologies == [(2, 3)]
    link = singularity_link(parse_polynomial("z^5 - w^2"))
    assert link.homologies == [(2, 5)]
    link = singularity_link(parse_polynomial("w^2 + z^3*w - 2z^6"))
    assert link.homologies == [(1, 3), (1, 3)]
    assert [c.offset for c in link.components] == pytest.approx([0, math.pi], abs=1e-12)
    link = singularity_link(parse_polynomial("z^4 - w^2"))
    assert link.homologies == [(1, 2), (1, 2)]


def test_singularity_geodesics_lie_on_the_curve():
    # points on the geodesic lift to actual solutions w = t z^mu with |z| small
    p = parse_polynomial("w^3 - 2*z^2*w + (0,1)*z^3")
    link = singularity_link(p)
    qh = quasi_homogeneous_decompose(p)
    mu = float(qh.mu.value)
    roots = np.roots(np.array(qh.h_coeffs[::-1]))
    for g in link.components:
        t1, t2 = g.points(64).T
        hit = np.zeros(64, bool)
        for t in roots:
            phase = np.angle(t) + mu * t1
            d = np.mod(t2 - phase, TWO_PI)
            ok = np.minimum(d, TWO_PI - d) < 1e-9
            for k in np.nonzero(ok)[0]:
                z = 0.01 * np.exp(1j * t1[k])
                w = t * np.exp(mu * np.log(z))
                assert abs(evaluate(p, z, w)) < 1e-12
            hit |= ok
        assert hit.all()


def test_singularity_gcd_formula():
    for p in range(1, 13):
        for q in range(1, 13):
            link = singularity_link(parse_polynomial(f"z^{p} - w^{q}"))
            assert len(link) == count_components_closed_form(p, q) == math.gcd(p, q)
            g = math.gcd(p, q)
            assert set(link.homologies) == {(q // g, p // g)}


def test_merge_is_order_independent():
    rng = np.random.default_rng(0)
    p = parse_polynomial("z^12 - w^8")
    qh = quasi_homogeneous_decompose(p)
    roots = np.roots(np.array(qh.h_coeffs[::-1]))
    period = TWO_PI / qh.mu.q
    ref = _merge_phases(np.angle(roots), period)
    for _ in range(20):
        assert _merge_phases(np.angle(rng.permutation(roots)), period) == ref


def test_merge_wraps_around():
    groups = _merge_phases(np.array([1e-10, TWO_PI / 3 - 1e-10, 1.0]), TWO_PI / 3)
    assert sorted(size for _, size in groups) == [1, 2]


def test_scaling_invariance():
    for text in ("w^2 - z^3", "w^2 + z^3*w - 2z^6", "z^6 - w^4"):
        p = parse_polynomial(text)
        a = singularity_link(p)
        b = singularity_link(p.scale(-3.5 + 2j))
        assert a.homologies == b.homologies
        assert [c.offset for c in a.components] == pytest.approx([c.offset for c in b.components], abs=1e-9)


def test_singularity_errors():
    with pytest.raises(NotQuasiHomogeneous):
        singularity_link(parse_polynomial("1+z+w"))


def test_closed_form_counts():
    assert count_components_closed_form(3, 2) == 1
    assert count_components_closed_form(4, 2) == 2
    assert count_components_closed_form(6, 9) == 3
    with pytest.raises(ValueError):
        count_components_closed_form(0, 3)


def test_base_curve():
    assert lee_yang_base_curve(0.5, 0.0) == pytest.approx(math.pi)
    phi = lee_yang_base_curve(2.0, math.pi)
    assert min(phi, TWO_PI - phi) < 1e-12
    theta = np.linspace(0, TWO_PI, 10**4, endpoint=False)
    for tau in (0.5, 2.0, 0.9, 7.0):
        z = np.exp(1j * theta)
        assert np.max(np.abs(np.abs(-(1 + tau * z) / (tau + z)) - 1)) < 1e-12
        phi = lee_yang_base_curve(tau, theta)
        assert np.all((phi >= 0) & (phi < TWO_PI))
    with pytest.raises(ValueError):
        lee_yang_base_curve(1.0, 0.0)


def test_lee_yang_counts():
    assert count_components_lee_yang(LatticeMatrix(2, 2, 2, 3), Regime.TAU_LT_1) == 1
    assert count_components_lee_yang(LatticeMatrix.diag(2, 2), Regime.TAU_GT_1) == 2
    assert count_components_lee_yang(LatticeMatrix.diag(3, 3), Regime.TAU_LT_1) == 3
    assert Regime.of(0.3) is Regime.TAU_LT_1 and Regime.of(3) is Regime.TAU_GT_1


@pytest.mark.parametrize("L", BATTERY, ids=lambda L: ",".join(map(str, L.entries)))
@pytest.mark.parametrize("tau", [0.5, 2.0])
def test_trace_matches_formula(L, tau):
    link = unit_fiber_link(L, tau)
    assert len(link) == count_components_lee_yang(L, Regime.of(tau))
    for loop in link.components:
        assert loop.closure_gap < 1e-6 and loop.winding_error < 1e-6


@pytest.mark.parametrize("L", BATTERY[::3] + BATTERY[-4:], ids=lambda L: ",".join(map(str, L.entries)))
def test_traced_points_solve_the_equation(L):
    tau = 0.5
    f = lee_yang_polynomial(tau, L)
    scale = sum(abs(c) for _, c in f)
    for loop in unit_fiber_link(L, tau).components:
        for a, b in loop.lifted[::97]:
            assert abs(evaluate(f, np.exp(1j * a), np.exp(1j * b))) < 1e-9 * scale


def test_traced_loops_are_disjoint_and_cover_all_branches():
    L = LatticeMatrix.diag(3, 3)
    link = unit_fiber_link(L, 2.0)
    pts = [np.mod(loop.lifted[::50], TWO_PI) for loop in link.components]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = np.abs(pts[i][:, None, :] - pts[j][None, :, :])
            d = np.minimum(d, TWO_PI - d).max(axis=2)
            assert d.min() > 1e-3
    assert sum(loop.laps for loop in link.components) == abs(L.det)


def test_named_unit_fiber_links():
    hopf = unit_fiber_link(LatticeMatrix.diag(2, 2), 2.0)
    assert len(hopf) == 2 and set(hopf.homologies) == {(1, 1)}
    for tau in (0.5, 2.0):
        assert len(unit_fiber_link(LatticeMatrix.diag(3, 3), tau)) == 3
        tref = unit_fiber_link(LatticeMatrix.diag(2, 3), tau)
        assert len(tref) == 1
        m, n = tref.homologies[0]
        assert sorted((abs(m), abs(n))) == [2, 3]
    assert unit_fiber_link(LatticeMatrix.diag(2, 3), 0.5).homologies == [(3, -2)]


def test_corollary():
    assert len(corollary_pq_link(2, 3, 0.5)) == 1
    assert len(corollary_pq_link(2, 2, 0.5)) == 2
    for tau in (0.5, 2.0):
        link = corollary_pq_link(1, 1, tau)
        assert len(link) == 1 and link.homologies[0] in ((1, 1), (1, -1))
        assert classify_link(link).label == "unknot"


def test_unit_fiber_errors():
    with pytest.raises(ValueError):
        unit_fiber_link(LatticeMatrix.diag(1, 2), 1.0)
    with pytest.raises(ValueError):
        unit_fiber_link(LatticeMatrix.diag(1, 2), -2.0)


def test_trace_resolution_is_enough():
    # a coarse trace still closes for a mild parameter
    link = unit_fiber_link(LatticeMatrix(2, 1, 3, 2), 0.5, steps=512)
    assert len(link) == count_components_lee_yang(LatticeMatrix(2, 1, 3, 2), Regime.TAU_LT_1)


def test_geodesic_canonical_form():
    g = TorusGeodesic((-2, -3), -0.1)
    assert g.homology == (2, 3) and 0 <= g.offset < math.pi
    with pytest.raises(ValueError):
        TorusGeodesic((2, 4), 0.0)
    v = TorusGeodesic((0, -1), 7.0)
    assert v.homology == (0, 1) and v.offset == pytest.approx(7.0 - TWO_PI)


def test_classify():
    tref = classify_link(singularity_link(parse_polynomial("w^2 - z^3")))
    assert tref.label == "T(3,2) trefoil" and tref.description == "T(3,2) torus knot (trefoil)"
    pair = classify_link(singularity_link(parse_polynomial("w^2 + z^3*w - 2z^6")))
    assert pair.count == 2 and "each unknotted" in pair.description and "slope-3" in pair.description
    assert pair.torus_type == (6, 2)
    one = classify_link(TorusLink([TorusGeodesic((1, 1), 0.0)], LinkSource.FORMULA))
    assert one.label == "unknot"
    hopf = classify_link(unit_fiber_link(LatticeMatrix.diag(2, 2), 2.0))
    assert "Hopf" in hopf.label
    mixed = classify_link(TorusLink([TorusGeodesic((1, 1), 0), TorusGeodesic((1, 2), 0)], LinkSource.FORMULA))
    assert mixed.label == "mixed link"
    with pytest.raises(ValueError):
        classify_link(TorusLink([], LinkSource.FORMULA))


def test_report_table():
    text = link_report(singularity_link(parse_polynomial("w^2 + z^3*w - 2z^6")))
    lines = text.splitlines()
    assert lines[0] == "components: 2, homology: (1,3), label: T(6,2) torus link"
    assert "3.14159265" in lines[-1]
