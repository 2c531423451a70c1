import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pinchlab.geometry import DomainError, bump_sphere, round_sphere
from pinchlab.inequalities import (curvature_concentration, fmap_defect,
                                   hk_gap, inequality_chain, moment_gap, pinching_implications,
                                   radius_concentration, reilly_gap)
from pinchlab.measure import field_H, lp_norm
from pinchlab.spectrum import warped_spectrum


def lambda_1(M):
    return float(warped_spectrum(M, 2).values(2)[1])


@pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("p", [2, 3, 6])
def test_spheres_are_equality_cases(radius, p):
    M = round_sphere(2, radius)
    rep = moment_gap(M, p, lambda_1=2 / radius**2)
    assert abs(rep.eps_P) < 1e-8 and rep.equality
    assert abs(rep.eps_R) < 1e-8
    assert abs(rep.eps_Lambda) < 1e-8
    assert abs(hk_gap(M, p)) < 1e-8
    assert curvature_concentration(M, 1) < 1e-12
    assert fmap_defect(M) < 1e-10


def test_reilly_gap_with_computed_lambda_1(unit_sphere):
    lam = lambda_1(unit_sphere)
    assert lam == pytest.approx(2.0, rel=1e-6)
    assert abs(reilly_gap(unit_sphere, 2, lam)) < 1e-6


def test_moment_gap_is_quadratic_in_the_bump(bumps):
    deltas = [0.1, 0.05, 0.025]
    gaps = [moment_gap(bumps[d]).eps_P for d in deltas]
    assert all(g > 0 for g in gaps)
    slope = np.polyfit(np.log(deltas), np.log(gaps), 1)[0]
    assert slope >= 1.9


def test_radius_gap_dominates_moment_gap(bumps, dumbbells):
    for M in list(bumps.values()) + list(dumbbells.values()):
        rep = moment_gap(M)
        assert rep.eps_R >= rep.eps_P - 1e-6
        assert pinching_implications(rep)["radius_implies_moment"]


def test_reilly_gap_vanishes_along_the_bump_sweep(bumps):
    deltas = sorted(bumps, reverse=True)
    gaps = [reilly_gap(bumps[d], 2, lambda_1(bumps[d])) for d in deltas]
    assert all(g >= -1e-6 for g in gaps)
    # lambda_1 moves at first order in delta, so the gap is linear
    assert gaps == sorted(gaps, reverse=True)
    assert all(g <= 2.5 * d for g, d in zip(gaps, deltas))


def test_implications_on_bumps(bumps):
    for M in bumps.values():
        rep = moment_gap(M, 2, lambda_1=lambda_1(M))
        assert all(pinching_implications(rep).values())
        assert all(inequality_chain(M, rep.lambda_1).values())


def test_dumbbell_pinches_moment_and_radius_but_not_reilly(dumbbells):
    M = dumbbells[1e-3]
    rep = moment_gap(M, 2, lambda_1=lambda_1(M))
    assert 0 < rep.eps_P < 0.2
    assert rep.eps_R < 0.2
    assert rep.eps_Lambda > 5
    assert all(pinching_implications(rep).values())
    assert all(inequality_chain(M, rep.lambda_1).values())


def test_radius_gap_shrinks_along_the_dumbbell_sweep(dumbbells):
    gaps = [hk_gap(dumbbells[e]) for e in sorted(dumbbells, reverse=True)]
    assert gaps == sorted(gaps, reverse=True) and gaps[-1] < 0.01


def test_curvature_concentration_vanishes(bumps, dumbbells):
    b = [curvature_concentration(bumps[d], 2) for d in sorted(bumps, reverse=True)]
    assert b == sorted(b, reverse=True) and b[-1] < 0.05
    d = [curvature_concentration(dumbbells[e], 1) for e in sorted(dumbbells, reverse=True)]
    assert d == sorted(d, reverse=True) and d[-1] < 0.05


def test_radius_concentration_is_degenerate_on_spheres(unit_sphere):
    rep = radius_concentration(unit_sphere, 4)
    assert rep.degenerate and rep.ratio == 0.0 and rep.rhs_shape == 0.0
    assert rep.sup_dev < 1e-13
    assert rep.gamma == pytest.approx(1.0)


def test_radius_concentration_ratio_is_bounded(bumps, dumbbells):
    ratios = [radius_concentration(M, 4).ratio for M in bumps.values()]
    assert all(np.isfinite(r) and r > 0 for r in ratios)
    assert max(ratios) / min(ratios) < 10
    sup = [radius_concentration(M, 4).sup_ratio for M in dumbbells.values()]
    assert max(sup) / min(sup) < 10


def test_fmap_defect_is_linear_in_the_bump(bumps):
    for d, M in bumps.items():
        assert fmap_defect(M) <= 3 * d
    # a sphere of any radius maps isometrically onto the sphere of radius 1/||H||_2
    assert fmap_defect(round_sphere(3, 2.5)) < 1e-10


def test_domain_errors(unit_sphere):
    with pytest.raises(DomainError):
        moment_gap(unit_sphere, 1.5)
    with pytest.raises(DomainError):
        reilly_gap(unit_sphere, 2, 0.0)
    with pytest.raises(DomainError):
        radius_concentration(unit_sphere, 2)
    with pytest.raises(DomainError):
        curvature_concentration(unit_sphere, 0.5)


@settings(max_examples=10)
@given(t=st.floats(0.2, 5.0), c=st.floats(-3, 3))
def test_gaps_are_scale_and_translation_invariant(t, c):
    M = bump_sphere(2, 0.1)
    Mt = M.scaled(t).translated(c)
    a, b = moment_gap(M, 3), moment_gap(Mt, 3)
    assert b.eps_P == pytest.approx(a.eps_P, rel=1e-8)
    assert b.eps_R == pytest.approx(a.eps_R, rel=1e-7)
    assert curvature_concentration(Mt, 2) == pytest.approx(curvature_concentration(M, 2), rel=1e-9)
    assert radius_concentration(Mt, 4).ratio == pytest.approx(radius_concentration(M, 4).ratio, rel=1e-7)
    assert lp_norm(Mt, field_H, 2) * t == pytest.approx(lp_norm(M, field_H, 2), rel=1e-11)
