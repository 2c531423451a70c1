import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import revolution_area, shape_operator_fd
from pinchlab.dumbbell import build_phi_eps
from pinchlab.geometry import (ConstantProfile, ConstructionError, CosineBump, DomainError,
                               QuadratureError, RevolutionSheet, bump_sphere, covered_sphere,
                               mean_curvature, position, principal_curvatures, round_sphere,
                               second_form_norm, sphere_tangents, sphere_volume, unit_normal)
from pinchlab.measure import field_H, lp_norm, volume


def _surface(sheet):
    prof, sgn = sheet.profile, sheet.sign

    def X(r, t):
        rho = 1 + sgn * prof.eval(np.array([r]))[0][0]
        return rho * np.array([np.sin(r) * np.cos(t), np.sin(r) * np.sin(t), np.cos(r)])

    return X


def _match_up_to_orientation(kap, fd, rtol):
    kap = np.sort(np.asarray(kap))
    scale = np.max(np.abs(fd))
    return min(np.max(np.abs(kap - fd)), np.max(np.abs(np.sort(-kap) - fd))) <= rtol * scale


@pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
def test_constant_profile_is_round(radius):
    sheet = RevolutionSheet(3, 1, ConstantProfile(c=radius - 1))
    r = np.linspace(0.1, np.pi / 2, 7)
    for kap in principal_curvatures(sheet, r):
        assert np.allclose(kap, 1 / radius, rtol=1e-14)


@pytest.mark.parametrize("delta", [0.2, -0.1, 0.05])
def test_bump_curvatures_match_finite_differences(delta):
    sheet = RevolutionSheet(2, 0, CosineBump(delta=abs(delta)), 1 if delta > 0 else -1)
    X = _surface(sheet)
    for r in np.linspace(0.2, 1.4, 7):
        k_mer, k_u, _ = principal_curvatures(sheet, np.array(r))
        fd = shape_operator_fd(X, r, 0.3)
        assert _match_up_to_orientation([k_mer, k_u], fd, 1e-6)


@pytest.mark.parametrize("sign", [1, -1])
def test_dumbbell_sheet_curvatures_match_finite_differences(sign):
    prof = build_phi_eps(2, 0, 1e-2)
    sheet = RevolutionSheet(2, 0, prof, sign)
    X = _surface(sheet)
    rs = np.concatenate([np.geomspace(0.03, 0.14, 4), np.linspace(0.2, 1.5, 5)])
    for r in rs:
        k = principal_curvatures(sheet, np.array(r))
        fd = shape_operator_fd(X, r, 1.1, h=1e-3 * min(r - prof.eps, 0.1))
        assert _match_up_to_orientation([k[0], k[1]], fd, 1e-5)
        assert abs(abs(mean_curvature(sheet, np.array(r))) - abs(fd.mean())) <= 1e-5 * np.abs(fd).max()
        assert abs(second_form_norm(sheet, np.array(r)) - np.abs(fd).max()) <= 1e-5 * np.abs(fd).max()


def test_normal_is_unit_and_orthogonal_to_meridian():
    prof = build_phi_eps(2, 0, 1e-2)
    sheet = RevolutionSheet(2, 0, prof, 1)
    X = _surface(sheet)
    for r in (0.02, 0.3, 1.2):
        nr, nm = unit_normal(sheet, np.array(r))
        assert np.hypot(nr, nm) == pytest.approx(1.0, abs=1e-14)
        # normal in R^3 at theta = 0
        N = nr * np.array([np.sin(r), 0, np.cos(r)]) + nm * np.array([np.cos(r), 0, -np.sin(r)])
        h = 1e-6
        T = (X(r + h, 0.0) - X(r - h, 0.0)) / (2 * h)
        assert abs(N @ T) <= 1e-8 * np.linalg.norm(T)
    # at the neck itself the normal is the limiting meridian direction
    nr, nm = unit_normal(sheet, np.array(prof.eps))
    assert abs(nr) == 0.0 and abs(nm) == 1.0


def test_normal_flip_leaves_reported_fields_invariant():
    from pinchlab.measure import field_abs_H, field_Bnorm, field_support, field_Z

    M = bump_sphere(2, 0.1)
    d = dict(M.nodes(0).data)
    flip = dict(d, nuA=-d["nuA"], nuB=-d["nuB"], H=-d["H"])
    for f in (field_abs_H, field_Bnorm, field_Z, lambda x: x["H"] * field_support(x)):
        assert np.allclose(f(d), f(flip), rtol=0, atol=1e-15)


def test_position_and_domain_checks():
    sheet = RevolutionSheet(3, 1, ConstantProfile(c=1.0))
    y = np.array([0.6, 0.8])
    z = np.array([0.0, 1.0])
    p = position(sheet, y, z, 0.4)
    assert np.linalg.norm(p) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        position(sheet, np.array([1.0, 1.0]), z, 0.4)
    with pytest.raises(DomainError):
        position(sheet, np.array([1.0, 0, 0]), z, 0.4)
    with pytest.raises(ConstructionError):
        RevolutionSheet(2, 1, ConstantProfile())
    with pytest.raises(ConstructionError):
        CosineBump(delta=1.5)


def test_sphere_tangents_are_orthonormal(rng):
    v = rng.standard_normal(5)
    v /= np.linalg.norm(v)
    T = sphere_tangents(v)
    assert T.shape == (4, 5)
    assert np.allclose(T @ T.T, np.eye(4), atol=1e-14)
    assert np.allclose(T @ v, 0.0, atol=1e-14)


@pytest.mark.parametrize("d, value", [(0, 2.0), (1, 2 * np.pi), (2, 4 * np.pi), (3, 2 * np.pi**2)])
def test_sphere_volume(d, value):
    assert sphere_volume(d) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("n, k", [(2, 0), (3, 0), (3, 1), (4, 2)])
@pytest.mark.parametrize("radius", [0.5, 2.0])
def test_round_sphere_volume(n, k, radius):
    M = round_sphere(n, radius, k=k)
    assert volume(M) == pytest.approx(sphere_volume(n) * radius**n, rel=1e-12)
    assert M.length == pytest.approx(np.pi / 2 * radius, rel=1e-13)


@pytest.mark.parametrize("delta", [0.2, 0.05])
def test_bump_area_matches_adaptive_quadrature(delta):
    M = bump_sphere(2, delta)
    rho = lambda r: 1 + delta * np.cos(2 * r)
    drho = lambda r: -2 * delta * np.sin(2 * r)
    # two hemispheres
    assert volume(M) == pytest.approx(2 * revolution_area(rho, drho), rel=1e-11)


def test_arclength_check_passes_and_reports():
    M = bump_sphere(2, 0.1)
    assert M.check_arclength() < 1e-10
    # an impossible tolerance exercises the error report
    with pytest.raises(QuadratureError, match="piece 0"):
        M.check_arclength(tol=-1.0)


def test_warp_is_consistent_with_arclength():
    M = bump_sphere(2, 0.1)
    s = np.linspace(0, M.length, 2001)
    A, dA, B, dB = M.warp(s)
    assert np.allclose(np.hypot(dA, dB), 1.0, atol=1e-12)
    # finite-difference derivative agrees with the returned one
    h = s[1] - s[0]
    assert np.max(np.abs(np.gradient(A, h)[1:-1] - dA[1:-1])) < 1e-5
    with pytest.raises(DomainError):
        M.warp(np.array([-1.0]))


def test_covered_sphere_warp():
    M = covered_sphere(3, 2)
    s = np.linspace(0, np.pi / 2, 11)
    A, dA, B, dB = M.warp(s)
    assert np.allclose(A, 2 * np.sin(s)) and np.allclose(B, np.cos(s))
    with pytest.raises(ConstructionError):
        covered_sphere(2, 2)


@given(t=st.floats(0.2, 5.0))
def test_scaling_equivariance(t):
    M = bump_sphere(2, 0.1)
    Mt = M.scaled(t)
    assert volume(Mt) == pytest.approx(t**2 * volume(M), rel=1e-11)
    assert lp_norm(Mt, field_H, 2) == pytest.approx(lp_norm(M, field_H, 2) / t, rel=1e-11)
    assert Mt.length == pytest.approx(t * M.length, rel=1e-12)


@given(c=st.floats(-3, 3))
def test_translation_keeps_intrinsic_quantities(c):
    M = bump_sphere(2, 0.1)
    Mc = M.translated(c)
    assert volume(Mc) == pytest.approx(volume(M), rel=1e-13)
    assert np.allclose(Mc.offset, [0, 0, c])


def test_zero_profile_glue_doubles_the_sphere():
    from pinchlab.geometry import arclength_reparam
    p = ConstantProfile(c=0.0)
    M = arclength_reparam(RevolutionSheet(2, 0, p, 1), RevolutionSheet(2, 0, p, -1))
    assert M.length == pytest.approx(np.pi, abs=1e-10)
    # the meridian runs equator -> pole -> equator; the S^0 factor supplies the other half
    s = np.linspace(0, M.length, 1001)
    A, _, B, _ = M.warp(s)
    assert np.max(np.abs(np.abs(A) - np.abs(np.cos(s)))) < 1e-10
    assert np.max(np.abs(np.abs(B) - np.sin(s))) < 1e-10
    assert volume(M) == pytest.approx(2 * sphere_volume(2), rel=1e-12)
    S = round_sphere(2)
    s = np.linspace(0, S.length, 1001)
    assert np.max(np.abs(S.warp(s)[0] - np.sin(s))) < 1e-10
    with pytest.raises(ConstructionError):
        arclength_reparam(RevolutionSheet(2, 0, p, 1), RevolutionSheet(2, 0, CosineBump(), -1))
