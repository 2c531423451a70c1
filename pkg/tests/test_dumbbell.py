import numpy as np
import pytest

from oracles import neck_integral
from pinchlab.dumbbell import (Bridge, build_dumbbell, build_f_eps, build_phi_eps, check_spectrum,
                               check_convergence, neck_curvature, neck_slope, neck_value,
                               spectrum_targets, sweep_csv, sweep_spectrum)
from pinchlab.geometry import ConstructionError, DomainError, neck_ode_profile
from pinchlab.measure import field_X, hsiung_defect, sup_norm, volume


def test_neck_closed_form_m1():
    eps = 1e-3
    f = build_f_eps(2, 0, eps)
    val, slope, _ = f.eval(np.array([2 * eps]))
    assert val[0] == pytest.approx(eps * np.arccosh(2.0), rel=1e-14)
    assert val[0] / eps == pytest.approx(1.3169578969248166, rel=1e-14)
    assert slope[0] == pytest.approx(1 / np.sqrt(3), rel=1e-14)
    assert f.eval(np.array([eps]))[0][0] == 0.0
    assert np.isinf(f.eval(np.array([eps]))[1][0])


@pytest.mark.parametrize("m", [1, 2, 3, 5])
@pytest.mark.parametrize("delta", [1e-12, 1e-6, 0.3, 5.0, 200.0, 1e5])
def test_neck_value_matches_quadrature(m, delta):
    assert neck_value(delta, m) == pytest.approx(neck_integral(delta, m), rel=1e-11)


@pytest.mark.parametrize("m", [1, 2, 4])
def test_neck_derivatives_by_differences(m):
    eps = 1e-2
    r = np.linspace(1.5 * eps, 20 * eps, 9)
    h = 1e-6 * eps
    fv = lambda x: eps * neck_value(x / eps - 1, m)
    d1 = (fv(r + h) - fv(r - h)) / (2 * h)
    # roundoff in the difference quotient is about 1e-16 eps / h
    assert np.allclose(neck_slope(r / eps - 1, m), d1, rtol=1e-7, atol=1e-9)
    s = lambda x: neck_slope(x / eps - 1, m)
    d2 = (s(r + h) - s(r - h)) / (2 * h)
    assert np.allclose(neck_curvature(r / eps - 1, m, eps), d2, rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize("n, k", [(2, 0), (3, 0), (3, 1), (4, 1)])
def test_neck_inverts_the_ode_solution(n, k):
    eps = 1e-3
    f = build_f_eps(n, k, eps)
    t_max = float(f.eval(np.array([eps + np.pi / 20]))[0][0])
    t, y, yp, sol = neck_ode_profile(n, k, eps, t_max)
    # y(t) is r as a function of phi; feeding r back through f returns t
    phi = f.eval(y[1:])[0]
    assert np.max(np.abs(phi - t[1:])) < 1e-8 * max(t_max, eps)
    assert np.allclose(1 / yp[1:], f.eval(y[1:])[1], rtol=1e-7)


@pytest.mark.parametrize("n, k, eps", [(2, 0, 1e-1), (2, 0, 1e-4), (3, 0, 1e-3), (3, 1, 1e-2),
                                       (4, 2, 1e-3)])
def test_ode_residual_on_neck_piece(n, k, eps):
    prof = build_phi_eps(n, k, eps)
    r = eps * (1 + np.geomspace(1e-6, prof.a / eps, 2000))
    phi, d1, d2 = prof.eval(r)
    m = n - k - 1
    scale = np.abs(d2) + m * (1 + d1**2) * np.abs(d1) / r
    assert np.max(np.abs(prof.ode_residual(r)) / scale) < 1e-8


@pytest.mark.parametrize("n, k", [(2, 0), (3, 0), (3, 1), (4, 0)])
def test_profile_invariants(n, k):
    bs = []
    for eps in (1e-2, 1e-3, 1e-4):
        prof = build_phi_eps(n, k, eps)
        diag = prof.diagnostics
        assert diag["jump_join"] < 1e-9 and diag["jump_top"] < 1e-9
        assert diag["max_q"] < 0
        assert prof.eval(np.array([eps]))[0][0] == 0.0
        top = prof.bridge.r0 + prof.bridge.h
        assert prof.eval(np.array([top]))[1][0] == pytest.approx(0.0, abs=1e-12)
        r = np.linspace(eps * (1 + 1e-6), top - 1e-9, 10_000)
        assert np.all(prof.eval(r)[2] < 0)
        bs.append(prof.b_eps)
    assert bs[0] > bs[1] > bs[2] and bs[0] < 0.5


def test_profile_is_c2_across_the_joins():
    prof = build_phi_eps(2, 0, 1e-3)
    for r0 in prof.breakpoints:
        lo = np.array(prof.eval(np.array([r0 - 1e-9]))).ravel()
        hi = np.array(prof.eval(np.array([r0 + 1e-9]))).ravel()
        assert np.allclose(lo, hi, rtol=1e-6, atol=1e-6)


def test_bridge_matches_its_data():
    br = Bridge(0.2, 0.1, 0.3, 0.5, -0.4, c0=-6 * 0.5 - 3 * -0.4 - 0.5 * 0.2, c1=0.2)
    U, dU, d2U = br.eval(np.array([0.2, 0.3]))
    assert U[0] == pytest.approx(0.3) and dU[0] == pytest.approx(0.5 / 0.1)
    assert d2U[0] == pytest.approx(-0.4 / 0.01)
    assert dU[1] == pytest.approx(0.0, abs=1e-12) and d2U[1] == pytest.approx(0.0, abs=1e-12)
    assert U[1] == pytest.approx(br.top)


def test_construction_errors():
    with pytest.raises(ConstructionError):
        build_phi_eps(2, 0, 1e-3, a=0.4)
    with pytest.raises(ConstructionError):
        build_phi_eps(2, 0, 0.2, a=0.1)
    with pytest.raises(DomainError):
        build_f_eps(2, 1, 1e-3)
    with pytest.raises(DomainError):
        build_f_eps(2, 0, 0.0)
    with pytest.raises(DomainError):
        build_f_eps(2, 0, 1e-2).eval(np.array([1e-3]))


def test_dumbbell_geometry(dumbbells):
    M = dumbbells[1e-2]
    assert volume(M) == pytest.approx(8 * np.pi, rel=0.15)
    # the ends are mirror points of the S^0 factor: B vanishes with unit slope
    A, dA, B, dB = M.warp(np.array([0.0, M.length]))
    assert np.allclose(np.abs(B), 0.0, atol=1e-12)
    assert np.allclose(np.abs(dB), 1.0, atol=1e-3)
    # the waist of the neck has radius eps (1 + O(eps))
    s = np.linspace(0, M.length, 20001)
    A = np.abs(M.warp(s)[0])
    eps = M.meta["eps"]
    assert abs(A.min() - eps) < eps**2


def test_hsiung_identity_on_dumbbells(dumbbells):
    for M in dumbbells.values():
        assert abs(hsiung_defect(M)) < 1e-6


def test_plateau_bound(dumbbells):
    M = dumbbells[1e-1]
    assert sup_norm(M, lambda d: field_X(d) - 1.0) <= M.meta["b_eps"] + 1e-9


def test_targets_double_the_sphere_spectrum():
    assert spectrum_targets(2, 9).tolist() == [0, 0, 2, 2, 2, 2, 2, 2, 6]


def test_sweeps_reject_unsorted_eps():
    with pytest.raises(DomainError):
        sweep_spectrum(eps_list=(1e-3, 1e-2))


def test_check_functions_on_synthetic_rows():
    rows = [dict(eps=e, b_eps=b, H_inf=1.0, B_2=1.0, H_minus_1_L1=x, X_minus_1_inf=x, B_3=g)
            for e, b, x, g in [(0.1, 0.2, 0.2, 1), (0.01, 0.04, 0.04, 3), (0.001, 0.006, 0.01, 5)]]
    assert all(ok for _, ok, _ in check_convergence(rows))
    rows[2]["H_minus_1_L1"] = 0.3
    bad = [name for name, ok, _ in check_convergence(rows) if not ok]
    assert bad == ["H_minus_1_L1 decreasing to < 0.05"]
    srows = [dict(eps=1e-2, eigenvalues=[0, 0.3, 1.9], deviation=[0, 0.3, 0.1]),
             dict(eps=1e-3, eigenvalues=[0, 0.1, 1.95], deviation=[0, 0.1, 0.05])]
    assert all(ok for _, ok, _ in check_spectrum(srows, sigma_dev=2))


def test_sweep_csv_long_format():
    text = sweep_csv([dict(eps=0.1, a=1.0, v=[2.0, 3.0])])
    assert text.splitlines() == ["eps,quantity,value", "0.1,a,1.0", "0.1,v_0,2.0", "0.1,v_1,3.0"]
