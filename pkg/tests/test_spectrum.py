import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import uniform_vertex_spectrum
from pinchlab.geometry import bump_sphere, covered_sphere, round_sphere
from pinchlab.harmonics import dim_harmonic, sigma, sphere_eigenvalue
from pinchlab.measure import field_H, lp_norm
from pinchlab.spectrum import (ModeTruncationError, covered_sphere_exact, covered_sphere_spectrum,
                               eigenfunction_ratios, factor_mode, make_grid, spectral_comparison,
                               sphere_spectrum, warped_spectrum)


@pytest.mark.parametrize("n", [2, 3])
def test_round_sphere_spectrum_with_multiplicities(n):
    count = sigma(n, 4)
    res = warped_spectrum(round_sphere(n, 1.0), count)
    assert res.extrapolated
    clusters = res.clusters()
    assert [m for _, m, _ in clusters[:5]] == [dim_harmonic(n, k) for k in range(5)]
    for k, (v, _, _) in enumerate(clusters[:5]):
        mu = sphere_eigenvalue(n, k)
        assert abs(v - mu) <= 1e-5 * max(mu, 1.0)


@settings(max_examples=8)
@given(t=st.floats(0.25, 4.0))
def test_spectrum_scales_with_the_inverse_square_radius(t):
    vals = warped_spectrum(round_sphere(2, t), 9).values(9)
    ref = sphere_spectrum(2, 9).values(9) / t**2
    assert np.allclose(vals, ref, rtol=1e-5, atol=1e-8 / t**2)


def test_factor_modes():
    assert factor_mode(0, 0) == (0.0, 1) and factor_mode(0, 1) == (0.0, 1)
    assert factor_mode(0, 2) is None
    assert factor_mode(1, 0) == (0.0, 1) and factor_mode(1, 3) == (9.0, 2)
    for d in (2, 3):
        for i in range(5):
            assert factor_mode(d, i) == (float(sphere_eigenvalue(d, i)), dim_harmonic(d, i))


def test_lowest_eigenvalue_is_zero(bumps, dumbbells):
    for M in list(bumps.values()) + list(dumbbells.values()):
        assert abs(warped_spectrum(M, 1).values(1)[0]) < 1e-9


def test_single_cover_reproduces_s3():
    vals = covered_sphere_spectrum(3, 1, 20).values(20)
    assert np.allclose(vals, sphere_spectrum(3, 20).values(20), rtol=1e-5, atol=1e-8)


def test_double_cover_matches_its_closed_form():
    # the cone angle along the branch circle slows convergence to about 4e-4
    vals = covered_sphere_spectrum(3, 2, 20).values(20)
    assert np.allclose(vals, covered_sphere_exact(3, 2, 20), rtol=1e-3, atol=1e-8)
    assert covered_sphere_exact(3, 2, 3)[1] == pytest.approx(1.25)


def test_grid_grades_toward_the_neck(dumbbells):
    M = dumbbells[1e-3]
    g = make_grid(M, 200)
    assert g.ds_c.min() < 1e-2 * g.ds_c.max()
    assert np.all(np.diff(g.s_f) > 0) and g.s_f[0] == 0.0 and g.s_f[-1] == pytest.approx(M.length)
    u = make_grid(round_sphere(2, 1.0), 200)
    assert np.allclose(u.ds_c, u.ds_c[0])


@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_dumbbell_spectrum_against_uniform_vertex_grid(dumbbells, eps):
    M = dumbbells[eps]
    res = warped_spectrum(M, 9)
    for e in res.eigenvalues:
        i, j, r = e.mode
        ref = uniform_vertex_spectrum(M, i * i, j, 32000, r + 1)[r]
        assert abs(e.value - ref) <= 1e-5 * max(ref, 1.0)


def test_odd_zonal_mode_at_the_calibration_point(dumbbells):
    # lambda_7 at eps = 1e-3 is the odd zonal mode, independently confirmed
    M = dumbbells[1e-3]
    vals = warped_spectrum(M, 9).values(9)
    ref = uniform_vertex_spectrum(M, 0.0, True, 32000, 2)[1]
    assert vals[7] == pytest.approx(ref, rel=1e-5)
    assert vals[7] == pytest.approx(2.4304, abs=1e-3)


def test_small_eigenvalue_tracks_the_neck(dumbbells):
    lam1 = [warped_spectrum(dumbbells[e], 2).values(2)[1] for e in sorted(dumbbells, reverse=True)]
    assert lam1 == sorted(lam1, reverse=True)
    assert lam1[-1] < 0.15


def test_mode_truncation_is_reported(dumbbells):
    with pytest.raises(ModeTruncationError):
        warped_spectrum(dumbbells[1e-2], 9, max_modes=(0, 0))


def test_eigenfunction_ratios_on_the_sphere(unit_sphere):
    res = warped_spectrum(unit_sphere, 4)
    r = eigenfunction_ratios(unit_sphere, res, 4)
    # a normalized zonal degree-k harmonic on S^2 has sup sqrt(2k + 1)
    assert np.allclose(r, [1, np.sqrt(3), np.sqrt(3), np.sqrt(3)], rtol=1e-3)


def test_bump_clusters_around_the_scaled_sphere_spectrum(bumps):
    M = bumps[0.05]
    h2 = lp_norm(M, field_H, 2) ** 2
    reports, ordered = spectral_comparison(warped_spectrum(M, 9), 2, 2, 0.1, h2)
    assert ordered
    assert all(r.ok for r in reports)
    with pytest.raises(ValueError):
        spectral_comparison(warped_spectrum(M, 3), 2, 2, 0.1, h2)


def test_json_export(unit_sphere):
    import json
    d = json.loads(warped_spectrum(unit_sphere, 4).to_json())
    assert sorted(e["multiplicity"] for e in d["eigenvalues"]) == [1, 1, 2]


def test_grid_validation(unit_sphere):
    with pytest.raises(ValueError):
        warped_spectrum(unit_sphere, 4, grid=4)
    assert covered_sphere(3, 2).length == pytest.approx(np.pi / 2)
