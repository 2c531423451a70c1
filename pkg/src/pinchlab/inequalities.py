"""The three optimal inequalities, their pinching gaps, and concentration functionals.

For a closed hypersurface M in R^{n+1} with mean curvature H and position X:

* moment:   ||H||_p ||X - Xbar||_2 >= 1
* radius:   ||H||_p R_ext >= 1
* Reilly:   lambda_1 <= n ||H||_2^2

each with equality exactly on round spheres.  The gaps below are the
dimensionless amounts by which they fail to be equalities, so they are
invariant under scaling and translation.  lambda_1 is never estimated here;
callers pass the converged value from :mod:`pinchlab.spectrum`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import DomainError, GluedHypersurface
from .measure import (MomentReport, barycenter, field_abs_H, field_H, field_X,
                      field_X_tangential, lp_norm, moments, sup_norm)

TOL_SLACK = 1e-6
TOL_EQUAL = 1e-8


class GeometricDegeneracyError(ValueError):
    pass


def _moments(M, norms):
    return norms if norms is not None else moments(M)


def _check_centered(M: GluedHypersurface, rep: MomentReport):
    # positions are measured from the symmetry center; it must be the barycenter
    shift = np.linalg.norm(np.asarray(rep.barycenter) - np.asarray(M.offset))
    if shift > 1e-9 * M.scale:
        raise GeometricDegeneracyError(f"barycenter is off the symmetry center by {shift:.3g}")


@dataclass(frozen=True)
class PinchReport:
    eps_P: float
    eps_R: float
    eps_Lambda: float | None
    p: float
    norms: MomentReport = field(repr=False)
    lambda_1: float | None
    H_p: float
    equality: bool

    def to_dict(self):
        return dict(eps_P=self.eps_P, eps_R=self.eps_R, eps_Lambda=self.eps_Lambda, p=self.p,
                    lambda_1=self.lambda_1, H_p=self.H_p, equality=self.equality,
                    volume=self.norms.volume, X_2=self.norms.norm_X_centered_p[2],
                    R_ext=self.norms.extrinsic_radius)


def moment_gap(M: GluedHypersurface, p: float = 2, lambda_1: float | None = None,
               norms: MomentReport | None = None, tol: float = TOL_EQUAL) -> PinchReport:
    """All three pinching gaps at exponent p (the Reilly one only if lambda_1 is given)."""
    if p < 2:
        raise DomainError("the moment inequality needs p >= 2")
    rep = _moments(M, norms)
    _check_centered(M, rep)
    hp = lp_norm(M, field_H, p)
    eps_P = hp * rep.norm_X_centered_p[2] - 1.0
    eps_R = hp * rep.extrinsic_radius - 1.0
    eps_L = None
    if lambda_1 is not None:
        eps_L = reilly_gap(M, p, lambda_1, H_p=hp)
    return PinchReport(eps_P, eps_R, eps_L, p, rep, lambda_1, hp, abs(eps_P) < tol)


def hk_gap(M: GluedHypersurface, p: float = 2, norms: MomentReport | None = None) -> float:
    """||H||_p R_ext - 1."""
    rep = _moments(M, norms)
    return lp_norm(M, field_H, p) * rep.extrinsic_radius - 1.0


def reilly_gap(M: GluedHypersurface, p: float, lambda_1: float, H_p: float | None = None) -> float:
    """n ||H||_p^2 / lambda_1 - 1."""
    if not lambda_1 > 0:
        raise DomainError("lambda_1 must be positive")
    hp = lp_norm(M, field_H, p) if H_p is None else H_p
    return M.n * hp**2 / lambda_1 - 1.0


def pinching_implications(rep: PinchReport, tol: float = TOL_SLACK) -> dict:
    """Check that radius and Reilly pinching each imply moment pinching.

    R_ext >= ||X - Xbar||_2 gives eps_P <= eps_R.  Testing Reilly's
    min-max with the coordinate functions gives
    lambda_1 ||X - Xbar||_2^2 <= n, hence 1 + eps_P <= sqrt(1 + eps_Lambda).
    """
    out = {"radius_implies_moment": rep.eps_P <= rep.eps_R + tol}
    if rep.eps_Lambda is not None:
        out["reilly_implies_moment"] = 1.0 + rep.eps_P <= np.sqrt(1.0 + rep.eps_Lambda) + tol
    out["moment_nonnegative"] = rep.eps_P >= -tol
    if rep.eps_Lambda is not None:
        out["reilly_nonnegative"] = rep.eps_Lambda >= -tol
    return out


@dataclass(frozen=True)
class ConcentrationReport:
    sup_dev: float
    rhs_shape: float
    gamma: float
    q: float
    ratio: float
    degenerate: bool
    A: float
    sup_ratio: float

    def to_dict(self):
        return dict(sup_dev=self.sup_dev, rhs_shape=self.rhs_shape, gamma=self.gamma, q=self.q,
                    ratio=self.ratio, degenerate=self.degenerate, A=self.A, sup_ratio=self.sup_ratio)


def radius_concentration(M: GluedHypersurface, q: float, norms: MomentReport | None = None,
                         flat_tol: float = 1e-12) -> ConcentrationReport:
    """sup | |X - Xbar| - ||X - Xbar||_2 | against its predicted shape.

    The shape is ||X||_2 (1 - ||X||_1/||X||_2)^(1/(2(1+n gamma))) A^gamma with
    A = Vol M ||H||_q^n and gamma = q/(2(q-n)).  Also returned is
    ||X||_inf / (A^gamma ||X||_2), the ratio bounded by the sup estimate.
    """
    n = M.n
    if not q > n:
        raise DomainError("need q > n")
    rep = _moments(M, norms)
    _check_centered(M, rep)
    gamma = q / (2.0 * (q - n))
    A = rep.volume * lp_norm(M, field_H, q) ** n
    x1, x2, xinf = (rep.norm_X_centered_p[p] for p in (1, 2, np.inf))
    flat = max(1.0 - x1 / x2, 0.0)
    shape = x2 * flat ** (1.0 / (2.0 * (1.0 + n * gamma))) * A**gamma
    degenerate = flat < flat_tol
    if degenerate:
        ratio = 0.0
    else:
        ratio = rep.sup_deviation / shape
    return ConcentrationReport(rep.sup_deviation, shape if not degenerate else 0.0, gamma, q,
                               ratio, degenerate, A, xinf / (A**gamma * x2))


def curvature_concentration(M: GluedHypersurface, r_exp: float = 1) -> float:
    """|| |H| - ||H||_2 ||_r / ||H||_2."""
    if r_exp < 1:
        raise DomainError("need r_exp >= 1")
    h2 = lp_norm(M, field_H, 2)
    return lp_norm(M, lambda d: field_abs_H(d) - h2, r_exp) / h2


def fmap_defect(M: GluedHypersurface, level: int = 1) -> float:
    """Distortion of F = X/(||H||_2 |X|) onto the sphere of radius 1/||H||_2.

    dF(u) = (u - <X,u> X/|X|^2) / (||H||_2 |X|).  Orbit directions are
    orthogonal to X, so |dF(u)|^2/|u|^2 = 1/(||H||_2 |X|)^2 there; along the
    unit meridian tangent T the factor is (1 - <X,T>^2/|X|^2)/(||H||_2 |X|)^2.
    Returns the sup over M of the worst |.|-1 among these directions.
    """
    bc = barycenter(M)
    if np.linalg.norm(bc - np.asarray(M.offset)) > 1e-9 * M.scale:
        raise GeometricDegeneracyError("fmap_defect needs a manifold centered at its barycenter")
    h2 = lp_norm(M, field_H, 2)
    nd = M.nodes(level)
    if np.min(field_X(nd)) <= 1e-14 * M.scale:
        raise GeometricDegeneracyError("|X| vanishes at a quadrature node")

    def defect(d):
        x = field_X(d)
        s = 1.0 / (h2 * x) ** 2
        tang = field_X_tangential(d) / x
        return np.maximum(np.abs(s - 1.0), np.abs((1.0 - tang**2) * s - 1.0))

    return sup_norm(M, defect, level=level)


def inequality_chain(M: GluedHypersurface, lambda_1: float | None = None,
                     norms: MomentReport | None = None, tol: float = TOL_SLACK) -> dict:
    """1 <= ||H||_2 ||X||_2 <= ||H||_2 R_ext and lambda_1 <= n ||H||_2^2."""
    rep = _moments(M, norms)
    h2 = lp_norm(M, field_H, 2)
    a = h2 * rep.norm_X_centered_p[2]
    b = h2 * rep.extrinsic_radius
    out = {"moment": 1.0 <= a + tol, "radius": a <= b + tol}
    if lambda_1 is not None:
        out["reilly"] = lambda_1 <= M.n * h2**2 * (1 + tol)
    return out
