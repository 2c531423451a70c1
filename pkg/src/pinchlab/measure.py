"""Integration over warped-product hypersurfaces.

Fields that only depend on the meridian parameter are integrated along the
meridian with the closed-form sphere factor volumes folded into the weights.
Fields that also depend on the angular variables (polynomials restricted to
M, ball indicators) use a tensor product of the meridian nodes with product
quadratures on the sphere factors.

Norms are renormalized: ||f||_p^p = (1/Vol M) int_M |f|^p dv, so ||1||_p = 1.
A field is any callable taking the pointwise data dict of
:meth:`GluedHypersurface.nodes` (keys A, B, At, Bt, nuA, nuB, H, Bnorm, ...)
and returning an array.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import roots_jacobi

from .geometry import GluedHypersurface, QuadratureError, sphere_volume

RTOL = 1e-10
MAX_LEVEL = 6


# ---------------------------------------------------------------------------
# standard fields (positions are measured from the barycenter)

def field_H(d):
    return d["H"]


def field_abs_H(d):
    return np.abs(d["H"])


def field_Bnorm(d):
    return d["Bnorm"]


def field_X(d):
    return np.hypot(d["A"], d["B"])


def field_Z(d):
    """|nu - H X|; only the meridian-plane components are nonzero."""
    return np.hypot(d["nuA"] - d["H"] * d["A"], d["nuB"] - d["H"] * d["B"])


def field_X_tangential(d):
    """|X - <X, nu> nu|; the tangential part of X lies along the meridian."""
    return np.abs(d["A"] * d["At"] + d["B"] * d["Bt"])


def field_support(d):
    """<X, nu>."""
    return d["A"] * d["nuA"] + d["B"] * d["nuB"]


def constant(c):
    return lambda d: np.full(np.shape(d["A"]), float(c))


# ---------------------------------------------------------------------------
# meridian integration

def _panel_rule(M, ip, lo, hi, f):
    """16-point Gauss-Legendre values of int f dv over panels [lo, hi] of piece ip."""
    from .geometry import _GL_W, _GL_X
    mid = 0.5 * (lo + hi)[:, None]
    half = 0.5 * (hi - lo)[:, None]
    tau = (mid + half * _GL_X[None, :]).ravel()
    d = M.eval_piece(ip, tau)
    dens = d["dsdt"] * M.sphere_weight(d["A"], d["B"])
    vals = np.asarray(f(d), dtype=float)
    shape = (len(lo), len(_GL_X))
    I = (half[:, 0] * ((vals * dens).reshape(shape) @ _GL_W))
    Iabs = (half[:, 0] * ((np.abs(vals) * dens).reshape(shape) @ _GL_W))
    return I, Iabs


def integrate(M: GluedHypersurface, f, rtol: float = RTOL, atol: float = 0.0,
              max_depth: int = 40, level: int = 0, max_panels: int = 20_000) -> float:
    """int_M f dv for a meridian-only field by adaptive panel bisection.

    Every panel is compared with its two halves; panels whose halves
    disagree by more than their share of the tolerance are split again, so
    kinks (absolute values, maxima of branches) are localized.  The
    tolerance is rtol * int |f| dv + atol.  A field that is pure rounding
    noise never converges in the relative sense; ``max_panels`` turns that
    into a QuadratureError instead of unbounded refinement.
    """
    lo_all, hi_all, ip_all = [], [], []
    for ip, piece in enumerate(M.pieces):
        e = piece.edges(level)
        lo_all.append(e[:-1]); hi_all.append(e[1:]); ip_all.append(np.full(len(e) - 1, ip))
    lo = np.concatenate(lo_all); hi = np.concatenate(hi_all); ipc = np.concatenate(ip_all)
    span = {ip: abs(p.t1 - p.t0) for ip, p in enumerate(M.pieces)}

    def rule(lo, hi, ipc):
        I = np.empty(len(lo)); Iabs = np.empty(len(lo))
        for ip in np.unique(ipc):
            m = ipc == ip
            I[m], Iabs[m] = _panel_rule(M, ip, lo[m], hi[m], f)
        return I, Iabs

    whole, whole_abs = rule(lo, hi, ipc)
    tol = rtol * whole_abs.sum() + atol
    total = 0.0
    for _ in range(max_depth):
        mid = 0.5 * (lo + hi)
        left, la = rule(lo, mid, ipc)
        right, ra = rule(mid, hi, ipc)
        err = np.abs(left + right - whole)
        share = np.array([(h - l) / span[i] for l, h, i in zip(lo, hi, ipc)]) / len(M.pieces)
        ok = err <= np.maximum(tol * share, 1e-15 * (la + ra))
        total += float(np.sum((left + right)[ok]))
        if np.all(ok):
            return total
        bad = ~ok
        if 2 * np.count_nonzero(bad) > max_panels:
            raise QuadratureError(f"adaptive integration needs more than {max_panels} panels "
                                  f"(rtol={rtol}, atol={atol}); is the integrand rounding noise?")
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        ipc = np.concatenate([ipc[bad], ipc[bad]])
        whole = np.concatenate([left[bad], right[bad]])
    raise QuadratureError(f"adaptive integration did not reach rtol={rtol} "
                          f"({len(lo)} panels left, e.g. piece {ipc[0]} tau in [{lo[0]:.6g}, {hi[0]:.6g}])")


def volume(M: GluedHypersurface, **kw) -> float:
    return integrate(M, constant(1.0), **kw)


def mean(M, f, **kw) -> float:
    """Volume average (1/Vol) int f dv."""
    return integrate(M, f, **kw) / volume(M, **kw)


def sup_norm(M: GluedHypersurface, f, level: int = 1, rtol: float = 1e-6) -> float:
    """max |f| over the meridian, polished by a local 1-D search.

    The node maximum at two levels and just inside every piece boundary is
    refined by a bounded search around the best node of every piece.  The
    result is a lower bound on the true supremum; a disagreement between the
    polished values at the two levels raises.
    """
    vals = []
    for lev in (level, level + 1):
        nd = M.nodes(lev)
        g = np.abs(f(nd.data))
        best = float(g.max())
        for ip, piece in enumerate(M.pieces):
            mask = nd["piece"] == ip
            if not np.any(mask):
                continue
            idx = np.flatnonzero(mask)[np.argmax(g[mask])]
            edges = piece.edges(lev + 1)
            t = nd["tau"][idx]
            j = np.clip(np.searchsorted(edges, t) - 1, 0, len(edges) - 2)
            lo, hi = edges[max(j - 1, 0)], edges[min(j + 2, len(edges) - 1)]
            res = minimize_scalar(lambda x: -np.abs(f(M.eval_piece(ip, [x])))[0],
                                  bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12 * max(1.0, abs(hi))})
            best = max(best, -float(res.fun))
        ends = np.abs(f(M.endpoint_samples()))
        vals.append(max(best, float(np.nanmax(ends))))
    if abs(vals[1] - vals[0]) > rtol * max(vals[1], 1e-300):
        raise QuadratureError(f"sup norm not stable under refinement: {vals[0]} vs {vals[1]}")
    return vals[1]


def lp_norm(M: GluedHypersurface, f, p: float, **kw) -> float:
    """Renormalized L^p norm; p = np.inf gives the refined node maximum."""
    if p == np.inf:
        return sup_norm(M, f)
    if p < 1:
        raise ValueError("p must be >= 1")
    return (integrate(M, lambda d: np.abs(f(d)) ** p, **kw) / volume(M)) ** (1.0 / p)


# ---------------------------------------------------------------------------
# quadrature on spheres and tensor products

@dataclass(frozen=True)
class SphereQuadrature:
    """Product rule on S^d, exact for polynomials of degree <= ``degree``.

    Weights sum to Vol(S^d).  The rule is symmetric under x -> -x.
    """

    dim: int
    degree: int
    points: np.ndarray
    weights: np.ndarray

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


@lru_cache(maxsize=None)
def _sphere_rule(d: int, degree: int):
    if d == 0:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 1:
        npts = degree + 2 if (degree + 2) % 2 == 0 else degree + 3
        th = 2 * np.pi * np.arange(npts) / npts
        return np.column_stack([np.cos(th), np.sin(th)]), np.full(npts, 2 * np.pi / npts)
    # x = (sqrt(1-t^2) w, t), dv = (1-t^2)^{(d-2)/2} dt dw
    nt = degree // 2 + 1
    alpha = (d - 2) / 2
    t, wt = roots_jacobi(nt, alpha, alpha)
    sub_x, sub_w = _sphere_rule(d - 1, degree)
    rad = np.sqrt(1 - t**2)
    pts = np.concatenate([np.column_stack([rad[i] * sub_x, np.full(len(sub_w), t[i])])
                          for i in range(nt)])
    wts = np.concatenate([wt[i] * sub_w for i in range(nt)])
    return pts, wts


def sphere_quadrature(d: int, degree: int) -> SphereQuadrature:
    pts, wts = _sphere_rule(d, degree)
    return SphereQuadrature(d, degree, pts, wts)


@dataclass(frozen=True, eq=False)
class TensorPoints:
    """Points of M in R^{n+1} with volume weights and frame data.

    X is measured from the barycenter.  Every row comes from meridian node
    ``node[i]`` combined with a point of each sphere factor.
    """

    X: np.ndarray
    nu: np.ndarray
    T: np.ndarray
    weights: np.ndarray
    H: np.ndarray
    node: np.ndarray
    offset: np.ndarray

    @property
    def volume(self):
        return float(self.weights.sum())


def tensor_points(M: GluedHypersurface, degree: int, level: int = 0) -> TensorPoints:
    """Tensor product of meridian nodes and sphere-factor rules."""
    nd = M.nodes(level)
    qa = sphere_quadrature(M.a_dim, degree)
    qb = sphere_quadrature(M.b_dim, degree)
    na, nb = len(qa.weights), len(qb.weights)
    Y = np.repeat(qa.points, nb, axis=0)
    Zs = np.tile(qb.points, (na, 1))
    wyz = np.repeat(qa.weights, nb) * np.tile(qb.weights, na)
    A, B = nd["A"], nd["B"]
    nn = len(nd)
    node = np.repeat(np.arange(nn), na * nb)

    def lift(a, b):
        return np.concatenate([(a[:, None, None] * Y[None]).reshape(-1, Y.shape[1]),
                               (b[:, None, None] * Zs[None]).reshape(-1, Zs.shape[1])], axis=1)

    X = lift(A, B)
    nu = lift(nd["nuA"], nd["nuB"]) if "nuA" in nd.data else None
    T = lift(nd["At"], nd["Bt"])
    w_mer = nd.ds * np.abs(A) ** M.a_dim * np.abs(B) ** M.b_dim
    weights = (w_mer[:, None] * wyz[None, :]).ravel()
    H = np.repeat(nd["H"], na * nb) if "H" in nd.data else None
    return TensorPoints(X, nu, T, weights, H, node, nd.offset)


# ---------------------------------------------------------------------------
# moments

def barycenter(M: GluedHypersurface, degree: int = 2) -> np.ndarray:
    """(1/Vol) int X dv, computed by tensor quadrature."""
    tp = tensor_points(M, degree)
    c = tp.weights @ tp.X / tp.volume
    c[np.abs(c) < 1e-15 * M.scale] = 0.0
    return tp.offset + c


def farthest_distance(M: GluedHypersurface, center) -> float:
    """sup over M of |X - center| (exact over the sphere factors)."""
    c = np.asarray(center, dtype=float) - np.asarray(M.offset, dtype=float)
    na = M.a_dim + 1
    ca, cb = np.linalg.norm(c[:na]), np.linalg.norm(c[na:])

    def dist(d):
        # the farthest orbit point sits opposite to the center in each factor
        return np.hypot(np.abs(d["A"]) + ca, np.abs(d["B"]) + cb)

    return sup_norm(M, dist)


def extrinsic_radius(M: GluedHypersurface, center=None) -> float:
    """Radius of the smallest ball around ``center`` containing M.

    Without a center, the least such radius over centers on the symmetry
    axis is found by a 1-D search; by symmetry and convexity it sits at the
    barycenter.
    """
    if center is not None:
        return farthest_distance(M, center)
    off = np.asarray(M.offset, dtype=float)
    axis = np.zeros(M.n + 1)
    axis[-1] = 1.0
    span = 2 * M.scale
    res = minimize_scalar(lambda t: farthest_distance(M, off + t * axis), bounds=(-span, span),
                    method="bounded", options={"xatol": 1e-10 * M.scale})
    return min(float(res.fun), farthest_distance(M, off))


@dataclass(frozen=True)
class MomentReport:
    volume: float
    barycenter: np.ndarray
    norm_X_centered_p: dict
    extrinsic_radius: float
    sup_deviation: float


def moments(M: GluedHypersurface) -> MomentReport:
    vol = volume(M)
    norms = {p: lp_norm(M, field_X, p) for p in (1, 2, 4)}
    norms[np.inf] = sup_norm(M, field_X)
    l2 = norms[2]
    dev = sup_norm(M, lambda d: field_X(d) - l2)
    return MomentReport(vol, barycenter(M), norms, extrinsic_radius(M), dev)


def z_field_norm(M: GluedHypersurface, r_exp: float) -> float:
    """||nu - H X||_r.  Z is dimensionless, so values below 1e-13 are noise."""
    if r_exp == np.inf:
        return sup_norm(M, field_Z)
    floor = volume(M) * 1e-13**r_exp
    return lp_norm(M, field_Z, r_exp, atol=floor)


def tangential_moment_sup(M: GluedHypersurface) -> float:
    return sup_norm(M, field_X_tangential)


def hsiung_defect(M: GluedHypersurface) -> float:
    """(1/Vol) int H <nu, X - Xbar> dv - 1."""
    return mean(M, lambda d: d["H"] * field_support(d)) - 1.0


# ---------------------------------------------------------------------------
# ball densities (surfaces in R^3)

def ball_density(M: GluedHypersurface, x, r: float, level: int = 5):
    """Fractions of M and of the comparison sphere inside B(x, r/||H||_2).

    The comparison sphere has center Xbar and radius 1/||H||_2.  The circle
    factor is integrated in closed form (the part of each orbit circle inside
    the ball is an arc), the meridian by Gauss-Legendre.
    """
    if M.n != 2:
        raise ValueError("ball densities are implemented for surfaces (n = 2)")
    h2 = lp_norm(M, field_H, 2)
    R = 1.0 / h2
    rho = r / h2
    x = np.asarray(x, dtype=float) - np.asarray(M.offset, dtype=float)
    x1 = float(np.hypot(x[0], x[1]))
    x3 = float(x[2])
    nd = M.nodes(level)
    A = np.abs(nd["A"])
    frac = np.zeros(len(nd))
    hit = 0
    for z in (1.0, -1.0):
        zb = z * nd["B"]
        if x1 > 0:
            c = (A**2 + x1**2 + (zb - x3) ** 2 - rho**2) / (2 * A * x1)
            part = np.arccos(np.clip(c, -1.0, 1.0)) / np.pi
        else:
            part = (A**2 + (zb - x3) ** 2 <= rho**2).astype(float)
        hit += int(np.count_nonzero(part > 0))
        frac += 0.5 * part
    if hit == 0:
        raise QuadratureError("no quadrature node inside the ball; radius below resolution")
    dens_M = float(np.dot(nd.dv, frac) / nd.volume)
    dens_S = min(rho**2 / (4 * R**2), 1.0)
    return dens_M, dens_S


# ---------------------------------------------------------------------------
# Sobolev quotient

def meridian_bump(center, width: float):
    """Gaussian bump in the meridian plane; returns (value, d/ds) pairs."""
    ca, cb = center

    def f(d):
        da, db = d["A"] - ca, d["B"] - cb
        g = np.exp(-(da**2 + db**2) / (2 * width**2))
        return g, -g * (da * d["At"] + db * d["Bt"]) / width**2

    return f


def sobolev_ratio(M: GluedHypersurface, f) -> float:
    """||f||_{n/(n-1)} / (Vol^{1/n} (||df||_1 + ||H f||_1)).

    ``f`` maps the pointwise data to (value, derivative along the meridian).
    """
    n = M.n
    q = n / (n - 1)
    vol = volume(M)
    num = (integrate(M, lambda d: np.abs(f(d)[0]) ** q) / vol) ** (1 / q)
    den = (integrate(M, lambda d: np.abs(f(d)[1])) + integrate(M, lambda d: np.abs(d["H"] * f(d)[0]))) / vol
    if den == 0:
        raise ZeroDivisionError("the Sobolev quotient is undefined for f = 0")
    return num / (vol ** (1 / n) * den)
