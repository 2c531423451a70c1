"""Hypersurfaces of revolution and their pointwise geometry.

A sheet is the image of

    (y, z, r) -> (1 + g(r)) * ((sin r) y, (cos r) z),   y in S^{n-k-1}, z in S^k,

with g = +phi or g = -phi.  Everything here is a function of the meridian
parameter r alone; the two sphere factors only contribute multiplicities.

Two parametrizations of r are supported.  Profiles that are smooth on their
whole interval are sampled directly in r.  Profiles with a square-root neck at
the left endpoint (phi' blows up like (r - eps)^{-1/2}) are sampled in
u with r = eps * (1 + u**2), under which the arclength density is bounded.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp
from scipy.special import gamma as gamma_fn


class DomainError(ValueError):
    """Evaluation point outside the parameter domain."""


class ConstructionError(ValueError):
    """Inconsistent inputs when assembling a manifold or profile."""


class QuadratureError(RuntimeError):
    """Successive quadrature refinements disagree."""


GL_ORDER = 16
_GL_X, _GL_W = leggauss(GL_ORDER)


# ---------------------------------------------------------------------------
# profiles

class RadialProfile:
    """A function phi on [eps, r_max] with two derivatives.

    Subclasses implement ``_eval(r)`` and, if ``neck`` is true, ``_eval_delta``
    which takes delta = r/eps - 1 to avoid cancellation near the endpoint.
    """

    eps: float = 0.0
    r_max: float = np.pi / 2
    neck: bool = False          # phi' ~ (r-eps)^{-1/2} at the left end
    concave_until: float = 0.0
    flat_right: bool = False    # phi constant near r_max
    flat_left: bool = False     # phi constant near eps (only for capped profiles)
    breakpoints: tuple = ()     # interior r where the profile is only C^2

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.eps - 1e-15) or np.any(r > self.r_max + 1e-15):
            raise DomainError(f"r outside [{self.eps}, {self.r_max}]")
        return self._eval(r)

    def eval_delta(self, delta):
        """(phi, phi', phi'') at r = eps*(1+delta); delta may be tiny."""
        delta = np.asarray(delta, dtype=float)
        if np.any(delta < 0):
            raise DomainError("delta must be nonnegative")
        return self._eval_delta(delta)

    def _eval_delta(self, delta):
        return self._eval(self.eps * (1.0 + delta))

    def _eval(self, r):
        raise NotImplementedError

    def __call__(self, r):
        return self.eval(r)[0]


@dataclass(frozen=True, eq=False)
class ConstantProfile(RadialProfile):
    """phi = c on [eps, pi/2].  c = R - 1 gives the sphere of radius R."""

    c: float = 0.0
    eps: float = 0.0
    r_max: float = np.pi / 2
    flat_right: bool = True
    flat_left: bool = True

    def _eval(self, r):
        z = np.zeros_like(r)
        return z + self.c, z, z.copy()


@dataclass(frozen=True, eq=False)
class CosineBump(RadialProfile):
    """phi = delta cos(2r) on [0, pi/2]; a smooth ellipsoid-like perturbation."""

    delta: float = 0.1
    eps: float = 0.0
    r_max: float = np.pi / 2

    def __post_init__(self):
        if not abs(self.delta) < 1:
            raise ConstructionError("need |delta| < 1 for an embedding")

    def _eval(self, r):
        c, s = np.cos(2 * r), np.sin(2 * r)
        return self.delta * c, -2 * self.delta * s, -4 * self.delta * c

    # cot r * phi' and tan r * phi' have finite limits at the ends
    def cot_times_slope(self, r):
        return -4 * self.delta * np.cos(r) ** 2

    def tan_times_slope(self, r):
        return -4 * self.delta * np.sin(r) ** 2


# ---------------------------------------------------------------------------
# sheets and pointwise formulas

@dataclass(frozen=True)
class RevolutionSheet:
    n: int
    k: int
    profile: RadialProfile
    sign: int = 1

    def __post_init__(self):
        if self.n < 2 or not 0 <= self.k <= self.n - 2:
            raise ConstructionError(f"need n >= 2 and 0 <= k <= n-2, got n={self.n}, k={self.k}")
        if self.sign not in (1, -1):
            raise ConstructionError("sign must be +1 or -1")

    @property
    def m(self):
        """Dimension of the first sphere factor, n - k - 1."""
        return self.n - self.k - 1

    def signed(self, r):
        phi, d1, d2 = self.profile.eval(r)
        return self.sign * phi, self.sign * d1, self.sign * d2

    def signed_delta(self, delta):
        phi, d1, d2 = self.profile.eval_delta(delta)
        return self.sign * phi, self.sign * d1, self.sign * d2


def _slope_products(sheet, r, g1):
    """g' cot r and g' tan r with the end-point limits made explicit."""
    prof = sheet.profile
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        gc = g1 / np.tan(r)
        gt = g1 * np.tan(r)
    at_top = np.isclose(r, np.pi / 2, rtol=0, atol=1e-15)
    at_bottom = r == 0
    if np.any(at_top) and sheet.k >= 1:
        if prof.flat_right:
            gt = np.where(at_top, 0.0, gt)
        elif hasattr(prof, "tan_times_slope"):
            gt = np.where(at_top, sheet.sign * prof.tan_times_slope(r), gt)
        else:
            raise DomainError("tan r * phi' undefined at r = pi/2 for this profile")
    elif np.any(at_top):
        gt = np.where(at_top, 0.0, gt)    # multiplied by k = 0
    if np.any(at_bottom):
        if prof.flat_left:
            gc = np.where(at_bottom, 0.0, gc)
        elif hasattr(prof, "cot_times_slope"):
            gc = np.where(at_bottom, sheet.sign * prof.cot_times_slope(r), gc)
        else:
            raise DomainError("cot r * phi' undefined at r = 0 for this profile")
    return gc, gt


def principal_curvatures(sheet: RevolutionSheet, r, g=None):
    """Principal curvatures (meridian, first factor, second factor).

    The meridian curvature is simple, the first factor one has multiplicity
    n-k-1 and the second one multiplicity k.  Signs refer to the normal
    returned by :func:`unit_normal`.
    """
    r = np.asarray(r, dtype=float)
    if g is None:
        if np.any(r <= sheet.profile.eps) and sheet.profile.neck:
            raise DomainError("curvature is evaluated on the open interval (eps, pi/2]")
        g = sheet.signed(r)
    g0, g1, g2 = g
    rho = 1.0 + g0
    W = np.hypot(g1, rho)
    gc, gt = _slope_products(sheet, r, g1)
    k_mer = (rho**2 + 2 * g1**2 - rho * g2) / W**3
    k_u = (1.0 - gc / rho) / W
    k_v = (1.0 + gt / rho) / W
    return k_mer, k_u, k_v


def mean_curvature(sheet: RevolutionSheet, r, g=None):
    k_mer, k_u, k_v = principal_curvatures(sheet, r, g)
    return (k_mer + sheet.m * k_u + sheet.k * k_v) / sheet.n


def second_form_norm(sheet: RevolutionSheet, r, g=None):
    """Operator norm of the shape operator (largest |principal curvature|)."""
    k_mer, k_u, k_v = principal_curvatures(sheet, r, g)
    out = np.abs(k_mer)
    if sheet.m:
        out = np.maximum(out, np.abs(k_u))
    if sheet.k:
        out = np.maximum(out, np.abs(k_v))
    return out


def second_form_sq(sheet: RevolutionSheet, r, g=None):
    """Squared Frobenius norm of the second fundamental form."""
    k_mer, k_u, k_v = principal_curvatures(sheet, r, g)
    return k_mer**2 + sheet.m * k_u**2 + sheet.k * k_v**2


def _frame(g0, g1):
    """Unit tangent and normal in the (radial, meridian) basis.

    Radial means (sin r y, cos r z), meridian means (cos r y, -sin r z).  An
    infinite slope gives the limiting direction instead of NaN.
    """
    g0 = np.asarray(g0, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    rho = 1.0 + g0
    inf = np.isinf(g1)
    W = np.hypot(np.where(inf, 1.0, g1), rho)
    t_rad = np.where(inf, np.sign(g1), g1 / W)
    t_mer = np.where(inf, 0.0, rho / W)
    # normal: rotate the tangent by -90 degrees in the (radial, meridian) plane
    return (t_rad, t_mer), (t_mer, -t_rad)


def unit_normal(sheet: RevolutionSheet, r):
    """Normal as (radial coefficient, meridian coefficient).

    Radial direction (sin r y, cos r z), meridian direction (cos r y, -sin r z).
    At the neck endpoint r = eps the slope is infinite and the limit, a pure
    meridian vector, is returned.
    """
    r = np.asarray(r, dtype=float)
    prof = sheet.profile
    if prof.neck:
        g0, g1, _ = sheet.signed_delta(np.maximum(r / prof.eps - 1.0, 0.0))
        g1 = np.where(r <= prof.eps, np.sign(sheet.sign) * np.inf, g1)
    else:
        g0, g1, _ = sheet.signed(r)
    return _frame(g0, g1)[1]


def position(sheet: RevolutionSheet, y, z, r):
    """Point of the sheet in R^{n+1} = R^{n-k} + R^{k+1}."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.shape[-1] != sheet.n - sheet.k or z.shape[-1] != sheet.k + 1:
        raise DomainError("y must lie in R^{n-k} and z in R^{k+1}")
    if not (np.allclose(np.linalg.norm(y, axis=-1), 1) and np.allclose(np.linalg.norm(z, axis=-1), 1)):
        raise DomainError("y and z must be unit vectors")
    g0 = sheet.signed(r)[0]
    rho = np.asarray(1.0 + g0)[..., None]
    r = np.asarray(r, dtype=float)[..., None]
    return rho * np.concatenate([np.sin(r) * y, np.cos(r) * z], axis=-1)


@dataclass(frozen=True)
class SurfacePoint:
    r: float
    y: np.ndarray
    z: np.ndarray
    position: np.ndarray


def surface_point(sheet, y, z, r) -> SurfacePoint:
    return SurfacePoint(float(r), np.asarray(y, float), np.asarray(z, float), position(sheet, y, z, r))


def sphere_tangents(v):
    """Orthonormal basis of the tangent space of the unit sphere at v (rows)."""
    v = np.asarray(v, dtype=float)
    d = v.size
    q, _ = np.linalg.qr(np.column_stack([v, np.eye(d)]))
    return q[:, 1:d].T


# ---------------------------------------------------------------------------
# meridian pieces

@dataclass(frozen=True)
class SheetPiece:
    """One smooth stretch of a sheet, parametrized by tau.

    kind "r": tau = r.  kind "u": r = eps (1 + tau^2).
    """

    sheet: RevolutionSheet
    kind: str
    t0: float
    t1: float
    reverse: bool = False     # traversed with decreasing tau
    nsub: int = 1

    embedded = True

    def edges(self, level=0):
        return _panel_edges(self, level)

    def eval(self, tau):
        tau = np.asarray(tau, dtype=float)
        sh = self.sheet
        if self.kind == "u":
            eps = sh.profile.eps
            r = eps * (1.0 + tau**2)
            g0, g1, g2 = sh.signed_delta(tau**2)
            drdt = 2 * eps * tau
        else:
            r = tau
            g0, g1, g2 = sh.signed(r)
            drdt = np.ones_like(tau)
        rho = 1.0 + g0
        sr, cr = np.sin(r), np.cos(r)
        # arclength density; g1 * drdt stays finite as tau -> 0
        dsdt = np.hypot(g1 * drdt, rho * drdt)
        (t_rad, t_mer), (n_rad, n_mer) = _frame(g0, g1)
        sgn = -1.0 if self.reverse else 1.0
        # orientation: the outward normal of the sheet flips with reverse
        # traversal only through the tangent; normal stays sheet-local
        out = dict(
            r=r, rho=rho, dsdt=dsdt,
            A=rho * sr, B=rho * cr,
            At=sgn * (t_rad * sr + t_mer * cr), Bt=sgn * (t_rad * cr - t_mer * sr),
            nuA=n_rad * sr + n_mer * cr, nuB=n_rad * cr - n_mer * sr,
        )
        kap = principal_curvatures(sh, r, (g0, g1, g2))
        out["kappa"] = kap
        out["H"] = (kap[0] + sh.m * kap[1] + sh.k * kap[2]) / sh.n
        babs = np.abs(kap[0])
        if sh.m:
            babs = np.maximum(babs, np.abs(kap[1]))
        if sh.k:
            babs = np.maximum(babs, np.abs(kap[2]))
        out["Bnorm"] = babs
        out["B2"] = kap[0] ** 2 + sh.m * kap[1] ** 2 + sh.k * kap[2] ** 2
        out["sheet"] = np.full(tau.shape, sh.sign)
        return out


@dataclass(frozen=True)
class WarpPiece:
    """Intrinsic warped-product piece given by A(s), B(s) directly (tau = s)."""

    A: Callable
    dA: Callable
    B: Callable
    dB: Callable
    t0: float
    t1: float
    reverse: bool = False
    nsub: int = 1

    embedded = False
    kind = "s"

    def edges(self, level=0):
        return _panel_edges(self, level)

    def eval(self, tau):
        tau = np.asarray(tau, dtype=float)
        return dict(r=tau, dsdt=np.ones_like(tau), A=self.A(tau), B=self.B(tau),
                    At=self.dA(tau), Bt=self.dB(tau), sheet=np.zeros(tau.shape))


def _panel_edges(piece, level):
    """Panel boundaries in tau.  Neck pieces are graded: unit-width panels up
    to u = 4, then geometrically growing ones."""
    if piece.kind == "u" and piece.t1 > 4.0:
        base = list(np.linspace(0.0, 4.0, max(piece.nsub, 8) + 1))
        w = base[1] - base[0]
        while base[-1] < piece.t1:
            w *= 1.5
            base.append(min(base[-1] + w, piece.t1))
        if piece.t1 - base[-2] < 0.3 * w and len(base) > 2:
            base.pop(-2)
        e = np.array(base)
    else:
        e = np.linspace(piece.t0, piece.t1, piece.nsub + 1)
    for _ in range(level):
        mid = 0.5 * (e[1:] + e[:-1])
        e = np.sort(np.concatenate([e, mid]))
    return e


# ---------------------------------------------------------------------------
# meridian node tables

@dataclass(frozen=True, eq=False)
class MeridianNodes:
    """Gauss-Legendre nodes along the meridian with all pointwise data.

    ``ds`` are arclength weights and ``dv`` volume weights, the latter with
    the sphere factor volumes included.  (A, B) are coordinates relative to
    the translation ``offset``, which is also the barycenter by symmetry.
    ``piece`` and ``tau`` locate every node on its meridian piece.
    """

    ds: np.ndarray
    dv: np.ndarray
    data: dict
    n: int
    a_dim: int
    b_dim: int
    scale: float
    offset: np.ndarray

    def __getitem__(self, key):
        return self.data[key]

    def __len__(self):
        return self.ds.size

    @property
    def volume(self):
        return float(self.dv.sum())


def sphere_volume(d: int) -> float:
    """Volume of the unit sphere S^d (S^0 has two points)."""
    return float(2 * np.pi ** ((d + 1) / 2) / gamma_fn((d + 1) / 2))


def _merge(parts):
    data = {}
    for key in parts[0]:
        if key == "kappa":
            data[key] = tuple(np.concatenate([p[key][i] for p in parts]) for i in range(3))
        else:
            data[key] = np.concatenate([p[key] for p in parts])
    return data


@dataclass(frozen=True, eq=False)
class GluedHypersurface:
    """Closed warped product ds^2 + A(s)^2 g_{S^a} + B(s)^2 g_{S^b}.

    The meridian is a chain of pieces.  ``cap_left`` / ``cap_right`` name the
    warping function that vanishes at each end ("A", "B" or None).  A "B" end
    with b_dim = 0 is a mirror end of the S^0 factor: the manifold continues
    by the reflection z -> -z.  ``scale`` and ``offset`` apply a homothety
    and then a translation in R^{n+1}.
    """

    n: int
    a_dim: int
    b_dim: int
    pieces: tuple
    cap_left: str | None
    cap_right: str | None
    scale: float = 1.0
    offset: tuple = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.a_dim + self.b_dim != self.n - 1:
            raise ConstructionError("a_dim + b_dim must equal n - 1")
        if self.offset is None:
            object.__setattr__(self, "offset", (0.0,) * (self.n + 1))

    @property
    def embedded(self):
        return all(p.embedded for p in self.pieces)

    def scaled(self, t: float) -> "GluedHypersurface":
        if t <= 0:
            raise ConstructionError("scale factor must be positive")
        return replace(self, scale=self.scale * t, offset=tuple(t * np.asarray(self.offset)),
                       meta=_fresh(self.meta))

    def translated(self, t) -> "GluedHypersurface":
        """Translate by a vector, or by a scalar along the last axis."""
        v = np.zeros(self.n + 1)
        if np.ndim(t) == 0:
            v[-1] = t
        else:
            v[:] = t
        return replace(self, offset=tuple(np.asarray(self.offset) + v), meta=_fresh(self.meta))

    # -- pointwise data ----------------------------------------------------
    def _rescale(self, d):
        t = self.scale
        d = dict(d)
        d["A"] = d["A"] * t
        d["B"] = d["B"] * t
        d["dsdt"] = d["dsdt"] * t
        if "H" in d:
            d["H"] = d["H"] / t
            d["Bnorm"] = d["Bnorm"] / t
            d["B2"] = d["B2"] / t**2
            d["kappa"] = tuple(kk / t for kk in d["kappa"])
        return d

    def eval_piece(self, index: int, tau) -> dict:
        """Scaled pointwise data on piece ``index`` at parameters ``tau``."""
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        d = self._rescale(self.pieces[index].eval(tau))
        d["piece"] = np.full(tau.shape, index)
        d["tau"] = tau
        return d

    def _piece_nodes(self, index, level):
        piece = self.pieces[index]
        edges = piece.edges(level)
        mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
        half = 0.5 * np.diff(edges)[:, None]
        tau = (mid + half * _GL_X[None, :]).ravel()
        wt = (half * _GL_W[None, :]).ravel()
        if piece.reverse:
            tau, wt = tau[::-1], wt[::-1]
        d = self.eval_piece(index, tau)
        return wt * d["dsdt"], d

    def nodes(self, level: int = 0) -> MeridianNodes:
        cache = self.meta.setdefault("_nodes", {})
        if level in cache:
            return cache[level]
        parts = [self._piece_nodes(i, level) for i in range(len(self.pieces))]
        ds = np.concatenate([p[0] for p in parts])
        data = _merge([p[1] for p in parts])
        dv = ds * self.sphere_weight(data["A"], data["B"])
        out = MeridianNodes(ds, dv, data, self.n, self.a_dim, self.b_dim, self.scale,
                            np.asarray(self.offset, dtype=float))
        cache[level] = out
        return out

    def sphere_weight(self, A, B):
        return (np.abs(A) ** self.a_dim * np.abs(B) ** self.b_dim
                * sphere_volume(self.a_dim) * sphere_volume(self.b_dim))

    def endpoint_samples(self, delta: float = 1e-7) -> dict:
        """Pointwise data just inside every piece boundary (for sup norms)."""
        out = []
        for i, p in enumerate(self.pieces):
            span = p.t1 - p.t0
            out.append(self.eval_piece(i, [p.t0 + delta * span, p.t1 - delta * span]))
        return _merge(out)

    # -- arclength ----------------------------------------------------------
    def _piece_lengths(self, level=0):
        return np.array([self._piece_nodes(i, level)[0].sum() for i in range(len(self.pieces))])

    @property
    def length(self) -> float:
        return float(self._piece_lengths(1).sum())

    def check_arclength(self, tol: float = 1e-10) -> float:
        """Compare arclength per subinterval at two levels; raise on mismatch."""
        worst = 0.0
        for idx, p in enumerate(self.pieces):
            e = p.edges(0)
            for sub in range(len(e) - 1):
                coarse = _gl_integral(lambda t: p.eval(t)["dsdt"], e[sub], e[sub + 1], 1)
                fine = _gl_integral(lambda t: p.eval(t)["dsdt"], e[sub], e[sub + 1], 2)
                err = abs(coarse - fine) / max(abs(fine), 1e-300)
                worst = max(worst, err)
                if err > tol:
                    raise QuadratureError(
                        f"arclength not converged on piece {idx} ({p.kind}) "
                        f"tau in [{e[sub]:.6g}, {e[sub + 1]:.6g}]: rel diff {err:.2e}")
        return worst

    def _tables(self):
        cache = self.meta.setdefault("_tables", {})
        if "t" not in cache:
            rows = []
            s0 = 0.0
            for p in self.pieces:
                e = p.edges(2)
                lens = _gl_integral_vec(lambda t: p.eval(t)["dsdt"], e[:-1], e[1:])
                cum = np.concatenate([[0.0], np.cumsum(lens)])
                if p.reverse:
                    # s increases while tau decreases
                    e = e[::-1]
                    cum = np.concatenate([[0.0], np.cumsum(lens[::-1])])
                rows.append((p, e, s0 + cum))
                s0 += cum[-1]
            cache["t"] = (rows, s0)
        return cache["t"]

    def warp(self, s):
        """A, A', B, B' at arclength positions s in [0, L] (scaled units)."""
        s = np.atleast_1d(np.asarray(s, dtype=float)) / self.scale
        rows, total = self._tables()
        if np.any(s < -1e-12) or np.any(s > total * (1 + 1e-12)):
            raise DomainError("s outside [0, L]")
        s = np.clip(s, 0.0, total)
        tau = np.empty_like(s)
        which = np.empty(s.shape, dtype=int)
        for ip, (p, e, cum) in enumerate(rows):
            lo = cum[0]
            hi = cum[-1]
            mask = (s >= lo) & (s <= hi) if ip == len(rows) - 1 else (s >= lo) & (s < hi)
            if not np.any(mask):
                continue
            ss = s[mask]
            j = np.clip(np.searchsorted(cum, ss, side="right") - 1, 0, len(e) - 2)
            ta, tb = e[j], e[j + 1]
            sa, sb = cum[j], cum[j + 1]
            t = ta + (tb - ta) * (ss - sa) / np.where(sb > sa, sb - sa, 1.0)
            sgn = -1.0 if p.reverse else 1.0
            for _ in range(60):
                val = sa + sgn * _gl_integral_vec(lambda x: p.eval(x)["dsdt"], ta, t)
                dens = p.eval(t)["dsdt"]
                step = (val - ss) / np.maximum(dens, 1e-300) * sgn
                t_new = np.clip(t - step, np.minimum(ta, tb), np.maximum(ta, tb))
                if np.max(np.abs(t_new - t)) < 1e-15 * max(1.0, abs(p.t1)):
                    t = t_new
                    break
                t = t_new
            tau[mask] = t
            which[mask] = ip
        A = np.empty_like(s); dA = np.empty_like(s); B = np.empty_like(s); dB = np.empty_like(s)
        for ip, (p, _, _) in enumerate(rows):
            mask = which == ip
            if np.any(mask):
                d = p.eval(tau[mask])
                A[mask], dA[mask], B[mask], dB[mask] = d["A"], d["At"], d["B"], d["Bt"]
        return A * self.scale, dA, B * self.scale, dB


def _gl_integral(f, a, b, parts):
    edges = np.linspace(a, b, parts + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _GL_X
        total += 0.5 * (hi - lo) * np.dot(_GL_W, f(x))
    return float(total)


def _gl_integral_vec(f, a, b):
    """Integral of f from a[i] to b[i] for arrays a, b (one GL panel each)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * _GL_X[None, :]
    vals = f(x.ravel()).reshape(x.shape)
    return 0.5 * (b - a) * (vals @ _GL_W)


def _fresh(meta):
    """Copy of meta without cached tables (they depend on scale)."""
    return {k: v for k, v in meta.items() if not k.startswith("_")}


# ---------------------------------------------------------------------------
# constructors

def _sheet_pieces(sheet: RevolutionSheet, reverse: bool, nsub: int = 2):
    """Split a sheet's r-interval into smooth pieces, neck first."""
    prof = sheet.profile
    cuts = [prof.eps] + [b for b in prof.breakpoints if prof.eps < b < prof.r_max] + [prof.r_max]
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if prof.neck and lo == prof.eps:
            pieces.append(SheetPiece(sheet, "u", 0.0, float(np.sqrt(hi / prof.eps - 1.0)), reverse, 4 * nsub))
        else:
            pieces.append(SheetPiece(sheet, "r", lo, hi, reverse, nsub))
    if reverse:
        pieces = pieces[::-1]
    return pieces


def arclength_reparam(plus: RevolutionSheet, minus: RevolutionSheet, grid: int = 2,
                      check: bool = True) -> GluedHypersurface:
    """Glue a +phi sheet and a -phi sheet along r = eps.

    The meridian runs down the minus sheet from r = pi/2 to eps and back up
    the plus sheet.  ``grid`` is the base number of Gauss-Legendre panels per
    smooth piece.
    """
    if (plus.n, plus.k) != (minus.n, minus.k) or plus.profile is not minus.profile:
        raise ConstructionError("sheets must share n, k and the profile")
    if plus.sign != 1 or minus.sign != -1:
        raise ConstructionError("expected a +phi and a -phi sheet")
    prof = plus.profile
    phi0 = float(prof.eval(np.array([prof.eps]))[0][0])
    if abs(phi0) > 1e-14:
        raise ConstructionError(f"sheets do not meet at r = eps (phi(eps) = {phi0})")
    pieces = tuple(_sheet_pieces(minus, True, grid) + _sheet_pieces(plus, False, grid))
    M = GluedHypersurface(plus.n, plus.n - plus.k - 1, plus.k, pieces, "B", "B",
                          label="glued", meta={"eps": prof.eps})
    if check:
        M.check_arclength()
    return M


def closed_sheet(sheet: RevolutionSheet, grid: int = 2) -> GluedHypersurface:
    """A single sheet on [0, pi/2] closed up by its caps (r = 0 and r = pi/2)."""
    prof = sheet.profile
    if prof.eps != 0:
        raise ConstructionError("closed sheets need a profile starting at r = 0")
    pieces = tuple(_sheet_pieces(sheet, False, grid))
    return GluedHypersurface(sheet.n, sheet.m, sheet.k, pieces, "A", "B", label="sheet")


def round_sphere(n: int, radius: float = 1.0, k: int = 0, center=0.0,
                 grid: int = 2) -> GluedHypersurface:
    """Round sphere of the given radius as a revolution hypersurface."""
    sheet = RevolutionSheet(n, k, ConstantProfile(c=0.0))
    M = closed_sheet(sheet, grid)
    return replace(M.scaled(radius).translated(center), label=f"sphere(n={n}, R={radius:g})")


def bump_sphere(n: int, delta: float, k: int = 0, grid: int = 4) -> GluedHypersurface:
    sheet = RevolutionSheet(n, k, CosineBump(delta=delta))
    return replace(closed_sheet(sheet, grid), label=f"bump(n={n}, delta={delta})")


def covered_sphere(n: int, d: int, grid: int = 2) -> GluedHypersurface:
    """The d-fold cone-singular cover: dr^2 + d^2 sin^2 r dtheta^2 + cos^2 r g_{S^{n-2}}."""
    if n < 3 or d < 1:
        raise ConstructionError("need n >= 3 and d >= 1")
    piece = WarpPiece(lambda s: d * np.sin(s), lambda s: d * np.cos(s),
                      np.cos, lambda s: -np.sin(s), 0.0, np.pi / 2, False, grid)
    return GluedHypersurface(n, 1, n - 2, (piece,), "A", "B", label=f"covered(n={n}, d={d})",
                             meta={"d": d})


# ---------------------------------------------------------------------------
# neck ODE oracle

def neck_ode_profile(n: int, k: int, eps: float, t_max: float, num: int = 201,
                     rtol: float = 1e-13, atol: float = 1e-15):
    """Integrate y y'' = (n-k-1)(1 + y'^2), y(0) = eps, y'(0) = 0.

    Returns (t, y, y', sol) where ``sol`` is the dense-output solution.  The
    curve t -> y(t) is the inverse of the neck profile r -> phi(r).
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    m = n - k - 1

    def rhs(t, v):
        return [v[1], m * (1 + v[1] ** 2) / v[0]]

    sol = solve_ivp(rhs, (0.0, t_max), [eps, 0.0], method="DOP853", rtol=rtol, atol=atol * eps,
                    dense_output=True)
    if not sol.success:
        raise RuntimeError(f"neck ODE integration failed: {sol.message}")
    t = np.linspace(0.0, t_max, num)
    y, yp = sol.sol(t)
    return t, y, yp, sol
