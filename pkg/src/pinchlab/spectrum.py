"""Laplace-Beltrami spectra of warped products by separation of variables.

On ds^2 + A(s)^2 g_{S^a} + B(s)^2 g_{S^b} an eigenfunction u(s) Y(y) W(z),
with Y and W sphere harmonics of eigenvalues mu^a_i and mu^b_j, solves

    -(1/w) (w u')' + (mu^a_i / A^2 + mu^b_j / B^2) u = lambda u,   w = A^a B^b.

Each radial problem is discretized by cell-centered finite volumes on a
computational coordinate xi with s = s(xi), symmetrized by the square root of
the mass, and solved as a symmetric tridiagonal eigenproblem.  Cell centers
never sit on a cap, so the potential is never evaluated where it blows up;
at a cap the face weight w vanishes, which encodes regularity.  An end where
the zero-dimensional factor S^0 is reflected takes a Neumann condition for
even functions (j = 0) and a Dirichlet condition for odd ones (j = 1).
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .geometry import GluedHypersurface, covered_sphere, round_sphere
from .harmonics import dim_harmonic, sphere_eigenvalue
from .tridiag import eigvals_below, eigvals_index, inverse_iteration


class ModeTruncationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# angular factors

def factor_mode(d: int, i: int, circle_scale: float = 1.0):
    """(eigenvalue, multiplicity) of the i-th eigenspace of S^d.

    S^0 has two 'modes': even (i = 0) and odd (i = 1), both with eigenvalue 0.
    """
    if d == 0:
        if i > 1:
            return None
        return 0.0, 1
    if d == 1:
        return float(i * i), 1 if i == 0 else 2
    mult = comb(d + i, i) - (comb(d + i - 2, i - 2) if i >= 2 else 0)
    return float(i * (i + d - 1)), mult


# ---------------------------------------------------------------------------
# grids

@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Cell-centered grid on [0, L] via s = s(xi), xi uniform."""

    ncell: int
    s_c: np.ndarray
    s_f: np.ndarray
    ds_c: np.ndarray     # s'(xi) h at centers
    ds_f: np.ndarray     # s'(xi) h at faces
    A_c: np.ndarray
    B_c: np.ndarray
    A_f: np.ndarray
    B_f: np.ndarray


def neck_position(M: GluedHypersurface) -> float | None:
    """Arclength of the gluing circle of a two-sheet manifold, else None."""
    if "eps" not in M.meta or M.meta.get("eps", 0) == 0 or len(M.pieces) < 2:
        return None
    lengths = M._piece_lengths(1)
    return float(lengths[: len(M.pieces) // 2].sum())


def make_grid(M: GluedHypersurface, ncell: int) -> RadialGrid:
    """Uniform in s, or log-graded around the neck for glued manifolds."""
    L = M.length
    s_n = neck_position(M)
    h = 1.0 / ncell
    xf = np.linspace(0.0, 1.0, ncell + 1)
    xc = 0.5 * (xf[1:] + xf[:-1])
    if s_n is None:
        s_c, s_f = L * xc, L * xf
        ds_c = np.full(ncell, L * h)
        ds_f = np.full(ncell + 1, L * h)
    else:
        ell = M.meta["eps"] * M.scale
        x0, x1 = -np.arcsinh(s_n / ell), np.arcsinh((L - s_n) / ell)
        to_xi = lambda t: x0 + (x1 - x0) * t
        s_of = lambda t: np.clip(s_n + ell * np.sinh(to_xi(t)), 0.0, L)
        ds_of = lambda t: ell * np.cosh(to_xi(t)) * (x1 - x0) * h
        s_c, s_f = s_of(xc), s_of(xf)
        s_f[0], s_f[-1] = 0.0, L
        ds_c, ds_f = ds_of(xc), ds_of(xf)
    A_c, _, B_c, _ = M.warp(s_c)
    A_f, _, B_f, _ = M.warp(s_f)
    # ends are exact caps or mirror points
    for end, idx in ((M.cap_left, 0), (M.cap_right, -1)):
        if end == "A":
            A_f[idx] = 0.0
        elif end == "B":
            B_f[idx] = 0.0
    return RadialGrid(ncell, s_c, s_f, ds_c, ds_f, np.abs(A_c), np.abs(B_c),
                      np.abs(A_f), np.abs(B_f))


def radial_operator(M: GluedHypersurface, grid: RadialGrid, mu_a: float, mu_b: float,
                    odd_mirror: bool):
    """Symmetric tridiagonal (d, e) and the mass vector for one angular mode."""
    a, b = M.a_dim, M.b_dim
    w_c = grid.A_c**a * grid.B_c**b
    w_f = grid.A_f**a * grid.B_f**b
    mass = w_c * grid.ds_c
    flux = w_f / grid.ds_f
    V = np.zeros_like(w_c)
    if mu_a:
        V += mu_a / grid.A_c**2
    if mu_b:
        V += mu_b / grid.B_c**2
    ends = [flux[0], flux[-1]]
    flux_inner = flux[1:-1]
    diag = np.zeros_like(w_c)
    diag[:-1] += flux_inner
    diag[1:] += flux_inner
    # mirror ends of the S^0 factor: odd functions vanish there (ghost cell)
    for side, end in ((0, M.cap_left), (-1, M.cap_right)):
        mirror = end == "B" and b == 0
        if mirror and odd_mirror:
            diag[side] += 2.0 * ends[side if side == 0 else 1]
    diag += mass * V
    sq = np.sqrt(mass)
    d = diag / mass
    e = -flux_inner / (sq[:-1] * sq[1:])
    return d, e, mass, V


# ---------------------------------------------------------------------------
# results

@dataclass(frozen=True)
class Eigen:
    value: float
    multiplicity: int
    mode: tuple


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: tuple             # Eigen entries sorted by value
    grid: int
    extrapolated: bool = False
    drift: float = 0.0             # max relative change between grid and 2 x grid
    meta: dict = field(default_factory=dict)

    def values(self, count: int | None = None) -> np.ndarray:
        """Eigenvalues repeated by multiplicity."""
        out = np.repeat([e.value for e in self.eigenvalues],
                        [e.multiplicity for e in self.eigenvalues])
        return out if count is None else out[:count]

    def clusters(self, rtol: float | None = None, atol: float = 1e-9):
        """Merge nearly equal values: list of (value, multiplicity, modes)."""
        if rtol is None:
            rtol = max(10 * self.drift, 1e-9)
        out = []
        for e in self.eigenvalues:
            if out and abs(e.value - out[-1][0]) <= rtol * max(abs(e.value), 1.0) + atol:
                v, m, modes = out[-1]
                out[-1] = (v, m + e.multiplicity, modes + [e.mode])
            else:
                out.append((e.value, e.multiplicity, [e.mode]))
        return out

    def to_dict(self):
        return dict(eigenvalues=[dict(value=e.value, multiplicity=e.multiplicity, mode=list(e.mode))
                                 for e in self.eigenvalues],
                    grid=self.grid, extrapolated=self.extrapolated)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _truncate(entries, count):
    entries = sorted(entries, key=lambda e: (e.value, e.mode))
    out, total = [], 0
    for e in entries:
        if total >= count:
            break
        out.append(e)
        total += e.multiplicity
    return tuple(out)


def sphere_spectrum(n: int, count: int) -> SpectrumResult:
    """Exact spectrum of the unit S^n: mu_k with multiplicity m_k."""
    out, total, k = [], 0, 0
    while total < count:
        out.append(Eigen(float(sphere_eigenvalue(n, k)), dim_harmonic(n, k), (k, 0, 0)))
        total += dim_harmonic(n, k)
        k += 1
    return SpectrumResult(tuple(out), 0, False)


# ---------------------------------------------------------------------------
# solver

def _mode_spectrum(M, grid, i, j, upper, max_count, first=None):
    fa = factor_mode(M.a_dim, i)
    fb = factor_mode(M.b_dim, j)
    odd = M.b_dim == 0 and j == 1
    d, e, mass, V = radial_operator(M, grid, fa[0], fb[0], odd)
    if first is not None:
        vals = eigvals_index(d, e, 0, first - 1)
    else:
        vals = eigvals_below(d, e, upper, max_count)
    return vals, fa[1] * fb[1]


def _vmin(M, grid, i, j):
    fa, fb = factor_mode(M.a_dim, i), factor_mode(M.b_dim, j)
    V = np.zeros_like(grid.A_c)
    if fa[0]:
        V += fa[0] / grid.A_c**2
    if fb[0]:
        V += fb[0] / grid.B_c**2
    return float(V.min())


def _select_modes(M, grid, count, max_modes=None):
    """Lowest ``count`` eigenvalues with their modes, choosing modes automatically.

    A mode whose potential exceeds the running count-th eigenvalue everywhere
    cannot contribute: the discrete operator is the potential plus a
    nonnegative form.
    """
    jmax = 1 if M.b_dim == 0 else None
    heap = [(0.0, 0, 0)]
    seen = {(0, 0)}
    found = {}
    bound = np.inf
    while heap:
        vmin, i, j = heapq.heappop(heap)
        if vmin >= bound:
            break
        if max_modes is not None and (i > max_modes[0] or j > max_modes[1]):
            raise ModeTruncationError(
                f"mode (i={i}, j={j}) has minimum potential {vmin:.6g} below the "
                f"current cutoff {bound:.6g}; raise max_modes")
        vals, mult = _mode_spectrum(M, grid, i, j, bound, count)
        found[(i, j)] = (vals, mult)
        entries = [(v, m) for (vv, m) in found.values() for v in vv]
        entries.sort()
        total = 0
        for v, m in entries:
            total += m
            if total >= count:
                bound = min(bound, v * (1 + 1e-9) + 1e-12)
                break
        for ni, nj in ((i + 1, j), (i, j + 1)):
            if jmax is not None and nj > jmax:
                continue
            if (ni, nj) not in seen:
                seen.add((ni, nj))
                heapq.heappush(heap, (_vmin(M, grid, ni, nj), ni, nj))
    return found, bound


def warped_spectrum(M: GluedHypersurface, count: int, grid: int = 400, max_modes=None,
                    richardson: bool = True) -> SpectrumResult:
    """Lowest ``count`` eigenvalues (with multiplicity) of the warped product.

    With ``richardson`` the problem is also solved on 2 x grid and each
    (mode, radial index) pair is extrapolated as (4 l_{2h} - l_h) / 3.
    """
    if grid < 8:
        raise ValueError("grid too small")
    fine = make_grid(M, 2 * grid if richardson else grid)
    found, bound = _select_modes(M, fine, count, max_modes)
    entries, drift = [], 0.0
    coarse = make_grid(M, grid) if richardson else None
    for (i, j), (vals, mult) in found.items():
        if len(vals) == 0:
            continue
        if richardson:
            cv, _ = _mode_spectrum(M, coarse, i, j, None, None, first=len(vals))
            ext = (4 * vals - cv) / 3
            drift = max(drift, float(np.max(np.abs(ext - vals) / np.maximum(np.abs(ext), 1.0))))
            vals = ext
        for r, v in enumerate(vals):
            entries.append(Eigen(float(v), mult, (i, j, r)))
    kept = _truncate(entries, count)
    return SpectrumResult(kept, grid, richardson, drift,
                          meta=dict(modes=sorted(found), cutoff=bound, label=M.label))


def covered_sphere_spectrum(n: int, d: int, count: int, grid: int = 400) -> SpectrumResult:
    return warped_spectrum(covered_sphere(n, d), count, grid)


def covered_sphere_exact(n: int, d: int, count: int) -> np.ndarray:
    """nu (nu + n - 1) with nu = i/d + j + 2l, repeated by multiplicity."""
    vals = []
    top = int(np.sqrt(count)) + 6
    for i in range(0, d * top):
        mi = 1 if i == 0 else 2
        for j in range(top):
            mj = factor_mode(n - 2, j)[1]
            for l in range(top):
                nu = i / d + j + 2 * l
                vals.extend([nu * (nu + n - 1)] * (mi * mj))
    return np.sort(vals)[:count]


# ---------------------------------------------------------------------------
# eigenfunctions

def eigenfunction_ratios(M: GluedHypersurface, result: SpectrumResult, count: int = 10,
                         grid: int | None = None) -> np.ndarray:
    """sup/L^2 ratios of the first eigenfunctions on the discrete grid.

    The eigenfunction of mode (i, j) is u(s) times a zonal harmonic in each
    factor; a normalized zonal harmonic of multiplicity m has sup sqrt(m), so
    the ratio is the radial one times sqrt(multiplicity).
    """
    g = make_grid(M, grid or result.grid)
    out = []
    for e in result.eigenvalues:
        i, j, r = e.mode
        fa, fb = factor_mode(M.a_dim, i), factor_mode(M.b_dim, j)
        d, ee, mass, _ = radial_operator(M, g, fa[0], fb[0], M.b_dim == 0 and j == 1)
        lam = eigvals_index(d, ee, r, r)[0]
        v = inverse_iteration(d, ee, lam)
        u = v / np.sqrt(mass)
        l2 = np.sqrt(np.sum(mass * u**2) / mass.sum())
        ratio = np.max(np.abs(u)) / l2 * np.sqrt(e.multiplicity)
        out.extend([ratio] * e.multiplicity)
        if len(out) >= count:
            break
    return np.array(out[:count])


# ---------------------------------------------------------------------------
# comparison with a reference spectrum

@dataclass(frozen=True)
class ClusterReport:
    k: int
    interval: tuple
    count: int
    required: int
    ok: bool


def spectral_comparison(result: SpectrumResult, n: int, k_max: int, cluster_eps: float,
                        H2: float = 1.0):
    """Count eigenvalues in [(1 -+ cluster_eps) mu_k ||H||_2^2] for k <= k_max.

    Also checks lambda_i <= (1 + cluster_eps) ||H||_2^2 lambda_i(S^n) for the
    first sigma_{k_max} eigenvalues.  Returns (reports, ordered_ok).
    """
    vals = result.values()
    need = sum(dim_harmonic(n, k) for k in range(k_max + 1))
    if len(vals) < need:
        raise ValueError(f"spectrum has {len(vals)} values, need {need}")
    reports = []
    for k in range(k_max + 1):
        mu = sphere_eigenvalue(n, k) * H2
        lo, hi = (1 - cluster_eps) * mu, (1 + cluster_eps) * mu
        if k == 0:
            lo, hi = -cluster_eps * H2, cluster_eps * H2
        c = int(np.count_nonzero((vals >= lo) & (vals <= hi)))
        reports.append(ClusterReport(k, (lo, hi), c, dim_harmonic(n, k), c >= dim_harmonic(n, k)))
    ref = sphere_spectrum(n, need).values(need)
    ordered_ok = bool(np.all(vals[:need] <= (1 + cluster_eps) * H2 * ref + 1e-12))
    return reports, ordered_ok
