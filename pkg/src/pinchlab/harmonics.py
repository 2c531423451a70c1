"""Homogeneous harmonic polynomials on R^{n+1}, exactly.

A basis of the degree-k harmonic polynomials is obtained as the kernel of
the Euclidean Laplacian on the span of degree-k monomials (exact Gaussian
elimination over the rationals) followed by Gram-Schmidt for the averaged
inner product

    <P, Q> = (1 / Vol S^n) int_{S^n} P Q.

Square roots are not rational, so every member is stored as an exactly
orthogonal rational polynomial Q_i together with its exact squared norm N_i;
the orthonormal member is P_i = Q_i / sqrt(N_i).  Floating point appears only
when polynomials are evaluated.

Here n is the dimension of the sphere, so polynomials have n+1 variables.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations_with_replacement
from math import comb, prod

import numpy as np

from .measure import (TensorPoints, field_H, field_X, field_Z, integrate, lp_norm, tensor_points,
                      volume, z_field_norm)

K_MAX = 6
N_MAX = 4


def dim_harmonic(n: int, k: int) -> int:
    """m_k = dim of degree-k harmonics on R^{n+1} (eigenspace multiplicity on S^n)."""
    if k == 0:
        return 1
    num = comb(n + k - 1, k) * (n + 2 * k - 1)
    q, r = divmod(num, n + k - 1)
    assert r == 0
    return q


def sphere_eigenvalue(n: int, k: int) -> int:
    """mu_k = k (n + k - 1)."""
    return k * (n + k - 1)


def hessian_constant(n: int, k: int) -> int:
    """(k-1)(k^2 + mu_k)(n + 2k - 3), the Hessian sum identity constant."""
    return (k - 1) * (k * k + sphere_eigenvalue(n, k)) * (n + 2 * k - 3)


def sigma(n: int, k: int) -> int:
    """Number of sphere eigenvalues up to degree k, with multiplicity."""
    return sum(dim_harmonic(n, i) for i in range(k + 1))


# ---------------------------------------------------------------------------
# exact polynomials

def monomials(nvars: int, k: int) -> list:
    """Exponent tuples of total degree k, in a fixed order."""
    out = []
    for combo in combinations_with_replacement(range(nvars), k):
        e = [0] * nvars
        for v in combo:
            e[v] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def _double_factorial_odd(m: int) -> int:
    """(2m - 1)!! with the convention (-1)!! = 1."""
    return prod(range(1, 2 * m, 2))


def monomial_sphere_integral(alpha, n: int) -> Fraction:
    """Average of x^alpha over S^n as an exact rational."""
    alpha = tuple(alpha)
    if len(alpha) != n + 1:
        raise ValueError("alpha needs n + 1 entries")
    if any(a % 2 for a in alpha):
        return Fraction(0)
    half = sum(alpha) // 2
    num = prod(_double_factorial_odd(a // 2) for a in alpha)
    den = prod(n + 1 + 2 * j for j in range(half))
    return Fraction(num, den)


@dataclass(frozen=True)
class HomogeneousPolynomial:
    nvars: int
    degree: int
    coeffs: tuple    # ((exponent, Fraction), ...), nonzero terms only

    @classmethod
    def from_dict(cls, nvars, degree, d):
        items = tuple(sorted(((e, Fraction(c)) for e, c in d.items() if c != 0), reverse=True))
        for e, _ in items:
            if len(e) != nvars or sum(e) != degree:
                raise ValueError(f"monomial {e} does not have degree {degree}")
        return cls(nvars, degree, items)

    def as_dict(self):
        return dict(self.coeffs)

    def laplacian(self) -> "HomogeneousPolynomial":
        out = {}
        for e, c in self.coeffs:
            for v in range(self.nvars):
                if e[v] >= 2:
                    f = list(e)
                    f[v] -= 2
                    f = tuple(f)
                    out[f] = out.get(f, 0) + c * e[v] * (e[v] - 1)
        return HomogeneousPolynomial.from_dict(self.nvars, max(self.degree - 2, 0), out)

    def scale(self, t) -> "HomogeneousPolynomial":
        return HomogeneousPolynomial.from_dict(self.nvars, self.degree,
                                               {e: c * t for e, c in self.coeffs})

    def __add__(self, other):
        out = self.as_dict()
        for e, c in other.coeffs:
            out[e] = out.get(e, 0) + c
        return HomogeneousPolynomial.from_dict(self.nvars, self.degree, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def is_harmonic(self) -> bool:
        return len(self.laplacian().coeffs) == 0


def sphere_inner(P: HomogeneousPolynomial, Q: HomogeneousPolynomial) -> Fraction:
    """Exact averaged S^n inner product."""
    n = P.nvars - 1
    total = Fraction(0)
    for e, c in P.coeffs:
        for f, d in Q.coeffs:
            total += c * d * _avg(tuple(a + b for a, b in zip(e, f)), n)
    return total


@lru_cache(maxsize=None)
def _avg(alpha, n):
    return monomial_sphere_integral(alpha, n)


def _nullspace(rows: list, ncols: int) -> list:
    """Exact kernel basis of a rational matrix given as a list of rows."""
    A = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -A[i][fc]
        basis.append(v)
    return basis


# ---------------------------------------------------------------------------
# basis

@dataclass(frozen=True, eq=False)
class HarmonicBasis:
    """Orthonormal basis of degree-k harmonics on R^{n+1}.

    ``members[i] / sqrt(norm_sq[i])`` is the i-th orthonormal polynomial.
    """

    n: int
    k: int
    members: tuple
    norm_sq: tuple
    gram_tol: float = 0.0

    def __len__(self):
        return len(self.members)

    @property
    def m_k(self):
        return dim_harmonic(self.n, self.k)

    @property
    def mu_k(self):
        return sphere_eigenvalue(self.n, self.k)

    def gram_exact(self):
        """Exact matrix <Q_i, Q_j> of the stored rational members.

        Orthonormality of P_i = Q_i / sqrt(N_i) means this matrix is
        diagonal with entries N_i, which can be checked without rounding.
        """
        m = len(self.members)
        return [[sphere_inner(self.members[i], self.members[j]) for j in range(m)] for i in range(m)]

    def to_json(self) -> str:
        out = dict(n=self.n, k=self.k, m_k=len(self.members), members=[])
        for Q, N in zip(self.members, self.norm_sq):
            out["members"].append(dict(
                norm_sq=[N.numerator, N.denominator],
                terms=[dict(exponent=list(e), coeff=[c.numerator, c.denominator]) for e, c in Q.coeffs]))
        return json.dumps(out)

    @classmethod
    def from_json(cls, text: str) -> "HarmonicBasis":
        d = json.loads(text)
        n, k = d["n"], d["k"]
        members, norms = [], []
        for m in d["members"]:
            members.append(HomogeneousPolynomial.from_dict(
                n + 1, k, {tuple(t["exponent"]): Fraction(*t["coeff"]) for t in m["terms"]}))
            norms.append(Fraction(*m["norm_sq"]))
        return cls(n, k, tuple(members), tuple(norms))

    # -- floating point evaluation ------------------------------------------
    @property
    def _tables(self):
        expo = monomials(self.n + 1, self.k)
        index = {e: i for i, e in enumerate(expo)}
        C = np.zeros((len(self.members), len(expo)))
        for i, (Q, N) in enumerate(zip(self.members, self.norm_sq)):
            s = 1.0 / np.sqrt(float(N))
            for e, c in Q.coeffs:
                C[i, index[e]] = float(c) * s
        return np.array(expo, dtype=int), C

    @cached_property
    def _evaluator(self):
        E, C = self._tables
        return BasisEvaluator(self.n, self.k, E, C)

    def evaluator(self) -> "BasisEvaluator":
        return self._evaluator


class BasisEvaluator:
    """Values, gradients and Hessians of all members at many points."""

    def __init__(self, n, k, E, C):
        self.n, self.k, self.E, self.C = n, k, E, C

    def _powers(self, X):
        k = self.k
        X = np.atleast_2d(np.asarray(X, dtype=float))
        pw = np.ones((k + 1,) + X.shape)
        for p in range(1, k + 1):
            pw[p] = pw[p - 1] * X
        return X, pw

    def _mono(self, pw, E):
        """prod_v x_v^{E[t, v]} for exponents E (may contain -1 -> 0)."""
        npts = pw.shape[1]
        out = np.ones((npts, E.shape[0]))
        for v in range(E.shape[1]):
            e = E[:, v]
            ok = e >= 0
            vals = np.zeros((npts, E.shape[0]))
            vals[:, ok] = pw[e[ok], :, v].T
            out *= vals
        return out

    def values(self, X):
        X, pw = self._powers(X)
        return self._mono(pw, self.E) @ self.C.T

    def gradients(self, X):
        """Array (points, members, n+1)."""
        X, pw = self._powers(X)
        nv = self.E.shape[1]
        out = np.empty((X.shape[0], self.C.shape[0], nv))
        for v in range(nv):
            E = self.E.copy()
            E[:, v] -= 1
            out[:, :, v] = (self._mono(pw, E) * self.E[:, v]) @ self.C.T
        return out

    def hessians(self, X):
        """Array (points, members, n+1, n+1)."""
        X, pw = self._powers(X)
        nv = self.E.shape[1]
        out = np.empty((X.shape[0], self.C.shape[0], nv, nv))
        for v in range(nv):
            for w in range(v, nv):
                E = self.E.copy()
                E[:, v] -= 1
                fac = self.E[:, v].astype(float)
                fac = fac * (E[:, w] if w != v else E[:, v])
                E[:, w] -= 1
                h = (self._mono(pw, E) * fac) @ self.C.T
                out[:, :, v, w] = h
                out[:, :, w, v] = h
        return out

    def directional(self, X, U):
        """dP_i(x)(u) for paired rows of X and U."""
        return np.einsum("pmv,pv->pm", self.gradients(X), np.atleast_2d(U))

    def second(self, X, U, V):
        """Hess P_i(x)(u, v) for paired rows."""
        return np.einsum("pmvw,pv,pw->pm", self.hessians(X), np.atleast_2d(U), np.atleast_2d(V))


@lru_cache(maxsize=None)
def harmonic_basis(n: int, k: int) -> HarmonicBasis:
    """Exact orthonormal basis of degree-k harmonics on R^{n+1}."""
    if n < 2 or k < 0:
        raise ValueError("need n >= 2 and k >= 0")
    if k > K_MAX or n > N_MAX:
        raise ValueError(f"k <= {K_MAX} and n <= {N_MAX} are supported")
    nv = n + 1
    expo = monomials(nv, k)
    if k < 2:
        kernel = [[Fraction(int(i == j)) for j in range(len(expo))] for i in range(len(expo))]
    else:
        low = {e: i for i, e in enumerate(monomials(nv, k - 2))}
        rows = [[Fraction(0)] * len(expo) for _ in low]
        for j, e in enumerate(expo):
            for v in range(nv):
                if e[v] >= 2:
                    f = list(e)
                    f[v] -= 2
                    rows[low[tuple(f)]][j] += e[v] * (e[v] - 1)
        kernel = _nullspace(rows, len(expo))
    polys = [HomogeneousPolynomial.from_dict(nv, k, dict(zip(expo, v))) for v in kernel]
    if len(polys) != dim_harmonic(n, k):
        raise ArithmeticError(f"harmonic space has dimension {len(polys)}, expected {dim_harmonic(n, k)}")
    ortho, norms = [], []
    for P in polys:
        Q = P
        for R, N in zip(ortho, norms):
            Q = Q - R.scale(sphere_inner(P, R) / N)
        N = sphere_inner(Q, Q)
        if N == 0:
            raise ArithmeticError("rank deficiency in the harmonic basis")
        ortho.append(Q)
        norms.append(N)
    return HarmonicBasis(n, k, tuple(ortho), tuple(norms))


# ---------------------------------------------------------------------------
# pointwise identities

def _sq(X):
    return np.sum(np.atleast_2d(X) ** 2, axis=1)


def addition_identity_residual(basis: HarmonicBasis, x) -> np.ndarray:
    """|sum P_i(x)^2 - m_k |x|^{2k}| at each row of x."""
    ev = basis.evaluator()
    lhs = np.sum(ev.values(x) ** 2, axis=1)
    return np.abs(lhs - basis.m_k * _sq(x) ** basis.k)


def gradient_identity_rhs(n, k, x, u):
    m, mu = dim_harmonic(n, k), sphere_eigenvalue(n, k)
    r2 = _sq(x)
    xu = np.sum(np.atleast_2d(x) * np.atleast_2d(u), axis=1)
    out = (mu / n) * r2 ** (k - 1) * _sq(u) if k >= 1 else np.zeros_like(r2)
    c = k * k - mu / n
    if k >= 2:
        out = out + c * xu**2 * r2 ** (k - 2)
    elif c != 0:   # k = 1 makes c vanish; k = 0 gives zero
        raise AssertionError
    return m * out


def gradient_identity_residual(basis: HarmonicBasis, x, u) -> np.ndarray:
    lhs = np.sum(basis.evaluator().directional(x, u) ** 2, axis=1)
    return np.abs(lhs - gradient_identity_rhs(basis.n, basis.k, x, u))


def hessian_identity_residual(basis: HarmonicBasis, x) -> np.ndarray:
    H = basis.evaluator().hessians(x)
    lhs = np.sum(H**2, axis=(1, 2, 3))
    k = basis.k
    rhs = basis.m_k * hessian_constant(basis.n, k) * (_sq(x) ** (k - 2) if k >= 2 else 0.0)
    return np.abs(lhs - rhs)


# ---------------------------------------------------------------------------
# restriction to hypersurfaces

@dataclass(frozen=True)
class ResidualReport:
    lhs: float
    rhs_bound_shape: float
    ratio: float
    k: int
    per_member: tuple = ()


@dataclass(frozen=True, eq=False)
class Restriction:
    """Basis members and their derivatives sampled on tensor points of M."""

    tp: TensorPoints
    P: np.ndarray        # (points, members)
    dPZ: np.ndarray
    hessZZ: np.ndarray
    dPnu: np.ndarray
    hessnunu: np.ndarray
    Z: np.ndarray
    H2norm: float
    vol: float

    def norm2(self, vals):
        """Renormalized L^2 norms of the columns."""
        return np.sqrt(self.tp.weights @ (vals**2) / self.vol)


def restrict(M, basis: HarmonicBasis, degree: int | None = None, level: int = 1) -> Restriction:
    if degree is None:
        degree = 2 * max(basis.k, 1) + 4
    tp = tensor_points(M, degree, level)
    ev = basis.evaluator()
    Z = tp.nu - tp.H[:, None] * tp.X
    P = ev.values(tp.X)
    G = ev.gradients(tp.X)
    Hs = ev.hessians(tp.X)
    dPZ = np.einsum("pmv,pv->pm", G, Z)
    dPnu = np.einsum("pmv,pv->pm", G, tp.nu)
    hessZZ = np.einsum("pmvw,pv,pw->pm", Hs, Z, Z)
    hessnunu = np.einsum("pmvw,pv,pw->pm", Hs, tp.nu, tp.nu)
    return Restriction(tp, P, dPZ, hessZZ, dPnu, hessnunu, Z, lp_norm(M, field_H, 2), tp.volume)


def laplacian_on(M, basis: HarmonicBasis, R: Restriction | None = None, route: str = "z"):
    """Laplace-Beltrami of each member restricted to M, at the tensor points.

    route "z" expands in the field Z = nu - H X:
        mu_k H^2 P + (n + 2k - 2) H dP(Z) + Hess P(Z, Z);
    route "nu" uses the normal directly: Hess P(nu, nu) + n H dP(nu).
    """
    R = R or restrict(M, basis)
    H = R.tp.H[:, None]
    n, k = basis.n, basis.k
    if route == "z":
        return basis.mu_k * H**2 * R.P + (n + 2 * k - 2) * H * R.dPZ + R.hessZZ
    return R.hessnunu + n * H * R.dPnu


def laplace_residual(M, basis: HarmonicBasis, R: Restriction | None = None) -> ResidualReport:
    """|| Delta P - mu_k ||H||_2^2 P ||_2 for each member, worst ratio reported."""
    R = R or restrict(M, basis)
    h2 = R.H2norm**2
    lap = laplacian_on(M, basis, R)
    lhs = R.norm2(lap - basis.mu_k * h2 * R.P)
    shape = np.sqrt(basis.m_k) * basis.mu_k * h2 * R.norm2(R.P)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(shape > 0, lhs / shape, 0.0)
    i = int(np.argmax(ratios))
    return ResidualReport(float(lhs[i]), float(shape[i]), float(ratios[i]), basis.k, tuple(ratios))


def operator_norm_bounds(M, basis: HarmonicBasis, R: Restriction | None = None) -> dict:
    """Hilbert-Schmidt sums of P -> dP(Z), H dP(Z), Hess P(Z, Z) with their bounds.

    Returns {name: (lhs, rhs)}.
    """
    R = R or restrict(M, basis)
    k, m = basis.k, basis.m_k
    w = R.tp.weights / R.vol
    X2 = np.sum(R.tp.X**2, axis=1)
    Z2 = np.sum(R.Z**2, axis=1)
    H = R.tp.H
    xk1 = X2 ** (k - 1) if k >= 1 else np.zeros_like(X2)
    xk2 = X2 ** (k - 2) if k >= 2 else np.zeros_like(X2)
    out = {
        "Z": (float(w @ np.sum(R.dPZ**2, axis=1)), float(m * k * k * (w @ (xk1 * Z2)))),
        "HZ": (float(w @ np.sum((H[:, None] * R.dPZ) ** 2, axis=1)),
               float(m * k * k * (w @ (xk1 * H**2 * Z2)))),
        "ZZ": (float(w @ np.sum(R.hessZZ**2, axis=1)),
               float(m * hessian_constant(basis.n, k) * (w @ (xk2 * Z2**2)))),
    }
    return out


def defect_aggregate(M) -> float:
    """||H^2 - ||H||_2^2||_1 ||X||_inf^2 + ||HZ||_2 ||X||_inf + ||Z||_2^2 + ||Z||_4^2."""
    h2 = lp_norm(M, field_H, 2) ** 2
    xinf = lp_norm(M, field_X, np.inf)
    # absolute floors at rounding level keep exact spheres from refining noise
    vol = volume(M)
    return (lp_norm(M, lambda d: d["H"] ** 2 - h2, 1, atol=vol * 1e-13 * h2) * xinf**2
            + lp_norm(M, lambda d: d["H"] * field_Z(d), 2, atol=vol * 1e-26 * h2) * xinf
            + z_field_norm(M, 2) ** 2 + z_field_norm(M, 4) ** 2)


def restricted_gram(M, basis: HarmonicBasis, R: Restriction | None = None) -> np.ndarray:
    """Gram matrix of the restricted members in the averaged L^2(M) product."""
    R = R or restrict(M, basis)
    w = R.tp.weights / R.vol
    return (R.P * w[:, None]).T @ R.P


def quadratic_form_gap(M, basis: HarmonicBasis, R: Restriction | None = None) -> ResidualReport:
    """| ||H||_2^{2k} ||P||_2^2 - ||P||_{S^n}^2 | for orthonormal members.

    ``lhs`` is the largest value over members; ``per_member`` also carries the
    basis-independent sup (spectral radius of the Gram deviation) as its last
    entry.  ``rhs_bound_shape`` is the defect aggregate D and ``ratio`` = lhs / D.
    """
    R = R or restrict(M, basis)
    G = restricted_gram(M, basis, R) * R.H2norm ** (2 * basis.k)
    dev = G - np.eye(len(G))
    per = np.abs(np.diag(dev))
    sup = float(np.max(np.abs(np.linalg.eigvalsh(dev))))
    D = defect_aggregate(M)
    lhs = float(per.max())
    ratio = lhs / D if D > 0 else 0.0
    return ResidualReport(lhs, D, ratio, basis.k, tuple(per) + (sup,))
