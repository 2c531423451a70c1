"""Two concentric near-unit spheres joined through thin catenoidal necks.

The profile phi_eps has three pieces on [eps, pi/2]:

* r in [eps, a+eps]: the neck f(r) = eps * int_1^{r/eps} dt / sqrt(t^{2m} - 1),
  m = n-k-1, which makes the +f and -f sheets fit together into a minimal
  (zero mean curvature in the limit) neck;
* r in [a+eps, 2a+eps]: a concave quintic that matches f to second order on
  the left and reaches a flat plateau on the right;
* r >= 2a+eps: the constant b.

Gluing the sheets 1+phi and 1-phi along r = eps gives the closed manifold.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import beta as beta_fn, betainc, betaincc

from .geometry import (ConstructionError, DomainError, RadialProfile, RevolutionSheet,
                       arclength_reparam)

DEFAULT_A = np.pi / 20


# ---------------------------------------------------------------------------
# the neck function

def _log_x(delta):
    return np.log1p(delta)


def neck_value(delta, m: int):
    """(1/eps) f at r = eps (1 + delta), accurate for tiny delta."""
    delta = np.asarray(delta, dtype=float)
    if m == 1:
        return np.log1p(delta + np.sqrt(delta * (2.0 + delta)))      # arccosh(1+delta)
    a = 0.5 - 0.5 / m
    w = np.exp(-2.0 * m * _log_x(delta))                            # x^{-2m}
    y = -np.expm1(-2.0 * m * _log_x(delta))                         # 1 - x^{-2m}
    # near y = 1 the complement keeps the digits that 1 - w would lose
    inc = np.where(y <= 0.5, betainc(0.5, a, y), betaincc(a, 0.5, w))
    return beta_fn(0.5, a) * inc / (2.0 * m)


def neck_slope(delta, m: int):
    """f' at r = eps (1 + delta) (dimensionless)."""
    delta = np.asarray(delta, dtype=float)
    with np.errstate(divide="ignore"):
        return 1.0 / np.sqrt(np.expm1(2.0 * m * _log_x(delta)))


def neck_curvature(delta, m: int, eps: float):
    """f'' at r = eps (1 + delta)."""
    delta = np.asarray(delta, dtype=float)
    q = np.expm1(2.0 * m * _log_x(delta))
    with np.errstate(divide="ignore", invalid="ignore"):
        return -(m / eps) * (1.0 + delta) ** (2 * m - 1) / q**1.5


@dataclass(frozen=True, eq=False)
class NeckFunction:
    """f on [eps, r_max] with two derivatives."""

    m: int
    eps: float

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.eps):
            raise DomainError(f"r < eps = {self.eps}")
        return self.eval_delta(r / self.eps - 1.0)

    def eval_delta(self, delta):
        delta = np.maximum(np.asarray(delta, dtype=float), 0.0)
        return (self.eps * neck_value(delta, self.m), neck_slope(delta, self.m),
                neck_curvature(delta, self.m, self.eps))


def build_f_eps(n: int, k: int, eps: float) -> NeckFunction:
    if eps <= 0:
        raise DomainError("eps must be positive")
    if not 0 <= k <= n - 2:
        raise DomainError("need 0 <= k <= n-2")
    return NeckFunction(n - k - 1, eps)


# ---------------------------------------------------------------------------
# concave bridge

def _bridge_q_max(c1, F1, F2):
    """max over t in [0,1] of F2 + c0 t + c1 t^2, with c0 fixed by c1."""
    c0 = -6.0 * F1 - 3.0 * F2 - 0.5 * c1
    vals = [F2, F2 + c0 + c1]
    if c1 < 0:
        ts = -c0 / (2.0 * c1)
        if 0.0 < ts < 1.0:
            vals.append(F2 + c0 * ts + c1 * ts * ts)
    return max(vals)


@dataclass(frozen=True)
class Bridge:
    """Quintic on [r0, r0 + h] in t = (r - r0)/h with U'' = (1-t)(F2 + c0 t + c1 t^2).

    It matches (F0, F1/h, F2/h^2) at t = 0 and has zero first and second
    derivative at t = 1.
    """

    r0: float
    h: float
    F0: float
    F1: float
    F2: float
    c0: float
    c1: float

    @property
    def top(self):
        return self.F0 + self.F1 + self.F2 / 3 + self.c0 / 12 + self.c1 / 30

    def eval(self, r):
        t = (np.asarray(r, dtype=float) - self.r0) / self.h
        F0, F1, F2, c0, c1 = self.F0, self.F1, self.F2, self.c0, self.c1
        U = F0 + t * (F1 + t * (F2 / 2 + t * ((c0 - F2) / 6 + t * ((c1 - c0) / 12 - t * c1 / 20))))
        dU = F1 + t * (F2 + t * ((c0 - F2) / 2 + t * ((c1 - c0) / 3 - t * c1 / 4)))
        d2U = (1 - t) * (F2 + c0 * t + c1 * t * t)
        return U, dU / self.h, d2U / self.h**2


def build_bridge(f: NeckFunction, r0: float, h: float) -> Bridge:
    """Concave quintic continuation of f from r0 to a flat top at r0 + h.

    The one free coefficient is placed at the midpoint of the interval where
    the bridge stays concave.
    """
    F0, F1, F2 = (float(v[0]) for v in f.eval(np.array([r0])))
    F1 *= h
    F2 *= h * h
    if not (F1 > 0 and F2 < 0):
        raise ConstructionError("the neck function must be increasing and concave at the join")
    g = lambda c1: _bridge_q_max(c1, F1, F2)
    scale = abs(F2) + F1
    res = minimize_scalar(g, bracket=(-10 * scale, 10 * scale))
    c_best = res.x
    if g(c_best) > 0:
        raise ConstructionError("no concave quintic bridge exists for these parameters")
    lo_end = c_best - scale
    while g(lo_end) <= 0:
        lo_end -= scale
    hi_end = c_best + scale
    while g(hi_end) <= 0:
        hi_end += scale
    c_lo = brentq(g, lo_end, c_best) if g(c_best) < 0 else c_best
    c_hi = brentq(g, c_best, hi_end) if g(c_best) < 0 else c_best
    c1 = 0.5 * (c_lo + c_hi)
    c0 = -6.0 * F1 - 3.0 * F2 - 0.5 * c1
    return Bridge(r0, h, F0, F1, F2, c0, c1)


# ---------------------------------------------------------------------------
# the capped profile

@dataclass(frozen=True, eq=False)
class PhiEps(RadialProfile):
    """phi_eps: neck, concave bridge, plateau."""

    n: int = 2
    k: int = 0
    eps: float = 1e-2
    a: float = DEFAULT_A
    f: NeckFunction = None
    bridge: Bridge = None
    neck: bool = True
    flat_right: bool = True
    r_max: float = np.pi / 2
    diagnostics: dict = field(default_factory=dict)

    @property
    def b_eps(self) -> float:
        return self.bridge.top

    @property
    def concave_until(self):
        return self.bridge.r0 + self.bridge.h

    @property
    def breakpoints(self):
        return (self.bridge.r0, self.bridge.r0 + self.bridge.h)

    def _eval(self, r):
        return self._eval_delta(r / self.eps - 1.0)

    def _eval_delta(self, delta):
        delta = np.asarray(delta, dtype=float)
        r = self.eps * (1.0 + delta)
        r_join = self.bridge.r0
        r_top = self.bridge.r0 + self.bridge.h
        phi = np.full(delta.shape, self.b_eps)
        d1 = np.zeros(delta.shape)
        d2 = np.zeros(delta.shape)
        m1 = r <= r_join
        if np.any(m1):
            v = self.f.eval_delta(delta[m1])
            phi[m1], d1[m1], d2[m1] = v
        m2 = (r > r_join) & (r < r_top)
        if np.any(m2):
            v = self.bridge.eval(r[m2])
            phi[m2], d1[m2], d2[m2] = v
        return phi, d1, d2

    def ode_residual(self, r):
        """phi'' + m (1 + phi'^2) phi' / r; vanishes on the neck piece."""
        phi, d1, d2 = self.eval(r)
        m = self.n - self.k - 1
        return d2 + m * (1 + d1**2) * d1 / np.asarray(r)


def build_phi_eps(n: int, k: int, eps: float, a: float = DEFAULT_A, check: bool = True) -> PhiEps:
    """Assemble the capped profile; the bridge spans [a+eps, 2a+eps]."""
    if not 0 < eps < a < np.pi / 10:
        raise ConstructionError("need 0 < eps < a < pi/10")
    f = build_f_eps(n, k, eps)
    h = a
    try:
        bridge = build_bridge(f, a + eps, h)
    except ConstructionError:
        # one retry with a longer bridge, as long as it still ends below pi/2
        h = 1.5 * a
        if a + eps + h >= np.pi / 2:
            raise
        bridge = build_bridge(f, a + eps, h)
    prof = PhiEps(n=n, k=k, eps=eps, a=a, f=f, bridge=bridge)
    if check:
        prof.diagnostics.update(check_phi_eps(prof))
    return prof


def check_phi_eps(prof: PhiEps, npts: int = 10_000) -> dict:
    """Verify the profile's defining properties; raise on violation."""
    br = prof.bridge
    r_join, r_top = br.r0, br.r0 + br.h
    left = np.array(prof.f.eval(np.array([r_join]))).ravel()
    right = np.array(br.eval(np.array([r_join]))).ravel()
    scale = np.array([1.0, 1.0, max(1.0, abs(left[2]))])
    jump_join = float(np.max(np.abs(left - right) / scale))
    top = np.array(br.eval(np.array([r_top]))).ravel()
    jump_top = float(np.max(np.abs(top - [br.top, 0.0, 0.0])))
    t = np.linspace(0.0, 1.0, npts)
    q = br.F2 + br.c0 * t + br.c1 * t * t
    r = prof.eps + (r_top - prof.eps) * np.linspace(1e-6, 1.0, npts)
    _, d1, d2 = prof.eval(r)
    out = dict(b_eps=prof.b_eps, jump_join=jump_join, jump_top=jump_top,
               max_q=float(q[:-1].max()), min_slope=float(d1.min()))
    if jump_join > 1e-9 or jump_top > 1e-9:
        raise ConstructionError(f"C2 matching failed: {out}")
    if out["max_q"] >= 0 or np.any(d2[:-1] >= 0):
        raise ConstructionError(f"bridge is not strictly concave: {out}")
    if not prof.b_eps < 0.5:
        raise ConstructionError(f"plateau height {prof.b_eps} is not below 1/2")
    return out


def build_dumbbell(n: int = 2, k: int = 0, eps: float = 1e-2, a: float = DEFAULT_A,
                   grid: int = 2):
    """Glue the 1+phi and 1-phi sheets into the closed manifold."""
    prof = build_phi_eps(n, k, eps, a)
    plus = RevolutionSheet(n, k, prof, +1)
    minus = RevolutionSheet(n, k, prof, -1)
    M = arclength_reparam(plus, minus, grid)
    return replace(M, label=f"dumbbell(n={n}, k={k}, eps={eps:g})",
                   meta={"eps": eps, "a": a, "b_eps": prof.b_eps, "profile": prof})


# ---------------------------------------------------------------------------
# sweeps

SWEEP_EPS = (1e-1, 1e-2, 1e-3, 1e-4)


def _check_decreasing(eps_list):
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise DomainError("eps_list must be strictly decreasing")


def convergence_row(n: int, k: int, eps: float, a: float = DEFAULT_A) -> dict:
    """Curvature and position norms of one dumbbell."""
    from .measure import field_abs_H, field_Bnorm, field_X, lp_norm, sup_norm

    M = build_dumbbell(n, k, eps, a)
    q = n - k
    return {
        "eps": eps,
        "b_eps": M.meta["b_eps"],
        "H_inf": sup_norm(M, field_abs_H),
        f"B_{q}": lp_norm(M, field_Bnorm, q),
        "H_minus_1_L1": lp_norm(M, lambda d: field_abs_H(d) - 1.0, 1),
        "X_minus_1_inf": sup_norm(M, lambda d: field_X(d) - 1.0),
        f"B_{q + 1}": lp_norm(M, field_Bnorm, q + 1),
    }


def sweep_convergence(n: int = 2, k: int = 0, eps_list=SWEEP_EPS, a: float = DEFAULT_A) -> list:
    """One row of norms per eps; see :func:`check_convergence` for the assertions."""
    _check_decreasing(eps_list)
    return [convergence_row(n, k, e, a) for e in eps_list]


def check_convergence(rows: list, n: int = 2, k: int = 0, bound_factor: float = 10.0,
                      final_max: float = 0.05, growth_min: float = 2.0) -> list:
    """Regression assertions on a sweep table; returns (name, ok, detail) triples."""
    q = n - k
    col = lambda key: np.array([r[key] for r in rows])
    out = []
    for key in ("H_inf", f"B_{q}"):
        v = col(key)
        out.append((f"{key} bounded", bool(v.max() < bound_factor * v[0] and v.max() / v.min() < bound_factor),
                    f"max/min = {v.max() / v.min():.4g}"))
    for key in ("H_minus_1_L1", "X_minus_1_inf"):
        v = col(key)
        ok = bool(np.all(np.diff(v) < 0) and v[-1] < final_max)
        out.append((f"{key} decreasing to < {final_max}", ok, f"final = {v[-1]:.4g}"))
    v = col(f"B_{q + 1}")
    out.append((f"B_{q + 1} grows", bool(v[-1] / v[0] > growth_min), f"last/first = {v[-1] / v[0]:.4g}"))
    b = col("b_eps")
    out.append(("b_eps decreasing below 1/2", bool(np.all(np.diff(b) < 0) and b.max() < 0.5),
                f"b = {', '.join(f'{x:.4g}' for x in b)}"))
    x0 = rows[0]
    out.append(("plateau bound at the first eps", bool(x0["X_minus_1_inf"] <= x0["b_eps"] + 1e-9),
                f"{x0['X_minus_1_inf']:.6g} <= {x0['b_eps']:.6g}"))
    return out


def spectrum_targets(n: int, count: int, p: int = 2) -> np.ndarray:
    """lambda_{E(sigma/p)}(S^n) for sigma < count, counted with multiplicity."""
    from .spectrum import sphere_spectrum

    base = sphere_spectrum(n, count // p + 1).values()
    return np.array([base[s // p] for s in range(count)])


def spectrum_row(n: int, k: int, eps: float, a: float = DEFAULT_A, sigma_max: int = 8,
                 grid: int = 800) -> dict:
    """lambda_0..lambda_sigma_max of one dumbbell and their distance to the doubled sphere spectrum."""
    from .spectrum import warped_spectrum

    count = sigma_max + 1
    target = spectrum_targets(n, count)
    lam = warped_spectrum(build_dumbbell(n, k, eps, a), count, grid=grid).values(count)
    return {"eps": eps, "eigenvalues": lam.tolist(), "target": target.tolist(),
            "deviation": np.abs(lam - target).tolist()}


def sweep_spectrum(n: int = 2, k: int = 0, eps_list=SWEEP_EPS, a: float = DEFAULT_A,
                   sigma_max: int = 8, grid: int = 800) -> list:
    _check_decreasing(eps_list)
    return [spectrum_row(n, k, e, a, sigma_max, grid) for e in eps_list]


def check_spectrum(rows: list, eps_check: float = 1e-3, lambda1_max: float = 0.15,
                   dev_max: float = 0.2, sigma_dev: int = 7) -> list:
    """Regression assertions on a spectrum sweep; returns (name, ok, detail) triples."""
    out = []
    lam0 = max(abs(r["eigenvalues"][0]) for r in rows)
    out.append(("lambda_0 = 0", lam0 < 1e-8, f"max |lambda_0| = {lam0:.3g}"))
    worst = [max(r["deviation"][: sigma_dev + 1]) for r in rows]
    out.append(("deviations decrease along the sweep", bool(np.all(np.diff(worst) < 0)),
                "max dev = " + ", ".join(f"{w:.4g}" for w in worst)))
    hit = [r for r in rows if np.isclose(r["eps"], eps_check)]
    if hit:
        r = hit[0]
        out.append((f"lambda_1 < {lambda1_max} at eps = {eps_check:g}", r["eigenvalues"][1] < lambda1_max,
                    f"lambda_1 = {r['eigenvalues'][1]:.6g}"))
        dev = np.array(r["deviation"][: sigma_dev + 1])
        bad = np.flatnonzero(dev >= dev_max)
        out.append((f"|lambda_s - target| < {dev_max} for s <= {sigma_dev} at eps = {eps_check:g}",
                    bad.size == 0, "worst " + (f"s = {int(np.argmax(dev))}, dev = {dev.max():.4g}")))
    return out


def sweep_csv(rows: list) -> str:
    """Long format: eps, quantity, value."""
    lines = ["eps,quantity,value"]
    for r in rows:
        for key, val in r.items():
            if key == "eps":
                continue
            if isinstance(val, list):
                for i, v in enumerate(val):
                    lines.append(f"{r['eps']!r},{key}_{i},{v!r}")
            else:
                lines.append(f"{r['eps']!r},{key},{val!r}")
    return "\n".join(lines) + "\n"
