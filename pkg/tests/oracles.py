"""Independent reference computations used only by the tests.

None of these share numerical code with the library beyond reading a
profile or warping function.
"""
import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal


def shape_operator_fd(X, u, v, h=1e-4):
    """Principal curvatures of a parametrized surface X(u, v) in R^3 by central differences."""
    Xu = (X(u + h, v) - X(u - h, v)) / (2 * h)
    Xv = (X(u, v + h) - X(u, v - h)) / (2 * h)
    Xuu = (X(u + h, v) - 2 * X(u, v) + X(u - h, v)) / h**2
    Xvv = (X(u, v + h) - 2 * X(u, v) + X(u, v - h)) / h**2
    Xuv = (X(u + h, v + h) - X(u + h, v - h) - X(u - h, v + h) + X(u - h, v - h)) / (4 * h * h)
    N = np.cross(Xu, Xv)
    N /= np.linalg.norm(N)
    I = np.array([[Xu @ Xu, Xu @ Xv], [Xu @ Xv, Xv @ Xv]])
    II = np.array([[Xuu @ N, Xuv @ N], [Xuv @ N, Xvv @ N]])
    return np.sort(np.real(np.linalg.eigvals(np.linalg.solve(I, II))))


def revolution_area(rho, drho, r0=0.0, r1=np.pi / 2):
    """2 pi int rho sin r sqrt(rho^2 + rho'^2) dr for one sheet of an n=2 surface."""
    f = lambda r: 2 * np.pi * rho(r) * np.sin(r) * np.hypot(rho(r), drho(r))
    return quad(f, r0, r1, epsabs=0, epsrel=1e-13, limit=400)[0]


def neck_integral(delta, m):
    """int_1^{1+delta} dt / sqrt(t^{2m} - 1) via t = 1 + u^2."""
    g = lambda u: 2 * u / np.sqrt(np.expm1(2 * m * np.log1p(u * u))) if u > 0 else 2 / np.sqrt(2 * m)
    return quad(g, 0.0, np.sqrt(delta), epsabs=0, epsrel=1e-13, limit=400)[0]


def uniform_vertex_spectrum(M, mu_a, odd, nodes, count):
    """Vertex-centered finite differences on a uniform arclength grid.

    Mirror ends of an S^0 factor: even modes are Neumann (half-cell end
    masses), odd modes are Dirichlet (end nodes removed).  Only for
    manifolds with b_dim = 0 and no caps of the A factor.
    """
    L = M.length
    s = np.linspace(0.0, L, nodes + 1)
    h = L / nodes
    A = np.abs(M.warp(s)[0])
    mid = np.abs(M.warp(0.5 * (s[1:] + s[:-1]))[0])
    w = A**M.a_dim
    p = mid**M.a_dim / h
    mass = w * h
    mass[0] *= 0.5
    mass[-1] *= 0.5
    diag = np.zeros(nodes + 1)
    diag[:-1] += p
    diag[1:] += p
    diag += mass * mu_a / A**2
    off = -p
    if odd:
        diag, mass, off = diag[1:-1], mass[1:-1], off[1:-1]
    sq = np.sqrt(mass)
    return eigh_tridiagonal(diag / mass, off / (sq[:-1] * sq[1:]), select="i",
                            select_range=(0, count - 1), eigvals_only=True)


def sphere_monomial_average_numeric(alpha, n_quad=64):
    """(1/4 pi) int_{S^2} x^alpha by a Gauss-Legendre x trapezoid product rule."""
    t, wt = np.polynomial.legendre.leggauss(n_quad)
    phi = np.linspace(0, 2 * np.pi, 2 * n_quad, endpoint=False)
    T, P = np.meshgrid(t, phi, indexing="ij")
    s = np.sqrt(1 - T**2)
    x, y, z = s * np.cos(P), s * np.sin(P), T
    W = wt[:, None] * np.full(phi.size, 2 * np.pi / phi.size)[None, :]
    return float(np.sum(W * x ** alpha[0] * y ** alpha[1] * z ** alpha[2]) / (4 * np.pi))
