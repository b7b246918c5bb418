"""Nystrom discretisation of second-kind Fredholm equations on an interval.

The generic problem is ``f(lam) + sign * int_J k(lam - mu) f(mu) dmu = g(lam)``.
Here ``k`` is the Lieb kernel unless a different kernel is supplied.
Solutions carry their quadrature grid so they can be extended off-grid with
the natural Nystrom interpolant.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import linalg

from .errors import SingularSystem
from .kernels import Anisotropy, lieb_kernel, lieb_kernel_d1

DEFAULT_NODES = 128
MAX_NODES = 2048
REFINE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuadGrid:
    interval: tuple
    nodes: np.ndarray
    weights: np.ndarray
    scheme: str  # "gauss-legendre" | "periodic-trapezoid" | "composite"

    @property
    def size(self) -> int:
        return len(self.nodes)


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int) -> QuadGrid:
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return QuadGrid((a, b), 0.5 * (a + b) + half * x, half * w, "gauss-legendre")


def periodic_trapezoid(a: float, b: float, n: int) -> QuadGrid:
    h = (b - a) / n
    nodes = a + h * (np.arange(n) + 0.5)
    return QuadGrid((a, b), nodes, np.full(n, h), "periodic-trapezoid")


def make_grid(Q_L: float, Q_R: float, a: Anisotropy, n: int) -> QuadGrid:
    """Grid for the interval [Q_L, Q_R]; periodic trapezoid on a full gapped period."""
    if not Q_L <= Q_R:
        raise SingularSystem(f"invalid interval [{Q_L}, {Q_R}]")
    if n < 8:
        raise ValueError("n_nodes must be at least 8")
    if a.regime == "gapped":
        width = Q_R - Q_L
        if width > np.pi + 1e-12:
            raise SingularSystem(f"interval width {width} exceeds pi in the gapped regime")
        if abs(width - np.pi) <= 1e-12:
            return periodic_trapezoid(Q_L, Q_R, n)
    if Q_L == Q_R:
        return QuadGrid((Q_L, Q_R), np.empty(0), np.empty(0), "gauss-legendre")
    return gauss_legendre(Q_L, Q_R, n)


def _lieb(a: Anisotropy):
    return (lambda x: lieb_kernel(x, a)), (lambda x: lieb_kernel_d1(x, a))


def _apply(fun, lam):
    return np.asarray(fun(np.asarray(lam)))


@dataclass(frozen=True, eq=False)
class NystromSolution:
    """Nodal values of the solution together with what is needed to extend them."""

    grid: QuadGrid
    values: np.ndarray
    driving: Callable
    kernel: Callable
    kernel_sign: int = 1
    driving_deriv: Callable | None = None
    kernel_deriv: Callable | None = None
    residual: float = 0.0

    def __call__(self, lam):
        return self.extend(lam)

    def extend(self, lam):
        """f(lam) = g(lam) - sign * sum_j w_j k(lam - mu_j) f_j."""
        lam = np.asarray(lam)
        g = _apply(self.driving, lam)
        if self.grid.size == 0:
            return g
        kw = self.kernel(np.subtract.outer(lam, self.grid.nodes)) * self.grid.weights
        return g - self.kernel_sign * kw @ self.values

    def derivative(self, lam):
        if self.driving_deriv is None or self.kernel_deriv is None:
            raise ValueError("derivative requires driving and kernel derivatives")
        lam = np.asarray(lam)
        g = _apply(self.driving_deriv, lam)
        if self.grid.size == 0:
            return g
        kw = self.kernel_deriv(np.subtract.outer(lam, self.grid.nodes)) * self.grid.weights
        return g - self.kernel_sign * kw @ self.values

    def integral(self) -> float | np.ndarray:
        """Quadrature of the solution over its own interval."""
        return self.grid.weights @ self.values


class FredholmOperator:
    """LU-factorised matrix of (id + sign * K_J) on a grid."""

    def __init__(self, grid: QuadGrid, kernel: Callable, kernel_sign: int = 1, kernel_deriv=None):
        self.grid = grid
        self.kernel = kernel
        self.kernel_deriv = kernel_deriv
        self.kernel_sign = kernel_sign
        n = grid.size
        if n:
            self.matrix = np.eye(n) + kernel_sign * kernel(
                np.subtract.outer(grid.nodes, grid.nodes)
            ) * grid.weights
            self._lu = linalg.lu_factor(self.matrix, check_finite=True)
            diag = np.abs(np.diag(self._lu[0]))
            if diag.min() < 1e-13 * diag.max():
                raise SingularSystem("discretised operator is numerically singular")
        else:
            self.matrix = np.empty((0, 0))

    def solve_values(self, rhs: np.ndarray) -> np.ndarray:
        if self.grid.size == 0:
            return rhs
        return linalg.lu_solve(self._lu, rhs)

    def solve(self, g: Callable, g_deriv: Callable | None = None) -> NystromSolution:
        rhs = _apply(g, self.grid.nodes)
        values = self.solve_values(rhs)
        res = 0.0
        if self.grid.size:
            res = float(np.max(np.abs(self.matrix @ values - rhs)))
            if not np.isfinite(res) or res > 1e-12 * max(1.0, float(np.max(np.abs(rhs)))):
                raise SingularSystem(f"backward residual {res:.3e} too large")
        return NystromSolution(
            self.grid, values, g, self.kernel, self.kernel_sign, g_deriv, self.kernel_deriv, res
        )


@lru_cache(maxsize=512)
def lieb_operator(Q_L: float, Q_R: float, a: Anisotropy, n: int) -> FredholmOperator:
    k, dk = _lieb(a)
    return FredholmOperator(make_grid(Q_L, Q_R, a, n), k, 1, dk)


def _refine(build: Callable[[int], object], probe: Callable[[object], np.ndarray], n_nodes):
    """Double the node count until successive probes agree (or use the fixed count)."""
    if n_nodes is not None:
        return build(int(n_nodes))
    n = DEFAULT_NODES
    prev = build(n)
    while n < MAX_NODES:
        n *= 2
        cur = build(n)
        if np.max(np.abs(probe(cur) - probe(prev))) < REFINE_TOL:
            return cur
        prev = cur
    return prev


def _probe_points(Q_L: float, Q_R: float) -> np.ndarray:
    mid, half = 0.5 * (Q_L + Q_R), 0.5 * (Q_R - Q_L)
    return mid + half * np.linspace(-1.0, 1.0, 9)


def solve_second_kind(
    g: Callable,
    Q_L: float,
    Q_R: float,
    a: Anisotropy,
    n_nodes: int | None = None,
    g_deriv: Callable | None = None,
) -> NystromSolution:
    """Solve (id + K_[Q_L,Q_R]) f = g with the Lieb kernel.

    ``n_nodes=None`` starts from 128 nodes and doubles until the extension at
    probe points moves by less than 1e-10 (capped at 2048).
    """
    pts = _probe_points(Q_L, Q_R)
    return _refine(
        lambda n: lieb_operator(Q_L, Q_R, a, n).solve(g, g_deriv),
        lambda sol: sol.extend(pts),
        n_nodes,
    )


class ResolventKernel:
    """R_J(lam, mu) for J = [Q_L, Q_R], solving R_J + K_J R_J = K(. - mu)."""

    def __init__(self, Q_L: float, Q_R: float, a: Anisotropy, n_nodes: int = DEFAULT_NODES):
        self.a = a
        self.op = lieb_operator(Q_L, Q_R, a, int(n_nodes))
        self.grid = self.op.grid

    def at_nodes(self, mu) -> np.ndarray:
        """Columns R_J(nu_i, mu_j) for all grid nodes nu_i."""
        mu = np.atleast_1d(np.asarray(mu))
        rhs = lieb_kernel(np.subtract.outer(self.grid.nodes, mu), self.a)
        return self.op.solve_values(rhs)

    def __call__(self, lam, mu) -> np.ndarray:
        """Matrix R_J(lam_i, mu_j); mu may be complex near the real axis."""
        lam = np.atleast_1d(np.asarray(lam))
        mu = np.atleast_1d(np.asarray(mu))
        direct = lieb_kernel(np.subtract.outer(lam, mu), self.a)
        if self.grid.size == 0:
            return direct
        kw = lieb_kernel(np.subtract.outer(lam, self.grid.nodes), self.a) * self.grid.weights
        return direct - kw @ self.at_nodes(mu)

    def d_lambda(self, lam, mu) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam))
        mu = np.atleast_1d(np.asarray(mu))
        direct = lieb_kernel_d1(np.subtract.outer(lam, mu), self.a)
        if self.grid.size == 0:
            return direct
        kw = lieb_kernel_d1(np.subtract.outer(lam, self.grid.nodes), self.a) * self.grid.weights
        return direct - kw @ self.at_nodes(mu)

    def identity_residual(self) -> float:
        """sup-norm of (id - R_J W)(id + K_J W) - id on the grid."""
        n = self.grid.size
        if n == 0:
            return 0.0
        r = self.at_nodes(self.grid.nodes) * self.grid.weights
        return float(np.max(np.abs((np.eye(n) - r) @ self.op.matrix - np.eye(n))))


def resolvent_kernel(Q_L: float, Q_R: float, a: Anisotropy, n_nodes: int | None = None) -> ResolventKernel:
    """Resolvent with the same refinement policy as ``solve_second_kind``."""
    pts = _probe_points(Q_L, Q_R)
    return _refine(
        lambda n: ResolventKernel(Q_L, Q_R, a, n),
        lambda rk: rk(pts, pts[::3]),
        n_nodes,
    )


def solve_generic(grid: QuadGrid, kernel: Callable, g: Callable, kernel_sign: int = 1) -> NystromSolution:
    """Nystrom solve with an arbitrary difference kernel on an arbitrary grid."""
    return FredholmOperator(grid, kernel, kernel_sign).solve(g)
