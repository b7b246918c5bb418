"""Fermi boundaries: q(D) from the density, Q_F from the field, and related checks."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from . import kernels as kn
from .dressed import bare_energy_dressed, density, dressed_charge, dressed_energy
from .errors import FieldOutOfRange, NoConvergence, UnboundedBoundary
from .kernels import Anisotropy
from .linsolve import DEFAULT_NODES, MAX_NODES, solve_second_kind


@dataclass(frozen=True)
class FermiPoint:
    Q: float
    D: float
    kind: str  # "magnetic" | "energetic"
    h: float | None = None


def _bracket(fun, a: Anisotropy, q0: float = 0.5):
    """Grow [0, Qmax] until ``fun`` changes sign (fun(0) < 0 assumed)."""
    if a.regime == "gapped":
        return 0.0, np.pi / 2
    hi = q0
    while fun(hi) < 0:
        hi *= 1.6
        if hi > 200:
            raise UnboundedBoundary("no finite Fermi boundary found below Q=200")
    return 0.0, hi


def _q_of_d(D: float, a: Anisotropy, n: int) -> float:
    G = lambda Q: float(density(Q, a, n).integral()) - D
    lo, hi = _bracket(G, a)
    if a.regime == "gapped" and G(hi) <= 0:
        return hi
    return optimize.brentq(G, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)


@lru_cache(maxsize=512)
def magnetic_fermi_boundary(D: float, a: Anisotropy, n_nodes: int | None = None) -> FermiPoint:
    """Endpoint q with int_{-q}^{q} rho(lam|q) dlam = D."""
    D = float(D)
    if not 0.0 <= D <= 0.5:
        raise ValueError("D must lie in [0, 1/2]")
    if D == 0.0:
        return FermiPoint(0.0, 0.0, "magnetic")
    if D == 0.5:
        if a.regime != "gapped":
            raise UnboundedBoundary("q is infinite at D=1/2 in the massless regimes; use closed forms")
        return FermiPoint(np.pi / 2, 0.5, "magnetic")
    if n_nodes is not None:
        return FermiPoint(_q_of_d(D, a, int(n_nodes)), D, "magnetic")
    n = DEFAULT_NODES
    Q = _q_of_d(D, a, n)
    while n < MAX_NODES:
        # accept once the doubled grid reproduces D at this Q
        if abs(float(density(Q, a, 2 * n).integral()) - D) < 1e-12:
            break
        n *= 2
        Q = _q_of_d(D, a, n)
    return FermiPoint(Q, D, "magnetic")


def _field_window(h: float, a: Anisotropy, J: float):
    hc, hl = kn.critical_fields(a, J)
    if h >= hc:
        raise FieldOutOfRange(f"h={h} >= h_c={hc}")
    if hl is not None and h < hl:
        raise FieldOutOfRange(f"h={h} < lower critical field {hl}")
    if h <= 0:
        raise FieldOutOfRange(f"h={h} must be positive")


def boundary_energy(Q: float, a: Anisotropy, J: float, h: float) -> float:
    """eps(Q|Q)."""
    return float(dressed_energy(Q, a, J, h)(Q))


@lru_cache(maxsize=256)
def fermi_boundary_from_field(h: float, a: Anisotropy, J: float = 1.0) -> FermiPoint:
    """Fermi boundary Q_F with eps(Q_F|Q_F) = 0 and its density D_F."""
    _field_window(h, a, J)
    f = lambda Q: boundary_energy(Q, a, J, h)
    lo, hi = _bracket(f, a)
    if a.regime == "gapped" and f(hi) <= 0:
        Q = hi
    else:
        Q = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    return FermiPoint(Q, float(density(Q, a).integral()), "energetic", h)


def field_for_boundary(Q: float, a: Anisotropy, J: float = 1.0) -> float:
    """Field h such that eps(Q|Q) = 0; eps = h Z - 2 J chi E_p by linearity."""
    return 2 * J * a.chi() * float(bare_energy_dressed(Q, a)(Q)) / float(dressed_charge(Q, a)(Q))


def fermi_point_for_density(D: float, a: Anisotropy, J: float = 1.0) -> FermiPoint:
    """Energetic Fermi point whose density is exactly D (field tuned accordingly)."""
    q = magnetic_fermi_boundary(D, a).Q
    return FermiPoint(q, D, "energetic", field_for_boundary(q, a, J))


def _two_endpoint_residual(QL, QR, D, a, n):
    def g(x):
        return (kn.bare_momentum(x, a) - 0.5 * D * (kn.bare_phase(x - QR, a) + kn.bare_phase(x - QL, a))) / (2 * np.pi)

    sol = solve_second_kind(g, QL, QR, a, n)
    fL, fR = sol.extend(np.array([QL, QR]))
    return np.array([fR - 0.5 * D, fL + 0.5 * D]), sol


def two_endpoint_solve(
    D: float,
    a: Anisotropy,
    QL0: float,
    QR0: float,
    n_nodes: int = DEFAULT_NODES,
    tol: float = 1e-12,
    max_iter: int = 60,
):
    """Newton solve of f(Q_R) = D/2, f(Q_L) = -D/2 on [Q_L, Q_R].

    Returns (Q_L, Q_R, f) where f is the Nystrom solution on the final interval.
    """
    x = np.array([QL0, QR0], dtype=float)
    if not x[0] < x[1]:
        raise ValueError("need QL0 < QR0")
    F, sol = _two_endpoint_residual(x[0], x[1], D, a, n_nodes)
    step = 1e-7
    for _ in range(max_iter):
        if np.max(np.abs(F)) < tol:
            return float(x[0]), float(x[1]), sol
        jac = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = step
            jac[:, j] = (
                _two_endpoint_residual(*(x + e), D, a, n_nodes)[0]
                - _two_endpoint_residual(*(x - e), D, a, n_nodes)[0]
            ) / (2 * step)
        dx = -np.linalg.solve(jac, F)
        t = 1.0
        while True:
            trial = x + t * dx
            ok = trial[0] < trial[1] and (a.regime != "gapped" or trial[1] - trial[0] < np.pi)
            if ok:
                Ft, solt = _two_endpoint_residual(trial[0], trial[1], D, a, n_nodes)
                if np.max(np.abs(Ft)) < (1 - 1e-4 * t) * np.max(np.abs(F)) or t < 1e-6:
                    break
            t *= 0.5
            if t < 1e-10:
                raise NoConvergence("two-endpoint line search failed")
        x, F, sol = trial, Ft, solt
    if np.max(np.abs(F)) < tol:
        return float(x[0]), float(x[1]), sol
    raise NoConvergence(f"two-endpoint Newton stalled at residual {np.max(np.abs(F)):.3e}")


def ground_energy_density(Q: float, a: Anisotropy, J: float, h: float) -> float:
    """E0(Q) = J Delta - h/2 + int_{-Q}^{Q} e(lam) rho(lam|Q) dlam."""
    rho = density(Q, a)
    grid = rho.table.grid
    return J * a.delta() - 0.5 * h + float(grid.weights @ (kn.bare_energy(grid.nodes, a, J, h) * rho.table.values))


def e0_stationarity_check(a: Anisotropy, J: float, h: float, Q_grid, step: float = 1e-5):
    """Compare dE0/dQ by central differences with the analytic 2 eps(Q|Q) rho(Q|Q).

    The factor 2 accounts for both endpoints of the symmetric interval moving.
    """
    rows = []
    for Q in Q_grid:
        fd = (ground_energy_density(Q + step, a, J, h) - ground_energy_density(Q - step, a, J, h)) / (2 * step)
        eQ = boundary_energy(Q, a, J, h)
        rQ = float(density(Q, a)(Q))
        rows.append({"Q": float(Q), "fd": fd, "analytic": 2 * eQ * rQ, "eps_Q": eQ, "rho_Q": rQ})
    return rows
