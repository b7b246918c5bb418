"""Dressed thermodynamic functions on the Fermi interval I_Q = [-Q, Q].

Each quantity solves ``(id + K_{I_Q}) f = g`` for its own driving term ``g``.
The density is rho, the dressed charge Z, the dressed phase phi(., mu),
the dressed energy eps and the dressed momentum p.  Off the grid, values come
from the Nystrom extension, so every function is defined on the whole real line.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from . import kernels as kn
from .errors import OutOfRange
from .kernels import Anisotropy
from .linsolve import NystromSolution, solve_second_kind


@dataclass(frozen=True, eq=False)
class DressedTable:
    which: str
    Q: float
    table: NystromSolution

    def __call__(self, lam):
        return self.table.extend(lam)

    def derivative(self, lam):
        return self.table.derivative(lam)

    def integral(self):
        return self.table.integral()


def _solve(which, Q, a, g, dg, n_nodes):
    Q = float(Q)
    if Q < 0:
        raise ValueError("Q must be non-negative")
    return DressedTable(which, Q, solve_second_kind(g, -Q, Q, a, n_nodes, dg))


@lru_cache(maxsize=256)
def density(Q: float, a: Anisotropy, n_nodes: int | None = None) -> DressedTable:
    """Root density rho(lam|Q): driving p'/2pi."""
    return _solve(
        "density", Q, a,
        lambda x: kn.bare_momentum_d1(x, a) / (2 * np.pi),
        lambda x: kn.bare_momentum_d2(x, a) / (2 * np.pi),
        n_nodes,
    )


@lru_cache(maxsize=256)
def dressed_charge(Q: float, a: Anisotropy, n_nodes: int | None = None) -> DressedTable:
    return _solve(
        "charge", Q, a,
        lambda x: np.ones(np.shape(x)),
        lambda x: np.zeros(np.shape(x)),
        n_nodes,
    )


def dressed_phase(Q: float, mu, a: Anisotropy, n_nodes: int | None = None) -> DressedTable:
    """phi(lam, mu|Q) for one mu (scalar) or many (vector, one column each)."""
    mu_arr = np.asarray(mu)
    if mu_arr.ndim == 0:
        return _dressed_phase_scalar(float(Q), float(mu_arr), a, n_nodes)
    return _solve(
        "phase", Q, a,
        lambda x: kn.bare_phase(np.subtract.outer(x, mu_arr), a) / (2 * np.pi),
        lambda x: kn.lieb_kernel(np.subtract.outer(x, mu_arr), a),
        n_nodes,
    )


@lru_cache(maxsize=1024)
def _dressed_phase_scalar(Q, mu, a, n_nodes):
    return _solve(
        "phase", Q, a,
        lambda x: kn.bare_phase(x - mu, a) / (2 * np.pi),
        lambda x: kn.lieb_kernel(x - mu, a),
        n_nodes,
    )


@lru_cache(maxsize=256)
def dressed_energy(Q: float, a: Anisotropy, J: float, h: float, n_nodes: int | None = None) -> DressedTable:
    return _solve(
        "energy", Q, a,
        lambda x: kn.bare_energy(x, a, J, h),
        lambda x: kn.bare_energy_d1(x, a, J),
        n_nodes,
    )


@lru_cache(maxsize=256)
def bare_energy_dressed(Q: float, a: Anisotropy, n_nodes: int | None = None) -> DressedTable:
    """Dressing of p'; eps = h Z - 2 J chi (this) by linearity."""
    return _solve(
        "energy", Q, a,
        lambda x: kn.bare_momentum_d1(x, a),
        lambda x: kn.bare_momentum_d2(x, a),
        n_nodes,
    )


@lru_cache(maxsize=256)
def dressed_momentum(Q: float, D: float, a: Anisotropy, n_nodes: int | None = None) -> DressedTable:
    """p(lam|Q): driving p/2pi - D/4pi [theta(lam-Q) + theta(lam+Q)]."""
    def g(x):
        return (kn.bare_momentum(x, a) - 0.5 * D * (kn.bare_phase(x - Q, a) + kn.bare_phase(x + Q, a))) / (2 * np.pi)

    def dg(x):
        return kn.bare_momentum_d1(x, a) / (2 * np.pi) - 0.5 * D * (
            kn.lieb_kernel(x - Q, a) + kn.lieb_kernel(x + Q, a)
        )

    return _solve("momentum", Q, a, g, dg, n_nodes)


def effective_dressed_energy(Q: float, lam, a: Anisotropy, J: float, h: float, n_nodes=None):
    """eps(lam|Q) + eps(Q|Q) (phi(Q, lam|Q) - phi(-Q, lam|Q))."""
    eps = dressed_energy(Q, a, J, h, n_nodes)
    lam = np.asarray(lam, dtype=float)
    eQ = float(eps(Q))
    phases = dressed_phase(Q, np.atleast_1d(lam), a, n_nodes)
    corr = phases(np.array([Q, -Q]))  # rows: lambda=+Q,-Q; columns: mu=lam
    return eps(lam) + eQ * (corr[0] - corr[1]).reshape(lam.shape)


def effective_dressed_energy_d1(Q: float, lam, a: Anisotropy, J: float, h: float, n_nodes=None):
    """Derivative of the effective dressed energy in lam.

    d/dmu phi(x, mu|Q) solves the same equation with driving -K(x - mu).
    """
    eps = dressed_energy(Q, a, J, h, n_nodes)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    eQ = float(eps(Q))
    dphi = solve_second_kind(
        lambda x: -kn.lieb_kernel(np.subtract.outer(x, lam), a), -Q, Q, a, n_nodes
    )
    corr = dphi.extend(np.array([Q, -Q]))
    return eps.derivative(lam) + eQ * (corr[0] - corr[1])


def xi0(lam, q_hat: float, D_hat: float, a: Anisotropy, n_nodes=None):
    """Thermodynamic counting function p(lam|q_hat) + D_hat/2."""
    return dressed_momentum(q_hat, D_hat, a, n_nodes)(lam) + 0.5 * D_hat


def xi0_range(D_hat: float, a: Anisotropy):
    """Image of the real line under xi0."""
    if a.regime == "gapped":
        return -np.inf, np.inf
    w = (np.pi - a.zeta) / np.pi * (0.5 - D_hat)
    return -w, D_hat + w


def xi0_inverse(y, q_hat: float, D_hat: float, a: Anisotropy, n_nodes=None):
    """Invert xi0 by bracketed root finding (xi0 is strictly increasing)."""
    lo, hi = xi0_range(D_hat, a)
    p = dressed_momentum(q_hat, D_hat, a, n_nodes)
    f = lambda x, t: float(p(x)) + 0.5 * D_hat - t
    out = []
    for t in np.atleast_1d(np.asarray(y, dtype=float)):
        if not lo < t < hi:
            raise OutOfRange(f"{t} outside ({lo}, {hi})")
        x0, x1 = -1.0, 1.0
        while f(x0, t) > 0:
            x0 *= 2
        while f(x1, t) < 0:
            x1 *= 2
        out.append(optimize.brentq(f, x0, x1, args=(t,), xtol=1e-15, rtol=1e-15, maxiter=200))
    out = np.asarray(out)
    return out if np.ndim(y) else float(out[0])
