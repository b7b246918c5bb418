"""Physical outputs built from solved states: root sums, energies, conformal spectrum."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels as kn
from .bae import BetheState, ChainParams, ExcitationSpec, solve_state
from .counting import CountingFn, expansion, fit_exponent, reference_fermi
from .dressed import (
    density,
    dressed_charge,
    dressed_energy,
    effective_dressed_energy,
    effective_dressed_energy_d1,
)
from .errors import ZeroDensity
from .fermi import FermiPoint, fermi_point_for_density, ground_energy_density
from .kernels import Anisotropy
from .linsolve import gauss_legendre

FUNCTION_CATALOG: dict[str, Callable] = {
    "one": lambda x: np.ones(np.shape(x)),
    "tanh": np.tanh,
    "gauss": lambda x: np.exp(-np.asarray(x) ** 2),
}


def catalog_function(name: str, a: Anisotropy | None = None, J: float = 1.0, h: float = 0.0) -> Callable:
    if name == "bare_energy":
        return lambda x: kn.bare_energy(x, a, J, h)
    return FUNCTION_CATALOG[name]


def densify(state: BetheState, f: Callable, fermi: FermiPoint, nodes: int = 256):
    """Return (sum/L, integral of f rho over [-q, q], gap).

    The sum runs over the N' roots of the state.
    """
    L = state.params.L
    s = float(np.sum(f(state.roots))) / L
    if fermi.Q == 0:
        return s, 0.0, abs(s)
    rho = density(fermi.Q, state.anisotropy)
    g = gauss_legendre(-fermi.Q, fermi.Q, nodes)
    integral = float(g.weights @ (f(g.nodes) * rho(g.nodes)))
    return s, integral, abs(s - integral)


def energy_raw(state: BetheState, a: Anisotropy | None = None) -> float:
    """E = (J Delta - h/2) L + sum_a e(lam_a)."""
    a = a or state.anisotropy
    p = state.params
    return (p.J * a.delta() - 0.5 * p.h) * p.L + float(np.sum(kn.bare_energy(state.roots, a, p.J, p.h)))


@dataclass(frozen=True)
class SpectrumRecord:
    L: int
    N: int
    spec: ExcitationSpec
    E_raw: float
    E0: float
    E1: float
    E2: float
    v_F: float
    conformal_prediction: float
    defect: float
    extras: dict = field(default_factory=dict)


def energy_decomposition(state: BetheState, fermi: FermiPoint | None = None, spec: ExcitationSpec | None = None) -> SpectrumRecord:
    """E_raw against L E0(q) + E1 + E2/L with q the reference Fermi point for N/L."""
    a, p = state.anisotropy, state.params
    cf = CountingFn(state, p, a)
    fermi = fermi or reference_fermi(p, a)
    q = fermi.Q
    b = expansion(cf, fermi, spec)
    J, h = p.J, p.h
    E0 = ground_energy_density(q, a, J, h)
    E1 = 0.0
    if len(b.x_particles):
        E1 += float(np.sum(effective_dressed_energy(q, b.x_particles, a, J, h)))
    if len(b.x_holes):
        E1 -= float(np.sum(effective_dressed_energy(q, b.x_holes, a, J, h)))
    de = float(effective_dressed_energy_d1(q, np.array([q]), a, J, h)[0])
    rq = b.rho_q
    E2 = -de / (12 * rq) + 0.5 * de * rq * (b.q_plus_1**2 + b.q_minus_1**2)
    E = energy_raw(state, a)
    return SpectrumRecord(
        p.L, p.N, spec or ExcitationSpec(), E, E0, E1, E2, float("nan"), float("nan"),
        abs(E - (p.L * E0 + E1 + E2 / p.L)),
    )


def fermi_velocity(fermi: FermiPoint, a: Anisotropy, J: float = 1.0) -> float:
    """v_F = eps'(Q_F|Q_F) / p'(Q_F|Q_F), with p' = rho at the Fermi point."""
    Q = fermi.Q
    eps = dressed_energy(Q, a, J, fermi.h)
    rho_q = float(density(Q, a)(Q))
    if rho_q < 1e-12:
        raise ZeroDensity("p'(Q_F) vanishes")
    return float(eps.derivative(Q)) / rho_q


def conformal_bracket(spec: ExcitationSpec, params: ChainParams, Z: float) -> float:
    """-1/12 + l^2 (Z^2 - 1) + s^2/(4 Z^2) + sum over edge excitations of (n - 1/2)."""
    Np = params.N + spec.s
    edge = 0.0
    for p in spec.particles:
        edge += (p - Np - 0.5) if p > Np else (1 - p - 0.5)
    for hle in spec.holes:
        right = Np + 1 - hle
        edge += (right - 0.5) if right <= hle else (hle - 0.5)
    ell = spec.umklapp_ell
    return -1.0 / 12 + ell**2 * (Z**2 - 1) + spec.s**2 / (4 * Z**2) + edge


def conformal_check(
    a: Anisotropy,
    D: float,
    families: dict[str, Callable[[int], ExcitationSpec]],
    L_list,
    J: float = 1.0,
):
    """Finite-size spectrum at the field whose Fermi density equals D.

    ``families`` maps a label to a function N -> ExcitationSpec.  The field is
    tuned so that N = D L is exactly the Fermi count for every L in the ladder.
    Returns per-row dicts and, per family, the fitted decay exponent of the
    scaled deviation from the conformal prediction.
    """
    fermi = fermi_point_for_density(D, a, J)
    h = fermi.h
    vF = fermi_velocity(fermi, a, J)
    Z = float(dressed_charge(fermi.Q, a)(fermi.Q))
    E0 = ground_energy_density(fermi.Q, a, J, h)
    rows = []
    for label, make in families.items():
        for L in L_list:
            N = int(round(D * L))
            params = ChainParams(int(L), N, J, h)
            spec = make(N)
            state = solve_state(params, spec, a)
            E = energy_raw(state, a)
            scaled = L * (E - L * E0)
            bracket = conformal_bracket(spec, params, Z)
            rows.append({
                "family": label, "L": int(L), "N": N, "E_raw": E, "scaled": scaled,
                "prediction": vF * bracket, "bracket": bracket,
                "deviation": scaled - vF * bracket, "v_F": vF, "Z": Z, "h": h,
            })
    fits = {}
    for label in families:
        sub = [r for r in rows if r["family"] == label]
        dev = [abs(r["deviation"]) for r in sub]
        if len(sub) > 1 and all(d > 0 for d in dev):
            fits[label] = fit_exponent([r["L"] for r in sub], dev)
    return rows, fits
