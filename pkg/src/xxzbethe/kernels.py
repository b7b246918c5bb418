"""Closed-form special functions of the XXZ chain.

Conventions
-----------
Three regimes are distinguished by the anisotropy Delta:

* ``gapless``   Delta = cos(zeta), 0 < zeta < pi
* ``isotropic`` Delta = 1
* ``gapped``    Delta = cosh(zeta), zeta > 0

The bare momentum ``p`` and the bare phase ``theta`` belong to a single
one-parameter family ``t_eta``.  Here eta = zeta/2 gives ``p`` and
eta = zeta gives ``theta``.  For the isotropic chain eta is 1/2 and 1
respectively.  Every function accepts numpy arrays.  The functions that the
contour quadrature needs also accept complex arguments close to the real axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

REGIMES = ("gapless", "isotropic", "gapped")


@dataclass(frozen=True)
class Anisotropy:
    """Regime tag plus the parameter zeta (ignored for the isotropic chain)."""

    regime: str
    zeta: float = 0.0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.regime == "gapless" and not 0.0 < self.zeta < np.pi:
            raise ValueError("gapless regime needs 0 < zeta < pi")
        if self.regime == "gapped" and not self.zeta > 0.0:
            raise ValueError("gapped regime needs zeta > 0")
        if self.regime == "isotropic":
            object.__setattr__(self, "zeta", 0.0)
        else:
            object.__setattr__(self, "zeta", float(self.zeta))

    @classmethod
    def gapless(cls, zeta: float) -> "Anisotropy":
        return cls("gapless", zeta)

    @classmethod
    def isotropic(cls) -> "Anisotropy":
        return cls("isotropic")

    @classmethod
    def gapped(cls, zeta: float) -> "Anisotropy":
        return cls("gapped", zeta)

    def delta(self) -> float:
        if self.regime == "gapless":
            return float(np.cos(self.zeta))
        if self.regime == "isotropic":
            return 1.0
        return float(np.cosh(self.zeta))

    def iota(self) -> float:
        """Half-width of the natural rapidity domain."""
        return np.pi / 2 if self.regime == "gapped" else np.inf

    def chi(self) -> float:
        """Prefactor chi_Delta of p' in the bare energy."""
        if self.regime == "gapless":
            return float(np.sin(self.zeta))
        if self.regime == "isotropic":
            return 1.0
        return float(np.sinh(self.zeta))

    def kappa(self) -> float:
        """Half-width of the strip used around the real axis."""
        return 0.25 if self.regime == "isotropic" else self.zeta / 4

    @property
    def eta_momentum(self) -> float:
        return 0.5 if self.regime == "isotropic" else self.zeta / 2

    @property
    def eta_phase(self) -> float:
        return 1.0 if self.regime == "isotropic" else self.zeta

    @property
    def free_fermion(self) -> bool:
        return self.regime == "gapless" and abs(self.zeta - np.pi / 2) < 1e-15

    def strip_margin(self) -> float:
        """Distance from the real axis to the nearest singularity of p, theta or K."""
        if self.regime == "gapless":
            return min(self.zeta / 2, np.pi - self.zeta)
        if self.regime == "isotropic":
            return 0.5
        return min(self.zeta / 2, np.pi / 2)

    def decay_weight(self, lam):
        """Envelope g_Delta controlling the decay of finite-size corrections."""
        lam = np.asarray(lam, dtype=float)
        if self.regime == "gapless":
            return 1.0 / np.cosh(2 * lam)
        if self.regime == "isotropic":
            return 1.0 / (1.0 + lam**2)
        return np.ones_like(lam)


# ---------------------------------------------------------------- t_eta family


def _family(lam, a: Anisotropy, eta: float):
    """t_eta(lam): continuous odd branch of i ln(sinh(i eta + lam) / sinh(i eta - lam))."""
    if a.regime == "gapless":
        return 2.0 * np.arctan(np.tanh(lam) / np.tan(eta))
    if a.regime == "isotropic":
        return 2.0 * np.arctan(lam / eta)
    k = np.round(np.real(lam) / np.pi)
    r = lam - k * np.pi
    return 2.0 * np.arctan(np.tan(r) / np.tanh(eta)) + 2.0 * np.pi * k


# sinh/cosh overflow far out on the real line; the quotients there are 0
_QUIET = dict(over="ignore", invalid="ignore")


def _family_d1(lam, a: Anisotropy, eta: float):
    if a.regime == "gapless":
        with np.errstate(**_QUIET):
            return np.sin(2 * eta) / (np.sinh(lam) ** 2 + np.sin(eta) ** 2)
    if a.regime == "isotropic":
        return 2 * eta / (lam**2 + eta**2)
    return np.sinh(2 * eta) / (np.sin(lam) ** 2 + np.sinh(eta) ** 2)


def _family_d2(lam, a: Anisotropy, eta: float):
    if a.regime == "gapless":
        with np.errstate(**_QUIET):
            out = -np.sin(2 * eta) * np.sinh(2 * lam) / (np.sinh(lam) ** 2 + np.sin(eta) ** 2) ** 2
        return np.where(np.isfinite(out), out, 0.0)
    if a.regime == "isotropic":
        return -4 * eta * lam / (lam**2 + eta**2) ** 2
    return -np.sinh(2 * eta) * np.sin(2 * lam) / (np.sin(lam) ** 2 + np.sinh(eta) ** 2) ** 2


def _li2(z):
    return special.spence(1.0 - z)


def _family_primitive(lam, a: Anisotropy, eta: float):
    """Antiderivative of t_eta vanishing at 0 (real lam)."""
    lam = np.asarray(lam, dtype=float)
    if a.regime == "gapless":
        # t_eta = pi - 2 eta - 2 sum_k sin(2k eta) e^{-2k|lam|}/k for lam > 0
        x = np.abs(lam)
        phase = np.exp(2j * eta)
        return (np.pi - 2 * eta) * x + np.imag(_li2(phase * np.exp(-2 * x))) - np.imag(_li2(phase))
    if a.regime == "isotropic":
        return 2 * lam * np.arctan(lam / eta) - eta * np.log1p((lam / eta) ** 2)
    # t_eta = 2 lam + 2 sum_k e^{-2k eta} sin(2k lam)/k
    q = np.exp(-2 * eta)
    return lam**2 + np.real(_li2(q)) - np.real(_li2(q * np.exp(2j * lam)))


# ---------------------------------------------------------------- public API


def bare_momentum(lam, a: Anisotropy):
    return _family(lam, a, a.eta_momentum)


def bare_momentum_d1(lam, a: Anisotropy):
    return _family_d1(lam, a, a.eta_momentum)


def bare_momentum_d2(lam, a: Anisotropy):
    return _family_d2(lam, a, a.eta_momentum)


def bare_momentum_inverse(y, a: Anisotropy):
    """Inverse of the bare momentum on its range."""
    eta = a.eta_momentum
    if a.regime == "gapless":
        return np.arctanh(np.tan(np.asarray(y) / 2) * np.tan(eta))
    if a.regime == "isotropic":
        return eta * np.tan(np.asarray(y) / 2)
    y = np.asarray(y, dtype=float)
    k = np.round(y / (2 * np.pi))
    r = y - 2 * np.pi * k
    return np.arctan(np.tan(r / 2) * np.tanh(eta)) + np.pi * k


def bare_phase(lam, a: Anisotropy):
    return _family(lam, a, a.eta_phase)


def lieb_kernel(lam, a: Anisotropy):
    """K = theta' / 2 pi."""
    return _family_d1(lam, a, a.eta_phase) / (2 * np.pi)


def lieb_kernel_d1(lam, a: Anisotropy):
    return _family_d2(lam, a, a.eta_phase) / (2 * np.pi)


def yang_yang_primitives(lam, a: Anisotropy):
    """Return (P, Theta): antiderivatives of the bare momentum and phase vanishing at 0."""
    return _family_primitive(lam, a, a.eta_momentum), _family_primitive(lam, a, a.eta_phase)


def kernel_integral(a: Anisotropy) -> float:
    """Integral of K over the natural rapidity domain."""
    if a.regime == "gapped":
        return 1.0
    return (np.pi - 2 * a.zeta) / np.pi


# ---------------------------------------------------------------- densities


def _series_terms(zeta: float) -> int:
    # e^{-n zeta} drops below 1e-17
    return int(np.ceil(40.0 / zeta)) + 2


def density_closed_form(lam, a: Anisotropy):
    """Root density of the infinite (massless) or full-interval (massive) ground state."""
    lam = np.asarray(lam, dtype=float)
    with np.errstate(over="ignore"):
        if a.regime == "gapless":
            return 1.0 / (2 * a.zeta * np.cosh(np.pi * lam / a.zeta))
        if a.regime == "isotropic":
            return 1.0 / (2 * np.cosh(np.pi * lam))
    n = np.arange(1, _series_terms(a.zeta))
    c = 1.0 / np.cosh(n * a.zeta)
    return (1.0 + 2.0 * np.cos(2 * np.multiply.outer(lam, n)) @ c) / (2 * np.pi)


def density_poisson(lam, a: Anisotropy, terms: int = 40):
    """Poisson-resummed form of the gapped density (cross-check only)."""
    lam = np.asarray(lam, dtype=float)
    n = np.arange(-terms, terms + 1)
    arg = np.pi * (np.multiply.outer(lam, np.ones_like(n)) - n * np.pi) / a.zeta
    with np.errstate(over="ignore"):
        return np.sum(1.0 / np.cosh(arg), axis=-1) / (2 * a.zeta)


def xi0_infinite(lam, a: Anisotropy):
    """Thermodynamic counting function of the half-filled massless ground state."""
    scale = 1.0 if a.regime == "isotropic" else a.zeta
    return np.arctan(np.sinh(np.pi * np.asarray(lam) / scale)) / (2 * np.pi) + 0.25


def xi0_infinite_inverse(y, a: Anisotropy):
    scale = 1.0 if a.regime == "isotropic" else a.zeta
    return scale / np.pi * np.arcsinh(np.tan(2 * np.pi * (np.asarray(y) - 0.25)))


# ---------------------------------------------------------------- resolvent


def _gapless_symbol(k, zeta):
    """sinh((pi/2-zeta)k) / (cosh(zeta k/2) sinh((pi/2-zeta/2)k)), overflow-safe for k >= 0."""
    a = np.pi / 2 - zeta
    b = np.pi / 2 - zeta / 2
    c = zeta / 2
    k = np.asarray(k, dtype=float)
    out = np.empty_like(k)
    small = k < 1e-12
    out[small] = a / b
    kk = k[~small]
    num = np.sign(a) * -np.expm1(-2 * abs(a) * kk)
    den = (1 + np.exp(-2 * c * kk)) * -np.expm1(-2 * b * kk)
    out[~small] = 2 * num / den * np.exp((abs(a) - b - c) * kk)
    return out


@lru_cache(maxsize=4096)
def _gapless_resolvent_scalar(lam: float, zeta: float) -> float:
    decay = min(zeta, np.pi - zeta)
    kmax = 42.0 / decay  # symbol below ~1e-18
    f = lambda k: _gapless_symbol(np.array([k]), zeta)[0]
    if lam == 0.0:
        val, _ = integrate.quad(f, 0, kmax, limit=400, epsabs=1e-15, epsrel=1e-13)
    else:
        val, _ = integrate.quad(f, 0, kmax, weight="cos", wvar=lam, limit=400, epsabs=1e-15)
    return val / (2 * np.pi)


def resolvent_closed_form(lam, a: Anisotropy):
    """Resolvent R of the translation-invariant operator on the natural domain."""
    lam = np.asarray(lam, dtype=float)
    if a.regime == "gapped":
        n = np.arange(1, _series_terms(a.zeta))
        c = np.exp(-n * a.zeta) / np.cosh(n * a.zeta)
        return (1.0 + 2.0 * np.cos(2 * np.multiply.outer(lam, n)) @ c) / (2 * np.pi)
    if a.regime == "isotropic":
        z = 0.5j * lam
        return np.real(special.psi(1 + z) - special.psi(0.5 + z)) / (2 * np.pi)
    flat = [_gapless_resolvent_scalar(abs(float(x)), a.zeta) for x in lam.ravel()]
    return np.asarray(flat).reshape(lam.shape)


# ---------------------------------------------------------------- energy


def bare_energy(lam, a: Anisotropy, J: float, h: float):
    """e(lam) = h - 2 J chi_Delta p'(lam)."""
    return h - 2 * J * a.chi() * bare_momentum_d1(lam, a)


def bare_energy_d1(lam, a: Anisotropy, J: float):
    return -2 * J * a.chi() * bare_momentum_d2(lam, a)


def critical_fields(a: Anisotropy, J: float = 1.0):
    """Return (h_c, h_c_lower); h_c_lower is None outside the gapped regime."""
    if a.regime == "gapped":
        return 8 * J * np.cosh(a.zeta / 2) ** 2, 8 * J * np.sinh(a.zeta / 2) ** 2
    return 8 * J * np.cos(a.zeta / 2) ** 2, None
