"""Finite-size logarithmic Bethe equations and the Yang-Yang action."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels as kn
from .dressed import xi0_inverse, xi0_range
from .errors import InvalidSpec, NoConvergence
from .fermi import magnetic_fermi_boundary
from .kernels import Anisotropy

# |p_a / L| bound for admissible particles in the gapped regime
GAPPED_PARTICLE_BOUND = 4.0
DISTINCT_GUARD = 1e-9


@dataclass(frozen=True)
class ChainParams:
    L: int
    N: int
    J: float = 1.0
    h: float = 0.0

    def __post_init__(self):
        if self.L <= 0 or self.L % 2:
            raise InvalidSpec(f"L={self.L} must be a positive even integer")
        if not 0 <= self.N <= self.L // 2:
            raise InvalidSpec(f"N={self.N} must satisfy 0 <= N <= L/2")
        if not self.J > 0:
            raise InvalidSpec("J must be positive")

    @property
    def D_hat(self) -> float:
        return self.N / self.L


@dataclass(frozen=True)
class ExcitationSpec:
    """Holes are removed from and particles added to the reference integers 1..N+s."""

    holes: tuple = ()
    particles: tuple = ()
    s: int = 0
    umklapp_ell: int = 0

    def __post_init__(self):
        object.__setattr__(self, "holes", tuple(sorted(int(x) for x in self.holes)))
        object.__setattr__(self, "particles", tuple(sorted(int(x) for x in self.particles)))
        if len(self.holes) != len(self.particles):
            raise InvalidSpec("number of holes and particles must agree")
        if len(set(self.holes)) != len(self.holes) or len(set(self.particles)) != len(self.particles):
            raise InvalidSpec("holes and particles must be distinct integers")

    @property
    def n(self) -> int:
        return len(self.holes)


GROUND = ExcitationSpec()


@dataclass(frozen=True, eq=False)
class BetheState:
    roots: np.ndarray
    integers: np.ndarray
    residual: float
    action_value: float
    params: ChainParams = field(repr=False, default=None)
    anisotropy: Anisotropy = field(repr=False, default=None)
    iterations: int = 0

    @property
    def n_roots(self) -> int:
        return len(self.roots)


def resolve_integers(params: ChainParams, spec: ExcitationSpec, a: Anisotropy | None = None) -> np.ndarray:
    """Sorted quantum numbers l_a for the requested excitation."""
    L = params.L
    Np = params.N + spec.s
    if not 0 <= Np <= L // 2:
        raise InvalidSpec(f"N + s = {Np} must lie in [0, L/2]")
    for hole in spec.holes:
        if not 1 <= hole <= Np:
            raise InvalidSpec(f"hole {hole} outside [1, {Np}]")
    for p in spec.particles:
        if 1 <= p <= Np:
            raise InvalidSpec(f"particle {p} inside [1, {Np}]")
    n = spec.n
    if a is not None and a.regime != "gapped":
        width = (np.pi - a.zeta) / np.pi
        edge = width * (0.5 - (Np - 1) / L)
        if n:
            if not edge > (spec.particles[-1] - Np) / L:
                raise InvalidSpec("largest particle violates the right admissibility bound")
            if not (spec.particles[0] - 1) / L > -edge:
                raise InvalidSpec("smallest particle violates the left admissibility bound")
        if not width * (0.5 - Np / L) >= n / L:
            raise InvalidSpec("too many particle-hole pairs for the admissible window")
    if a is not None and a.regime == "gapped" and n:
        if max(abs(p) for p in spec.particles) / L > GAPPED_PARTICLE_BOUND:
            raise InvalidSpec(f"|p_a/L| exceeds {GAPPED_PARTICLE_BOUND}")
    ints = sorted((set(range(1, Np + 1)) - set(spec.holes)) | set(spec.particles))
    return np.asarray(ints, dtype=np.int64)


def effective_excitations(params: ChainParams, integers) -> tuple[np.ndarray, np.ndarray]:
    """Particles and holes of the integer set measured against the reference 1..N."""
    ref = set(range(1, params.N + 1))
    s = set(int(x) for x in integers)
    return np.asarray(sorted(s - ref), dtype=np.int64), np.asarray(sorted(ref - s), dtype=np.int64)


def _shifted(integers, L):
    return (np.asarray(integers, dtype=float) - 0.5 * (len(integers) + 1)) / L


def yang_yang(mu, params: ChainParams, integers, a: Anisotropy):
    """Return (S, grad, hess) of the Yang-Yang action at mu."""
    mu = np.asarray(mu, dtype=float)
    L = params.L
    n_over_L = _shifted(integers, L)
    diff = np.subtract.outer(mu, mu)
    P, _ = kn.yang_yang_primitives(mu, a)
    _, Theta = kn.yang_yang_primitives(diff, a)
    S = P.sum() / (2 * np.pi) - Theta.sum() / (4 * np.pi * L) - mu @ n_over_L
    grad = bethe_residual(mu, params, integers, a)
    Kmat = kn.lieb_kernel(diff, a) / L
    hess = Kmat.copy()
    hess[np.diag_indices_from(hess)] += kn.bare_momentum_d1(mu, a) / (2 * np.pi) - Kmat.sum(axis=1)
    return S, grad, hess


def bethe_residual(mu, params: ChainParams, integers, a: Anisotropy):
    """Gradient of the action = defect of the logarithmic Bethe equations."""
    mu = np.asarray(mu, dtype=float)
    L = params.L
    theta = kn.bare_phase(np.subtract.outer(mu, mu), a)
    return kn.bare_momentum(mu, a) / (2 * np.pi) - theta.sum(axis=1) / (2 * np.pi * L) - _shifted(integers, L)


def _jacobian(mu, params, a):
    L = params.L
    Kmat = kn.lieb_kernel(np.subtract.outer(mu, mu), a) / L
    jac = Kmat.copy()
    jac[np.diag_indices_from(jac)] += kn.bare_momentum_d1(mu, a) / (2 * np.pi) - Kmat.sum(axis=1)
    return jac


def initial_guess(params: ChainParams, integers, a: Anisotropy) -> np.ndarray:
    """Invert the thermodynamic counting function at (l_a - 1/2)/L."""
    L = params.L
    Np = len(integers)
    D_hat = Np / L
    y = (np.asarray(integers, dtype=float) - 0.5) / L
    if a.regime != "gapped" and D_hat >= 0.5:
        return kn.xi0_infinite_inverse(np.clip(y, 1e-9, 0.5 - 1e-9), a)
    lo, hi = xi0_range(D_hat, a)
    margin = 1e-6
    y = np.clip(y, lo + margin, hi - margin)
    q = magnetic_fermi_boundary(D_hat, a).Q
    return np.asarray(xi0_inverse(y, q, D_hat, a))


def normalize_gapped(roots: np.ndarray) -> np.ndarray:
    """Map roots into (-pi/2, pi/2]."""
    return roots - np.pi * np.ceil(roots / np.pi - 0.5)


def solve_state(
    params: ChainParams,
    spec: ExcitationSpec,
    a: Anisotropy,
    tol: float = 1e-12,
    accept: float = 1e-10,
    max_iter: int = 100,
    mu0=None,
) -> BetheState:
    """Damped Newton on the Bethe residual with Armijo backtracking on |grad|^2."""
    integers = resolve_integers(params, spec, a)
    if len(integers) == 0:
        return BetheState(np.empty(0), integers, 0.0, 0.0, params, a)
    mu = initial_guess(params, integers, a) if mu0 is None else np.asarray(mu0, dtype=float)
    g = bethe_residual(mu, params, integers, a)
    merit = g @ g
    it = 0
    stalls = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(g)) < tol:
            break
        try:
            step = -np.linalg.solve(_jacobian(mu, params, a), g)
        except np.linalg.LinAlgError:
            step = -g
        t = 1.0
        while t > 1e-8:
            trial = mu + t * step
            gt = bethe_residual(trial, params, integers, a)
            if gt @ gt <= (1 - 1e-4 * t) * merit:
                break
            t *= 0.5
        else:
            stalls += 1
            trial, gt = _gradient_descent(mu, params, integers, a)
        mu, g = trial, gt
        new_merit = g @ g
        if new_merit >= merit and np.max(np.abs(g)) >= accept:
            stalls += 1
        merit = new_merit
        if stalls > 3:
            break
    res = float(np.max(np.abs(g)))
    if not res < accept:
        raise NoConvergence(f"Bethe solve stopped at residual {res:.3e} after {it} iterations")
    order = np.argsort(integers, kind="stable")
    roots = mu[order]
    if np.any(np.diff(np.sort(roots)) < DISTINCT_GUARD):
        raise NoConvergence("two Bethe roots coincide within 1e-9")
    if a.regime == "gapped":
        roots = normalize_gapped(roots)
    S = yang_yang(mu, params, integers, a)[0]
    return BetheState(roots, integers[order], res, float(S), params, a, it)


def _gradient_descent(mu, params, integers, a, steps: int = 200):
    """Fallback: fixed-step descent on the action, step set by the Hessian scale."""
    for _ in range(steps):
        S, g, H = yang_yang(mu, params, integers, a)
        lr = 1.0 / max(np.max(np.abs(np.diag(H))), 1e-12)
        mu = mu - lr * g
    return mu, bethe_residual(mu, params, integers, a)
