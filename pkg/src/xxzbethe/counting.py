"""Counting function of a finite Bethe state and its large-L description.

For a solved state with N' roots,

    xi(lam) = p(lam)/2pi - (1/2piL) sum_a theta(lam - lam_a) + (N'+1)/2L,

and xi(lam_a) = l_a/L.  This module evaluates and inverts xi, including
at complex arguments near the real axis.  It also checks the exact nonlinear
integral equation that xi satisfies, builds the coefficients of its 1/L
expansion and reports convergence ladders.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels as kn
from .bae import GROUND, BetheState, ChainParams, ExcitationSpec, effective_excitations, solve_state
from .dressed import density, dressed_charge, dressed_phase, xi0
from .errors import ContourTooClose, NoConvergence, OutOfRange
from .fermi import FermiPoint, magnetic_fermi_boundary
from .kernels import Anisotropy
from .linsolve import ResolventKernel, gauss_legendre

_CHUNK = 1 << 18


class CountingFn:
    """Counting function attached to a solved Bethe state."""

    def __init__(self, state: BetheState, params: ChainParams | None = None, a: Anisotropy | None = None):
        self.state = state
        self.params = params or state.params
        self.a = a or state.anisotropy
        self.roots = np.asarray(state.roots, dtype=float)
        self.L = self.params.L
        self.n_roots = len(self.roots)
        self.offset = (self.n_roots + 1) / (2 * self.L)

    def _sum(self, fun, lam):
        lam = np.asarray(lam)
        flat = lam.reshape(-1)
        out = np.empty(flat.shape, dtype=np.result_type(flat.dtype, float))
        step = max(1, _CHUNK // max(self.n_roots, 1))
        for i in range(0, flat.size, step):
            block = flat[i:i + step]
            out[i:i + step] = fun(np.subtract.outer(block, self.roots), self.a).sum(axis=1)
        return out.reshape(lam.shape)

    def __call__(self, lam):
        return self.evaluate(lam)

    def evaluate(self, lam):
        lam = np.asarray(lam)
        return (
            kn.bare_momentum(lam, self.a) / (2 * np.pi)
            - self._sum(kn.bare_phase, lam) / (2 * np.pi * self.L)
            + self.offset
        )

    def derivative(self, lam):
        lam = np.asarray(lam)
        return kn.bare_momentum_d1(lam, self.a) / (2 * np.pi) - self._sum(kn.lieb_kernel, lam) / self.L

    def second_derivative(self, lam):
        lam = np.asarray(lam)
        return kn.bare_momentum_d2(lam, self.a) / (2 * np.pi) - self._sum(kn.lieb_kernel_d1, lam) / self.L

    def value_range(self):
        """Limits of xi at -inf and +inf."""
        if self.a.regime == "gapped":
            return -np.inf, np.inf
        zeta = self.a.zeta
        D = self.n_roots / self.L
        w = (np.pi - zeta) / np.pi * (0.5 - D)
        return -w + 1 / (2 * self.L), D + 1 / (2 * self.L) + w

    # ------------------------------------------------------------ inversion

    def invert(self, y, tol: float = 1e-15, max_iter: int = 200):
        """Real preimage by safeguarded Newton-bisection."""
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        lo_r, hi_r = self.value_range()
        if np.any(y_arr <= lo_r) or np.any(y_arr >= hi_r):
            raise OutOfRange(f"value outside the range ({lo_r}, {hi_r})")
        vals = np.asarray(self.state.integers, dtype=float) / self.L
        order = np.argsort(self.roots)
        r_sorted, v_sorted = self.roots[order], vals[order]
        idx = np.searchsorted(v_sorted, y_arr)
        span = 1.0 if self.n_roots == 0 else max(1.0, float(np.ptp(r_sorted)))
        lo = np.where(idx > 0, r_sorted[np.maximum(idx - 1, 0)] if self.n_roots else 0.0, np.nan)
        hi = np.where(idx < self.n_roots, r_sorted[np.minimum(idx, self.n_roots - 1)] if self.n_roots else 0.0, np.nan)
        # open brackets: grow outward
        for side, arr, sign in (("lo", lo, -1.0), ("hi", hi, 1.0)):
            miss = np.isnan(arr)
            if np.any(miss):
                other = hi if side == "lo" else lo
                base = np.where(np.isnan(other), 0.0, other)
                width = np.full(base.shape, span)
                cand = base + sign * width
                for _ in range(200):
                    f = self.evaluate(cand) - y_arr
                    bad = miss & ((f > 0) if side == "lo" else (f < 0))
                    if not np.any(bad):
                        break
                    width = np.where(bad, 2 * width, width)
                    cand = np.where(bad, base + sign * width, cand)
                arr[miss] = cand[miss]
        x = 0.5 * (lo + hi)
        for _ in range(max_iter):
            f = self.evaluate(x) - y_arr
            if np.max(np.abs(f)) <= tol:
                break
            lo = np.where(f < 0, x, lo)
            hi = np.where(f > 0, x, hi)
            newton = x - f / self.derivative(x)
            inside = (newton > lo) & (newton < hi)
            x_new = np.where(inside, newton, 0.5 * (lo + hi))
            if np.all(x_new == x):
                break
            x = x_new
        return x if np.ndim(y) else float(x[0])

    def invert_complex(self, z, tol: float = 1e-14, max_iter: int = 60):
        """Complex Newton for xi(mu) = z seeded from the real inverse of Re z."""
        z = np.asarray(z, dtype=complex)
        x0 = self.invert(z.real)
        mu = x0 + 1j * z.imag / self.derivative(x0)
        for _ in range(max_iter):
            f = self.evaluate(mu) - z
            if np.max(np.abs(f)) < tol:
                break
            mu = mu - f / self.derivative(mu)
        else:
            if np.max(np.abs(self.evaluate(mu) - z)) > 1e-10:
                raise NoConvergence("complex inversion of the counting function failed")
        return mu

    # ------------------------------------------------------------ structure

    def endpoints(self) -> tuple[float, float]:
        """(q_L, q_R) = xi^{-1}(1/2L), xi^{-1}((N+1/2)/L) for the reference count N."""
        N = self.params.N
        qL, qR = self.invert(np.array([0.5, N + 0.5]) / self.L)
        return float(qL), float(qR)

    def rapidities(self):
        """Effective particle and hole rapidities relative to the reference 1..N."""
        parts, holes = effective_excitations(self.params, self.state.integers)
        x_p = self.invert(parts / self.L) if len(parts) else np.empty(0)
        x_h = self.invert(holes / self.L) if len(holes) else np.empty(0)
        return np.atleast_1d(x_p), np.atleast_1d(x_h)


def reference_fermi(params: ChainParams, a: Anisotropy) -> FermiPoint:
    """Magnetic Fermi point for D_hat = N/L."""
    return magnetic_fermi_boundary(params.D_hat, a)


# ---------------------------------------------------------------- expansion


@dataclass(frozen=True, eq=False)
class ExpansionBundle:
    q_hat: float
    D_hat: float
    s: int
    x_particles: np.ndarray
    x_holes: np.ndarray
    xi0: Callable
    xi1: Callable
    xi1_d1: Callable
    xi2: Callable
    q_plus_1: float
    q_minus_1: float
    q_plus_2: float
    q_minus_2: float
    rho_q: float

    def predict(self, lam, L: int, order: int = 2):
        out = self.xi0(lam)
        if order >= 1:
            out = out + self.xi1(lam) / L
        if order >= 2:
            out = out + self.xi2(lam) / L**2
        return out


def expansion(cf: CountingFn, fermi: FermiPoint | None = None, spec: ExcitationSpec | None = None) -> ExpansionBundle:
    """Coefficients of xi = xi0 + xi1/L + xi2/L^2 + ... and of the endpoint shifts."""
    a = cf.a
    fermi = fermi or reference_fermi(cf.params, a)
    q, D = fermi.Q, fermi.D
    s = cf.n_roots - cf.params.N
    x_p, x_h = cf.rapidities()
    Z = dressed_charge(q, a)
    rho = density(q, a)
    mus = np.concatenate([x_p, x_h])
    signs = np.concatenate([-np.ones(len(x_p)), np.ones(len(x_h))])
    phases = dressed_phase(q, mus, a) if len(mus) else None

    def xi1(lam):
        lam = np.asarray(lam, dtype=float)
        out = 0.5 * (1 + s * Z(lam))
        if phases is not None:
            out = out + phases(lam) @ signs
        return out

    def xi1_d1(lam):
        lam = np.asarray(lam, dtype=float)
        out = 0.5 * s * Z.derivative(lam)
        if phases is not None:
            out = out + phases.derivative(lam) @ signs
        return out

    rk = ResolventKernel(-q, q, a, rho.table.grid.size)
    rho_q = float(rho(q))
    ends = np.array([q, -q])
    xi1_ends = xi1(ends)
    weights = np.array([1.0, -1.0]) * ((xi1_ends - 0.5) ** 2 - 1.0 / 12) / (2 * rho_q)

    def xi2(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        out = rk(lam, ends) @ weights
        return out

    dxi1 = xi1_d1(ends)
    d2 = rho.derivative(ends)  # xi0'' = rho'
    xi2_ends = xi2(ends)
    q1 = (0.5 - xi1_ends) / rho_q
    q2 = -(q1 * q1 * d2 / 2 + dxi1 * q1 + xi2_ends) / rho_q
    return ExpansionBundle(
        q, D, s, x_p, x_h,
        lambda lam: xi0(lam, q, D, a),
        xi1, xi1_d1, xi2,
        float(q1[0]), float(q1[1]), float(q2[0]), float(q2[1]), rho_q,
    )


# ---------------------------------------------------------------- NLIE


@dataclass(frozen=True)
class NLIEReport:
    residual: float
    residual_without_remainder: float
    alpha: float
    n_contour_nodes: int
    remainder_sup: float


def _graded_panels(length: float, scale: float, order: int):
    """Gauss-Legendre nodes on [0, length] with panels doubling from ``scale``."""
    edges = [0.0]
    w = scale
    while edges[-1] + w < length:
        edges.append(edges[-1] + w)
        w *= 2
    edges.append(length)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        g = gauss_legendre(lo, hi, order)
        xs.append(g.nodes)
        ws.append(g.weights)
    return np.concatenate(xs), np.concatenate(ws)


def _uniform_panels(a: float, b: float, total: int, order: int = 16):
    panels = max(1, int(np.ceil(total / order)))
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        g = gauss_legendre(lo, hi, order)
        xs.append(g.nodes)
        ws.append(g.weights)
    return np.concatenate(xs), np.concatenate(ws)


def contour_height(cf: CountingFn, q_hat: float) -> float:
    """Height of the rectangle in the z-plane: min(kappa/2, 0.8 * verified margin)."""
    qL, qR = cf.endpoints()
    grid = np.linspace(min(qL, -q_hat), max(qR, q_hat), 65)
    slope = float(np.min(cf.derivative(grid)))
    margin_z = 0.5 * cf.a.strip_margin() * slope
    return min(cf.a.kappa() / 2, 0.8 * margin_z)


def nlie_remainders(cf: CountingFn, fermi: FermiPoint, lam, n_contour: int = 512, alpha: float | None = None):
    """Return (S1, S2, S3, alpha, nodes) evaluated at the real points lam."""
    a, L, N = cf.a, cf.L, cf.params.N
    q = fermi.Q
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    safe = contour_height(cf, q)
    if alpha is None:
        alpha = safe
    elif alpha > safe / 0.8:
        raise ContourTooClose(f"alpha={alpha} exceeds the verified margin {safe / 0.8}")
    zL, zR = 0.5 / L, (N + 0.5) / L
    qL, qR = cf.endpoints()
    rk = ResolventKernel(-q, q, a, density(q, a).table.grid.size)

    # upper contour: up the right leg, leftwards along the top, down the left leg
    order = max(8, n_contour // 32)
    y, wy = _graded_panels(alpha, 0.25 / (2 * np.pi * L), order)
    xh, wh = _uniform_panels(zR, zL, max(n_contour, 8 * L))
    z = np.concatenate([zR + 1j * y, xh + 1j * alpha, zL + 1j * y[::-1]])
    dz = np.concatenate([1j * wy, -np.abs(wh) * np.sign(zR - zL) + 0j, -1j * wy[::-1]])
    mu = cf.invert_complex(z)
    if np.max(np.abs(mu.imag)) > 0.8 * a.strip_margin():
        raise ContourTooClose("contour preimage approaches a singularity of the kernels")
    weight = np.log1p(-np.exp(2j * np.pi * L * z)) / cf.derivative(mu) * dz
    upper = rk(lam, mu) @ weight
    # lower contour is the mirror image traversed backwards: total = -Im(upper)/(pi L)
    s1 = -upper.imag / (np.pi * L)

    def tail(lo, hi, anchor):
        g = gauss_legendre(min(lo, hi), max(lo, hi), 32)
        sign = 1.0 if hi >= lo else -1.0
        vals = cf.evaluate(g.nodes) - cf.evaluate(anchor)
        return -sign * rk(lam, g.nodes) @ (g.weights * vals)

    s2 = tail(q, qR, qR)
    s3 = tail(qL, -q, qL)
    return s1, s2, s3, alpha, len(z)


def nlie_residual(
    cf: CountingFn,
    fermi: FermiPoint | None = None,
    spec: ExcitationSpec | None = None,
    n_contour: int = 512,
    test_points=None,
    alpha: float | None = None,
) -> NLIEReport:
    """sup-norm defect of xi = xi0 + Phi/L + S1 + S2 + S3 on a real test grid."""
    fermi = fermi or reference_fermi(cf.params, cf.a)
    q = fermi.Q
    lam = np.linspace(-2 * q, 2 * q, 41) if test_points is None else np.asarray(test_points, dtype=float)
    bundle = expansion(cf, fermi, spec)
    lhs = cf.evaluate(lam)
    base = bundle.xi0(lam) + bundle.xi1(lam) / cf.L
    s1, s2, s3, alpha, n = nlie_remainders(cf, fermi, lam, n_contour, alpha)
    rem = s1 + s2 + s3
    return NLIEReport(
        float(np.max(np.abs(lhs - base - rem))),
        float(np.max(np.abs(lhs - base))),
        float(alpha),
        int(n),
        float(np.max(np.abs(rem))),
    )


# ---------------------------------------------------------------- diagnostics


def tail_fraction(state: BetheState, Lambda: float) -> float:
    """(1/L) #{a : |lam_a| > Lambda}."""
    return float(np.count_nonzero(np.abs(state.roots) > Lambda)) / state.params.L


def fit_exponent(Ls, values) -> float:
    """Least-squares decay exponent p in values ~ C L^{-p}."""
    x = np.log(np.asarray(Ls, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(-np.polyfit(x, y, 1)[0])


def sup_deviations(cf: CountingFn, bundle: ExpansionBundle, lam) -> tuple[float, float, float]:
    """sup |xi - xi0|, sup |xi - xi0 - xi1/L|, sup |xi - xi0 - xi1/L - xi2/L^2|."""
    L = cf.L
    d0 = cf.evaluate(lam) - bundle.xi0(lam)
    d1 = d0 - bundle.xi1(lam) / L
    d2 = d1 - bundle.xi2(lam) / L**2
    return float(np.max(np.abs(d0))), float(np.max(np.abs(d1))), float(np.max(np.abs(d2)))


def convergence_report(
    spec,
    a: Anisotropy,
    D: float,
    L_list,
    n_grid: int = 401,
    with_nlie: bool = False,
    n_contour: int = 512,
):
    """Per-L deviations of xi from its expansion; exponents fitted over the ladder.

    For D = 1/2 in the massless regimes the comparison is with the closed-form
    xi0(.|+inf) on the compacts [-Lam, Lam], Lam in {1, 2, 4}.
    ``spec`` is an ExcitationSpec or a function N -> ExcitationSpec.
    """
    make = spec if callable(spec) else (lambda N: spec)
    rows = []
    half = a.regime != "gapped" and D >= 0.5
    for L in L_list:
        N = int(round(D * L))
        params = ChainParams(int(L), N)
        spec_L = make(N)
        state = solve_state(params, spec_L, a)
        cf = CountingFn(state, params, a)
        row = {"L": int(L), "N": N, "residual": state.residual}
        if half:
            for Lam in (1.0, 2.0, 4.0):
                lam = np.linspace(-Lam, Lam, n_grid)
                row[f"dev_I{Lam:g}"] = float(np.max(np.abs(cf.evaluate(lam) - kn.xi0_infinite(lam, a))))
            row["tail_3"] = tail_fraction(state, 3.0)
        else:
            fermi = reference_fermi(params, a)
            bundle = expansion(cf, fermi, spec_L)
            lam2 = np.linspace(-2 * fermi.Q, 2 * fermi.Q, n_grid)
            lam1 = np.linspace(-fermi.Q, fermi.Q, n_grid)
            row["q_hat"] = fermi.Q
            row["dev0"] = sup_deviations(cf, bundle, lam2)[0]
            row["dev1"], row["dev2"] = sup_deviations(cf, bundle, lam1)[1:]
            qL, qR = cf.endpoints()
            row["qR_minus_q"] = qR - fermi.Q
            row["q_plus_1"] = bundle.q_plus_1
            row["q_plus_2"] = bundle.q_plus_2
            if with_nlie:
                row["nlie"] = nlie_residual(cf, fermi, spec_L, n_contour).residual
        rows.append(row)
    Ls = [r["L"] for r in rows]
    fits = {}
    keys = ("dev_I2",) if half else ("dev0", "dev1", "dev2")
    for k in keys:
        vals = [r[k] for r in rows]
        if len(rows) > 1 and all(v > 0 for v in vals):
            fits[k] = fit_exponent(Ls, vals)
    return rows, fits
