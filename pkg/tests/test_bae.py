import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xxzbethe import kernels as kn
from xxzbethe.bae import (
    ChainParams,
    ExcitationSpec,
    bethe_residual,
    effective_excitations,
    normalize_gapped,
    resolve_integers,
    solve_state,
    yang_yang,
)
from xxzbethe.errors import InvalidSpec
from xxzbethe.kernels import Anisotropy
from xxzbethe.observables import energy_raw

A = Anisotropy.gapless(0.4)
ALL = [A, Anisotropy.gapless(2.0), Anisotropy.isotropic(), Anisotropy.gapped(1.0)]
ALL_IDS = ["gl0.4", "gl2.0", "iso", "gp1.0"]


def exact_spectrum(L, N, Delta, J=1.0, h=0.0):
    """Dense diagonalisation of J sum(sx sx + sy sy + Delta sz sz) - h/2 sum sz (Pauli matrices), N down spins."""
    states = [sum(1 << i for i in c) for c in itertools.combinations(range(L), N)]
    idx = {s: i for i, s in enumerate(states)}
    H = np.zeros((len(states), len(states)))
    for s, i in idx.items():
        for j in range(L):
            k = (j + 1) % L
            bj, bk = (s >> j) & 1, (s >> k) & 1
            H[i, i] += J * Delta * (1 if bj == bk else -1)
            if bj != bk:
                H[idx[s ^ (1 << j) ^ (1 << k)], i] += 2 * J
        H[i, i] -= 0.5 * h * (L - 2 * N)
    return np.linalg.eigvalsh(H)


# ---------------------------------------------------------------- inputs


@pytest.mark.parametrize("args", [(15, 3), (16, 9), (16, -1), (0, 0)])
def test_chain_params_rejects(args):
    with pytest.raises(InvalidSpec):
        ChainParams(*args)


def test_chain_params_rejects_nonpositive_coupling():
    with pytest.raises(InvalidSpec):
        ChainParams(16, 4, J=0.0)


def test_excitation_spec_validation():
    with pytest.raises(InvalidSpec):
        ExcitationSpec(holes=(1, 2), particles=(10,))
    with pytest.raises(InvalidSpec):
        ExcitationSpec(holes=(1, 1), particles=(10, 11))
    assert ExcitationSpec(holes=(3, 1), particles=(12, 10)).holes == (1, 3)


def test_resolve_integers():
    p = ChainParams(32, 8)
    assert list(resolve_integers(p, ExcitationSpec(), A)) == list(range(1, 9))
    ph = resolve_integers(p, ExcitationSpec(holes=(1,), particles=(10,)), A)
    assert list(ph) == [2, 3, 4, 5, 6, 7, 8, 10]
    assert list(resolve_integers(p, ExcitationSpec(s=1), A)) == list(range(1, 10))
    assert list(resolve_integers(p, ExcitationSpec(holes=(8,), particles=(0,)), A)) == list(range(0, 8))


@pytest.mark.parametrize("spec", [
    ExcitationSpec(holes=(9,), particles=(12,)),   # hole outside [1, N]
    ExcitationSpec(holes=(1,), particles=(5,)),    # particle inside [1, N]
    ExcitationSpec(holes=(1,), particles=(40,)),   # beyond the admissible window
    ExcitationSpec(s=20),                          # N + s > L/2
])
def test_resolve_integers_rejects(spec):
    with pytest.raises(InvalidSpec):
        resolve_integers(ChainParams(32, 8), spec, A)


def test_effective_excitations():
    p = ChainParams(32, 8)
    parts, holes = effective_excitations(p, np.arange(1, 10))
    assert list(parts) == [9] and list(holes) == []
    parts, holes = effective_excitations(p, [2, 3, 4, 5, 6, 7, 8, 11])
    assert list(parts) == [11] and list(holes) == [1]


# ---------------------------------------------------------------- free fermions


@settings(max_examples=20, deadline=None)
@given(st.integers(4, 64), st.data())
def test_free_fermion_roots(half_L, data):
    L = 2 * half_L
    N = data.draw(st.integers(1, half_L))
    a = Anisotropy.gapless(np.pi / 2)
    st_ = solve_state(ChainParams(L, N), ExcitationSpec(), a)
    k = 2 * np.pi * (np.arange(1, N + 1) - (N + 1) / 2) / L
    assert np.max(np.abs(st_.roots - np.arctanh(np.tan(k / 2)))) < 1e-12


# ---------------------------------------------------------------- exact diagonalisation


@pytest.mark.parametrize("a", ALL, ids=ALL_IDS)
@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_ground_state_matches_diagonalisation(a, N):
    L, J, h = 8, 1.0, 0.3
    E = energy_raw(solve_state(ChainParams(L, N, J, h), ExcitationSpec(), a))
    assert E == pytest.approx(exact_spectrum(L, N, a.delta(), J, h)[0], abs=1e-9)


@pytest.mark.parametrize("a", [A, Anisotropy.gapless(2.0)], ids=["gl0.4", "gl2.0"])
def test_excited_state_is_an_eigenvalue(a):
    L, N = 12, 3
    spec = ExcitationSpec(holes=(1,), particles=(4,))
    E = energy_raw(solve_state(ChainParams(L, N), spec, a))
    assert np.min(np.abs(exact_spectrum(L, N, a.delta()) - E)) < 1e-9


# ---------------------------------------------------------------- solver properties


@pytest.mark.parametrize("a", ALL, ids=ALL_IDS)
def test_ground_state_properties(a):
    p = ChainParams(64, 16)
    s = solve_state(p, ExcitationSpec(), a)
    assert s.residual < 1e-12
    assert np.all(np.diff(s.roots) > 0)
    assert np.allclose(s.roots, -s.roots[::-1], atol=1e-12)
    assert np.max(np.abs(bethe_residual(s.roots, p, s.integers, a))) < 1e-12


def test_gapped_roots_normalised():
    s = solve_state(ChainParams(32, 12), ExcitationSpec(holes=(1,), particles=(20,)), Anisotropy.gapped(1.5))
    assert np.all(s.roots > -np.pi / 2) and np.all(s.roots <= np.pi / 2)
    assert np.allclose(normalize_gapped(np.array([np.pi, -np.pi / 2 + 1e-3 - np.pi])), [0.0, -np.pi / 2 + 1e-3])


def test_action_derivatives():
    p = ChainParams(24, 6)
    ints = np.arange(1, 7)
    rng = np.random.default_rng(5)
    mu = np.sort(rng.normal(size=6))
    S, g, H = yang_yang(mu, p, ints, A)
    h = 1e-6
    for j in range(6):
        e = np.zeros(6)
        e[j] = h
        Sp, gp, _ = yang_yang(mu + e, p, ints, A)
        Sm, gm, _ = yang_yang(mu - e, p, ints, A)
        assert (Sp - Sm) / (2 * h) == pytest.approx(g[j], abs=1e-8)
        assert np.allclose((gp - gm) / (2 * h), H[:, j], atol=1e-7)


@pytest.mark.parametrize("zeta", [2.0, 2.8])
def test_negative_anisotropy_unique_solution(zeta):
    a = Anisotropy.gapless(zeta)
    # the admissible window shrinks like (pi - zeta) / pi
    p = ChainParams(40, 8)
    spec = ExcitationSpec(holes=(3,), particles=(9,))
    ref = solve_state(p, spec, a)
    rng = np.random.default_rng(11)
    for _ in range(3):
        start = ref.roots + rng.normal(scale=0.3, size=ref.n_roots)
        other = solve_state(p, spec, a, mu0=np.sort(start))
        assert np.allclose(np.sort(other.roots), np.sort(ref.roots), atol=1e-10)


def test_half_filled_isotropic_energy_density():
    # thermodynamic value J (1 - 4 ln 2) with the conformal correction -pi v / (6 L^2), v = 2 pi J
    L = 128
    E = energy_raw(solve_state(ChainParams(L, L // 2), ExcitationSpec(), Anisotropy.isotropic()))
    shift = E / L - (1 - 4 * np.log(2))
    assert shift == pytest.approx(-np.pi**2 / (3 * L**2), rel=0.05)


def test_empty_state():
    s = solve_state(ChainParams(16, 0), ExcitationSpec(), A)
    assert s.n_roots == 0
    assert energy_raw(s) == pytest.approx(A.delta() * 16)


def test_shift_grows_root_count():
    s = solve_state(ChainParams(32, 8), ExcitationSpec(s=1), A)
    assert s.n_roots == 9 and s.residual < 1e-12
    assert kn.bare_momentum(s.roots[-1], A) > kn.bare_momentum(s.roots[-2], A)
