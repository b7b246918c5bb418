import numpy as np
import pytest

from xxzbethe import kernels as kn
from xxzbethe.bae import ChainParams, ExcitationSpec, solve_state
from xxzbethe.counting import fit_exponent
from xxzbethe.fermi import fermi_boundary_from_field, ground_energy_density, magnetic_fermi_boundary
from xxzbethe.kernels import Anisotropy
from xxzbethe.observables import (
    FUNCTION_CATALOG,
    catalog_function,
    conformal_bracket,
    conformal_check,
    densify,
    energy_decomposition,
    energy_raw,
    fermi_velocity,
)

A = Anisotropy.gapless(0.4)
FREE = Anisotropy.gapless(np.pi / 2)


def test_catalog():
    assert set(FUNCTION_CATALOG) == {"one", "tanh", "gauss"}
    x = np.array([0.0, 1.0])
    assert np.allclose(catalog_function("gauss")(x), np.exp(-x**2))
    assert np.allclose(catalog_function("bare_energy", A, 1.0, 0.5)(x), kn.bare_energy(x, A, 1.0, 0.5))


@pytest.mark.parametrize("L,N", [(64, 17), (128, 30)])
def test_unit_function_gap_is_density_mismatch(L, N):
    fermi = magnetic_fermi_boundary(0.25, A)
    s, integral, gap = densify(solve_state(ChainParams(L, N), ExcitationSpec(), A), FUNCTION_CATALOG["one"], fermi)
    assert s == N / L
    assert gap == pytest.approx(abs(N / L - 0.25), abs=1e-12)


def test_densify_converges():
    fermi = magnetic_fermi_boundary(0.25, A)
    gaps = [densify(solve_state(ChainParams(L, L // 4), ExcitationSpec(), A), FUNCTION_CATALOG["gauss"], fermi)[2]
            for L in (64, 128, 256)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_densify_empty_state():
    s = solve_state(ChainParams(16, 0), ExcitationSpec(), A)
    assert densify(s, np.tanh, magnetic_fermi_boundary(0.0, A)) == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("N,h", [(10, 0.0), (24, 1.3)])
def test_free_fermion_energy(N, h):
    L, J = 48, 0.8
    E = energy_raw(solve_state(ChainParams(L, N, J, h), ExcitationSpec(), FREE))
    exact = -0.5 * h * L + N * h - 4 * J * np.sin(np.pi * N / L) / np.sin(np.pi / L)
    assert E == pytest.approx(exact, abs=1e-11)


@pytest.mark.parametrize("h", [1.0, 2.5])
def test_free_fermion_velocity(h):
    # eps = h - 4J/cosh(2 lam), rho = 1/(pi cosh 2 lam)  =>  v_F = 8 pi J tanh(2 Q_F)
    fp = fermi_boundary_from_field(h, FREE, 1.0)
    assert fermi_velocity(fp, FREE, 1.0) == pytest.approx(8 * np.pi * np.tanh(2 * fp.Q), rel=1e-12)


def test_conformal_bracket_values():
    p = ChainParams(64, 16)
    Z = 0.9
    assert conformal_bracket(ExcitationSpec(), p, Z) == pytest.approx(-1 / 12)
    assert conformal_bracket(ExcitationSpec(holes=(16,), particles=(17,)), p, Z) == pytest.approx(-1 / 12 + 1)
    assert conformal_bracket(ExcitationSpec(holes=(1,), particles=(0,)), p, Z) == pytest.approx(-1 / 12 + 1)
    assert conformal_bracket(ExcitationSpec(s=1), p, Z) == pytest.approx(-1 / 12 + 1 / (4 * Z**2))
    assert conformal_bracket(ExcitationSpec(umklapp_ell=1), p, Z) == pytest.approx(-1 / 12 + Z**2 - 1)


@pytest.mark.parametrize("spec_of", [lambda N: ExcitationSpec(), lambda N: ExcitationSpec(holes=(1,), particles=(N + 2,))],
                         ids=["ground", "ph"])
def test_energy_decomposition_defect_decays(spec_of):
    defects, Ls = [], [64, 128, 256]
    for L in Ls:
        N = L // 4
        p = ChainParams(L, N, 1.0, 3.0)
        spec = spec_of(N)
        defects.append(energy_decomposition(solve_state(p, spec, A), spec=spec).defect)
    assert fit_exponent(Ls, defects) > 2.5


def test_bulk_energy_density():
    rec = energy_decomposition(solve_state(ChainParams(256, 64, 1.0, 3.0), ExcitationSpec(), A))
    q = magnetic_fermi_boundary(0.25, A).Q
    assert rec.E0 == pytest.approx(ground_energy_density(q, A, 1.0, 3.0))
    assert abs(rec.E_raw / 256 - rec.E0) < 1e-3


def test_conformal_check_small_ladder():
    rows, fits = conformal_check(A, 0.25, {"ground": lambda N: ExcitationSpec()}, [64, 128])
    assert len(rows) == 2
    assert abs(rows[1]["deviation"]) < abs(rows[0]["deviation"])
    assert rows[1]["scaled"] == pytest.approx(-rows[1]["v_F"] / 12, rel=1e-3)
