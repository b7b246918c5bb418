import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xxzbethe import kernels as kn
from xxzbethe.dressed import (
    bare_energy_dressed,
    density,
    dressed_charge,
    dressed_energy,
    dressed_momentum,
    dressed_phase,
    effective_dressed_energy,
    effective_dressed_energy_d1,
    xi0,
    xi0_inverse,
    xi0_range,
)
from xxzbethe.errors import OutOfRange
from xxzbethe.kernels import Anisotropy

A = Anisotropy.gapless(0.4)
LAM = np.linspace(-2.5, 2.5, 21)


def test_free_fermion_density_is_bare():
    a = Anisotropy.gapless(np.pi / 2)
    rho = density(0.8, a)
    assert np.allclose(rho(LAM), kn.bare_momentum_d1(LAM, a) / (2 * np.pi), atol=1e-15)
    assert np.allclose(dressed_charge(0.8, a)(LAM), 1.0)


def test_gapped_full_interval_density():
    a = Anisotropy.gapped(1.3)
    assert np.allclose(density(np.pi / 2, a)(LAM), kn.density_closed_form(LAM, a), atol=1e-13)
    assert density(np.pi / 2, a).integral() == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("a", [Anisotropy.gapless(0.6), Anisotropy.isotropic()], ids=["gl", "iso"])
def test_large_interval_approaches_full_line(a):
    err_small = np.max(np.abs(density(4.0, a)(LAM / 4) - kn.density_closed_form(LAM / 4, a)))
    err_big = np.max(np.abs(density(8.0, a)(LAM / 4) - kn.density_closed_form(LAM / 4, a)))
    assert err_big < err_small


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([0.4, 1.2, 2.4]), st.floats(0.2, 1.5))
def test_korepin_slavnov(zeta, Q):
    a = Anisotropy.gapless(zeta)
    phi = dressed_phase(Q, Q, a)(np.array([Q, -Q]))
    assert 1 + phi[0] - phi[1] == pytest.approx(1 / float(dressed_charge(Q, a)(Q)), abs=1e-12)


@pytest.mark.parametrize("a", [A, Anisotropy.gapless(2.0), Anisotropy.isotropic(), Anisotropy.gapped(1.0)],
                         ids=["gl0.4", "gl2.0", "iso", "gp1.0"])
def test_charge_from_boundary_phases(a):
    Q = 0.9
    Z = dressed_charge(Q, a)(LAM)
    phases = dressed_phase(Q, np.array([Q, -Q]), a)(LAM)
    assert np.allclose(Z, 1 + phases[:, 0] - phases[:, 1], atol=1e-13)


def test_vector_and_scalar_phase_agree():
    mus = np.array([-0.3, 0.1, 0.8])
    vec = dressed_phase(0.7, mus, A)(LAM)
    for j, m in enumerate(mus):
        assert np.allclose(vec[:, j], dressed_phase(0.7, m, A)(LAM), atol=1e-15)


def test_symmetries():
    Q = 1.1
    assert np.allclose(density(Q, A)(LAM), density(Q, A)(-LAM), atol=1e-15)
    assert np.allclose(dressed_charge(Q, A)(LAM), dressed_charge(Q, A)(-LAM), atol=1e-15)
    assert np.allclose(dressed_phase(Q, 0.4, A)(LAM), -dressed_phase(Q, -0.4, A)(-LAM), atol=1e-14)


@pytest.mark.parametrize("a", [A, Anisotropy.gapless(2.2), Anisotropy.gapped(0.8)], ids=["gl0.4", "gl2.2", "gp0.8"])
def test_momentum_boundary_value_and_derivative(a):
    Q = 0.6
    D = float(density(Q, a).integral())
    p = dressed_momentum(Q, D, a)
    assert float(p(Q)) == pytest.approx(D / 2, abs=1e-14)
    assert float(p(-Q)) == pytest.approx(-D / 2, abs=1e-14)
    assert np.allclose(p.derivative(LAM), density(Q, a)(LAM), atol=1e-13)


def test_energy_decomposes_linearly():
    Q, J, h = 0.7, 1.3, 2.1
    eps = dressed_energy(Q, A, J, h)(LAM)
    lin = h * dressed_charge(Q, A)(LAM) - 2 * J * A.chi() * bare_energy_dressed(Q, A)(LAM)
    assert np.allclose(eps, lin, atol=1e-13)


def test_energy_derivative_by_finite_differences():
    eps = dressed_energy(0.7, A, 1.0, 2.0)
    h = 1e-6
    fd = (eps(LAM + h) - eps(LAM - h)) / (2 * h)
    assert np.allclose(eps.derivative(LAM), fd, atol=1e-7)


def test_effective_energy_at_boundary():
    Q, J, h = 0.7, 1.0, 2.0
    eQ = float(dressed_energy(Q, A, J, h)(Q))
    ZQ = float(dressed_charge(Q, A)(Q))
    assert float(effective_dressed_energy(Q, Q, A, J, h)) == pytest.approx(eQ / ZQ, rel=1e-12)


def test_effective_energy_derivative():
    Q, J, h = 0.7, 1.0, 2.0
    lam = np.linspace(-1.5, 1.5, 7)
    d = 1e-6
    fd = (effective_dressed_energy(Q, lam + d, A, J, h) - effective_dressed_energy(Q, lam - d, A, J, h)) / (2 * d)
    assert np.allclose(effective_dressed_energy_d1(Q, lam, A, J, h), fd, atol=1e-7)


def test_counting_function_values_and_inverse():
    Q = 0.5
    D = float(density(Q, A).integral())
    assert float(xi0(Q, Q, D, A)) == pytest.approx(D, abs=1e-14)
    assert float(xi0(-Q, Q, D, A)) == pytest.approx(0.0, abs=1e-14)
    lo, hi = xi0_range(D, A)
    y = np.linspace(lo + 1e-3, hi - 1e-3, 9)
    x = xi0_inverse(y, Q, D, A)
    assert np.allclose(xi0(x, Q, D, A), y, atol=1e-13)
    with pytest.raises(OutOfRange):
        xi0_inverse(hi + 0.01, Q, D, A)


def test_negative_interval_rejected():
    with pytest.raises(ValueError):
        density(-0.1, A)
