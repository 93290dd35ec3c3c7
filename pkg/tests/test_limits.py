import math

import numpy as np
import pytest

from src.core.composite import SystemSpec, force_composite
from src.core.errors import UnsupportedRegime
from src.core.limits import (
    G_SQUARED,
    CavityParams,
    cavity_params_from_scattering,
    hamiltonian_friction,
    hamiltonian_friction_closed,
    mmc_force,
    mmc_temperature,
    resonance_phase,
    resonance_width,
    resonator_friction,
    resonator_half_width,
    resonator_intracavity,
    resonator_temperature,
    small_zeta_amplitude,
)


def test_resonance_phase_branch():
    for zeta in (0.5, 1.0, 10.0, 100.0):
        phi0 = resonance_phase(zeta)
        assert 3 * math.pi / 4 < phi0 < math.pi
        assert math.tan(2 * phi0) == pytest.approx(-1 / zeta)


def test_resonance_peak_sits_at_phi0():
    zeta = 30.0
    phi0 = resonance_phase(zeta)
    _, exact = resonator_intracavity(zeta, phi0 + resonance_width(zeta) * np.linspace(-4, 4, 81))
    assert np.argmax(np.abs(exact)) == 40
    assert abs(exact[40]) ** 2 == pytest.approx(4 * zeta ** 2, rel=0.01)


@pytest.mark.parametrize("zeta", [10.0, 30.0, 100.0])
def test_half_width_matches_one_over_four_zeta_squared(zeta):
    assert resonator_half_width(zeta) == pytest.approx(resonance_width(zeta), rel=0.05)


@pytest.mark.parametrize("zeta,tol", [(10.0, 0.02), (30.0, 0.01), (100.0, 0.01)])
def test_lorentzian_tracks_exact_intracavity_field(zeta, tol):
    phi = resonance_phase(zeta) + resonance_width(zeta) * np.linspace(-3, 3, 61)
    lorentzian, exact = resonator_intracavity(zeta, phi)
    assert np.max(np.abs(np.abs(lorentzian) ** 2 - np.abs(exact) ** 2)) <= tol * np.max(np.abs(exact) ** 2)


def test_resonator_friction_is_odd_about_resonance():
    zeta = 10.0
    phi0 = resonance_phase(zeta)
    us = resonance_width(zeta) * np.array([0.3, 1.0, 2.5])
    assert resonator_friction(zeta, phi0, 1.0, 100.0, 1.0) == 0.0
    plus = resonator_friction(zeta, phi0 + us, 1.0, 100.0, 1.0)
    minus = resonator_friction(zeta, phi0 - us, 1.0, 100.0, 1.0)
    assert np.allclose(plus, -minus)
    assert np.all(plus < 0)


def test_resonator_temperature_scaling():
    assert resonator_temperature(20.0, 50.0) == pytest.approx(resonator_temperature(10.0, 50.0) / 4)
    p = cavity_params_from_scattering(10.0, resonance_phase(10.0), 50.0, 1.0)
    assert resonator_temperature(10.0, 50.0) == pytest.approx(p.kappa / 2)
    with pytest.raises(ValueError):
        resonator_temperature(10.0, 0.0)


def test_mirror_mediated_temperature_halves_with_distance():
    assert mmc_temperature(1.0, 200.0) == pytest.approx(mmc_temperature(1.0, 100.0) / 2)
    assert mmc_temperature(1.0, 100.0) == pytest.approx(1 / 400)
    with pytest.raises(ValueError):
        mmc_temperature(1.0, np.array([1.0, -1.0]))


def test_hamiltonian_friction_sign_follows_detuning():
    base = dict(kappa=0.01, eta=0.1, g=0.02)
    assert hamiltonian_friction(CavityParams(delta_c=0.0, **base)).coefficient == pytest.approx(0.0, abs=1e-18)
    assert hamiltonian_friction(CavityParams(delta_c=-0.005, **base)).coefficient < 0
    assert hamiltonian_friction(CavityParams(delta_c=0.005, **base)).coefficient > 0


def test_hamiltonian_closed_form_agrees(rng):
    for _ in range(50):
        p = CavityParams(kappa=float(rng.uniform(1e-3, 1.0)), delta_c=float(rng.normal()),
                         eta=float(rng.uniform(0.1, 2.0)), g=float(rng.uniform(0.01, 1.0)))
        x = float(rng.normal(scale=0.1))
        got = hamiltonian_friction(p, x).coefficient
        assert got == pytest.approx(hamiltonian_friction_closed(p, x), rel=1e-10, abs=1e-300)


def test_mirror_displacement_shifts_detuning():
    p = CavityParams(kappa=0.01, delta_c=0.004, eta=0.1, g=0.02)
    shifted = CavityParams(kappa=0.01, delta_c=0.004 - 0.02 * 0.1, eta=0.1, g=0.02)
    assert hamiltonian_friction(p, 0.1).coefficient == pytest.approx(hamiltonian_friction(shifted).coefficient)


@pytest.mark.parametrize("zeta", [10.0, 30.0, 100.0])
def test_hamiltonian_reproduces_resonator_friction(zeta):
    phi0 = resonance_phase(zeta)
    length = 100.0 - phi0
    us = resonance_width(zeta) * np.linspace(-3, 3, 21)
    ref = np.array([resonator_friction(zeta, phi0 + u, 1.0, length, 1.0) for u in us])
    got = np.array([hamiltonian_friction(cavity_params_from_scattering(zeta, phi0 + u, length, 1.0)).coefficient
                    for u in us])
    assert np.max(np.abs(got - ref)) <= 1e-6 * np.max(np.abs(ref))


def test_squared_coupling_does_not_match():
    zeta = 30.0
    phi = resonance_phase(zeta) + resonance_width(zeta)
    ref = resonator_friction(zeta, phi, 1.0, 97.0, 1.0)
    got = hamiltonian_friction(cavity_params_from_scattering(zeta, phi, 97.0, 1.0, g_definition=G_SQUARED))
    assert abs(got.coefficient - ref) > 1e-6 * abs(ref)
    with pytest.raises(ValueError):
        cavity_params_from_scattering(zeta, phi, 97.0, 1.0, g_definition="bogus")


def test_resonator_friction_against_composite_system():
    zeta = 30.0
    phi0 = resonance_phase(zeta)
    us = resonance_width(zeta) * np.array([-2.0, -1.0, 1.0, 2.0])
    beta = force_composite(SystemSpec(zeta=zeta, r_fixed=-1.0, k0L=100.0, x=phi0 + us)).beta
    ref = -np.array([resonator_friction(zeta, phi0 + u, 1.0, 100.0 - phi0 - u, 1.0) for u in us])
    assert np.allclose(beta, ref, rtol=0.05)


@pytest.mark.parametrize("bad", [1.0 + 0.1j, 0.0, -2.0])
def test_resonator_formulas_reject_unsupported_zeta(bad):
    with pytest.raises(UnsupportedRegime):
        resonance_phase(bad)
    with pytest.raises(UnsupportedRegime):
        cavity_params_from_scattering(bad, 3.0, 97.0, 1.0)


def test_small_zeta_amplitude_reduces_to_mirror():
    xs = np.linspace(0.1, 3.0, 7)
    a = small_zeta_amplitude(0.0, xs, 100.0, eps=0.0)
    assert np.allclose(a, -np.exp(-2j * xs))


def test_mmc_force_first_order_term():
    xs = np.linspace(0.1, 3.0, 7)
    f = mmc_force(1e-6, xs, 100.0)
    assert np.allclose(f.val, 4e-6 * np.sin(2 * xs), rtol=1e-4, atol=0)
