"""Closed forms for the weak-scatterer and resonator limits.

These are reference formulas, used as oracles against the general composite
system. Lengths are in units of 1/k0 (so L means k0 L); results are absolute
in hbar = c = 1. The resonator phase phi is identified with k0 x modulo pi.
"""
import math
from dataclasses import dataclass
from typing import Any, Tuple

import numpy as np
from scipy.optimize import brentq

from src.core.errors import UnsupportedRegime
from src.core.jet import EPS

G_FREQUENCY_PER_LENGTH = "frequency_per_length"
G_SQUARED = "squared"


@dataclass(frozen=True)
class CavityParams:
    kappa: float
    delta_c: float
    eta: float
    g: float


@dataclass(frozen=True)
class HamiltonianFriction:
    coefficient: float
    a0: complex
    a1: complex


def _resonator_zeta(zeta: Any) -> float:
    if np.iscomplexobj(zeta) and np.imag(zeta) != 0:
        raise UnsupportedRegime("resonator formulas assume a real polarizability")
    zeta = float(np.real(zeta))
    if zeta <= 0:
        raise UnsupportedRegime("resonator formulas need zeta > 0")
    return zeta


def resonance_phase(zeta: float) -> float:
    """phi0 with tan(2 phi0) = -1/zeta on the branch in (3pi/4, pi) that maximises |C'0|^2."""
    zeta = _resonator_zeta(zeta)
    return math.pi - 0.5 * math.atan(1.0 / zeta)


def resonance_width(zeta: float) -> float:
    return 1.0 / (4.0 * _resonator_zeta(zeta) ** 2)


def small_zeta_amplitude(zeta: float, k0x: Any, k0L: float, eps: Any = EPS) -> Any:
    """Reflected amplitude off an atom before a perfect mirror, first order in zeta."""
    x2 = np.exp(-2j * np.asarray(k0x, dtype=float))
    x4 = x2 * x2
    phi_l = k0L - np.asarray(k0x, dtype=float)
    return (-x2 + zeta * (1j - 2j * x2 + 1j * x4)
            + zeta * eps * (-2j + 2j * x4 - 4.0 * phi_l * x4))


def mmc_force(zeta: float, k0x: Any, k0L: float, flux: float = 1.0, eps: Any = EPS, k0: float = 1.0) -> Any:
    """Mirror-mediated force on a weakly polarizable atom, second order in zeta."""
    t = np.asarray(k0x, dtype=float)
    phi_l = k0L - t
    return 4.0 * k0 * flux * (
        zeta * np.sin(2 * t)
        - zeta ** 2 * (2.0 * np.sin(t) ** 2 * (4.0 * np.cos(t) ** 2 - 1.0))
        - zeta ** 2 * eps * (4.0 * np.sin(2 * t) ** 2 - 4.0 * phi_l * np.sin(4 * t))
    )


def mmc_temperature(k0: float, l_minus_x: Any) -> Any:
    """k_B T = hbar/(2 tau) with the round-trip delay tau = 2 (L - x)/c."""
    l_minus_x = np.asarray(l_minus_x, dtype=float)
    if np.any(l_minus_x <= 0):
        raise ValueError("atom-mirror distance L - x must be positive")
    tau = 2.0 * l_minus_x / k0
    out = 1.0 / (2.0 * tau)
    return float(out) if out.ndim == 0 else out


def resonator_intracavity(zeta: float, phi: Any) -> Tuple[Any, Any]:
    """Intracavity amplitude C'0 at v = 0: (Lorentzian approximation, exact form)."""
    zeta = _resonator_zeta(zeta)
    phi = np.asarray(phi, dtype=float)
    x2 = np.exp(-2j * phi)
    exact = -x2 / (1 - 1j * zeta + 1j * zeta * x2)
    u = phi - resonance_phase(zeta)
    lorentzian = -x2 / (2j * (1 - 1j * zeta) * (u - 1j * resonance_width(zeta)))
    return lorentzian, exact


def resonator_half_width(zeta: float) -> float:
    """Half width at half maximum of |C'0|^2 in phi, averaged over both flanks."""
    zeta = _resonator_zeta(zeta)
    phi0 = resonance_phase(zeta)
    peak = abs(resonator_intracavity(zeta, phi0)[1]) ** 2
    reach = min(50.0 * resonance_width(zeta), 0.5 * math.pi)

    def excess(u: float) -> float:
        return abs(resonator_intracavity(zeta, phi0 + u)[1]) ** 2 - 0.5 * peak

    try:
        right = brentq(excess, 0.0, reach, xtol=1e-15, rtol=1e-12)
        left = brentq(excess, -reach, 0.0, xtol=1e-15, rtol=1e-12)
    except ValueError:
        raise UnsupportedRegime(f"no half-maximum within reach for zeta={zeta}; the resonance is not isolated")
    return 0.5 * (right - left)


def resonator_friction(zeta: float, phi: Any, k0: float, L: float, flux: float) -> Any:
    """Coefficient of v in the radiation-pressure force on the resonator's mobile mirror."""
    zeta = _resonator_zeta(zeta)
    u = np.asarray(phi, dtype=float) - resonance_phase(zeta)
    a = resonance_width(zeta)
    out = -0.5 * k0 * L * u * flux / (zeta ** 4 * (a ** 2 + u ** 2) ** 3)
    return float(out) if out.ndim == 0 else out


def resonator_diffusion(zeta: float, phi: Any, k0: float = 1.0, flux: float = 1.0) -> Any:
    """Large-zeta diffusion estimate 4 k0^2 |C'0|^4 B."""
    _, exact = resonator_intracavity(zeta, phi)
    out = 4.0 * k0 ** 2 * np.abs(exact) ** 4 * flux
    return float(out) if np.ndim(out) == 0 else out


def resonator_temperature(zeta: float, L: float, k0: float = 1.0) -> float:
    """Minimum temperature hbar c/(8 zeta^2 L) = hbar kappa/2, reached at 4 zeta^2 (phi - phi0) = 1."""
    zeta = _resonator_zeta(zeta)
    if L <= 0:
        raise ValueError("resonator length must be positive")
    return k0 / (8.0 * zeta ** 2 * L)


def cavity_params_from_scattering(zeta: float, phi: float, L: float, flux: float, k0: float = 1.0,
                                  g_definition: str = G_FREQUENCY_PER_LENGTH) -> CavityParams:
    """Map the scattering parameters of the resonator onto the cavity-mode model."""
    zeta = _resonator_zeta(zeta)
    length = L / k0
    kappa = 1.0 / (4.0 * length * zeta ** 2)
    delta_c = -(phi - resonance_phase(zeta)) / length
    eta = math.sqrt(2.0 * kappa * flux)
    if g_definition == G_FREQUENCY_PER_LENGTH:
        g = k0 / length
    elif g_definition == G_SQUARED:
        g = (k0 / length) ** 2
    else:
        raise ValueError(f"unknown coupling definition '{g_definition}'")
    return CavityParams(kappa=kappa, delta_c=delta_c, eta=eta, g=g)


def hamiltonian_friction(p: CavityParams, x: float = 0.0) -> HamiltonianFriction:
    """Velocity-linear force of a driven, damped mode with dispersive coupling G a^dag a x."""
    if p.kappa <= 0:
        raise ValueError("cavity decay rate kappa must be positive")
    detuning = p.delta_c - p.g * x
    z = -1j * detuning + p.kappa
    a0 = p.eta / z
    a1 = 1j * p.eta * p.g / z ** 3
    coefficient = -2.0 * p.g * float(np.real(np.conj(a0) * a1))
    return HamiltonianFriction(coefficient=coefficient, a0=complex(a0), a1=complex(a1))


def hamiltonian_friction_closed(p: CavityParams, x: float = 0.0) -> float:
    detuning = p.delta_c - p.g * x
    return 4.0 * p.eta ** 2 * p.g ** 2 * p.kappa * detuning / (detuning ** 2 + p.kappa ** 2) ** 3
