"""Force, friction and diffusion of a single moving beamsplitter.

The scatterer sits at the origin and is driven from the left by B0 and from
the right by C0. Units: hbar = c = 1, so the drive frequency equals its
wavenumber k, forces come in k * flux and beta is the coefficient of -v.
"""
from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np

from src.core.errors import NoCoolingPoint
from src.core.jet import EPS, Jet1, abs2
from src.core.scatterer import Polarizability, moving_entries, refltrans_of, zeta_of


@dataclass(frozen=True)
class DriveFields:
    b0: Any
    c0: Any
    k: float = 1.0


@dataclass
class MechanicalResponse:
    force0: Any
    beta: Any
    diffusion: Optional[Any] = None
    temperature: Optional[Any] = None

    @classmethod
    def from_coefficients(cls, force0: Any, beta: Any, diffusion: Optional[Any] = None) -> "MechanicalResponse":
        """Fill in k_B T = D / (2 beta) where beta > 0, NaN elsewhere."""
        temperature = None
        if diffusion is not None:
            b = np.asarray(beta, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(b > 0, np.asarray(diffusion, dtype=float) / (2.0 * b), np.nan)
            temperature = float(t) if t.ndim == 0 else t
        return cls(force0=force0, beta=beta, diffusion=diffusion, temperature=temperature)


def standing_wave_drive(b: complex, k0x: Any, k: float = 1.0) -> DriveFields:
    """Equal counter-propagating beams referenced to x = 0: B = b e^{ik0x}, C = b e^{-ik0x}."""
    phase = np.exp(1j * np.asarray(k0x, dtype=float))
    if phase.ndim == 0:
        phase = complex(phase)
    return DriveFields(b0=b * phase, c0=b * np.conj(phase), k=k)


def outgoing_amplitudes(p: Polarizability, drive: DriveFields, eps: Any = EPS) -> Tuple[Any, Any]:
    """Outgoing amplitudes (A to the left, D to the right) of the moving scatterer."""
    zeta, w = zeta_of(p, omega=drive.k)
    m11, m12, m21, m22 = moving_entries(zeta, w, eps)
    a = (drive.c0 - m12 * drive.b0) / m11
    d = m21 * a + m22 * drive.b0
    return a, d


def force_single(p: Polarizability, drive: DriveFields, eps: Any = EPS) -> Any:
    """Stress-tensor force k(|A|^2 + |B0|^2 - |C0|^2 - |D|^2).

    Returns a jet F0 + eps F1 for symbolic eps, a float for a numeric eps.
    """
    a, d = outgoing_amplitudes(p, drive, eps)
    return drive.k * (abs2(a) + abs2(drive.b0) - abs2(drive.c0) - abs2(d))


def force_expanded(p: Polarizability, drive: DriveFields) -> Jet1:
    """The same force written out term by term in zeta and omega dzeta/domega."""
    zeta, w = zeta_of(p, omega=drive.k)
    den = abs2(1 - 1j * zeta - 1j * w * EPS)
    d_abs2 = 2.0 * np.real(np.conj(zeta) * w)
    d_imag = np.imag(w)
    d_cross = np.imag(np.conj(zeta) * w)
    abs_z2 = abs(zeta) ** 2

    bb, cc = abs2(drive.b0), abs2(drive.c0)
    bc = drive.b0 * np.conj(drive.c0)

    brace = ((zeta.imag + abs_z2 + 0.5 * d_abs2 * EPS) * (bb - cc)
             - EPS * (d_imag - 0.5 * d_abs2 + 2.0 * abs_z2) * (bb + cc)
             + 2.0 * (-d_cross * EPS - zeta.real) * np.imag(bc)
             + 2.0 * EPS * (2.0 * zeta.imag - d_imag + 0.5 * d_abs2) * np.real(bc))
    return 2.0 * drive.k * brace / den


def response_single(p: Polarizability, drive: DriveFields) -> MechanicalResponse:
    f = force_single(p, drive)
    zeta, _ = zeta_of(p, omega=drive.k)
    return MechanicalResponse.from_coefficients(np.real(f.val), -np.real(f.eps), diffusion_single(zeta, drive))


def molasses_friction(p: Polarizability, flux: float, k0: float = 1.0) -> float:
    """Doppler-cooling friction 4 k0^2 |B0|^2 Im(dzeta/domega) of a weak scatterer."""
    _, w = zeta_of(p, omega=k0)
    return 4.0 * k0 ** 2 * flux * np.imag(w / k0)


def molasses_diffusion(p: Polarizability, flux: float, k0: float = 1.0) -> float:
    """Standing-wave diffusion 8 k0^2 Im(zeta) |B0|^2 sin^2(k0x), averaged over x."""
    zeta, _ = zeta_of(p, omega=k0)
    return 4.0 * k0 ** 2 * zeta.imag * flux


def molasses_temperature(p: Polarizability, flux: float, k0: float = 1.0) -> float:
    beta = molasses_friction(p, flux, k0)
    if beta <= 0:
        raise NoCoolingPoint("molasses friction is not positive; detuning must be on the red side")
    return molasses_diffusion(p, flux, k0) / (2.0 * beta)


def diffusion_single(zeta: complex, drive: DriveFields) -> Any:
    """Momentum diffusion at v = 0 in closed form in zeta."""
    norm = abs2(1 - 1j * zeta)
    return drive.k ** 2 * (2.0 * np.imag(zeta) / norm * abs2(drive.b0 - drive.c0)
                           + 4.0 * abs(zeta) ** 2 / norm * (abs2(drive.b0) + abs2(drive.c0)))


def diffusion_amplitude_form(zeta: complex, drive: DriveFields) -> Any:
    """Momentum diffusion assembled from the static outgoing amplitudes."""
    rt = refltrans_of(zeta)
    b, c = drive.b0, drive.c0
    a = rt.t * c + rt.r * b
    d = rt.r * c + rt.t * b
    total = (abs2(a) + abs2(b) + abs2(c) + abs2(d)
             + 2.0 * np.real(rt.r * np.conj(a) * b - rt.t * np.conj(a) * c)
             + 2.0 * np.real(rt.r * np.conj(d) * c - rt.t * np.conj(d) * b))
    return drive.k ** 2 * total


def diffusion_equivalence_check(zeta: complex, drive: DriveFields, rtol: float = 1e-10) -> bool:
    closed = np.asarray(diffusion_single(zeta, drive), dtype=float)
    amplitude = np.asarray(diffusion_amplitude_form(zeta, drive), dtype=float)
    scale = np.maximum(np.abs(closed), np.abs(amplitude))
    return bool(np.all(np.abs(closed - amplitude) <= rtol * scale))


def averaging_bandwidth(omega0: float, eps: float) -> Tuple[float, float]:
    """Doppler bandwidth 2 omega0 v/c and the averaging time pi/(omega0 v/c) it allows."""
    if eps == 0:
        return 0.0, float("inf")
    return 2.0 * omega0 * abs(eps), float(np.pi / (omega0 * abs(eps)))
