"""Polarizability models and 2x2 transfer matrices of a point scatterer."""
from dataclasses import dataclass
from typing import Any, Tuple

import numpy as np

from src.core.jet import EPS, Jet1, abs2, lift

CONSTANT = "constant"
TWO_LEVEL_ATOM = "two_level_atom"
KINDS = (CONSTANT, TWO_LEVEL_ATOM)

ONE_PLUS_EPS = Jet1(1 + 0j, 1 + 0j)
ONE_MINUS_EPS = Jet1(1 + 0j, -1 + 0j)


@dataclass(frozen=True)
class Polarizability:
    kind: str = CONSTANT
    zeta: complex = 0j
    gamma: float = 0.0
    detuning: float = 0.0
    cross_section_ratio: float = 1.0

    @classmethod
    def constant(cls, zeta: complex) -> "Polarizability":
        return cls(kind=CONSTANT, zeta=complex(zeta))

    @classmethod
    def two_level_atom(cls, gamma: float, detuning: float,
                       cross_section_ratio: float = 1.0) -> "Polarizability":
        """Unsaturated two-level atom; detuning is omega_A - omega, gamma the HWHM."""
        return cls(kind=TWO_LEVEL_ATOM, gamma=float(gamma), detuning=float(detuning),
                   cross_section_ratio=float(cross_section_ratio))


@dataclass(frozen=True)
class ReflTrans:
    r: complex
    t: complex

    @property
    def absorption(self) -> float:
        """Weight of the absorption noise mode, 1 - |r|^2 - |t|^2."""
        return 1.0 - abs2(self.r) - abs2(self.t)


@dataclass(frozen=True)
class TransferMatrix:
    """Maps the left-side amplitudes (A, B) onto the right-side ones (C, D).

    shift12/shift21 count the Doppler shifts, in units of k v/c, applied to the
    amplitude an off-diagonal entry acts on.
    """
    m11: Jet1
    m12: Jet1
    m21: Jet1
    m22: Jet1
    shift12: int = 2
    shift21: int = -2

    def det(self) -> Jet1:
        return self.m11 * self.m22 - self.m12 * self.m21

    def apply(self, a: Any, b: Any) -> Tuple[Jet1, Jet1]:
        return self.m11 * a + self.m12 * b, self.m21 * a + self.m22 * b

    def inverse(self) -> "TransferMatrix":
        d = self.det().inv()
        return TransferMatrix(self.m22 * d, -self.m12 * d, -self.m21 * d, self.m11 * d,
                              self.shift12, self.shift21)

    def entries(self) -> np.ndarray:
        """Order-eps^0 part as a plain 2x2 complex array."""
        return np.array([[self.m11.val, self.m12.val], [self.m21.val, self.m22.val]], dtype=complex)


def zeta_of(p: Polarizability, omega: float = 1.0) -> Tuple[complex, complex]:
    """Return zeta and omega * d(zeta)/d(omega) at the drive frequency."""
    if p.kind == CONSTANT:
        return complex(p.zeta), 0j
    if p.kind == TWO_LEVEL_ATOM:
        if p.gamma <= 0:
            raise ValueError("two-level atom needs a positive linewidth gamma")
        pole = p.detuning - 1j * p.gamma
        zeta = p.cross_section_ratio * p.gamma / pole
        # detuning = omega_A - omega, so d(pole)/d(omega) = -1
        omega_dzeta = p.cross_section_ratio * p.gamma * omega / pole ** 2
        return complex(zeta), complex(omega_dzeta)
    raise ValueError(f"unknown polarizability kind '{p.kind}'")


def refltrans_of(zeta: complex) -> ReflTrans:
    t = 1.0 / (1.0 - 1j * zeta)
    return ReflTrans(r=1j * zeta * t, t=t)


def static_matrix(zeta: complex) -> TransferMatrix:
    return TransferMatrix(lift(1 - 1j * zeta), lift(-1j * zeta),
                          lift(1j * zeta), lift(1 + 1j * zeta))


def moving_entries(zeta: complex, omega_dzeta: complex, eps: Any = EPS) -> Tuple[Any, Any, Any, Any]:
    """Entries of the moving-scatterer matrix to first order in eps.

    With eps = EPS the entries are jets; with a float eps they are the plain
    complex numbers of the same first-order expressions.
    """
    w = omega_dzeta
    m11 = 1 - 1j * zeta - 1j * w * eps
    m12 = -1j * zeta + (2j * zeta - 1j * w) * eps
    m21 = 1j * zeta + (2j * zeta - 1j * w) * eps
    m22 = 1 + 1j * zeta - 1j * w * eps
    return m11, m12, m21, m22


def moving_matrix(p: Polarizability, omega: float = 1.0) -> TransferMatrix:
    zeta, w = zeta_of(p, omega)
    m11, m12, m21, m22 = moving_entries(zeta, w, EPS)
    return TransferMatrix(m11, m12, m21, m22, shift12=2, shift21=-2)


def lab_frame(m0: TransferMatrix) -> TransferMatrix:
    """Sandwich a rest-frame matrix between the boosts, L(-v) M0 L(v).

    L(v) = diag((1 + eps) P_-v, (1 - eps) P_v). Diagonal entries pick up
    (1 - eps)(1 + eps) = 1 and no net shift; the off-diagonal ones pick up
    (1 -/+ eps)^2 and a double shift.
    """
    left = (ONE_MINUS_EPS, ONE_PLUS_EPS)
    right = (ONE_PLUS_EPS, ONE_MINUS_EPS)
    return TransferMatrix(
        left[0] * m0.m11 * right[0],
        left[0] * m0.m12 * right[1],
        left[1] * m0.m21 * right[0],
        left[1] * m0.m22 * right[1],
        shift12=2, shift21=-2,
    )

