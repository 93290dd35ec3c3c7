"""Complex quantities truncated at first order in eps = v/c.

A Jet1 holds the order-eps^0 value and the coefficient of eps. Both parts may
be python complex numbers or numpy arrays; arithmetic broadcasts the numpy
way, so a whole position grid can travel through a formula as one jet.
"""
from dataclasses import dataclass
from typing import Any

import numpy as np

from src.core.errors import DivisionByZeroVal


def _zero_like(x: Any) -> Any:
    if isinstance(x, np.ndarray):
        return np.zeros_like(x, dtype=complex)
    return 0j


def lift(x: Any) -> "Jet1":
    """Promote a plain number (or array) to a jet with zero eps part."""
    if isinstance(x, Jet1):
        return x
    return Jet1(x, _zero_like(x))


@dataclass(frozen=True)
class Jet1:
    val: Any = 0j
    eps: Any = 0j

    # numpy must hand mixed operations over to the reflected operators below
    __array_ufunc__ = None

    def __add__(self, other: Any) -> "Jet1":
        o = lift(other)
        return Jet1(self.val + o.val, self.eps + o.eps)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Jet1":
        o = lift(other)
        return Jet1(self.val - o.val, self.eps - o.eps)

    def __rsub__(self, other: Any) -> "Jet1":
        return lift(other) - self

    def __neg__(self) -> "Jet1":
        return Jet1(-self.val, -self.eps)

    def __mul__(self, other: Any) -> "Jet1":
        o = lift(other)
        return Jet1(self.val * o.val, self.val * o.eps + self.eps * o.val)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "Jet1":
        return self * lift(other).inv()

    def __rtruediv__(self, other: Any) -> "Jet1":
        return lift(other) * self.inv()

    def __pow__(self, n: int) -> "Jet1":
        if not isinstance(n, (int, np.integer)):
            raise TypeError("Jet1 supports integer powers only")
        if n < 0:
            return self.inv() ** (-n)
        if n == 0:
            return Jet1(self.val ** 0, _zero_like(self.val))
        return Jet1(self.val ** n, n * self.val ** (n - 1) * self.eps)

    def inv(self) -> "Jet1":
        if np.any(np.asarray(self.val) == 0):
            raise DivisionByZeroVal("cannot invert a jet whose value part is zero")
        r = 1.0 / self.val
        return Jet1(r, -self.eps * r * r)

    def conj(self) -> "Jet1":
        # eps = v/c is real, so conjugation acts on both parts independently
        return Jet1(np.conj(self.val), np.conj(self.eps))

    def abs2(self) -> "Jet1":
        v, e = self.val, self.eps
        return Jet1(
            np.real(v) ** 2 + np.imag(v) ** 2,
            2.0 * (np.real(v) * np.real(e) + np.imag(v) * np.imag(e)),
        )

    @property
    def real(self) -> "Jet1":
        return Jet1(np.real(self.val), np.real(self.eps))

    @property
    def imag(self) -> "Jet1":
        return Jet1(np.imag(self.val), np.imag(self.eps))

    def at(self, eps: float) -> Any:
        """Evaluate the truncated expansion at a finite velocity ratio."""
        return self.val + eps * self.eps

    def __repr__(self) -> str:
        return f"Jet1({self.val} + {self.eps}ε)"


EPS = Jet1(0j, 1 + 0j)
ONE = Jet1(1 + 0j, 0j)


def jet_add(a: Jet1, b: Jet1) -> Jet1:
    return a + b


def jet_mul(a: Jet1, b: Jet1) -> Jet1:
    return a * b


def jet_inv(a: Jet1) -> Jet1:
    return a.inv()


# Generic helpers: formulas written with these run on jets (symbolic eps)
# and on plain complex numbers (finite eps) alike.

def conj(x: Any) -> Any:
    return x.conj() if isinstance(x, Jet1) else np.conj(x)


def abs2(x: Any) -> Any:
    if isinstance(x, Jet1):
        return x.abs2()
    return np.real(x) ** 2 + np.imag(x) ** 2


def re(x: Any) -> Any:
    return x.real if isinstance(x, Jet1) else np.real(x)
