"""SI magnitude of the spin-field term in the proper-time rate.

The term ``(e / 2m^2) sigma.B`` in natural units becomes
``e hbar B / (2 m^2 c^2)`` in SI, i.e. ``mu_B B / (m c^2)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.constants as sc

from .errors import ValidationError

__all__ = [
    "Quantity",
    "PhysicalConstants",
    "CODATA",
    "REPORTED_SHIFT_PER_TESLA",
    "EXPANSION_LIMIT",
    "rate_shift_per_tesla",
    "critical_field",
    "magnetar_sweep",
    "zitter_frequency_si",
    "ShiftTable",
]

# Order-of-magnitude value quoted in the literature for electrons.
REPORTED_SHIFT_PER_TESLA = 2e-10
EXPANSION_LIMIT = 0.1

_BASE = ("kg", "m", "s", "A")


@dataclass(frozen=True)
class Quantity:
    """A value tagged with integer exponents of kg, m, s, A."""

    value: float
    dims: tuple = (0, 0, 0, 0)

    def __mul__(self, other):
        if not isinstance(other, Quantity):
            return Quantity(self.value * other, self.dims)
        return Quantity(self.value * other.value, tuple(a + b for a, b in zip(self.dims, other.dims)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Quantity):
            return Quantity(self.value / other, self.dims)
        return Quantity(self.value / other.value, tuple(a - b for a, b in zip(self.dims, other.dims)))

    def __pow__(self, k: int):
        return Quantity(self.value**k, tuple(k * a for a in self.dims))

    @property
    def dimensionless(self) -> bool:
        return not any(self.dims)

    def unit(self) -> str:
        parts = [f"{u}^{d}" if d != 1 else u for u, d in zip(_BASE, self.dims) if d]
        return " ".join(parts) or "1"


TESLA = Quantity(1.0, (1, 0, -2, -1))


@dataclass(frozen=True)
class PhysicalConstants:
    electron_mass: Quantity
    elementary_charge: Quantity
    hbar: Quantity
    c: Quantity

    def __post_init__(self):
        for name in ("electron_mass", "elementary_charge", "hbar", "c"):
            if not getattr(self, name).value > 0:
                raise ValidationError(f"{name} must be positive")

    def with_mass(self, mass_kg: float) -> "PhysicalConstants":
        return PhysicalConstants(Quantity(mass_kg, self.electron_mass.dims), self.elementary_charge, self.hbar, self.c)


CODATA = PhysicalConstants(
    electron_mass=Quantity(sc.m_e, (1, 0, 0, 0)),
    elementary_charge=Quantity(sc.e, (0, 0, 1, 1)),
    hbar=Quantity(sc.hbar, (1, 2, -1, 0)),
    c=Quantity(sc.c, (0, 1, -1, 0)),
)


def _shift_quantity(consts: PhysicalConstants) -> Quantity:
    return consts.elementary_charge * consts.hbar / (2 * consts.electron_mass**2 * consts.c**2)


def rate_shift_per_tesla(consts: PhysicalConstants = CODATA) -> float:
    """``e hbar / (2 m^2 c^2)`` in 1/T."""
    q = _shift_quantity(consts)
    assert (q * TESLA).dimensionless, f"rate shift per tesla has unit {q.unit()} x T"
    return q.value


def critical_field(consts: PhysicalConstants = CODATA) -> float:
    """``m^2 c^2 / (e hbar)`` in tesla; there the rate shift is exactly 1/2."""
    q = consts.electron_mass**2 * consts.c**2 / (consts.elementary_charge * consts.hbar)
    assert (q / TESLA).dimensionless
    return q.value


@dataclass(frozen=True)
class ShiftTable:
    B: np.ndarray
    shift: np.ndarray
    flags: tuple
    per_tesla: float
    reported_per_tesla: float = REPORTED_SHIFT_PER_TESLA

    def rows(self):
        return list(zip(self.B.tolist(), self.shift.tolist(), self.flags))


def magnetar_sweep(consts: PhysicalConstants, B_values) -> ShiftTable:
    """Tabulate the rate shift; rows above ``EXPANSION_LIMIT`` are flagged
    ``expansion-invalid`` since the order-v^2 treatment assumes a small shift."""
    b = np.asarray(B_values, dtype=float)
    if b.size == 0 or np.any(~(b > 0)):
        raise ValidationError("B values must be positive")
    k = rate_shift_per_tesla(consts)
    shift = k * b
    flags = tuple("expansion-invalid" if x > EXPANSION_LIMIT else "ok" for x in shift)
    return ShiftTable(b, shift, flags, k)


def zitter_frequency_si(consts: PhysicalConstants = CODATA) -> tuple:
    """Lower bound ``m c^2 / hbar`` of the oscillation frequency.

    Returns ``(omega in rad/s, nu in Hz)``.
    """
    q = consts.electron_mass * consts.c**2 / consts.hbar
    assert q.dims == (0, 0, -1, 0)
    return q.value, q.value / (2 * np.pi)
