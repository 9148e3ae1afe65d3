"""Closed-form free Dirac dynamics for a single momentum mode.

Natural units (hbar = c = 1). For a fixed momentum ``p`` the Hamiltonian
``H = alpha.p + m beta`` squares to ``E**2 I4`` so every function of ``H``
reduces to the two spectral projectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonpositiveMass
from .spinor_algebra import GammaBasis

__all__ = [
    "MomentumMode",
    "SpectralData",
    "hamiltonian",
    "spectral",
    "evolution",
    "evolution_closed_form",
    "beta_heisenberg",
    "positive_rate_identity",
    "hamiltonians",
    "energies",
]


@dataclass(frozen=True)
class MomentumMode:
    p: tuple
    m: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in np.broadcast_to(self.p, 3)))

    @property
    def energy(self) -> float:
        return float(np.sqrt(np.dot(self.p, self.p) + self.m**2))


@dataclass(frozen=True)
class SpectralData:
    E: float
    H: np.ndarray
    Pplus: np.ndarray
    Pminus: np.ndarray


def hamiltonian(mode: MomentumMode, basis: GammaBasis) -> np.ndarray:
    if mode.m <= 0:
        raise NonpositiveMass(f"mass must be positive, got {mode.m}")
    h = mode.m * basis.beta
    for pj, aj in zip(mode.p, basis.alpha):
        h = h + pj * aj
    return h


def spectral(mode: MomentumMode, basis: GammaBasis) -> SpectralData:
    h = hamiltonian(mode, basis)
    e = mode.energy
    sign = h / e
    eye = np.eye(4)
    return SpectralData(E=e, H=h, Pplus=(eye + sign) / 2, Pminus=(eye - sign) / 2)


def evolution(mode: MomentumMode, basis: GammaBasis, t: float) -> np.ndarray:
    """exp(-iHt) as ``e^{-iEt} P+ + e^{+iEt} P-``."""
    sd = spectral(mode, basis)
    return np.exp(-1j * sd.E * t) * sd.Pplus + np.exp(1j * sd.E * t) * sd.Pminus


def evolution_closed_form(mode: MomentumMode, basis: GammaBasis, t: float) -> np.ndarray:
    """exp(-iHt) written as ``e^{-i|H|t} + i(1 - H/|H|) sin(|H|t)``."""
    sd = spectral(mode, basis)
    eye = np.eye(4)
    return np.exp(-1j * sd.E * t) * eye + 1j * (eye - sd.H / sd.E) * np.sin(sd.E * t)


def beta_heisenberg(mode: MomentumMode, basis: GammaBasis, t: float) -> np.ndarray:
    """beta(t) assembled from its constant part and three oscillating terms.

    ``P`` is the negative-energy projector; no simplification is applied so
    that agreement with ``U^H beta U`` checks the decomposition itself.
    """
    sd = spectral(mode, basis)
    b, P, e = basis.beta, sd.Pminus, sd.E
    s = np.sin(e * t)
    return (
        b
        - 2j * P * s @ b * np.exp(-1j * e * t)
        + 2j * np.exp(1j * e * t) * b * s @ P
        + 4 * (P * s) @ b @ (P * s)
    )


def positive_rate_identity(mode: MomentumMode, basis: GammaBasis):
    """Return ``(P+ beta P+, (m/E) P+)``; the two must coincide."""
    sd = spectral(mode, basis)
    lhs = sd.Pplus @ basis.beta @ sd.Pplus
    rhs = (mode.m / sd.E) * sd.Pplus
    return lhs, rhs


# Batched helpers over many modes at once: momenta has shape (N, 3).

def energies(momenta, m: float) -> np.ndarray:
    momenta = np.asarray(momenta, dtype=float)
    return np.sqrt(np.einsum("ki,ki->k", momenta, momenta) + m * m)


def hamiltonians(momenta, m: float, basis: GammaBasis) -> np.ndarray:
    """Stack of 4x4 Hamiltonians, shape (N, 4, 4)."""
    if m <= 0:
        raise NonpositiveMass(f"mass must be positive, got {m}")
    momenta = np.asarray(momenta, dtype=float)
    return np.einsum("ki,iab->kab", momenta, np.array(basis.alpha)) + m * basis.beta
