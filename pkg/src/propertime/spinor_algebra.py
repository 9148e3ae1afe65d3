"""Dirac-representation matrices and small complex 4x4 matrix helpers.

All matrices are plain ``numpy`` arrays of dtype ``complex128``. The arrays
held by :class:`GammaBasis` are flagged read-only so a basis can be shared
freely.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Tolerances",
    "TOL",
    "GammaBasis",
    "build_gamma_basis",
    "METRIC",
    "PAULI",
    "multiply",
    "add",
    "adjoint",
    "transpose",
    "conjugate",
    "scale",
    "anticommutator",
    "commutator",
    "norm",
    "is_hermitian",
]


@dataclass(frozen=True)
class Tolerances:
    """Tolerance constants used by identity checks across the package."""

    identity: float = 1e-12
    exact: float = 1e-14
    rank: float = 1e-10
    kernel_match: float = 1e-10


TOL = Tolerances()

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GammaBasis:
    gamma: tuple  # gamma^0 .. gamma^3
    alpha: tuple  # alpha_1 .. alpha_3
    beta: np.ndarray
    sigma: tuple  # 2x2 Pauli matrices
    Sigma: tuple  # block-diagonal 4x4 spin matrices
    identity: np.ndarray = field(default_factory=lambda: _frozen(np.eye(4)))

    @property
    def gamma0(self):
        return self.gamma[0]


def build_gamma_basis() -> GammaBasis:
    """Return gamma^mu, alpha_j, beta and Sigma_j in the Dirac representation.

    ``gamma^0 = diag(I2, -I2)`` and ``gamma^j`` carries ``sigma_j`` in the
    upper-right block and ``-sigma_j`` in the lower-left block.
    """
    g0 = np.block([[_I2, _Z2], [_Z2, -_I2]])
    gj = [np.block([[_Z2, s], [-s, _Z2]]) for s in PAULI]
    gamma = tuple(_frozen(g) for g in [g0, *gj])
    alpha = tuple(_frozen(g0 @ g) for g in gj)
    Sigma = tuple(_frozen(np.block([[s, _Z2], [_Z2, s]])) for s in PAULI)
    return GammaBasis(
        gamma=gamma,
        alpha=alpha,
        beta=gamma[0],
        sigma=tuple(_frozen(s) for s in PAULI),
        Sigma=Sigma,
    )


def multiply(a, b):
    return np.asarray(a) @ np.asarray(b)


def add(a, b):
    return np.asarray(a) + np.asarray(b)


def adjoint(a):
    return np.conjugate(np.asarray(a)).T


def transpose(a):
    return np.asarray(a).T


def conjugate(a):
    return np.conjugate(np.asarray(a))


def scale(c, a):
    return c * np.asarray(a)


def anticommutator(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return a @ b + b @ a


def commutator(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return a @ b - b @ a


def norm(a) -> float:
    """Operator 2-norm (largest singular value)."""
    return float(np.linalg.norm(np.asarray(a), 2))


def is_hermitian(a, tol: float = TOL.exact) -> bool:
    a = np.asarray(a)
    return bool(np.max(np.abs(a - adjoint(a)), initial=0.0) <= tol)
