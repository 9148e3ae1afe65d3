"""Recover the proper-time rate matrix from Lorentz, time-reversal and
parity invariance.

The unknown Hermitian matrix ``D`` is written as ``sum_k c_k G_k`` over a
fixed orthonormal basis ``G_k`` of Hermitian 4x4 matrices built from
products of gamma matrices, so every invariance condition becomes a real
linear system in the 16 coefficients ``c_k``. Its null space is computed
with a thresholded SVD.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DegenerateSystem, UnexpectedKernel
from .spinor_algebra import TOL, GammaBasis, adjoint, build_gamma_basis

__all__ = [
    "HermitianParam",
    "ConstraintSystem",
    "hermitian_basis",
    "reconstruct",
    "coordinates",
    "lorentz_rows",
    "time_reversal_rows",
    "parity_rows",
    "null_space",
    "derive_rate_matrix",
    "derivation_report",
]


def hermitian_basis(basis: GammaBasis) -> tuple:
    """The 16 Hermitian products of gamma matrices, each squaring to I4.

    Ordered by subset size and then lexicographically, so ``I4`` is first
    and ``gamma^0`` second.
    """
    out = []
    for size in range(5):
        for subset in combinations(range(4), size):
            m = np.eye(4, dtype=complex)
            for mu in subset:
                m = m @ basis.gamma[mu]
            if not np.allclose(m, adjoint(m), atol=TOL.exact):
                m = 1j * m
            m.setflags(write=False)
            out.append(m)
    return tuple(out)


@dataclass(frozen=True)
class HermitianParam:
    coeffs: np.ndarray

    def matrix(self, basis: GammaBasis | None = None) -> np.ndarray:
        return reconstruct(self.coeffs, basis)


def reconstruct(coeffs, basis: GammaBasis | None = None) -> np.ndarray:
    herm = hermitian_basis(basis or build_gamma_basis())
    return np.tensordot(np.asarray(coeffs, dtype=float), np.array(herm), axes=1)


def coordinates(matrix, basis: GammaBasis | None = None) -> np.ndarray:
    """Coefficients of a Hermitian matrix under the inner product Re tr(A^H B)/4."""
    herm = hermitian_basis(basis or build_gamma_basis())
    m = np.asarray(matrix)
    return np.array([np.real(np.trace(adjoint(g) @ m)) / 4 for g in herm])


@dataclass
class ConstraintSystem:
    """Stacked real rows acting on the 16 coefficients of ``D``."""

    rows: np.ndarray = field(default_factory=lambda: np.zeros((0, 16)))
    tags: list = field(default_factory=list)

    def __add__(self, other: "ConstraintSystem") -> "ConstraintSystem":
        return ConstraintSystem(np.vstack([self.rows, other.rows]), self.tags + other.tags)

    def __len__(self):
        return self.rows.shape[0]

    def evaluate(self, d) -> np.ndarray:
        """Row values at a Hermitian matrix ``d`` (given as a matrix or coeffs)."""
        d = np.asarray(d)
        coeffs = d if d.ndim == 1 else coordinates(d)
        return self.rows @ coeffs

    def select(self, tag) -> "ConstraintSystem":
        keep = [i for i, t in enumerate(self.tags) if t == tag]
        return ConstraintSystem(self.rows[keep], [self.tags[i] for i in keep])


def _rows_from_map(linear_map, basis: GammaBasis, tag) -> ConstraintSystem:
    # Column k holds the image of basis element k, split into real and
    # imaginary parts of the 16 entries.
    cols = []
    for g in hermitian_basis(basis):
        img = linear_map(g).ravel()
        cols.append(np.concatenate([img.real, img.imag]))
    rows = np.array(cols).T
    return ConstraintSystem(rows, [tag] * rows.shape[0])


def lorentz_rows(basis: GammaBasis) -> ConstraintSystem:
    """Rows of ``D g^mu g^nu + (g^nu)^H (g^mu)^H D = 0`` for the six generators."""
    system = ConstraintSystem()
    for mu, nu in combinations(range(4), 2):
        gm, gn = basis.gamma[mu], basis.gamma[nu]
        left = gm @ gn
        right = adjoint(gn) @ adjoint(gm)
        system = system + _rows_from_map(
            lambda d, left=left, right=right: d @ left + right @ d,
            basis,
            ("lorentz", mu, nu),
        )
    return system


def time_reversal_rows(basis: GammaBasis) -> ConstraintSystem:
    """Rows of ``g1 g3 D^T g1 g3 + D = 0``.

    Transposition is linear in the real coefficients, so the antiunitary
    nature of time reversal does not break linearity here.
    """
    g13 = basis.gamma[1] @ basis.gamma[3]
    return _rows_from_map(lambda d: g13 @ d.T @ g13 + d, basis, ("time_reversal",))


def parity_rows(basis: GammaBasis) -> ConstraintSystem:
    g0 = basis.gamma[0]
    return _rows_from_map(lambda d: g0 @ d @ g0 - d, basis, ("parity",))


def null_space(system: ConstraintSystem, rtol: float = TOL.rank) -> list:
    """Orthonormal basis of the kernel of the stacked rows."""
    if len(system) == 0:
        raise DegenerateSystem("constraint system has no rows")
    _, s, vh = np.linalg.svd(system.rows)
    if s[0] <= np.finfo(float).tiny:
        raise DegenerateSystem("all constraint rows vanish")
    rank = int(np.sum(s > rtol * s[0]))
    return [HermitianParam(vh[k].copy()) for k in range(rank, vh.shape[0])]


def _stages(basis):
    lor = lorentz_rows(basis)
    tr = time_reversal_rows(basis)
    par = parity_rows(basis)
    return [
        ("lorentz", lor),
        ("lorentz+T", lor + tr),
        ("lorentz+T+P", lor + tr + par),
    ]


def derive_rate_matrix(basis: GammaBasis | None = None) -> np.ndarray:
    """Unique invariant rate matrix, scaled so its (1,1) entry is +1."""
    return derivation_report(basis)["D"]


def derivation_report(basis: GammaBasis | None = None) -> dict:
    basis = basis or build_gamma_basis()
    dims = {}
    kernel = []
    for name, system in _stages(basis):
        kernel = null_space(system)
        dims[name] = len(kernel)
    if len(kernel) != 1:
        raise UnexpectedKernel(f"final kernel has dimension {len(kernel)}, expected 1")
    d = reconstruct(kernel[0].coeffs, basis)
    d = d / d[0, 0]
    return {"kernel_dims": dims, "D": d}
