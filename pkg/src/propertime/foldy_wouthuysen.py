"""Foldy-Wouthuysen checks on a 2-D position lattice with B along z.

Spinor vectors on an ``M1 x M2`` lattice have length ``4M`` and are stored
component-major: entry ``c * M + site`` with ``site = i1 * M2 + i2``, so the
first ``2M`` entries are the upper (large) two components.

Two routes compute the transformation and the positive-energy projector:

* dense: ``scipy.linalg.expm`` of the full generator and a dense
  eigendecomposition of ``H``;
* chiral: with no scalar potential ``H = [[m, T], [T, -m]]`` where
  ``T = sigma.pi`` is ``2M x 2M``, so one eigendecomposition of ``T`` gives
  ``exp(beta alpha.pi / 2m)`` and ``sign(H)`` in closed form. Under the
  velocity scaling used here ``T`` simply scales with ``s``, so the same
  factorization serves every scale.

The dense route is the reference for small lattices; the scaling studies on
24 x 24 lattices use the chiral route.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
import scipy.linalg

from ._fitting import loglog_slope
from .errors import ExpDiverged, GridTooCoarse, ValidationError, ZeroEigenvalue
from .spinor_algebra import PAULI, GammaBasis, build_gamma_basis

__all__ = [
    "LatticeConfig",
    "LatticeOperator",
    "LatticePacket",
    "ChiralFactor",
    "ScalingPoint",
    "build_kinetic",
    "build_dirac_hamiltonian",
    "fw_generator",
    "fw_unitary",
    "beta_truncated",
    "sigma_b_coefficient",
    "positive_projector_lattice",
    "lattice_packet",
    "small_component_ratio",
    "rate_exact",
    "rate_pauli_side",
    "alpha_pi_cross_term",
    "verify_beta_expansion",
    "scaling_study",
    "fit_slopes",
    "SLOPE_BANDS",
]

_BASIS = build_gamma_basis()
_MIN_SITES = 8
_MAX_GENERATOR_RADIUS = 1.5
_UNITARITY_LIMIT = 1e-9

# Expected leading power and allowed half-width for each fitted slope.
SLOPE_BANDS = {
    "res_beta": (3.0, 0.4),
    "ratio_small": (3.0, 0.5),
    "res_rate": (4.0, 0.6),
}


@dataclass(frozen=True)
class LatticeConfig:
    """Periodic 2-D lattice; ``L`` is the box length per axis.

    Site coordinates are ``(i - M // 2) * h`` so the box midpoint is a site
    at the origin, where the symmetric-gauge vector potential vanishes.
    """

    dims: tuple = (24, 24)
    L: tuple = (12.0, 12.0)
    m: float = 1.0
    e: float = 1.0
    Bz: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in np.broadcast_to(self.dims, 2)))
        object.__setattr__(self, "L", tuple(float(x) for x in np.broadcast_to(self.L, 2)))
        if self.m <= 0:
            raise ValidationError("m > 0")
        if any(x <= 0 for x in self.L):
            raise ValidationError("L > 0")

    @property
    def sites(self) -> int:
        return self.dims[0] * self.dims[1]

    @property
    def spacing(self) -> tuple:
        return tuple(L / n for L, n in zip(self.L, self.dims))

    def coordinates(self):
        """Site coordinates ``(x, y)`` as flat arrays of length M."""
        ax = [(np.arange(n) - n // 2) * h for n, h in zip(self.dims, self.spacing)]
        x, y = np.meshgrid(*ax, indexing="ij")
        return x.ravel(), y.ravel()

    def scaled(self, s: float) -> "LatticeConfig":
        """Velocity-scaled copy: momenta ``* s``, ``eB`` and ``e phi`` ``* s**2``.

        The box is stretched by ``1/s`` so a packet fixed in lattice units
        has all of its momentum content multiplied by ``s``.
        """
        return replace(self, L=tuple(x / s for x in self.L), Bz=self.Bz * s * s, phi=self.phi * s * s)


@dataclass(frozen=True)
class LatticeOperator:
    matrix: np.ndarray
    label: str = ""
    hermitian: bool = False

    def __matmul__(self, other):
        if isinstance(other, LatticeOperator):
            return LatticeOperator(self.matrix @ other.matrix, f"{self.label}*{other.label}")
        return self.matrix @ other

    @property
    def H(self) -> "LatticeOperator":
        return LatticeOperator(self.matrix.conj().T, f"{self.label}^H", self.hermitian)

    def hermiticity_error(self) -> float:
        a = self.matrix
        return float(np.linalg.norm(a - a.conj().T) / max(np.linalg.norm(a), 1e-300))


def _derivative_1d(n: int, h: float) -> np.ndarray:
    """Fourth-order central first derivative with periodic wrap."""
    d = np.zeros((n, n))
    for offset, c in ((1, 8.0), (2, -1.0)):
        idx = np.arange(n)
        d[idx, (idx + offset) % n] += c
        d[idx, (idx - offset) % n] -= c
    return d / (12 * h)


def _check_dims(cfg: LatticeConfig):
    if min(cfg.dims) < _MIN_SITES:
        raise GridTooCoarse(f"need at least {_MIN_SITES} sites per axis, got {cfg.dims}")


def build_kinetic(cfg: LatticeConfig):
    """``pi_j = p_j - e A_j`` in the symmetric gauge ``A = (-B y / 2, B x / 2)``."""
    _check_dims(cfg)
    n1, n2 = cfg.dims
    h1, h2 = cfg.spacing
    p1 = np.kron(-1j * _derivative_1d(n1, h1), np.eye(n2))
    p2 = np.kron(np.eye(n1), -1j * _derivative_1d(n2, h2))
    x, y = cfg.coordinates()
    a1 = -cfg.Bz * y / 2
    a2 = cfg.Bz * x / 2
    pi1 = p1 - cfg.e * np.diag(a1)
    pi2 = p2 - cfg.e * np.diag(a2)
    return LatticeOperator(pi1, "pi1", True), LatticeOperator(pi2, "pi2", True)


def vector_potential(cfg: LatticeConfig):
    x, y = cfg.coordinates()
    return -cfg.Bz * y / 2, cfg.Bz * x / 2


def _spinor_op(a4, site_op):
    return np.kron(a4, site_op)


def build_dirac_hamiltonian(cfg: LatticeConfig, basis: GammaBasis = _BASIS) -> LatticeOperator:
    pi1, pi2 = build_kinetic(cfg)
    n = cfg.sites
    h = (
        _spinor_op(basis.alpha[0], pi1.matrix)
        + _spinor_op(basis.alpha[1], pi2.matrix)
        + cfg.m * _spinor_op(basis.beta, np.eye(n))
    )
    if cfg.phi:
        h = h + cfg.e * cfg.phi * np.eye(4 * n)
    return LatticeOperator(h, "H", True)


def fw_generator(cfg: LatticeConfig, basis: GammaBasis = _BASIS) -> LatticeOperator:
    """Anti-Hermitian ``S = beta alpha.pi / 2m``."""
    pi1, pi2 = build_kinetic(cfg)
    b = basis.beta
    s = (_spinor_op(b @ basis.alpha[0], pi1.matrix) + _spinor_op(b @ basis.alpha[1], pi2.matrix)) / (2 * cfg.m)
    return LatticeOperator(s, "S")


def _sigma_dot_pi(pi1: np.ndarray, pi2: np.ndarray) -> np.ndarray:
    return np.kron(PAULI[0], pi1) + np.kron(PAULI[1], pi2)


def generator_radius(cfg: LatticeConfig) -> float:
    """Spectral radius of ``S``, equal to ``||sigma.pi|| / 2m``."""
    pi1, pi2 = build_kinetic(cfg)
    t = np.linalg.eigvalsh(_sigma_dot_pi(pi1.matrix, pi2.matrix))
    return float(np.max(np.abs(t)) / (2 * cfg.m))


def fw_unitary(cfg: LatticeConfig, basis: GammaBasis = _BASIS, check_radius: bool = True) -> LatticeOperator:
    """``U = exp(S)`` by Pade scaling-and-squaring (``scipy.linalg.expm``)."""
    if check_radius:
        radius = generator_radius(cfg)
        if radius >= _MAX_GENERATOR_RADIUS:
            raise ValidationError(f"generator spectral radius {radius:.3g} >= {_MAX_GENERATOR_RADIUS}")
    u = scipy.linalg.expm(fw_generator(cfg, basis).matrix)
    resid = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if not resid <= _UNITARITY_LIMIT:
        raise ExpDiverged(f"exp(S) unitarity residual {resid:.3e}")
    return LatticeOperator(u, "U")


def beta_truncated(cfg: LatticeConfig, basis: GammaBasis = _BASIS) -> LatticeOperator:
    """``beta - alpha.pi/m - beta pi^2/2m^2 + (e B/2m^2) beta Sigma_z``."""
    pi1, pi2 = (p.matrix for p in build_kinetic(cfg))
    m, n = cfg.m, cfg.sites
    b = basis.beta
    eye = np.eye(n)
    pi_sq = pi1 @ pi1 + pi2 @ pi2
    out = (
        _spinor_op(b, eye)
        - (_spinor_op(basis.alpha[0], pi1) + _spinor_op(basis.alpha[1], pi2)) / m
        - _spinor_op(b, pi_sq) / (2 * m * m)
        + cfg.e * cfg.Bz / (2 * m * m) * _spinor_op(b @ basis.Sigma[2], eye)
    )
    return LatticeOperator(out, "beta_trunc", True)


def sigma_b_coefficient(op: LatticeOperator, cfg: LatticeConfig, basis: GammaBasis = _BASIS) -> float:
    """Component of ``op`` along ``beta Sigma_z (x) I`` under Re tr(A^H B) / 4M."""
    ref = _spinor_op(basis.beta @ basis.Sigma[2], np.eye(cfg.sites))
    return float(np.real(np.vdot(ref, op.matrix)) / (4 * cfg.sites))


def positive_projector_lattice(H: LatticeOperator, m: float = 1.0) -> LatticeOperator:
    """Projector onto the positive spectrum of a Hermitian lattice operator."""
    w, v = np.linalg.eigh(H.matrix)
    if np.min(np.abs(w)) < 1e-8 * m:
        raise ZeroEigenvalue(f"eigenvalue {w[np.argmin(np.abs(w))]:.3e} too close to zero")
    vp = v[:, w > 0]
    return LatticeOperator(vp @ vp.conj().T, "P+", True)


class ChiralFactor:
    """Closed-form functions of ``H`` from one eigendecomposition of ``sigma.pi``.

    Valid for zero scalar potential, where ``H = [[m, T], [T, -m]]`` in the
    large/small block split.
    """

    def __init__(self, cfg: LatticeConfig):
        if cfg.phi:
            raise ValidationError("chiral route requires phi = 0")
        self.cfg = cfg
        pi1, pi2 = (p.matrix for p in build_kinetic(cfg))
        self.t, self.w = np.linalg.eigh(_sigma_dot_pi(pi1, pi2))
        self.n2 = 2 * cfg.sites

    def _fn(self, values, vec):
        return self.w @ (values * (self.w.conj().T @ vec))

    def _split(self, psi):
        return psi[: self.n2], psi[self.n2:]

    @property
    def generator_radius(self) -> float:
        return float(np.max(np.abs(self.t)) / (2 * self.cfg.m))

    def apply_h(self, psi):
        up, lo = self._split(psi)
        m = self.cfg.m
        return np.concatenate([m * up + self._fn(self.t, lo), self._fn(self.t, up) - m * lo])

    def apply_positive_projector(self, psi):
        inv_abs = 1 / np.sqrt(self.cfg.m**2 + self.t**2)
        up, lo = self._split(self.apply_h(psi))
        return (psi + np.concatenate([self._fn(inv_abs, up), self._fn(inv_abs, lo)])) / 2

    def apply_negative_projector(self, psi):
        return psi - self.apply_positive_projector(psi)

    def apply_u(self, psi, adjoint: bool = False):
        """``exp(+-S) psi`` with ``exp(S) = [[cos X, sin X], [-sin X, cos X]]``, X = T/2m."""
        x = self.t / (2 * self.cfg.m)
        c, s = np.cos(x), np.sin(x)
        if adjoint:
            s = -s
        up, lo = self._split(psi)
        return np.concatenate([self._fn(c, up) + self._fn(s, lo), self._fn(c, lo) - self._fn(s, up)])

    def unitary(self) -> LatticeOperator:
        x = self.t / (2 * self.cfg.m)
        w = self.w
        c = (w * np.cos(x)) @ w.conj().T
        s = (w * np.sin(x)) @ w.conj().T
        return LatticeOperator(np.block([[c, s], [-s, c]]), "U")


def _apply_kron(a4, site_op, psi):
    n = site_op.shape[0]
    return (a4 @ (psi.reshape(4, n) @ site_op.T)).ravel()


def _apply_beta_truncated(cfg: LatticeConfig, pi1, pi2, psi, basis: GammaBasis = _BASIS):
    m = cfg.m
    b = basis.beta
    psi4 = psi.reshape(4, -1)
    p1 = psi4 @ pi1.T
    p2 = psi4 @ pi2.T
    pi_sq = p1 @ pi1.T + p2 @ pi2.T
    out = (
        b @ psi4
        - (basis.alpha[0] @ p1 + basis.alpha[1] @ p2) / m
        - b @ pi_sq / (2 * m * m)
        + cfg.e * cfg.Bz / (2 * m * m) * (b @ basis.Sigma[2] @ psi4)
    )
    return out.ravel()


@dataclass(frozen=True)
class LatticePacket:
    """Gaussian test packet in lattice units.

    ``width`` is the standard deviation of ``|psi|^2`` in sites and
    ``kappa`` the carrier wavenumber along x in radians per site.
    """

    kappa: float = 0.5
    width: float = 1.6
    spin: tuple = (1.0, 0.0)
    branch: str = "positive"


def lattice_packet(cfg: LatticeConfig, packet: LatticePacket) -> np.ndarray:
    """Unprojected centred Gaussian with the spin in the upper (or lower) block."""
    n1, n2 = cfg.dims
    i1 = np.arange(n1) - n1 // 2
    i2 = np.arange(n2) - n2 // 2
    g1 = np.exp(-(i1**2) / (4 * packet.width**2) + 1j * packet.kappa * i1)
    g2 = np.exp(-(i2**2) / (4 * packet.width**2))
    g = np.outer(g1, g2).ravel()
    spin = np.asarray(packet.spin, dtype=complex)
    comps = np.zeros(4, dtype=complex)
    if packet.branch == "negative":
        comps[2:] = spin
    else:
        comps[:2] = spin
    return np.kron(comps, g)


def _normalized(v):
    return v / np.linalg.norm(v)


def projected_packet(cfg: LatticeConfig, packet: LatticePacket, factor: ChiralFactor | None = None):
    """Normalized test packet projected onto the requested energy branch."""
    factor = factor or ChiralFactor(cfg)
    raw = lattice_packet(cfg, packet)
    if packet.branch == "negative":
        return _normalized(factor.apply_negative_projector(raw))
    return _normalized(factor.apply_positive_projector(raw))


def small_component_ratio(cfg: LatticeConfig, psi, factor: ChiralFactor | None = None) -> float:
    """``||chi'|| / ||Phi'||`` for ``psi' = U psi``."""
    factor = factor or ChiralFactor(cfg)
    up, lo = factor._split(factor.apply_u(psi))
    return float(np.linalg.norm(lo) / np.linalg.norm(up))


def rate_exact(psi, basis: GammaBasis = _BASIS) -> float:
    psi4 = np.asarray(psi).reshape(4, -1)
    return float(np.real(np.vdot(psi4, basis.beta @ psi4)))


def rate_pauli_side(cfg: LatticeConfig, psi, factor: ChiralFactor | None = None) -> float:
    """``<Phi'| 1 - pi^2/2m^2 + (e/2m^2) sigma_z B |Phi'>`` with ``Phi'`` the
    literal upper half of ``U psi`` (not renormalized)."""
    factor = factor or ChiralFactor(cfg)
    pi1, pi2 = (p.matrix for p in build_kinetic(cfg))
    up, _ = factor._split(factor.apply_u(psi))
    m = cfg.m
    phi2 = up.reshape(2, -1)
    p1 = phi2 @ pi1.T
    p2 = phi2 @ pi2.T
    pi_sq = p1 @ pi1.T + p2 @ pi2.T
    op = phi2 - pi_sq / (2 * m * m) + cfg.e * cfg.Bz / (2 * m * m) * (PAULI[2] @ phi2)
    return float(np.real(np.vdot(phi2, op)))


def alpha_pi_cross_term(cfg: LatticeConfig, psi, factor: ChiralFactor | None = None) -> float:
    """``|<psi'| alpha.pi / m |psi'>|`` for ``psi' = U psi``."""
    factor = factor or ChiralFactor(cfg)
    pi1, pi2 = (p.matrix for p in build_kinetic(cfg))
    psip = factor.apply_u(psi)
    a = _apply_kron(_BASIS.alpha[0], pi1, psip) + _apply_kron(_BASIS.alpha[1], pi2, psip)
    return float(abs(np.vdot(psip, a)) / cfg.m)


@dataclass(frozen=True)
class ScalingPoint:
    vscale: float
    res_beta: float
    res_rate: float
    ratio_small: float
    cross_term: float
    rate_exact: float
    rate_pauli: float


def _scaling_point(cfg: LatticeConfig, packet: LatticePacket, s: float, factor: ChiralFactor) -> ScalingPoint:
    scfg = cfg.scaled(s)
    pi1, pi2 = (p.matrix for p in build_kinetic(scfg))
    psi = projected_packet(scfg, packet, factor)
    # U beta U^H psi
    exact = factor.apply_u(_BASIS_BETA_APPLY(factor.apply_u(psi, adjoint=True)))
    trunc = _apply_beta_truncated(scfg, pi1, pi2, psi)
    r_exact = rate_exact(psi)
    r_pauli = rate_pauli_side(scfg, psi, factor)
    return ScalingPoint(
        vscale=s,
        res_beta=float(np.linalg.norm(exact - trunc)),
        res_rate=abs(r_exact - r_pauli),
        ratio_small=small_component_ratio(scfg, psi, factor),
        cross_term=alpha_pi_cross_term(scfg, psi, factor),
        rate_exact=r_exact,
        rate_pauli=r_pauli,
    )


def _BASIS_BETA_APPLY(psi):
    return (_BASIS.beta @ psi.reshape(4, -1)).ravel()


def _scaled_factor(cfg: LatticeConfig, base: ChiralFactor, s: float) -> ChiralFactor:
    # sigma.pi of the scaled lattice is exactly s times the reference one.
    f = ChiralFactor.__new__(ChiralFactor)
    f.cfg = cfg.scaled(s)
    f.t = base.t * s
    f.w = base.w
    f.n2 = base.n2
    return f


def scaling_study(cfg: LatticeConfig, vscales, packet: LatticePacket = LatticePacket()) -> list:
    """Evaluate every scaling quantity at each velocity scale.

    ``cfg`` is the reference lattice at ``vscale = 1``; each scale uses
    ``cfg.scaled(s)`` with the packet fixed in lattice units.
    """
    vscales = [float(s) for s in vscales]
    if any(s <= 0 for s in vscales):
        raise ValidationError("vscales must be positive")
    base = ChiralFactor(cfg)
    points = []
    for s in vscales:
        factor = _scaled_factor(cfg, base, s)
        if factor.generator_radius >= _MAX_GENERATOR_RADIUS:
            raise ValidationError(
                f"generator spectral radius {factor.generator_radius:.3g} at vscale {s} exceeds {_MAX_GENERATOR_RADIUS}"
            )
        points.append(_scaling_point(cfg, packet, s, factor))
    return points


def verify_beta_expansion(cfg: LatticeConfig, vscales, packet: LatticePacket = LatticePacket()) -> list:
    """``(vscale, ||(U beta U^H - beta_truncated) psi_s||)`` pairs."""
    vscales = list(vscales)
    if any(b >= a for a, b in zip(vscales, vscales[1:])):
        raise ValidationError("vscales must be strictly decreasing")
    return [(p.vscale, p.res_beta) for p in scaling_study(cfg, vscales, packet)]


def fit_slopes(points) -> dict:
    s = [p.vscale for p in points]
    return {
        name: loglog_slope(s, [getattr(p, name) for p in points])
        for name in ("res_beta", "ratio_small", "res_rate", "cross_term")
    }


def reference_config(dims=(24, 24), m: float = 1.0, e: float = 1.0, b_coeff: float = 0.1,
                     kappa: float = LatticePacket.kappa) -> LatticeConfig:
    """Reference lattice whose packet carrier momentum equals ``m`` at ``vscale = 1``.

    ``b_coeff`` fixes ``e B = b_coeff * m**2`` at ``vscale = 1``.
    """
    h = kappa / m
    return LatticeConfig(dims=dims, L=(dims[0] * h, dims[1] * h), m=m, e=e, Bz=b_coeff * m * m / e)
