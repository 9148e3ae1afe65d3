"""Spinor wavepackets on a momentum grid and their proper-time rate.

A field is a set of 4-component amplitudes, one per grid momentum, with
plain Riemann quadrature weights. Free evolution is exact per mode, so the
rate ``<beta>(t)`` is sampled without time stepping and integrated with
composite Simpson to give the accumulated proper time.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import Aliased, BadInterval, GridTooCoarse, ValidationError, ZeroProjection
from .momentum_dirac import energies, hamiltonians
from .spinor_algebra import GammaBasis

__all__ = [
    "MomentumGrid",
    "SpinorField",
    "WavepacketSpec",
    "RateSeries",
    "build_wavepacket",
    "branch_spinors",
    "norm2",
    "rate",
    "evolve",
    "proper_time",
    "zitter_spectrum",
]

_SEED_FLOOR = 1e-8
_IMAG_RESIDUE = 1e-13


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform Cartesian momentum grid.

    Axis ``i`` holds ``dims[i]`` points spanning ``center[i] +- pmax[i]``;
    an axis with a single point sits at ``center[i]`` (zero by default).
    """

    dims: tuple = (256, 1, 1)
    pmax: tuple = (8.0, 0.0, 0.0)
    m: float = 1.0
    center: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        dims = tuple(int(n) for n in np.broadcast_to(self.dims, 3))
        if any(n < 1 for n in dims):
            raise ValidationError(f"grid dims must be positive, got {dims}")
        if self.m <= 0:
            raise ValidationError("m > 0")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "pmax", tuple(float(x) for x in np.broadcast_to(self.pmax, 3)))
        object.__setattr__(self, "center", tuple(float(x) for x in np.broadcast_to(self.center, 3)))
        for n, pm in zip(dims, self.pmax):
            if n > 1 and pm <= 0:
                raise ValidationError("pmax > 0 on every axis with more than one point")

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def axes(self):
        return [
            np.linspace(c - pm, c + pm, n) if n > 1 else np.array([c])
            for n, pm, c in zip(self.dims, self.pmax, self.center)
        ]

    def spacing(self):
        return tuple(2 * pm / (n - 1) if n > 1 else 1.0 for n, pm in zip(self.dims, self.pmax))

    def momenta(self) -> np.ndarray:
        """All grid momenta, shape (N, 3), in C order over the three axes."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)

    def weight(self) -> float:
        return float(np.prod(self.spacing()))

    def e_max(self) -> float:
        return float(np.max(energies(self.momenta(), self.m)))


@dataclass(frozen=True)
class SpinorField:
    grid: MomentumGrid
    amps: np.ndarray  # (N, 4) complex
    weights: np.ndarray  # (N,) real

    def __mul__(self, c):
        return replace(self, amps=c * self.amps)

    __rmul__ = __mul__

    @property
    def norm2(self) -> float:
        return norm2(self)


@dataclass(frozen=True)
class WavepacketSpec:
    p0: tuple = (0.0, 0.0, 0.0)
    sigma_p: float = 0.5
    spin: tuple = (1.0, 0.0)
    branch: str = "positive"  # positive | negative | mixed
    theta: float = np.pi / 4  # branch mixing angle, used when branch == "mixed"

    def __post_init__(self):
        if not self.sigma_p > 0:
            raise ValidationError("sigma_p > 0")
        if self.branch not in ("positive", "negative", "mixed"):
            raise ValidationError(f"branch must be positive, negative or mixed, got {self.branch!r}")
        spin = np.asarray(self.spin, dtype=complex)
        if spin.shape != (2,) or not np.isclose(np.linalg.norm(spin), 1.0, atol=1e-12):
            raise ValidationError("spin must be a unit 2-vector")
        object.__setattr__(self, "p0", tuple(float(x) for x in np.broadcast_to(self.p0, 3)))


@dataclass(frozen=True)
class RateSeries:
    times: np.ndarray
    rate: np.ndarray
    tau: np.ndarray
    e_max: float | None = None


def _project(projectors, seed):
    v = np.einsum("kab,b->ka", projectors, seed)
    return v, np.linalg.norm(v, axis=1)


def branch_spinors(momenta, m: float, spin, basis: GammaBasis):
    """Unit positive- and negative-energy spinors for every momentum.

    The positive branch projects ``(spin, 0)``; the negative branch projects
    ``(0, spin)``. Should a projection vanish, the orthogonal spin seed is
    used instead.
    """
    spin = np.asarray(spin, dtype=complex)
    other = np.array([-np.conj(spin[1]), np.conj(spin[0])])
    h = hamiltonians(momenta, m, basis)
    sign = h / energies(momenta, m)[:, None, None]
    eye = np.eye(4)
    out = []
    for proj, upper in ((eye + sign) / 2, True), ((eye - sign) / 2, False):
        seeds = [np.concatenate([s, np.zeros(2)]) if upper else np.concatenate([np.zeros(2), s])
                 for s in (spin, other)]
        v, n = _project(proj, seeds[0])
        bad = n < _SEED_FLOOR
        if np.any(bad):
            v2, n2 = _project(proj[bad], seeds[1])
            if np.any(n2 < _SEED_FLOOR):
                raise ZeroProjection("both seed spinors project to zero")
            v[bad], n[bad] = v2, n2
        out.append(v / n[:, None])
    return out[0], out[1]


def build_wavepacket(spec: WavepacketSpec, grid: MomentumGrid, basis: GammaBasis) -> SpinorField:
    """Gaussian packet ``exp(-(p-p0)^2 / 4 sigma_p^2)`` times a branch spinor, normalized."""
    p0 = np.asarray(spec.p0)
    for n, pm, c, p0i in zip(grid.dims, grid.pmax, grid.center, p0):
        if n > 1 and (c - pm > p0i - 4 * spec.sigma_p or c + pm < p0i + 4 * spec.sigma_p):
            raise GridTooCoarse(
                f"grid [{c - pm:g}, {c + pm:g}] does not cover p0 +- 4 sigma_p on an active axis"
            )
    momenta = grid.momenta()
    env = np.exp(-np.sum((momenta - p0) ** 2, axis=1) / (4 * spec.sigma_p**2))
    u, v = branch_spinors(momenta, grid.m, spec.spin, basis)
    if spec.branch == "positive":
        w = u
    elif spec.branch == "negative":
        w = v
    else:
        w = np.cos(spec.theta) * u + np.sin(spec.theta) * v
    weights = np.full(grid.size, grid.weight())
    field_ = SpinorField(grid, env[:, None] * w, weights)
    return field_ * (1 / np.sqrt(norm2(field_)))


def norm2(field_: SpinorField) -> float:
    return float(np.sum(field_.weights * np.sum(np.abs(field_.amps) ** 2, axis=1)))


def rate(field_: SpinorField, basis: GammaBasis) -> float:
    """Expectation value of beta, i.e. the proper-time rate."""
    a = field_.amps
    dens = np.einsum("ka,ab,kb->k", a.conj(), basis.beta, a)
    total = np.sum(field_.weights * dens)
    scale = max(1.0, float(np.sum(field_.weights * np.sum(np.abs(a) ** 2, axis=1))))
    if abs(total.imag) > _IMAG_RESIDUE * scale:
        raise ArithmeticError(f"rate has imaginary part {total.imag:.3e}")
    return float(total.real)


def evolve(field_: SpinorField, basis: GammaBasis, t: float) -> SpinorField:
    """Apply exp(-iHt) mode by mode as ``e^{-iEt} P+ + e^{iEt} P-``."""
    if t == 0:
        return field_
    momenta = field_.grid.momenta()
    m = field_.grid.m
    e = energies(momenta, m)
    sign = hamiltonians(momenta, m, basis) / e[:, None, None]
    eye = np.eye(4)
    phase = np.exp(-1j * e * t)[:, None, None]
    u = phase * (eye + sign) / 2 + phase.conj() * (eye - sign) / 2
    return replace(field_, amps=np.einsum("kab,kb->ka", u, field_.amps))


def proper_time(field_: SpinorField, basis: GammaBasis, t0: float, t1: float, nsamples: int) -> RateSeries:
    """Sample the rate on a uniform time grid and integrate it (Simpson)."""
    if nsamples < 3 or nsamples % 2 == 0:
        raise BadInterval(f"nsamples must be odd and >= 3, got {nsamples}")
    if t1 < t0:
        raise BadInterval(f"need t1 >= t0, got [{t0}, {t1}]")
    times = np.linspace(t0, t1, nsamples)
    rates = np.array([rate(evolve(field_, basis, t), basis) for t in times])
    if t1 == t0:
        tau = np.zeros(nsamples)
    else:
        tau = cumulative_simpson(rates, x=times, initial=0.0)
    return RateSeries(times, rates, tau, e_max=field_.grid.e_max())


def zitter_spectrum(series: RateSeries, e_max: float | None = None, with_power: bool = False):
    """Dominant nonzero angular frequency of the rate and its amplitude.

    Amplitude is the one-sided DFT magnitude ``2|X_k|/N`` of the mean-free
    signal. With ``with_power`` the full ``(omega, |X|^2)`` arrays are also
    returned.
    """
    n = len(series.times)
    if n < 64:
        raise Aliased(f"need at least 64 samples, got {n}")
    dt = series.times[1] - series.times[0]
    if not np.allclose(np.diff(series.times), dt, rtol=1e-9, atol=0):
        raise Aliased("series is not uniformly sampled")
    e_max = series.e_max if e_max is None else e_max
    if e_max is not None and 1 / dt <= 4 * e_max / np.pi:
        raise Aliased(f"sampling rate {1 / dt:.4g} <= 4 E_max / pi = {4 * e_max / np.pi:.4g}")
    x = np.fft.rfft(series.rate - np.mean(series.rate))
    omega = 2 * np.pi * np.fft.rfftfreq(n, dt)
    k = 1 + int(np.argmax(np.abs(x[1:])))
    out = (float(omega[k]), float(2 * np.abs(x[k]) / n))
    if with_power:
        return out + (omega, np.abs(x) ** 2)
    return out
