import numpy as np
import pytest
import scipy.linalg
from dataclasses import replace

from propertime import foldy_wouthuysen as fw
from propertime.errors import ExpDiverged, GridTooCoarse, ValidationError, ZeroEigenvalue
from propertime.foldy_wouthuysen import (
    ChiralFactor,
    LatticeConfig,
    LatticeOperator,
    LatticePacket,
    beta_truncated,
    build_dirac_hamiltonian,
    build_kinetic,
    fw_unitary,
    positive_projector_lattice,
    projected_packet,
    rate_exact,
    rate_pauli_side,
    reference_config,
    scaling_study,
    sigma_b_coefficient,
    small_component_ratio,
    verify_beta_expansion,
)
from propertime._fitting import loglog_slope

VSCALES = (0.4, 0.2, 0.1, 0.05)


def plane_wave(cfg, n1, n2):
    x, y = cfg.coordinates()
    k1, k2 = 2 * np.pi * n1 / cfg.L[0], 2 * np.pi * n2 / cfg.L[1]
    return np.exp(1j * (k1 * x + k2 * y)), (k1, k2)


def fd_symbol(k, h):
    return (8 * np.sin(k * h) - np.sin(2 * k * h)) / (6 * h)


@pytest.fixture(scope="module")
def small_cfg():
    return LatticeConfig(dims=(10, 10), L=(10.0, 10.0), m=1.0, e=-1.0, Bz=0.3)


# --- kinetic operators -------------------------------------------------------

def test_too_coarse():
    with pytest.raises(GridTooCoarse):
        build_kinetic(LatticeConfig(dims=(6, 12)))


def test_plane_wave_eigenvalue_fourth_order():
    errs = []
    for n in (48, 96):
        cfg = LatticeConfig(dims=(n, 8), L=(10.0, 10.0))
        pw, (k1, _) = plane_wave(cfg, 3, 0)
        pi1, pi2 = build_kinetic(cfg)
        got = pi1 @ pw
        h = cfg.spacing[0]
        assert np.allclose(got, fd_symbol(k1, h) * pw, atol=1e-12)
        assert np.allclose(pi2 @ pw, 0, atol=1e-12)
        err = abs(fd_symbol(k1, h) - k1)
        assert err == pytest.approx(k1 * (k1 * h) ** 4 / 30, rel=0.1)
        errs.append(err)
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)


def test_vector_potential_vanishes_at_centre():
    cfg = LatticeConfig(dims=(12, 12), L=(6.0, 6.0), Bz=2.0)
    a1, a2 = fw.vector_potential(cfg)
    centre = 6 * 12 + 6
    assert a1[centre] == 0 and a2[centre] == 0
    x, y = cfg.coordinates()
    assert x[centre] == 0 and y[centre] == 0


@pytest.mark.parametrize("e", [1.0, -1.0])
def test_canonical_commutator_interior(e):
    cfg = LatticeConfig(dims=(32, 32), L=(16.0, 16.0), e=e, Bz=0.4)
    pi1, pi2 = (p.matrix for p in build_kinetic(cfg))
    x, y = cfg.coordinates()
    g = np.exp(-(x**2 + y**2) / (4 * 1.5**2))
    comm = pi1 @ (pi2 @ g) - pi2 @ (pi1 @ g)
    interior = (np.abs(x) <= 4) & (np.abs(y) <= 4)
    target = 1j * e * cfg.Bz * g
    rel = np.linalg.norm((comm - target)[interior]) / np.linalg.norm(target[interior])
    assert rel < 5e-3


# --- Hamiltonian and projector -----------------------------------------------

def test_hamiltonian_hermitian(small_cfg):
    h = build_dirac_hamiltonian(small_cfg)
    assert h.hermiticity_error() <= 1e-12


def test_free_spectrum():
    cfg = LatticeConfig(dims=(8, 8), L=(4.0, 4.0), m=1.3)
    w = np.linalg.eigvalsh(build_dirac_hamiltonian(cfg).matrix)
    assert abs(np.min(np.abs(w)) - cfg.m) <= 1e-8
    h = cfg.spacing[0]
    k = 2 * np.pi * np.fft.fftfreq(8, d=h)
    s1, s2 = np.meshgrid(fd_symbol(k, h), fd_symbol(k, h), indexing="ij")
    e = np.sqrt(s1.ravel() ** 2 + s2.ravel() ** 2 + cfg.m**2)
    expected = np.sort(np.concatenate([e, e, -e, -e]))
    assert np.allclose(np.sort(w), expected, atol=1e-10)


def test_positive_projector(small_cfg):
    h = build_dirac_hamiltonian(small_cfg)
    p = positive_projector_lattice(h, small_cfg.m).matrix
    assert np.max(np.abs(p @ p - p)) <= 1e-10
    assert np.max(np.abs(p @ h.matrix - h.matrix @ p)) <= 1e-10
    assert round(np.trace(p).real) == 2 * small_cfg.sites
    rng = np.random.default_rng(1)
    v = rng.normal(size=p.shape[0]) + 1j * rng.normal(size=p.shape[0])
    assert np.allclose(ChiralFactor(small_cfg).apply_positive_projector(v), p @ v, atol=1e-10)


def test_zero_eigenvalue():
    with pytest.raises(ZeroEigenvalue):
        positive_projector_lattice(LatticeOperator(np.diag([1.0, 0.0, -1.0]), "H", True))


# --- FW unitary --------------------------------------------------------------

def test_unitary_dense_matches_chiral(small_cfg):
    u = fw_unitary(small_cfg).matrix
    assert np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= 1e-10
    assert np.max(np.abs(u - ChiralFactor(small_cfg).unitary().matrix)) <= 1e-10


def test_unitary_matches_single_mode_rotation(basis):
    cfg = LatticeConfig(dims=(12, 12), L=(8.0, 8.0), m=1.0)
    pw, (k1, k2) = plane_wave(cfg, 2, -1)
    h = cfg.spacing[0]
    kt = (fd_symbol(k1, h), fd_symbol(k2, h))
    rot = scipy.linalg.expm(basis.beta @ (basis.alpha[0] * kt[0] + basis.alpha[1] * kt[1]) / (2 * cfg.m))
    w = np.array([0.3, 0.5j, -0.2, 0.7])
    u = fw_unitary(cfg).matrix
    assert np.allclose(u @ np.kron(w, pw), np.kron(rot @ w, pw), atol=1e-10)
    # zero-momentum sector is left untouched
    assert np.allclose(u @ np.kron(w, np.ones(cfg.sites)), np.kron(w, np.ones(cfg.sites)), atol=1e-10)


def test_generator_radius_guard():
    with pytest.raises(ValidationError):
        fw_unitary(LatticeConfig(dims=(8, 8), L=(0.5, 0.5)))


def test_exp_diverged(monkeypatch):
    monkeypatch.setattr(scipy.linalg, "expm", lambda a: 2 * np.eye(a.shape[0]))
    with pytest.raises(ExpDiverged):
        fw_unitary(LatticeConfig(dims=(8, 8), L=(8.0, 8.0)))


# --- truncated beta ----------------------------------------------------------

def test_beta_truncated_structure(small_cfg, basis):
    bt = beta_truncated(small_cfg)
    assert bt.hermiticity_error() <= 1e-10
    target = small_cfg.e * small_cfg.Bz / (2 * small_cfg.m**2)
    assert sigma_b_coefficient(bt, small_cfg) == pytest.approx(target, rel=1e-8)
    free = replace(small_cfg, Bz=0.0)
    w = np.array([1, 2j, 0.5, -1])
    flat = np.kron(w, np.ones(free.sites))
    assert np.allclose(beta_truncated(free).matrix @ flat, np.kron(basis.beta @ w, np.ones(free.sites)), atol=1e-10)


def test_truncated_action_matches_dense(small_cfg):
    rng = np.random.default_rng(2)
    v = rng.normal(size=4 * small_cfg.sites) + 0j
    pi1, pi2 = (p.matrix for p in build_kinetic(small_cfg))
    assert np.allclose(fw._apply_beta_truncated(small_cfg, pi1, pi2, v), beta_truncated(small_cfg).matrix @ v)


def test_exact_conjugation_matches_truncation_at_zero_momentum(basis):
    cfg = LatticeConfig(dims=(8, 8), L=(8.0, 8.0))
    u = fw_unitary(cfg).matrix
    flat = np.kron(np.array([1, 0, 0, 1j]), np.ones(cfg.sites))
    diff = (u @ np.kron(basis.beta, np.eye(cfg.sites)) @ u.conj().T - beta_truncated(cfg).matrix) @ flat
    assert np.linalg.norm(diff) <= 1e-10


# --- scaling studies on the 24 x 24 lattice ----------------------------------

@pytest.fixture(scope="module")
def study():
    return scaling_study(reference_config(), VSCALES)


def test_beta_expansion_slope(study):
    res = [p.res_beta for p in study]
    assert all(a > b for a, b in zip(res, res[1:]))
    assert abs(loglog_slope(VSCALES, res) - 3) <= 0.4
    # one halving shrinks the residual by close to 8
    assert res[-2] / res[-1] == pytest.approx(8, rel=0.15)


def test_verify_beta_expansion_pairs(study):
    pairs = verify_beta_expansion(reference_config(), VSCALES)
    assert [s for s, _ in pairs] == list(VSCALES)
    assert np.allclose([r for _, r in pairs], [p.res_beta for p in study], rtol=1e-12)
    with pytest.raises(ValidationError):
        verify_beta_expansion(reference_config(), (0.1, 0.2))


@pytest.mark.parametrize("b_coeff,e", [(0.0, 1.0), (0.1, -1.0), (0.5, 1.0)])
def test_slopes_other_fields(b_coeff, e):
    pts = scaling_study(reference_config(b_coeff=b_coeff, e=e), VSCALES)
    slopes = fw.fit_slopes(pts)
    for name, (centre, half) in fw.SLOPE_BANDS.items():
        assert abs(slopes[name] - centre) <= half, (name, slopes[name])


def test_small_component_slope(study):
    ratios = [p.ratio_small for p in study]
    assert abs(loglog_slope(VSCALES, ratios) - 3) <= 0.5
    assert ratios[-1] < 1e-3


def test_small_component_negative_packet():
    cfg = reference_config().scaled(0.1)
    f = ChiralFactor(cfg)
    psi = projected_packet(cfg, LatticePacket(branch="negative"), f)
    assert small_component_ratio(cfg, psi, f) > 1e3


def test_rest_packet_decouples():
    cfg = replace(reference_config(), Bz=0.0).scaled(0.05)
    f = ChiralFactor(cfg)
    psi = projected_packet(cfg, LatticePacket(kappa=0.0, width=2.0), f)
    assert small_component_ratio(cfg, psi, f) < 1e-4
    assert rate_pauli_side(cfg, psi, f) == pytest.approx(1.0, abs=1e-3)


def test_rate_difference_slope(study):
    diffs = [p.res_rate for p in study]
    assert abs(loglog_slope(VSCALES, diffs) - 4) <= 0.6
    rel = [p.res_rate / abs(p.rate_exact - 1) for p in study]
    assert all(a > b for a, b in zip(rel, rel[1:]))


def test_cross_term_slope(study):
    assert abs(loglog_slope(VSCALES, [p.cross_term for p in study]) - 4) <= 0.6


def test_rate_exact_matches_dense_expectation(basis):
    cfg = LatticeConfig(dims=(10, 10), L=(20.0, 20.0), Bz=0.02)
    f = ChiralFactor(cfg)
    psi = projected_packet(cfg, LatticePacket(), f)
    dense = np.vdot(psi, np.kron(basis.beta, np.eye(cfg.sites)) @ psi).real
    assert rate_exact(psi) == pytest.approx(dense, abs=1e-14)


@pytest.mark.parametrize("e", [1.0, -1.0])
def test_spin_field_shift(e):
    cfg = reference_config(e=e, b_coeff=0.1).scaled(0.05)
    f0 = ChiralFactor(replace(cfg, Bz=0.0))
    f = ChiralFactor(cfg)
    up = LatticePacket(spin=(1, 0))
    down = LatticePacket(spin=(0, 1))
    shift = cfg.e * cfg.Bz / (2 * cfg.m**2)
    r_up = rate_exact(projected_packet(cfg, up, f))
    r_free = rate_exact(projected_packet(replace(cfg, Bz=0.0), up, f0))
    assert (r_up - r_free) / shift == pytest.approx(1.0, abs=0.1)
    r_down = rate_exact(projected_packet(cfg, down, f))
    assert (r_up - r_down) / (2 * shift) == pytest.approx(1.0, abs=0.05)
    pauli_split = rate_pauli_side(cfg, projected_packet(cfg, up, f), f) - rate_pauli_side(
        cfg, projected_packet(cfg, down, f), f)
    assert pauli_split / (2 * shift) == pytest.approx(1.0, abs=0.05)
