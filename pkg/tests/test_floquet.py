import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg
from scipy.signal import find_peaks
from scipy.special import jv

from synthcavity.errors import GapClosedError, SpectralLeakageWarning
from synthcavity.floquet import (
    BlochDrive,
    DriveSpec,
    FloquetOperator,
    bloch_hamiltonian,
    bloch_quasienergies,
    build_floquet_hamiltonian,
    bulk_gaps,
    chiral_partner,
    drive_to_fourier,
    edge_mode_census,
    ensure_converged,
    floquet_spectrum_response,
    fold,
    full_period_propagator,
    half_period_propagator,
    quasienergies,
    second_half_propagator,
    time_domain_spectrum,
    winding_numbers,
)
from synthcavity.lattice import SSHParams, build_ssh, dense_matrix, spectrum


def chain_operator(j0, j1, lam, omega, l_max=9, cutoff=6, eta=None):
    chain = SSHParams(j0, j1, l_max=l_max, eta=eta)
    return build_floquet_hamiltonian(drive_to_fourier(DriveSpec(j0, j1, lam, omega), chain), omega, cutoff)


def test_fold_examples():
    assert fold(3.0, 10.0) == pytest.approx(3.0)
    assert fold(3.0, 5.0) == pytest.approx(-2.0)
    assert fold(-2.5, 5.0) == pytest.approx(2.5)
    assert fold(2.5, 5.0) == pytest.approx(2.5)


def test_phase_modulation_drive():
    d = DriveSpec.from_phase_modulation(2.0, 1.0, 1.3, 7.0)
    assert d.j0 == pytest.approx(2.0 * jv(0, 1.3))
    assert d.lam == pytest.approx(4.0 * jv(2, 1.3))
    assert d.residual_bound(2.0) == pytest.approx(4.0 * abs(jv(4, 1.3)))
    with pytest.raises(ValueError):
        DriveSpec(1.0, 1.0, 0.5, 0.0)


def test_decoupled_replicas():
    blocks = {0: np.array([[0, 1], [1, 0]], dtype=complex), 1: np.zeros((2, 2)), -1: np.zeros((2, 2))}
    op = build_floquet_hamiltonian(blocks, 10.0, 1)
    vals = np.linalg.eigvalsh(op.matrix)
    np.testing.assert_allclose(vals, np.sort([-11, -9, -1, 1, 9, 11]), atol=1e-12)


def test_operator_validation():
    h = np.eye(2)
    with pytest.raises(ValueError):
        FloquetOperator({0: h}, 1.0, 0)
    with pytest.raises(ValueError):
        FloquetOperator({1: h, -1: h}, 1.0, 2)
    with pytest.raises(ValueError):
        FloquetOperator({0: h, 1: np.array([[0, 1j], [0, 0]])}, 1.0, 2)


def test_replica_matrix_structure():
    op = chain_operator(2.0, 1.0, 1.6, 5.0, l_max=3, cutoff=3)
    big = op.matrix
    np.testing.assert_array_equal(big, big.conj().T)
    n = op.n_sites
    # block (m, m + 1) carries the drive harmonic, diagonal blocks are shifted by m Omega
    np.testing.assert_array_equal(big[:n, n:2 * n], op.blocks[-1])
    np.testing.assert_allclose(big[:n, :n], op.blocks[0] - 3 * 5.0 * np.eye(n))
    mat, bw = op.site_major()
    np.testing.assert_allclose(np.linalg.eigvalsh(mat), np.linalg.eigvalsh(big), atol=1e-10)
    assert bw == op.replicas.size + 1


def test_static_limit_quasienergies():
    op = chain_operator(0.7, 1.0, 0.0, 3.0, l_max=5, cutoff=2)
    static = spectrum(build_ssh(SSHParams(0.7, 1.0, l_max=5)))[0]
    q = quasienergies(op)
    np.testing.assert_allclose(q.values, np.sort(fold(static, 3.0)), atol=1e-8)
    np.testing.assert_allclose(q.m0_weight, 1.0, atol=1e-12)
    assert not q.ambiguous


def test_replica_cutoff_convergence():
    blocks = drive_to_fourier(DriveSpec(2.0, 1.0, 1.6, 10.0), SSHParams(2.0, 1.0, l_max=9))
    a = quasienergies(build_floquet_hamiltonian(blocks, 10.0, 6)).values
    b = quasienergies(build_floquet_hamiltonian(blocks, 10.0, 8)).values
    np.testing.assert_allclose(a, b, atol=1e-6)
    op = ensure_converged(blocks, 10.0, 2)
    assert op.replica_cutoff >= 2


def test_replica_translation_symmetry():
    op = chain_operator(2.0, 1.0, 1.6, 10.0, l_max=4, cutoff=8)
    vals = np.linalg.eigvalsh(op.matrix)
    interior = vals[np.abs(vals) < 3 * 10.0]
    for v in interior:
        assert np.min(np.abs(vals - (v + 10.0))) < 1e-6


def test_drive_opens_gap_at_zone_edge():
    closed = bulk_gaps(BlochDrive.ssh(2.0, 1.0, 0.0, 5.0), 256)[1]
    opened = bulk_gaps(BlochDrive.ssh(2.0, 1.0, 1.6, 5.0), 256)[1]
    assert closed < 0.02 and opened > 0.1


def test_static_response_reduction():
    omega = 4.0
    op = chain_operator(0.5, 1.0, 0.0, omega, l_max=4, cutoff=3)
    decay = np.linspace(0.05, 0.2, op.n_sites)
    grid = np.linspace(-2, 2, 41)
    h = dense_matrix(build_ssh(SSHParams(0.5, 1.0, l_max=4)))

    def static(w):
        g = np.linalg.inv(w * np.eye(op.n_sites) + 0.5j * np.diag(decay) - h)
        return np.sum(np.abs(g) ** 2) / (2 * math.pi)

    res = floquet_spectrum_response(op, decay, grid)
    np.testing.assert_allclose(res.values, [static(w) for w in grid], rtol=1e-8)
    everything = [(m, j) for m in op.replicas for j in range(op.n_sites)]
    folded = floquet_spectrum_response(op, decay, grid, everything)
    expected = [sum(static(w + m * omega) for m in op.replicas) for w in grid]
    np.testing.assert_allclose(folded.values, expected, rtol=1e-8)


def test_response_input_checks():
    op = chain_operator(0.5, 1.0, 0.3, 4.0, l_max=2, cutoff=2)
    with pytest.raises(ValueError):
        floquet_spectrum_response(op, np.zeros(op.n_sites), [0.0])
    with pytest.raises(ValueError):
        floquet_spectrum_response(op, np.full(op.n_sites, 0.1), [0.0], [(5, 0)])


def test_time_domain_single_site_lorentzian():
    gamma = 0.2
    op = build_floquet_hamiltonian({0: np.zeros((1, 1)), 1: np.zeros((1, 1)), -1: np.zeros((1, 1))}, 2.0, 3)
    td = time_domain_spectrum(op, [gamma], periods=800, steps_per_period=32, harmonics=0)
    exact = 1 / (2 * math.pi) / (td.omega**2 + gamma**2 / 4)
    assert td.omega[np.argmax(td.values)] == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(td.values, exact, rtol=0.02)


def test_time_domain_warns_on_short_record():
    op = build_floquet_hamiltonian({0: np.zeros((1, 1))}, 2.0, 1)
    with pytest.warns(SpectralLeakageWarning):
        time_domain_spectrum(op, [0.01], periods=10, steps_per_period=16)


def _peak_errors(j0, j1, lam, omega, cells, decay):
    chain = SSHParams(j0, j1, l_max=cells - 1)
    op = build_floquet_hamiltonian(drive_to_fourier(DriveSpec(j0, j1, lam, omega), chain), omega, 6)
    periods = int(math.ceil(max(400, 20 / decay.min() / (2 * math.pi / omega))))
    td = time_domain_spectrum(op, decay, periods=periods)
    rs = floquet_spectrum_response(op, decay, td.omega)
    peaks, _ = find_peaks(rs.values, prominence=0.1 * rs.values.max())
    td_peaks, _ = find_peaks(td.values)
    out = []
    for p in peaks:
        q = td_peaks[np.argmin(np.abs(td.omega[td_peaks] - td.omega[p]))]
        out.append((abs(td.omega[q] - td.omega[p]) / omega, abs(td.values[q] / rs.values[p] - 1)))
    return out


@pytest.mark.property
@settings(max_examples=200, deadline=None)
@given(
    st.floats(0.2, 2.0),
    st.floats(0.5, 1.5),
    st.floats(0.0, 2.0),
    st.integers(2, 6),
    st.lists(st.floats(0.05, 0.2), min_size=12, max_size=12),
    st.floats(1.5, 4.0),
)
def test_time_domain_matches_resolvent(j0, j1, lam, cells, g, margin):
    # the m = 0 resolvent reports unfolded static bands, so keep them inside the zone
    omega = 2 * (j0 + j1) + 2 * margin
    decay = np.asarray(g[:2 * cells])
    for pos_err, height_err in _peak_errors(j0, j1, lam, omega, cells, decay):
        assert pos_err <= 0.05
        assert height_err <= 0.15


def test_bloch_hamiltonian_trivial():
    bloch = BlochDrive(lambda k: 0.0, lambda k: 0.0, 0.0, 5.0)
    np.testing.assert_array_equal(bloch_hamiltonian(0.3, 0.1, bloch), np.zeros((2, 2)))


def test_static_propagator_matches_expm():
    bloch = BlochDrive.ssh(0.6, 1.0, 0.0, 4.0)
    for k in (-2.0, 0.0, 1.1):
        f = half_period_propagator(k, bloch, 128)
        exact = linalg.expm(-1j * bloch_hamiltonian(k, 0.0, bloch) * bloch.period / 2)
        np.testing.assert_allclose(f, exact, atol=1e-12)


def test_chiral_partner_and_unitarity():
    bloch = BlochDrive.ssh(2.0, 1.0, 1.6, 5.0)
    ks = np.linspace(-math.pi, math.pi, 17)
    f = half_period_propagator(ks, bloch)
    np.testing.assert_allclose(np.conj(np.swapaxes(f, -1, -2)) @ f, np.broadcast_to(np.eye(2), f.shape), atol=1e-12)
    np.testing.assert_allclose(chiral_partner(f), second_half_propagator(ks, bloch), atol=1e-10)
    # step doubling converges
    np.testing.assert_allclose(half_period_propagator(ks, bloch, 256), half_period_propagator(ks, bloch, 512), atol=1e-9)
    with pytest.raises(ValueError):
        half_period_propagator(0.0, bloch, 16)


def test_bloch_quasienergies_static():
    bloch = BlochDrive.ssh(0.6, 1.0, 0.0, 10.0)
    ks = np.linspace(-3, 3, 7)
    energy = np.abs(0.6 + np.exp(1j * ks))
    np.testing.assert_allclose(bloch_quasienergies(ks, bloch), np.stack([-energy, energy], axis=1), atol=1e-10)
    assert full_period_propagator(0.2, bloch).shape == (2, 2)


@pytest.mark.parametrize("j0, expected", [(2.0, 0), (0.5, 1)])
def test_static_winding(j0, expected):
    rep = winding_numbers(BlochDrive.ssh(j0, 1.0, 0.0, 20.0))
    assert (rep.v0, rep.v_plus) == (expected, 0)
    assert rep.reliable and rep.phase_residual < 0.05


@pytest.mark.parametrize("omega, expected", [(12.0, (0, 0)), (5.0, (0, 1))])
def test_driven_winding_refinement(omega, expected):
    bloch = BlochDrive.ssh(2.0, 1.0, 1.6, omega)
    coarse, fine = winding_numbers(bloch, 256), winding_numbers(bloch, 1024)
    assert (coarse.v0, coarse.v_plus) == expected == (fine.v0, fine.v_plus)


def test_closed_gap_is_reported():
    with pytest.raises(GapClosedError):
        winding_numbers(BlochDrive.ssh(1.0, 1.0, 0.0, 10.0), 256)


def test_census_static_limit():
    op = chain_operator(0.5, 1.0, 0.0, 20.0, l_max=49, cutoff=1)
    assert edge_mode_census(op) == (2, 0)


def test_census_matches_winding_driven():
    op = chain_operator(2.0, 1.0, 1.6, 5.0, l_max=49, cutoff=4)
    rep = winding_numbers(BlochDrive.ssh(2.0, 1.0, 1.6, 5.0))
    assert edge_mode_census(op) == (2 * rep.v0, 2 * rep.v_plus)
