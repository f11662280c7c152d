import numpy as np
import pytest

from ptnqs.ansatz import Rbm, SymmetricRbm
from ptnqs.hamiltonians import (J1J2, Precipice, local_energy, local_energy_batch,
                                make_hamiltonian, precipice_f,
                                precipice_local_energy_sumz)
from ptnqs.spins import SpinConfiguration, batch_from_ints


def dense_from_connected(h, n):
    """Assemble the full 2^n matrix by walking connected() rows."""
    N = 1 << n
    H = np.zeros((N, N))
    for v in range(N):
        x = SpinConfiguration.from_int(v, n)
        for xp, c in h.connected(x):
            H[xp.to_int(), v] += c
    return H


def test_precipice_f_values():
    assert precipice_f(4, 4) == -1.0
    assert precipice_f(0, 4) == 0.0
    assert precipice_f(3, 4) == 3.0


def test_precipice_diagonal():
    h = Precipice(4, s=0.8)
    # (1-s) n/2 + s f(w)
    assert h.diagonal(0) == pytest.approx(0.4)
    assert h.diagonal(2) == pytest.approx(0.4 + 1.6)
    assert h.diagonal(4) == pytest.approx(0.4 - 0.8)


def test_precipice_connected_is_hermitian_and_matches_definition():
    n, s = 4, 0.7
    H = dense_from_connected(Precipice(n, s), n)
    assert np.allclose(H, H.T)
    # independent construction straight from the Hamiltonian definition
    N = 1 << n
    ref = np.zeros((N, N))
    for v in range(N):
        w = bin(v).count("1")
        ref[v, v] = (1 - s) * n / 2 + s * precipice_f(w, n)
        for i in range(n):
            ref[v ^ (1 << i), v] += -(1 - s) / 2
    assert np.allclose(H, ref)


def test_precipice_sector_matrix_spectrum_matches_full_space():
    # the symmetric sector holds the ground state of the full matrix
    for n in (2, 3, 5):
        h = Precipice(n, s=0.8)
        full = np.linalg.eigvalsh(dense_from_connected(h, n))
        sector = np.linalg.eigvalsh(h.symmetric_sector_matrix())
        assert sector[0] == pytest.approx(full[0], abs=1e-10)
        # every sector eigenvalue appears in the full spectrum
        for e in sector:
            assert np.min(np.abs(full - e)) < 1e-8


def test_precipice_invalid_s():
    with pytest.raises(ValueError):
        Precipice(4, s=1.5)


def test_grid_bond_counts_4x5_open():
    h = J1J2(4, 5, J1=1.0, J2=0.695, boundary="open")
    assert len(h.nn_bonds) == 31
    assert len(h.nnn_bonds) == 24


def test_grid_bond_counts_periodic():
    h = J1J2(4, 4, boundary="periodic")
    # torus: 2 n nearest bonds, 2 n diagonal bonds
    assert len(h.nn_bonds) == 32
    assert len(h.nnn_bonds) == 32
    h6 = J1J2(6, 6, boundary="periodic")
    assert len(h6.nn_bonds) == 72
    assert len(h6.nnn_bonds) == 72


def test_j1j2_dense_is_hermitian_and_magnetization_conserving():
    h = J1J2(2, 2, J1=1.0, J2=0.5, boundary="open")
    H = dense_from_connected(h, 4)
    assert np.allclose(H, H.T)
    for v in range(16):
        x = SpinConfiguration.from_int(v, 4)
        for xp, _ in h.connected(x):
            assert xp.weight == x.weight


def test_j1j2_two_sites_singlet():
    # single bond: sigma.sigma has eigenvalues {-3, 1}; ground state energy -3
    h = J1J2(2, 1, J1=1.0, boundary="open")
    H = dense_from_connected(h, 2)
    vals = np.linalg.eigvalsh(H)
    assert vals[0] == pytest.approx(-3.0)
    assert vals[-1] == pytest.approx(1.0)


def test_diagonal_batch_matches_connected():
    rng = np.random.default_rng(0)
    h = J1J2(3, 3, J1=1.0, J2=0.4, boundary="open")
    Z = 1 - 2 * rng.integers(0, 2, (20, 9))
    diag = h.diagonal_batch(Z)
    for k in range(20):
        x = SpinConfiguration.from_spins(Z[k])
        assert diag[k] == pytest.approx(h.connected(x)[0][1])


def test_exchange_connections_batch_matches_connected():
    rng = np.random.default_rng(1)
    h = J1J2(2, 3, J1=1.0, J2=0.3, boundary="open")
    Z = 1 - 2 * rng.integers(0, 2, (10, 6))
    rows, Zflip, elems = h.exchange_connections_batch(Z)
    for k in range(10):
        x = SpinConfiguration.from_spins(Z[k])
        expected = {(SpinConfiguration.from_spins(zf).to_int(), e)
                    for zf, e in zip(Zflip[rows == k], elems[rows == k])}
        listed = {(xp.to_int(), c) for xp, c in h.connected(x)[1:]}
        assert expected == listed


def test_local_energy_batch_matches_single():
    rng = np.random.default_rng(2)
    h = J1J2(2, 2, J1=1.0, J2=0.6, boundary="open")
    rbm = Rbm(4, 3)
    params = rbm.init_parameters(rng, scale=0.2)
    Z = 1 - 2 * rng.integers(0, 2, (12, 4))
    log_psi = rbm.log_amplitude_batch(params, Z.astype(float))
    e_batch = local_energy_batch(h, rbm, params, Z, log_psi)
    for k in range(12):
        x = SpinConfiguration.from_spins(Z[k])
        assert e_batch[k] == pytest.approx(local_energy(h, rbm, params, x), rel=1e-10)


def test_precipice_local_energy_sumz_matches_single():
    rng = np.random.default_rng(3)
    n = 6
    h = Precipice(n, s=0.8)
    sym = SymmetricRbm(n, 4)
    params = sym.init_parameters(rng, scale=0.3)
    for w in range(n + 1):
        e_cls = precipice_local_energy_sumz(h, sym, params, [w])[0]
        bits = np.zeros(n, dtype=np.int8)
        bits[:w] = 1
        e_ref = local_energy(h, sym, params, SpinConfiguration(bits))
        assert e_cls == pytest.approx(e_ref, rel=1e-10)


def test_make_hamiltonian_dispatch():
    assert isinstance(make_hamiltonian("precipice", n=4), Precipice)
    assert isinstance(make_hamiltonian("j1j2", Lx=2, Ly=2), J1J2)
    with pytest.raises(ValueError):
        make_hamiltonian("ising", n=4)


def test_size_mismatch_raises():
    with pytest.raises(ValueError):
        Precipice(4).connected(SpinConfiguration([0, 1]))
    with pytest.raises(ValueError):
        J1J2(2, 2).connected(SpinConfiguration([0, 1]))
