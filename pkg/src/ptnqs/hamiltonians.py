"""Spin Hamiltonians with sparse row access and local energies.

Matrix elements use the Pauli convention: sigma.sigma on a bond gives a
diagonal z_i z_j and an off-diagonal 2 between states with the bond's
(antiparallel) spins exchanged.
"""

import numpy as np

from .spins import SpinConfiguration


def precipice_f(w, n):
    """Hamming-weight cost: -1 at the all-ones string, |x| otherwise."""
    return -1.0 if w == n else float(w)


class Precipice:
    """Permutation-invariant cost with a uniform transverse field.

    H = (1-s)/2 * sum_i (1 - sigma_i^x) + s * sum_x f(|x|) |x><x|
    """

    def __init__(self, n, s=0.8):
        if not 0.0 <= s <= 1.0:
            raise ValueError("s must lie in [0, 1]")
        self.n = n
        self.s = s

    def diagonal(self, weight):
        return (1.0 - self.s) * self.n / 2.0 + self.s * precipice_f(weight, self.n)

    def connected(self, x):
        """Diagonal entry plus the n single-flip transverse-field entries."""
        if len(x) != self.n:
            raise ValueError("configuration size mismatch")
        out = [(x, self.diagonal(x.weight))]
        off = -(1.0 - self.s) / 2.0
        for i in range(self.n):
            bits = x.bits.copy()
            bits[i] ^= 1
            out.append((SpinConfiguration(bits), off))
        return out

    def symmetric_sector_matrix(self):
        """Dense (n+1)x(n+1) matrix over the permutation-symmetric
        Hamming-weight basis |w> = symmetrized weight-w states."""
        n, s = self.n, self.s
        M = np.zeros((n + 1, n + 1))
        for w in range(n + 1):
            M[w, w] = self.diagonal(w)
            if w < n:
                M[w, w + 1] = M[w + 1, w] = -(1.0 - s) / 2.0 * np.sqrt((n - w) * (w + 1))
        return M


def _grid_bonds(Lx, Ly, periodic):
    """Nearest and next-nearest bond lists on an Lx x Ly square grid.

    Each plaquette contributes both of its diagonals exactly once.
    """
    idx = lambda x, y: x + Lx * y
    nn, nnn = [], []
    seen = set()

    def add(lst, i, j):
        key = (min(i, j), max(i, j))
        if i != j and key not in seen:
            seen.add(key)
            lst.append(key)

    for y in range(Ly):
        for x in range(Lx):
            if periodic or x + 1 < Lx:
                add(nn, idx(x, y), idx((x + 1) % Lx, y))
            if periodic or y + 1 < Ly:
                add(nn, idx(x, y), idx(x, (y + 1) % Ly))
            if periodic or (x + 1 < Lx and y + 1 < Ly):
                add(nnn, idx(x, y), idx((x + 1) % Lx, (y + 1) % Ly))
                add(nnn, idx((x + 1) % Lx, y), idx(x, (y + 1) % Ly))
    return nn, nnn


class J1J2:
    """J1-J2 Heisenberg model on a rectangular lattice.

    H = J1 sum_<ij> sigma_i.sigma_j + J2 sum_<<ij>> sigma_i.sigma_j
    Commutes with total z-magnetization: off-diagonal elements connect
    states of equal Hamming weight.
    """

    def __init__(self, Lx, Ly, J1=1.0, J2=0.0, boundary="open"):
        if boundary not in ("open", "periodic"):
            raise ValueError("boundary must be 'open' or 'periodic'")
        self.Lx, self.Ly = Lx, Ly
        self.J1, self.J2 = float(J1), float(J2)
        self.boundary = boundary
        self.n = Lx * Ly
        self.nn_bonds, self.nnn_bonds = _grid_bonds(Lx, Ly, boundary == "periodic")
        bonds = [(i, j, self.J1) for i, j in self.nn_bonds]
        bonds += [(i, j, self.J2) for i, j in self.nnn_bonds]
        self._bi = np.array([b[0] for b in bonds], dtype=np.int64)
        self._bj = np.array([b[1] for b in bonds], dtype=np.int64)
        self._bJ = np.array([b[2] for b in bonds], dtype=float)

    @property
    def bonds(self):
        return list(zip(self._bi, self._bj, self._bJ))

    def diagonal_batch(self, Z):
        """Diagonal sum_b J_b z_i z_j for a (N, n) spin matrix."""
        Z = np.asarray(Z, dtype=float)
        return (Z[:, self._bi] * Z[:, self._bj]) @ self._bJ

    def connected(self, x):
        """Diagonal entry plus one spin-exchange entry of 2J per
        antiparallel bond."""
        if len(x) != self.n:
            raise ValueError("configuration size mismatch")
        z = x.spins
        diag = float((z[self._bi] * z[self._bj]) @ self._bJ)
        out = [(x, diag)]
        for i, j, J in zip(self._bi, self._bj, self._bJ):
            if z[i] != z[j] and J != 0.0:
                bits = x.bits.copy()
                bits[i], bits[j] = bits[j], bits[i]
                out.append((SpinConfiguration(bits), 2.0 * J))
        return out

    def exchange_connections_batch(self, Z):
        """All off-diagonal (sample, bond) connections for a spin batch.

        Returns (rows, Zflip, elems): sample indices, flipped spin
        configurations, and matrix elements 2J.
        """
        Z = np.asarray(Z)
        anti = Z[:, self._bi] != Z[:, self._bj]  # (N, n_bonds)
        if self._bJ.size:
            anti &= self._bJ != 0.0
        rows, bidx = np.nonzero(anti)
        Zflip = Z[rows].copy()
        bi = self._bi[bidx]
        bj = self._bj[bidx]
        k = np.arange(len(rows))
        tmp = Zflip[k, bi].copy()
        Zflip[k, bi] = Zflip[k, bj]
        Zflip[k, bj] = tmp
        return rows, Zflip, 2.0 * self._bJ[bidx]


PSI_UNDERFLOW = -600.0  # ln|psi| below this is treated as a vanishing amplitude


def local_energy(h, ansatz, params, x):
    """E_loc(x) = sum_x' H_{x x'} psi_{x'} / psi_x for a single configuration."""
    lp_x = ansatz.log_amplitude(params, x)
    if lp_x.real < PSI_UNDERFLOW:
        raise FloatingPointError("amplitude underflow at the sampled configuration")
    e = 0.0 + 0.0j
    for xp, c in h.connected(x):
        if xp == x:
            e += c
        else:
            e += c * np.exp(ansatz.log_amplitude(params, xp) - lp_x)
    return e


def local_energy_batch(h, ansatz, params, Z, log_psi):
    """Vectorized local energies for a J1J2-style exchange Hamiltonian."""
    Z = np.asarray(Z)
    e = h.diagonal_batch(Z).astype(complex)
    rows, Zflip, elems = h.exchange_connections_batch(Z)
    if len(rows):
        lp_flip = ansatz.log_amplitude_batch(params, Zflip)
        ratios = np.exp(lp_flip - log_psi[rows])
        np.add.at(e, rows, elems * ratios)
    return e


def precipice_local_energy_sumz(h, ansatz, params, weights_w):
    """Local energies of a symmetric ansatz over Hamming-weight classes.

    weights_w: integer array of weight classes; returns E_loc per class
    using the (n+1)-dimensional sector structure of the Precipice model.
    """
    n = h.n
    w = np.asarray(weights_w, dtype=np.int64)
    sumz_all = n - 2.0 * np.arange(n + 1)
    lp = ansatz.log_amplitude_sumz(params, sumz_all)  # (n+1,)
    diag = np.array([h.diagonal(k) for k in range(n + 1)])
    off = -(1.0 - h.s) / 2.0
    e = diag[w].astype(complex)
    # flips to weight w+1 (n-w ways) and to weight w-1 (w ways)
    up = w < n
    e[up] += off * (n - w[up]) * np.exp(lp[w[up] + 1] - lp[w[up]])
    down = w > 0
    e[down] += off * w[down] * np.exp(lp[w[down] - 1] - lp[w[down]])
    return e


def make_hamiltonian(kind, **kwargs):
    if kind == "precipice":
        return Precipice(kwargs["n"], kwargs.get("s", 0.8))
    if kind == "j1j2":
        return J1J2(kwargs["Lx"], kwargs["Ly"], kwargs.get("J1", 1.0),
                    kwargs.get("J2", 0.0), kwargs.get("boundary", "open"))
    raise ValueError(f"unknown hamiltonian kind {kind!r}")
