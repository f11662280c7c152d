"""Fixed Hamming-weight sector bases and sector Hamiltonian assembly."""

from functools import lru_cache
from math import comb

import numpy as np
from scipy.sparse import csr_matrix

SECTOR_GUARD = 2_000_000


@lru_cache(maxsize=16)
def sector_states(n, weight):
    """Sorted int64 array of all n-bit states with the given Hamming weight.

    Uses the Gosper next-bit-permutation walk, which emits states in
    increasing order.
    """
    dim = comb(n, weight)
    if dim > SECTOR_GUARD:
        raise ValueError(f"sector dimension {dim} exceeds guard {SECTOR_GUARD}")
    out = np.empty(dim, dtype=np.int64)
    if weight == 0:
        out[0] = 0
        return out
    v = (1 << weight) - 1
    for k in range(dim):
        out[k] = v
        t = (v | (v - 1)) + 1
        v = t | ((((t & -t) // (v & -v)) >> 1) - 1)
    return out


def sector_index(states, values):
    """Positions of the given basis states inside the sorted sector array."""
    return np.searchsorted(states, values)


def build_sector_hamiltonian(h, weight):
    """Sparse matrix of a magnetization-conserving exchange Hamiltonian
    (J1J2) restricted to the fixed-weight sector."""
    states = sector_states(h.n, weight)
    dim = len(states)
    diag = np.zeros(dim)
    rows, cols, vals = [], [], []
    for i, j, J in h.bonds:
        bi = (states >> int(i)) & 1
        bj = (states >> int(j)) & 1
        diag += J * (1 - 2 * bi) * (1 - 2 * bj)
        anti = np.nonzero(bi != bj)[0]
        if J != 0.0 and len(anti):
            flipped = states[anti] ^ ((1 << int(i)) | (1 << int(j)))
            rows.append(anti)
            cols.append(sector_index(states, flipped))
            vals.append(np.full(len(anti), 2.0 * J))
    rows.append(np.arange(dim))
    cols.append(np.arange(dim))
    vals.append(diag)
    return csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )


@lru_cache(maxsize=16)
def log_binomials(n):
    """ln C(n, w) for w = 0..n, computed from log-gammas for stability."""
    from scipy.special import gammaln
    w = np.arange(n + 1)
    out = gammaln(n + 1) - gammaln(w + 1) - gammaln(n - w + 1)
    out.setflags(write=False)
    return out
