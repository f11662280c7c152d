"""Independent exact solvers providing reference spectra.

Precipice energies come from a dense eigensolve of the (n+1)-dimensional
permutation-symmetric sector; J1-J2 energies from Lanczos (ARPACK) on the
sparse fixed-magnetization sector.
"""

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.sparse.linalg import eigsh

from .hamiltonians import J1J2, Precipice
from .sectors import sector_states, build_sector_hamiltonian

# First excited state of the 6x6 periodic J2=0.62 model, computed with DMRG
# (bond dimension 2048) in the reference study; consumed as a constant.
J1J2_6X6_FIRST_EXCITED = -70.07405


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray   # ascending
    residuals: np.ndarray     # ||H v - E v|| per reported pair
    sector: str
    dimension: int

    def to_dict(self):
        return {
            "sector": self.sector,
            "dimension": self.dimension,
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
        }


def precipice_spectrum(n, s=0.8, k_eigen=2):
    """Lowest eigenpairs of the Precipice model from its dense
    permutation-symmetric sector matrix."""
    M = Precipice(n, s).symmetric_sector_matrix()
    vals, vecs = np.linalg.eigh(M)
    vals = vals[:k_eigen]
    vecs = vecs[:, :k_eigen]
    residuals = np.linalg.norm(M @ vecs - vecs * vals, axis=0)
    return SpectrumResult(vals, residuals, "symmetric", n + 1)


def j1j2_spectrum(Lx, Ly, J1=1.0, J2=0.0, boundary="open", weight=None, k_eigen=2,
                  max_iter=None, tol=0.0):
    """Lowest eigenpairs of the J1-J2 model on the fixed Hamming-weight
    sector via sparse Lanczos."""
    h = J1J2(Lx, Ly, J1=J1, J2=J2, boundary=boundary)
    if weight is None:
        weight = h.n // 2
    H = build_sector_hamiltonian(h, weight)
    dim = H.shape[0]
    if dim <= max(64, 3 * k_eigen):
        vals, vecs = np.linalg.eigh(H.toarray())
        vals, vecs = vals[:k_eigen], vecs[:, :k_eigen]
    else:
        vals, vecs = eigsh(H, k=k_eigen, which="SA", tol=tol, maxiter=max_iter)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    residuals = np.linalg.norm(H @ vecs - vecs * vals, axis=0)
    if np.any(residuals > 1e-6 * max(1.0, np.abs(vals).max())):
        raise RuntimeError("Lanczos did not converge to the requested accuracy")
    return SpectrumResult(vals, residuals, f"fixed-weight {weight}", dim)


def dense_full_space_precipice(n, s=0.8):
    """Brute-force 2^n x 2^n diagonalization, for cross-checking sector
    reductions at small n."""
    N = 1 << n
    H = np.zeros((N, N))
    for x in range(N):
        w = bin(x).count("1")
        H[x, x] = (1 - s) * n / 2 + s * (-1.0 if w == n else float(w))
        for i in range(n):
            H[x, x ^ (1 << i)] += -(1 - s) / 2
    return np.linalg.eigvalsh(H)


def dense_full_space_j1j2(Lx, Ly, J1=1.0, J2=0.0, boundary="open"):
    """Brute-force full Hilbert-space diagonalization (n <= 12)."""
    h = J1J2(Lx, Ly, J1=J1, J2=J2, boundary=boundary)
    n = h.n
    N = 1 << n
    if N > 4096:
        raise ValueError("full space too large for brute force")
    H = np.zeros((N, N))
    for x in range(N):
        z = 1 - 2 * ((x >> np.arange(n)) & 1)
        for i, j, J in h.bonds:
            H[x, x] += J * z[i] * z[j]
            if z[i] != z[j]:
                H[x, x ^ ((1 << int(i)) | (1 << int(j)))] += 2.0 * J
    return np.linalg.eigvalsh(H)
