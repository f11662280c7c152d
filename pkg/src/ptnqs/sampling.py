"""Configuration ensembles and Monte Carlo moment estimates.

Three sampling modes feed the SR optimizer: exact sums over the
permutation-symmetric weight classes, exact enumeration of a fixed
Hamming-weight sector, and Metropolis exchange sampling within a sector.
"""

from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .ansatz import Rbm, SymmetricRbm
from .hamiltonians import Precipice, local_energy_batch, precipice_local_energy_sumz
from .sectors import log_binomials, sector_states
from .spins import batch_from_ints


@dataclass
class SampleBatch:
    """An ensemble with per-sample caches of ln psi, O_k, and E_loc.

    spins is None for the symmetric exact mode, where samples are
    Hamming-weight classes with binomial multiplicities folded into the
    probability weights.
    """
    weights: np.ndarray          # (N,) nonnegative, sums to 1
    log_psi: np.ndarray          # (N,) complex
    log_derivs: np.ndarray       # (N, P) complex
    local_energy: np.ndarray     # (N,) complex
    spins: Optional[np.ndarray] = None  # (N, n) in {+1,-1}


class CovarianceOperator:
    """Hermitian covariance s_{kk'} = <O_k* O_k'> - <O_k*><O_k'>.

    Stores the centered log-derivative matrix; assembles a dense matrix
    only when the parameter count is small enough for that to pay off.
    """

    def __init__(self, O, weights, dense_limit=300):
        mean = weights @ O
        self.O_centered = O - mean
        self.weights = weights
        self._dense = None
        self._O_conj_T = None
        if O.shape[1] <= dense_limit:
            self._dense = (self.O_centered.conj().T * weights) @ self.O_centered

    @property
    def shape(self):
        p = self.O_centered.shape[1]
        return (p, p)

    @property
    def is_dense(self):
        return self._dense is not None

    def matvec(self, v):
        if self._dense is not None:
            return self._dense @ v
        if self._O_conj_T is None:
            self._O_conj_T = np.ascontiguousarray(self.O_centered.conj().T)
        return self._O_conj_T @ (self.weights * (self.O_centered @ v))

    def diagonal(self):
        if self._dense is not None:
            return np.real(np.diag(self._dense)).copy()
        return self.weights @ (np.abs(self.O_centered) ** 2)

    def dense(self):
        if self._dense is None:
            return (self.O_centered.conj().T * self.weights) @ self.O_centered
        return self._dense


@dataclass
class EstimatedMoments:
    """Force vector, covariance, and energy/cost estimates for one SR step."""
    force: np.ndarray
    covariance: CovarianceOperator
    energy: float                # Re <H>
    cost: float                  # Re <H + T ln|psi|^2>


def estimate_moments(batch, T, dense_limit=300):
    """Build SR moments from a sample batch at replica temperature T.

    The entropy-modified local cost is G(x) = E_loc(x) + T ln|psi_x|^2
    with the unnormalized amplitude; the covariance structure makes the
    result invariant under rescaling psi.
    """
    w = batch.weights
    G = batch.local_energy + 2.0 * T * np.real(batch.log_psi)
    cov = CovarianceOperator(batch.log_derivs, w, dense_limit=dense_limit)
    G_centered = G - w @ G
    force = cov.O_centered.conj().T @ (w * G_centered)
    energy = float(np.real(w @ batch.local_energy))
    cost = float(np.real(w @ G))
    return EstimatedMoments(force=force, covariance=cov, energy=energy, cost=cost)


def _normalized_weights(log_w):
    m = np.max(log_w)
    if not np.isfinite(m):
        raise FloatingPointError("all amplitudes vanish; cannot normalize ensemble")
    p = np.exp(log_w - m)
    return p / p.sum()


@numba.njit(cache=True)
def _symmetric_precipice_kernel(a, b, W, n, s):
    """Fused weight-class ensemble for the symmetric RBM on the Precipice
    model: log-amplitudes, log-derivatives, and local energies for all
    n + 1 Hamming-weight classes in one pass."""
    ln2 = 0.6931471805599453
    m = b.shape[0]
    nw = n + 1
    log_psi = np.empty(nw, dtype=np.complex128)
    O = np.empty((nw, 1 + 2 * m), dtype=np.complex128)
    for w in range(nw):
        sz = float(n - 2 * w)
        lp = a * sz
        for mu in range(m):
            theta = b[mu] + W[mu] * sz
            flip = theta.real < 0.0
            zs = -theta if flip else theta
            e2 = np.exp(-2.0 * zs)
            lp += zs + np.log(1.0 + e2) - ln2
            t = (1.0 - e2) / (1.0 + e2)  # tanh(zs), reusing the exponential
            if flip:
                t = -t
            O[w, 1 + mu] = t
            O[w, 1 + m + mu] = t * sz
        O[w, 0] = sz
        log_psi[w] = lp
    diag = (1.0 - s) * n / 2.0
    off = -(1.0 - s) / 2.0
    e_loc = np.empty(nw, dtype=np.complex128)
    for w in range(nw):
        fw = -1.0 if w == n else float(w)
        ev = diag + s * fw + 0.0j
        if w < n:
            ev += off * (n - w) * np.exp(log_psi[w + 1] - log_psi[w])
        if w > 0:
            ev += off * w * np.exp(log_psi[w - 1] - log_psi[w])
        e_loc[w] = ev
    return log_psi, O, e_loc


def exact_symmetric_ensemble(ansatz, h, params):
    """Exact ensemble of a permutation-invariant ansatz over Hamming-weight
    classes 0..n: class w carries probability C(n,w) |psi_w|^2 / Z."""
    if not isinstance(ansatz, SymmetricRbm):
        raise TypeError("exact symmetric sampling requires a permutation-invariant ansatz")
    if not isinstance(h, Precipice):
        raise TypeError("symmetric exact sampling implemented for the Precipice model")
    n = ansatz.n
    lay = ansatz.layout
    log_psi, O, e_loc = _symmetric_precipice_kernel(
        complex(params[0]), np.ascontiguousarray(lay.view(params, "b")),
        np.ascontiguousarray(lay.view(params, "W")), n, h.s)
    if not np.all(np.isfinite(log_psi)):
        raise FloatingPointError("non-finite log-amplitude")
    weights = _normalized_weights(log_binomials(n) + 2.0 * np.real(log_psi))
    return SampleBatch(weights=weights, log_psi=log_psi, log_derivs=O,
                       local_energy=e_loc, spins=None)


def exact_sector_ensemble(ansatz, h, params, weight):
    """Exact ensemble enumerating every configuration of the fixed-weight
    sector, with probabilities |psi_x|^2 / Z."""
    states = sector_states(ansatz.n, weight)
    Z = batch_from_ints(states, ansatz.n)
    log_psi = ansatz.log_amplitude_batch(params, Z)
    weights = _normalized_weights(2.0 * np.real(log_psi))
    O = ansatz.log_derivatives_batch(params, Z)
    e_loc = local_energy_batch(h, ansatz, params, Z, log_psi)
    return SampleBatch(weights=weights, log_psi=log_psi, log_derivs=O,
                       local_energy=e_loc, spins=Z)


def exact_sector_energy(ansatz, params, sector_h, states):
    """Exact <H> of an ansatz over a fixed-weight sector, via the sparse
    sector Hamiltonian. Used for success detection, never for training."""
    Z = batch_from_ints(states, ansatz.n)
    log_psi = ansatz.log_amplitude_batch(params, Z)
    v = np.exp(log_psi - np.max(np.real(log_psi)))
    num = np.vdot(v, sector_h @ v)
    den = np.real(np.vdot(v, v))
    return float(np.real(num) / den)


class ExactSymmetricSampler:
    """Stateless sampler: exact symmetric-sector ensemble each call."""

    def __init__(self, ansatz, h):
        self.ansatz = ansatz
        self.h = h

    def batch(self, params):
        return exact_symmetric_ensemble(self.ansatz, self.h, params)


class ExactSectorSampler:
    """Stateless sampler: exact fixed-weight enumeration each call."""

    def __init__(self, ansatz, h, weight):
        self.ansatz = ansatz
        self.h = h
        self.weight = weight

    def batch(self, params):
        return exact_sector_ensemble(self.ansatz, self.h, params, self.weight)


@numba.njit(cache=True)
def _rbm_exchange_kernel(a, b, W, z, theta, ups, downs, n_keep, n_skip, seed):
    """Metropolis exchange chain for an RBM, with O(m) hidden-unit updates.

    z: current spins; theta: current hidden pre-activations; ups/downs:
    positions of +1 and -1 spins. Emits n_keep states separated by n_skip
    proposals. Mutates z, theta, ups, downs in place.
    """
    np.random.seed(seed)
    m = b.shape[0]
    n = z.shape[0]
    n_up = ups.shape[0]
    n_down = downs.shape[0]
    out = np.empty((n_keep, n), dtype=np.int8)
    ln2 = 0.6931471805599453
    for k in range(n_keep):
        for _ in range(n_skip):
            iu = np.random.randint(n_up)
            idn = np.random.randint(n_down)
            u = ups[iu]
            d = downs[idn]
            # z_u: +1 -> -1, z_d: -1 -> +1
            dre = -2.0 * a[u].real + 2.0 * a[d].real
            for mu in range(m):
                tn = theta[mu] - 2.0 * W[mu, u] + 2.0 * W[mu, d]
                # Re ln cosh, overflow safe
                xo = theta[mu].real if theta[mu].real >= 0 else -theta[mu].real
                xn = tn.real if tn.real >= 0 else -tn.real
                co = np.cos(theta[mu].imag)
                cn = np.cos(tn.imag)
                so = np.sin(theta[mu].imag)
                sn_ = np.sin(tn.imag)
                eo = np.exp(-2.0 * xo)
                en = np.exp(-2.0 * xn)
                # |cosh t|^2 = cosh^2 Re t - sin^2 Im t; use stable log form:
                # Re ln cosh t = |Re t| - ln 2 + 0.5*ln((1+e^{-2|Re t|})^2 - 4 e^{-2|Re t|} sin^2 Im t)
                ro = xo - ln2 + 0.5 * np.log((1.0 + eo) * (1.0 + eo) - 4.0 * eo * so * so)
                rn = xn - ln2 + 0.5 * np.log((1.0 + en) * (1.0 + en) - 4.0 * en * sn_ * sn_)
                dre += rn - ro
            if dre >= 0.0 or np.random.random() < np.exp(2.0 * dre):
                for mu in range(m):
                    theta[mu] = theta[mu] - 2.0 * W[mu, u] + 2.0 * W[mu, d]
                z[u] = -1
                z[d] = 1
                ups[iu] = d
                downs[idn] = u
        out[k] = z
    return out


class MetropolisExchange:
    """Fixed-magnetization Markov chain proposing up/down spin exchanges,
    accepted with min(1, |psi(x')/psi(x)|^2).

    State persists across SR steps. Thinning keeps one state per `sweeps`
    sweeps of n proposals; burn-in of 10 sweeps runs once on chain
    creation. With walkers > 1 the chain holds that many independent
    walkers and batches each proposal round through one network
    evaluation, which is much cheaper for deep ansatzes where the
    per-call overhead dominates single-configuration forwards.
    """

    def __init__(self, ansatz, h, weight, rng, sweeps=1, burn_in_sweeps=10,
                 walkers=1):
        self.ansatz = ansatz
        self.h = h
        self.weight = weight
        self.rng = rng
        self.sweeps = sweeps
        self.burn_in_sweeps = burn_in_sweeps
        self.walkers = int(walkers)
        if self.walkers < 1:
            raise ValueError("walkers must be >= 1")
        n = ansatz.n
        if self.walkers == 1:
            bits = np.zeros(n, dtype=np.int8)
            bits[rng.choice(n, size=weight, replace=False)] = 1
            self.z = (1 - 2 * bits).astype(np.int8)
        else:
            # z = 1 - 2x: occupied sites (bit 1) carry z = -1
            self.Z = np.ones((self.walkers, n), dtype=np.int8)
            self._dn = np.empty((self.walkers, weight), dtype=np.int64)
            self._up = np.empty((self.walkers, n - weight), dtype=np.int64)
            for k in range(self.walkers):
                occ = rng.choice(n, size=weight, replace=False)
                self.Z[k, occ] = -1
                self._dn[k] = occ
                self._up[k] = np.setdiff1d(np.arange(n), occ)
        self._burned_in = False

    def _run_chain(self, params, n_keep, n_skip):
        if isinstance(self.ansatz, Rbm):
            lay = self.ansatz.layout
            a = np.ascontiguousarray(lay.view(params, "a"))
            b = np.ascontiguousarray(lay.view(params, "b"))
            W = np.ascontiguousarray(lay.view(params, "W"))
            theta = b + W @ self.z.astype(float)
            ups = np.nonzero(self.z == 1)[0].astype(np.int64)
            downs = np.nonzero(self.z == -1)[0].astype(np.int64)
            seed = int(self.rng.integers(0, 2**31 - 1))
            out = _rbm_exchange_kernel(a, b, W, self.z, theta, ups, downs,
                                       n_keep, n_skip, seed)
            return out
        return self._run_chain_generic(params, n_keep, n_skip)

    def _run_chain_generic(self, params, n_keep, n_skip):
        n = self.ansatz.n
        z = self.z
        lp = self.ansatz.log_amplitude_batch(params, z[None, :].astype(float))[0]
        out = np.empty((n_keep, n), dtype=np.int8)
        ups = list(np.nonzero(z == 1)[0])
        downs = list(np.nonzero(z == -1)[0])
        for k in range(n_keep):
            for _ in range(n_skip):
                iu = self.rng.integers(len(ups))
                idn = self.rng.integers(len(downs))
                u, d = ups[iu], downs[idn]
                z[u], z[d] = -1, 1
                lp_new = self.ansatz.log_amplitude_batch(params, z[None, :].astype(float))[0]
                dre = np.real(lp_new - lp)
                if dre >= 0.0 or self.rng.random() < np.exp(2.0 * dre):
                    lp = lp_new
                    ups[iu], downs[idn] = d, u
                else:
                    z[u], z[d] = 1, -1
            out[k] = z
        return out

    def _run_walkers(self, params, n_rounds, n_skip):
        """Advance all walkers n_skip proposals between n_rounds retained
        snapshots, batching every proposal round through one forward pass."""
        Z = self.Z
        nw, n = Z.shape
        rows = np.arange(nw)
        lp = self.ansatz.log_amplitude_batch(params, Z.astype(float))
        out = np.empty((n_rounds, nw, n), dtype=np.int8)
        for r in range(n_rounds):
            for _ in range(n_skip):
                iu = self.rng.integers(self._up.shape[1], size=nw)
                idn = self.rng.integers(self._dn.shape[1], size=nw)
                u = self._up[rows, iu]
                d = self._dn[rows, idn]
                Zp = Z.copy()
                Zp[rows, u] = -1
                Zp[rows, d] = 1
                lp_new = self.ansatz.log_amplitude_batch(params, Zp.astype(float))
                dre = np.real(lp_new - lp)
                acc = (dre >= 0.0) | (self.rng.random(nw)
                                      < np.exp(np.minimum(2.0 * dre, 0.0)))
                Z[acc] = Zp[acc]
                lp[acc] = lp_new[acc]
                self._up[rows[acc], iu[acc]] = d[acc]
                self._dn[rows[acc], idn[acc]] = u[acc]
            out[r] = Z
        return out.reshape(n_rounds * nw, n)

    def sample(self, params, n_samples):
        """Draw n_samples configurations and fill all per-sample caches."""
        n = self.ansatz.n
        if self.walkers > 1:
            if n_samples % self.walkers:
                raise ValueError("n_samples must be a multiple of walkers")
            if not self._burned_in:
                self._run_walkers(params, 1, self.burn_in_sweeps * n)
                self._burned_in = True
            Z = self._run_walkers(params, n_samples // self.walkers,
                                  self.sweeps * n)
        else:
            if not self._burned_in:
                self._run_chain(params, 1, self.burn_in_sweeps * n)
                self._burned_in = True
            Z = self._run_chain(params, n_samples, self.sweeps * n).astype(np.int8)
        Zf = Z.astype(float)
        log_psi = self.ansatz.log_amplitude_batch(params, Zf)
        O = self.ansatz.log_derivatives_batch(params, Zf)
        e_loc = local_energy_batch(self.h, self.ansatz, params, Z, log_psi)
        weights = np.full(n_samples, 1.0 / n_samples)
        return SampleBatch(weights=weights, log_psi=log_psi, log_derivs=O,
                           local_energy=e_loc, spins=Z)


class MetropolisSampler:
    """Persistent Metropolis exchange chain drawing a fixed number of
    samples per SR step."""

    def __init__(self, ansatz, h, weight, n_samples, rng, sweeps=1, burn_in_sweeps=10,
                 walkers=1):
        self.chain = MetropolisExchange(ansatz, h, weight, rng, sweeps=sweeps,
                                        burn_in_sweeps=burn_in_sweeps, walkers=walkers)
        self.n_samples = n_samples

    def batch(self, params):
        return self.chain.sample(params, self.n_samples)
