"""Complex-parameter wavefunction ansatzes.

Each ansatz maps a spin configuration x to a log-amplitude ln psi_x and
exposes the diagonal log-derivatives O_k(x) = (1/psi_x) d psi_x / d alpha_k
in a fixed flat parameter layout. All parameters are complex and the
networks are holomorphic, so O_k is an ordinary complex derivative.
"""

import numpy as np
from scipy.special import erf

from .spins import SpinConfiguration

LN2 = np.log(2.0)
SQRT2 = np.sqrt(2.0)


def log_cosh(z):
    """Overflow-safe ln cosh for complex (or real) arguments."""
    z = np.asarray(z)
    zs = np.where(np.real(z) < 0, -z, z)
    return zs + np.log(1.0 + np.exp(-2.0 * zs)) - LN2


def gelu(z):
    """GELU activation, analytically continued to complex arguments."""
    return 0.5 * z * (1.0 + erf(z / SQRT2))


def gelu_prime(z):
    return 0.5 * (1.0 + erf(z / SQRT2)) + z * np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)


class ParameterLayout:
    """Named slices into a flat complex parameter vector."""

    def __init__(self, fields):
        # fields: list of (name, shape)
        self.slices = {}
        self.shapes = {}
        offset = 0
        for name, shape in fields:
            size = int(np.prod(shape))
            self.slices[name] = slice(offset, offset + size)
            self.shapes[name] = tuple(shape)
            offset += size
        self.size = offset

    def view(self, flat, name):
        return flat[self.slices[name]].reshape(self.shapes[name])

    def pack(self, **arrays):
        flat = np.empty(self.size, dtype=complex)
        for name, sl in self.slices.items():
            flat[sl] = np.asarray(arrays[name], dtype=complex).ravel()
        return flat

    def unpack(self, flat):
        return {name: self.view(flat, name) for name in self.slices}


def _as_spins(x, n):
    if isinstance(x, SpinConfiguration):
        if len(x) != n:
            raise ValueError(f"configuration has {len(x)} sites, ansatz expects {n}")
        return x.spins.astype(float)
    z = np.asarray(x, dtype=float)
    if z.shape[-1] != n:
        raise ValueError(f"configuration has {z.shape[-1]} sites, ansatz expects {n}")
    return z


class Rbm:
    """Restricted Boltzmann machine with n visible and m hidden units.

    ln psi_x = sum_i a_i z_i + sum_mu ln cosh(b_mu + sum_k W_{mu k} z_k)
    """

    def __init__(self, n, m):
        self.n = n
        self.m = m
        self.layout = ParameterLayout([("a", (n,)), ("b", (m,)), ("W", (m, n))])
        self.n_params = self.layout.size

    def init_parameters(self, rng, scale=0.01):
        if scale < 0:
            raise ValueError("scale must be >= 0")
        re = rng.normal(0.0, 1.0, self.n_params) * scale
        im = rng.normal(0.0, 1.0, self.n_params) * scale
        return re + 1j * im

    def log_amplitude(self, params, x):
        return complex(self.log_amplitude_batch(params, _as_spins(x, self.n)[None, :])[0])

    def log_amplitude_batch(self, params, Z):
        Z = np.asarray(Z, dtype=float)
        a = self.layout.view(params, "a")
        b = self.layout.view(params, "b")
        W = self.layout.view(params, "W")
        theta = Z @ W.T + b  # (N, m)
        out = Z @ a + log_cosh(theta).sum(axis=1)
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("non-finite log-amplitude")
        return out

    def log_derivatives(self, params, x):
        return self.log_derivatives_batch(params, _as_spins(x, self.n)[None, :])[0]

    def log_derivatives_batch(self, params, Z):
        Z = np.asarray(Z, dtype=float)
        b = self.layout.view(params, "b")
        W = self.layout.view(params, "W")
        theta = Z @ W.T + b
        t = np.tanh(theta)  # (N, m)
        N = Z.shape[0]
        O = np.empty((N, self.n_params), dtype=complex)
        O[:, self.layout.slices["a"]] = Z
        O[:, self.layout.slices["b"]] = t
        O[:, self.layout.slices["W"]] = (t[:, :, None] * Z[:, None, :]).reshape(N, -1)
        return O


class SymmetricRbm:
    """Permutation-invariant RBM: one shared visible bias, one weight per
    hidden unit acting on sum_i z_i. Depends on x only through its Hamming
    weight, which allows exact ensembles over weight classes."""

    def __init__(self, n, m):
        self.n = n
        self.m = m
        self.layout = ParameterLayout([("a", (1,)), ("b", (m,)), ("W", (m,))])
        self.n_params = self.layout.size

    def init_parameters(self, rng, scale=0.01):
        if scale < 0:
            raise ValueError("scale must be >= 0")
        re = rng.normal(0.0, 1.0, self.n_params) * scale
        im = rng.normal(0.0, 1.0, self.n_params) * scale
        return re + 1j * im

    def log_amplitude(self, params, x):
        z = _as_spins(x, self.n)
        return complex(self.log_amplitude_sumz(params, np.array([z.sum()]))[0])

    def log_amplitude_batch(self, params, Z):
        return self.log_amplitude_sumz(params, np.asarray(Z, dtype=float).sum(axis=1))

    def log_amplitude_sumz(self, params, sumz):
        """Log-amplitudes as a function of sum_i z_i = n - 2|x|."""
        sumz = np.asarray(sumz, dtype=float)
        a = self.layout.view(params, "a")[0]
        b = self.layout.view(params, "b")
        W = self.layout.view(params, "W")
        theta = b + np.outer(sumz, W)  # (N, m)
        out = a * sumz + log_cosh(theta).sum(axis=1)
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("non-finite log-amplitude")
        return out

    def log_derivatives(self, params, x):
        z = _as_spins(x, self.n)
        return self.log_derivatives_sumz(params, np.array([z.sum()]))[0]

    def log_derivatives_batch(self, params, Z):
        return self.log_derivatives_sumz(params, np.asarray(Z, dtype=float).sum(axis=1))

    def log_derivatives_sumz(self, params, sumz):
        sumz = np.asarray(sumz, dtype=float)
        b = self.layout.view(params, "b")
        W = self.layout.view(params, "W")
        theta = b + np.outer(sumz, W)
        t = np.tanh(theta)
        N = len(sumz)
        O = np.empty((N, self.n_params), dtype=complex)
        O[:, self.layout.slices["a"]] = sumz[:, None]
        O[:, self.layout.slices["b"]] = t
        O[:, self.layout.slices["W"]] = t * sumz[:, None]
        return O


class FeedForward:
    """Three-layer feedforward network with complex weights and GELU
    activations, no biases. The scalar log-amplitude is the sum over the
    outputs of the last hidden layer."""

    def __init__(self, n, h1, h2, h3):
        self.n = n
        self.hidden = (h1, h2, h3)
        self.layout = ParameterLayout([("Wv", (h1, n)), ("W1", (h2, h1)), ("W2", (h3, h2))])
        self.n_params = self.layout.size

    def init_parameters(self, rng, scale=0.01):
        if scale < 0:
            raise ValueError("scale must be >= 0")
        re = rng.normal(0.0, 1.0, self.n_params) * scale
        im = rng.normal(0.0, 1.0, self.n_params) * scale
        return re + 1j * im

    def _forward(self, params, Z):
        Wv = self.layout.view(params, "Wv")
        W1 = self.layout.view(params, "W1")
        W2 = self.layout.view(params, "W2")
        a1 = Z @ Wv.T          # (N, h1)
        x1 = gelu(a1)
        a2 = x1 @ W1.T         # (N, h2)
        x2 = gelu(a2)
        a3 = x2 @ W2.T         # (N, h3)
        x3 = gelu(a3)
        return a1, x1, a2, x2, a3, x3

    def log_amplitude(self, params, x):
        return complex(self.log_amplitude_batch(params, _as_spins(x, self.n)[None, :])[0])

    def log_amplitude_batch(self, params, Z):
        Z = np.asarray(Z, dtype=float)
        out = self._forward(params, Z)[-1].sum(axis=1)
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("non-finite log-amplitude")
        return out

    def log_derivatives(self, params, x):
        return self.log_derivatives_batch(params, _as_spins(x, self.n)[None, :])[0]

    def log_derivatives_batch(self, params, Z):
        """Reverse-mode gradient of ln psi through the three layers."""
        Z = np.asarray(Z, dtype=complex)
        W1 = self.layout.view(params, "W1")
        W2 = self.layout.view(params, "W2")
        a1, x1, a2, x2, a3, _ = self._forward(params, Z.real.astype(float))
        d3 = gelu_prime(a3)                    # dlnpsi/da3, since output weights are 1
        gW2 = d3[:, :, None] * x2[:, None, :]  # (N, h3, h2)
        d2 = (d3 @ W2) * gelu_prime(a2)
        gW1 = d2[:, :, None] * x1[:, None, :]
        d1 = (d2 @ W1) * gelu_prime(a1)
        gWv = d1[:, :, None] * Z[:, None, :]
        N = Z.shape[0]
        O = np.empty((N, self.n_params), dtype=complex)
        O[:, self.layout.slices["Wv"]] = gWv.reshape(N, -1)
        O[:, self.layout.slices["W1"]] = gW1.reshape(N, -1)
        O[:, self.layout.slices["W2"]] = gW2.reshape(N, -1)
        return O


def make_ansatz(kind, n, **kwargs):
    if kind == "rbm":
        return Rbm(n, kwargs["m"])
    if kind == "symmetric_rbm":
        return SymmetricRbm(n, kwargs["m"])
    if kind == "feedforward":
        return FeedForward(n, kwargs["h1"], kwargs["h2"], kwargs["h3"])
    raise ValueError(f"unknown ansatz kind {kind!r}")
