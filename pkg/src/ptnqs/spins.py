"""Computational-basis spin configurations for n qubits.

Convention: bit x_i in {0,1} maps to the Pauli-z eigenvalue z_i = 1 - 2*x_i,
so bit 0 is spin up (+1) and bit 1 is spin down (-1).
"""

import numpy as np


class SpinConfiguration:
    """An n-bit basis state with cached spins and Hamming weight."""

    __slots__ = ("bits", "spins", "weight")

    def __init__(self, bits):
        bits = np.asarray(bits, dtype=np.int8)
        if bits.ndim != 1 or np.any((bits != 0) & (bits != 1)):
            raise ValueError("bits must be a 1-d array over {0, 1}")
        self.bits = bits
        self.spins = (1 - 2 * bits).astype(np.int8)
        self.weight = int(bits.sum())

    @classmethod
    def from_int(cls, value, n):
        bits = (value >> np.arange(n)) & 1
        return cls(bits.astype(np.int8))

    @classmethod
    def from_spins(cls, spins):
        spins = np.asarray(spins)
        return cls(((1 - spins) // 2).astype(np.int8))

    def to_int(self):
        return int(np.sum(self.bits.astype(np.int64) << np.arange(len(self.bits))))

    def __len__(self):
        return len(self.bits)

    def __eq__(self, other):
        return isinstance(other, SpinConfiguration) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __repr__(self):
        return "SpinConfiguration(%s)" % "".join(str(b) for b in self.bits)


def spins_to_bits(spins):
    return ((1 - np.asarray(spins)) // 2).astype(np.int8)


def batch_from_ints(values, n):
    """(N,) int array -> (N, n) spin matrix in {+1,-1}."""
    values = np.asarray(values, dtype=np.int64)
    bits = (values[:, None] >> np.arange(n)) & 1
    return (1 - 2 * bits).astype(np.int8)
