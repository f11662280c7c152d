"""Replica pool management: temperature ladders, even/odd neighbor swaps,
running energy averages, and adaptive temperature optimization."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def init_temperatures(n_replicas, t_min, t_max, shape="cubic"):
    """Temperature ladder: T_0 = 0, then T_min..T_max with a polynomial
    profile of exponent 3 (cubic) or 1 (linear)."""
    if n_replicas < 3:
        raise ValueError("need at least 3 replicas (zero, T_min, T_max)")
    if not 0.0 < t_min < t_max:
        raise ValueError("require 0 < t_min < t_max")
    exponent = {"cubic": 3, "linear": 1}.get(shape)
    if exponent is None:
        raise ValueError(f"unknown ladder shape {shape!r}")
    k = np.arange(1, n_replicas)
    temps = t_min + (t_max - t_min) * ((k - 1) / (n_replicas - 2)) ** exponent
    return np.concatenate([[0.0], temps])


def swap_probability(beta_i, beta_ip1, e_i, e_ip1):
    """Metropolis swap probability min(1, exp[(b_i - b_i+1)(E_i - E_i+1)]).

    With beta_i infinite (the zero-temperature slot) the rule is binary:
    swap iff the cold replica's energy is not below its neighbor's."""
    de = e_i - e_ip1
    if np.isinf(beta_i):
        return 1.0 if de >= 0.0 else 0.0
    arg = (beta_i - beta_ip1) * de
    return 1.0 if arg >= 0.0 else float(np.exp(arg))


def propose_beta(beta_prev, beta_i, beta_next, e_prev, e_i, e_next):
    """Averaged solution of equal neighbor swap exponents.

    Returns the proposed beta_i*, or None when the energy spacings are
    degenerate (zero denominator)."""
    e_minus = e_prev - e_i
    e_plus = e_i - e_next
    denom = e_minus + e_plus
    if denom == 0.0:
        return None
    return 0.5 * (beta_i + (beta_prev * e_minus + beta_next * e_plus) / denom)


@dataclass
class SwapOutcome:
    pair: tuple
    probability: float
    swapped: bool


@dataclass
class ReplicaSlot:
    """One temperature slot: the temperature stays attached to the slot,
    the payload (parameters, optimizer, chain) moves under swaps."""
    temperature: float
    payload: object = None
    e_sum: float = 0.0
    e_count: int = 0
    e_last: float = np.nan   # last completed window average
    e_inst: float = np.nan   # most recent single-step estimate

    @property
    def beta(self):
        return np.inf if self.temperature == 0.0 else 1.0 / self.temperature

    @property
    def running_energy(self):
        if self.e_count == 0:
            return self.e_last
        return self.e_sum / self.e_count

    def record_energy(self, estimate):
        if not np.isfinite(estimate):
            raise FloatingPointError("non-finite energy estimate")
        self.e_sum += estimate
        self.e_count += 1
        self.e_last = self.e_sum / self.e_count
        self.e_inst = estimate

    def reset_window(self):
        self.e_sum = 0.0
        self.e_count = 0


class ReplicaPool:
    """n_R replicas on a fixed-endpoint temperature ladder.

    Slot 0 is pinned at T = 0; slots 1 and n_R-1 hold T_min and T_max for
    the whole run. Temperature optimization acts on the interior slots
    (2..n_R-2 by default; `optimize_lowest` additionally proposes updates
    for slot 1, for sensitivity runs)."""

    def __init__(self, temperatures, payloads=None, optimize_lowest=False):
        temperatures = np.asarray(temperatures, dtype=float)
        if temperatures[0] != 0.0:
            raise ValueError("slot 0 must sit at zero temperature")
        if np.any(np.diff(temperatures) <= 0):
            raise ValueError("temperatures must be strictly increasing")
        if payloads is None:
            payloads = [None] * len(temperatures)
        self.slots = [ReplicaSlot(t, p) for t, p in zip(temperatures, payloads)]
        self.parity = 0  # 0: pairs (0,1),(2,3),..; 1: pairs (1,2),(3,4),..
        self.optimize_lowest = optimize_lowest

    def __len__(self):
        return len(self.slots)

    @property
    def temperatures(self):
        return np.array([s.temperature for s in self.slots])

    @property
    def betas(self):
        return np.array([s.beta for s in self.slots])

    @property
    def running_energies(self):
        return np.array([s.running_energy for s in self.slots])

    def update_running_energy(self, i, estimate):
        self.slots[i].record_energy(estimate)

    def attempt_swaps(self, rng):
        """Attempt all disjoint neighbor swaps of the current parity; swap
        full payloads, keep temperatures attached to slots, flip parity."""
        outcomes = []
        n = len(self.slots)
        for i in range(self.parity, n - 1, 2):
            a, b = self.slots[i], self.slots[i + 1]
            p = swap_probability(a.beta, b.beta, a.running_energy, b.running_energy)
            do_swap = bool(rng.random() < p)
            if do_swap:
                a.payload, b.payload = b.payload, a.payload
            outcomes.append(SwapOutcome(pair=(i, i + 1), probability=p, swapped=do_swap))
            a.reset_window()
            b.reset_window()
        self.parity ^= 1
        return outcomes

    def optimize_temperatures(self):
        """Equalize neighbor swap exponents: propose beta_i* for interior
        slots, odd i first then even, accepting only order-preserving
        updates. Endpoint slots (and slot 0) never move."""
        n = len(self.slots)
        lo = 1 if self.optimize_lowest else 2
        interior = [i for i in range(lo, n - 1)]
        accepted = []
        for group in (1, 0):  # odd slots first, then even
            for i in interior:
                if i % 2 != group:
                    continue
                prev_s, cur_s, next_s = self.slots[i - 1], self.slots[i], self.slots[i + 1]
                beta_star = propose_beta(prev_s.beta, cur_s.beta, next_s.beta,
                                         prev_s.running_energy, cur_s.running_energy,
                                         next_s.running_energy)
                if beta_star is None or not np.isfinite(beta_star):
                    continue
                if prev_s.beta > beta_star > next_s.beta:
                    cur_s.temperature = 1.0 / beta_star
                    accepted.append((i, beta_star))
        return accepted
