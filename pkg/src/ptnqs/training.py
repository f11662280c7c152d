"""Parallel-tempered SR training over a replica pool.

Each slot trains independently between synchronization points; swap
attempts alternate between even and odd neighbor pairs every n_swap
updates, and temperature optimization runs on its own cadence after
burn-in.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .sampling import estimate_moments
from .tempering import ReplicaPool


@dataclass
class PTSettings:
    n_swap: int = 100
    temp_update_period: int = 200
    burn_in: int = 400            # updates before temperature optimization
    pt_start: int = 0             # updates before any swap attempts
    optimize_temperatures: bool = True


@dataclass
class ReplicaPayload:
    """The full training state attached to a temperature slot; swaps move
    all of it (parameters, optimizer state, sampler chain)."""
    params: np.ndarray
    optimizer: object
    sampler: object


@dataclass
class TrainResult:
    pool: ReplicaPool
    success_step: Optional[int]
    final_step: int
    failed: Optional[str] = None


def train(pool, n_updates, rng, pt=None, recorder=None, success_fn=None,
          dense_limit=300, log_every=1, stop_on_success=False):
    """Run n_updates SR updates on every replica of the pool.

    success_fn(step, pool) -> bool is polled once per update; the first
    True latches. recorder, if given, receives energy rows every
    log_every updates and every swap / temperature event.
    """
    success_step = None
    for step in range(1, n_updates + 1):
        for i, slot in enumerate(pool.slots):
            payload = slot.payload
            T = slot.temperature
            sampler = payload.sampler

            def moment_fn(p):
                return estimate_moments(sampler.batch(p), T, dense_limit=dense_limit)

            moments = moment_fn(payload.params)
            payload.params, info = payload.optimizer.step(payload.params, moments, moment_fn)
            slot.record_energy(info.energy)
            if recorder is not None and step % log_every == 0:
                recorder.energy_row(step, i, info.energy, T, info.eta)

        if pt is not None and step >= pt.pt_start:
            if step % pt.n_swap == 0:
                outcomes = pool.attempt_swaps(rng)
                if recorder is not None:
                    recorder.swap_event(step, outcomes)
            if (pt.optimize_temperatures and step >= pt.burn_in
                    and step % pt.temp_update_period == 0):
                accepted = pool.optimize_temperatures()
                if recorder is not None:
                    recorder.temperature_event(step, pool.betas, accepted)

        if success_fn is not None and success_step is None:
            if success_fn(step, pool):
                success_step = step
                if recorder is not None:
                    recorder.success_event(step)
                if stop_on_success:
                    return TrainResult(pool, success_step, step)

    return TrainResult(pool, success_step, n_updates)
