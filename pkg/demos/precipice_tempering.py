# The precipice trap, and how parallel tempering escapes it.
#
# The precipice Hamiltonian is diagonal in the Hamming-weight basis: a
# gentle slope rewards flipping spins up, but the true minimum sits in a
# single corner state separated from the slope by a cliff. A lone
# zero-temperature SR run slides down the slope and stops at the cliff edge
# (the first excited energy). A replica ladder with an entropy-regularized
# cost F = <H> + T <ln p> lets hot replicas spread over the cliff, find the
# corner, and hand it down to the T = 0 slot through payload swaps.
#
# Runs in a couple of minutes at n = 16 with the exact symmetric-sector
# ensemble (no sampling noise, O(n) states).

import numpy as np

from ptnqs.ansatz import SymmetricRbm
from ptnqs.hamiltonians import Precipice
from ptnqs.oracles import precipice_spectrum
from ptnqs.sampling import ExactSymmetricSampler
from ptnqs.sr import HeunStep, SrOptimizer
from ptnqs.tempering import ReplicaPool, init_temperatures
from ptnqs.training import PTSettings, ReplicaPayload, train

n = 16
h = Precipice(n, s=0.8)
spec = precipice_spectrum(n, s=0.8)
e0, e1 = spec.eigenvalues
print(f"n = {n}: ground (corner) E0 = {e0:.6f}, cliff edge E1 = {e1:.6f}")


def make_payload(seed):
    ansatz = SymmetricRbm(n, 8)
    rng = np.random.default_rng(seed)
    return ReplicaPayload(
        params=ansatz.init_parameters(rng, scale=0.01),
        optimizer=SrOptimizer(controller=HeunStep(tol=1e-4)),
        sampler=ExactSymmetricSampler(ansatz, h),
    )


def cold_energy(pool):
    payload = pool.slots[0].payload
    batch = payload.sampler.batch(payload.params)
    return float(np.real(batch.weights @ batch.local_energy))


updates = 6000

# --- single zero-temperature replica: lands on the cliff edge -------------
pool = ReplicaPool([0.0], payloads=None)
pool.slots[0].payload = make_payload(seed=1)
train(pool, updates, np.random.default_rng(100))
e_single = cold_energy(pool)
print(f"single T=0 replica:   E = {e_single:.6f}  (E1 - E = {e1 - e_single:.2e})")

# --- tempered ladder with adaptive interior temperatures ------------------
temps = init_temperatures(6, t_min=0.05, t_max=10.0, shape="cubic")
pool = ReplicaPool(temps)
for i, slot in enumerate(pool.slots):
    slot.payload = make_payload(seed=10 + i)
pt = PTSettings(n_swap=20, temp_update_period=100, burn_in=200,
                optimize_temperatures=True)
train(pool, updates, np.random.default_rng(200), pt=pt)
e_pt = cold_energy(pool)
print(f"tempered ladder:      E = {e_pt:.6f}  (E - E0 = {e_pt - e0:.2e})")
print("final ladder:", np.round(pool.temperatures, 4))

assert abs(e_single - e1) < 1e-3, "single replica should stall at the cliff"
assert e_pt - e0 < 1e-3, "tempering should reach the corner state"
print("tempering escaped the trap the single replica fell into")
