# Stochastic SR with a feedforward wavefunction and Metropolis sampling.
#
# On lattices too large to enumerate, expectations come from a
# fixed-magnetization exchange sampler (pair swaps of opposite spins).
# Here a three-layer complex feedforward network learns the 4x4 periodic
# J1-J2 ground state from 64-sample estimates; 64 parallel walkers share
# each batched network evaluation. A few hundred updates already recover
# most of the correlation energy.

import numpy as np

from ptnqs.ansatz import FeedForward
from ptnqs.hamiltonians import J1J2
from ptnqs.oracles import j1j2_spectrum
from ptnqs.sampling import MetropolisSampler, estimate_moments
from ptnqs.sr import FixedStep, SrOptimizer

h = J1J2(4, 4, J1=1.0, J2=0.62, boundary="periodic")
e0 = j1j2_spectrum(4, 4, J1=1.0, J2=0.62, boundary="periodic",
                   weight=8).eigenvalues[0]
print(f"Lanczos ground energy: {e0:.6f}")

rng = np.random.default_rng(3)
ff = FeedForward(16, 48, 24, 24)
params = ff.init_parameters(rng, scale=0.01)
sampler = MetropolisSampler(ff, h, weight=8, n_samples=64,
                            rng=np.random.default_rng(4), walkers=64)
opt = SrOptimizer(controller=FixedStep(eta=0.01), solver_kind="cg")


def moment_fn(p):
    return estimate_moments(sampler.batch(p), T=0.0)


for step in range(1, 501):
    params, info = opt.step(params, moment_fn(params), moment_fn)
    if step % 50 == 0:
        print(f"step {step:3d}  E = {info.energy:+.4f}  "
              f"({100 * info.energy / e0:.1f}% of E0)")
