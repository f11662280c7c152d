# Ground state of the 2x3 open J1-J2 Heisenberg model with a complex RBM.
#
# Small enough that the zero-magnetization sector (20 states) can be
# enumerated exactly, so the only error is optimization error: SR with the
# embedded Heun step controller drives the Rayleigh quotient to the Lanczos
# ground energy in a few hundred updates.

import numpy as np

from ptnqs.ansatz import Rbm
from ptnqs.hamiltonians import J1J2
from ptnqs.oracles import j1j2_spectrum
from ptnqs.sampling import ExactSectorSampler, estimate_moments
from ptnqs.sr import HeunStep, SrOptimizer

Lx, Ly, J2 = 2, 3, 0.4
h = J1J2(Lx, Ly, J1=1.0, J2=J2, boundary="open")
spectrum = j1j2_spectrum(Lx, Ly, J1=1.0, J2=J2, boundary="open", weight=3)
e0 = spectrum.eigenvalues[0]
print(f"Lanczos ground energy: {e0:.10f}")

rng = np.random.default_rng(0)
rbm = Rbm(6, 12)
params = rbm.init_parameters(rng, scale=0.01)
sampler = ExactSectorSampler(rbm, h, weight=3)
opt = SrOptimizer(controller=HeunStep(tol=1e-4))


def moment_fn(p):
    return estimate_moments(sampler.batch(p), T=0.0)


for step in range(1, 801):
    params, info = opt.step(params, moment_fn(params), moment_fn)
    if step % 100 == 0:
        err = info.energy - e0
        print(f"step {step:4d}  E = {info.energy:+.8f}  "
              f"error = {err:.2e}  eta = {info.eta:.2e}")

assert info.energy - e0 < 1e-5
print("converged to the exact ground state")
