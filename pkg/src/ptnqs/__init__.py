"""Parallel-tempered variational Monte Carlo for neural quantum states.

Trains complex-parameter network ansatzes with stochastic reconfiguration
under an entropy-regularized free-energy cost, wrapped in a replica
exchange framework whose temperature ladder is adaptively optimized to
equalize neighbor swap probabilities.
"""

from .ansatz import FeedForward, ParameterLayout, Rbm, SymmetricRbm, make_ansatz
from .hamiltonians import J1J2, Precipice, local_energy, make_hamiltonian
from .oracles import SpectrumResult, j1j2_spectrum, precipice_spectrum
from .sampling import (ExactSectorSampler, ExactSymmetricSampler, MetropolisExchange,
                       MetropolisSampler, SampleBatch, estimate_moments,
                       exact_sector_ensemble, exact_symmetric_ensemble)
from .solvers import cg, minres
from .spins import SpinConfiguration
from .sr import (FixedStep, HeunStep, RegularizationSchedule, SrOptimizer,
                 regularize, solve_sr)
from .tempering import (ReplicaPool, init_temperatures, propose_beta,
                        swap_probability)
from .training import PTSettings, ReplicaPayload, train

__version__ = "0.1.0"
