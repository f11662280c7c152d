import numpy as np
import pytest

from ptnqs.ansatz import Rbm, SymmetricRbm
from ptnqs.hamiltonians import J1J2, Precipice
from ptnqs.sampling import (CovarianceOperator, estimate_moments,
                            exact_sector_ensemble, exact_symmetric_ensemble)
from ptnqs.sectors import build_sector_hamiltonian
from ptnqs.sr import (ControllerError, FixedStep, HeunStep,
                      RegularizationSchedule, SrOptimizer, regularize,
                      solve_sr)


def test_regularization_schedule():
    sched = RegularizationSchedule()
    assert sched.value(0) == pytest.approx(100.0)
    assert sched.value(1) == pytest.approx(90.0)
    assert sched.value(10) == pytest.approx(100.0 * 0.9 ** 10)
    assert sched.value(100000) == pytest.approx(1e-4)


def test_regularized_covariance_scales_diagonal_only():
    rng = np.random.default_rng(0)
    O = rng.normal(size=(30, 5)) + 1j * rng.normal(size=(30, 5))
    w = np.full(30, 1.0 / 30)
    cov = CovarianceOperator(O, w)
    lam = 0.5
    reg = regularize(type("M", (), {"covariance": cov})(), lam)
    A = cov.dense()
    R = reg.dense()
    idx = np.arange(5)
    assert np.allclose(np.diag(R), np.diag(A) * (1 + lam))
    off = ~np.eye(5, dtype=bool)
    assert np.allclose(R[off], A[off])
    v = rng.normal(size=5) + 1j * rng.normal(size=5)
    assert np.allclose(reg.matvec(v), R @ v)


def test_solve_sr_dense_and_matrix_free_agree():
    rng = np.random.default_rng(1)
    O = rng.normal(size=(50, 6)) + 1j * rng.normal(size=(50, 6))
    w = rng.random(50)
    w /= w.sum()
    f = rng.normal(size=6) + 1j * rng.normal(size=6)
    dense = regularize(type("M", (), {"covariance": CovarianceOperator(O, w)})(), 0.1)
    free = regularize(type("M", (), {"covariance":
                                     CovarianceOperator(O, w, dense_limit=0)})(), 0.1)
    xd = solve_sr(dense, f, tol=1e-10)
    xf = solve_sr(free, f, tol=1e-10)
    assert np.allclose(xd, xf, atol=1e-6)
    assert np.allclose(dense.dense() @ xd, f, atol=1e-6)


def test_solve_sr_cg_matches_minres_on_definite_system():
    rng = np.random.default_rng(2)
    O = rng.normal(size=(80, 5)) + 1j * rng.normal(size=(80, 5))
    w = np.full(80, 1.0 / 80)
    reg = regularize(type("M", (), {"covariance": CovarianceOperator(O, w)})(), 1.0)
    f = rng.normal(size=5) + 1j * rng.normal(size=5)
    assert np.allclose(solve_sr(reg, f, kind="cg", tol=1e-10),
                       solve_sr(reg, f, kind="minres", tol=1e-10), atol=1e-6)


def test_solve_sr_zero_force_and_nonfinite():
    rng = np.random.default_rng(3)
    O = rng.normal(size=(10, 3)).astype(complex)
    reg = regularize(type("M", (), {"covariance":
                                    CovarianceOperator(O, np.full(10, 0.1))})(), 0.1)
    assert np.all(solve_sr(reg, np.zeros(3, dtype=complex)) == 0)
    with pytest.raises(FloatingPointError):
        solve_sr(reg, np.array([np.nan, 0, 0], dtype=complex))


def _sector_setup(seed, m=8):
    # easy 2x2 Heisenberg sector: SR should find the ground state quickly
    rng = np.random.default_rng(seed)
    h = J1J2(2, 2, J1=1.0, boundary="open")
    rbm = Rbm(4, m)
    params = rbm.init_parameters(rng, scale=0.05)
    e_ground = np.linalg.eigvalsh(build_sector_hamiltonian(h, 2).toarray())[0]
    moment_fn = lambda p: estimate_moments(exact_sector_ensemble(rbm, h, p, 2), 0.0)
    return params, moment_fn, e_ground


def test_fixed_step_descends():
    params, moment_fn, e_ground = _sector_setup(4)
    opt = SrOptimizer(controller=FixedStep(eta=0.05))
    e0 = moment_fn(params).energy
    for _ in range(300):
        params, info = opt.step(params, moment_fn(params), moment_fn)
        assert info.eta == 0.05
    assert moment_fn(params).energy < e0
    assert moment_fn(params).energy == pytest.approx(e_ground, abs=1e-3)
    assert opt.p == 300


def test_heun_step_converges_and_adapts_eta():
    params, moment_fn, e_ground = _sector_setup(5)
    opt = SrOptimizer(controller=HeunStep(tol=1e-4, eta=1e-3))
    etas = []
    for _ in range(400):
        params, info = opt.step(params, moment_fn(params), moment_fn)
        etas.append(info.eta)
    assert moment_fn(params).energy == pytest.approx(e_ground, abs=1e-3)
    assert max(etas) > 1e-3        # the controller grew the step size
    assert min(etas) >= 1e-6 and max(etas) <= 1.0


class _Stub:
    """Identity-covariance moments with a fresh random unit force each
    call, so the embedded error estimate never drops below tolerance."""

    class _Eye:
        shape = (3, 3)
        is_dense = True

        def matvec(self, v):
            return v

        def diagonal(self):
            return np.ones(3)

        def dense(self):
            return np.eye(3, dtype=complex)

    def __init__(self):
        self.rng = np.random.default_rng(99)

    def __call__(self, p):
        from ptnqs.sampling import EstimatedMoments
        force = self.rng.normal(size=3) + 1j * self.rng.normal(size=3)
        force /= np.linalg.norm(force)
        return EstimatedMoments(force=force, covariance=self._Eye(),
                                energy=0.0, cost=0.0)


def test_heun_accepts_at_eta_floor():
    # directions that never agree: the controller shrinks eta to its floor
    # and then accepts rather than stalling forever
    stub = _Stub()
    opt = SrOptimizer(controller=HeunStep(tol=1e-16, eta=1e-3),
                      schedule=RegularizationSchedule(lambda0=0.0, floor=0.0))
    params = np.zeros(3, dtype=complex)
    new_params, info = opt.step(params, stub(params), stub)
    assert info.rejects > 0
    assert info.eta == pytest.approx(1e-6)
    assert np.all(np.isfinite(new_params))


def test_heun_nonfinite_error_raises():
    class BadStub(_Stub):
        def __call__(self, p):
            m = super().__call__(p)
            m.force = m.force * np.inf
            return m

    stub = BadStub()
    opt = SrOptimizer(controller=HeunStep(tol=1e-8, eta=1e-3),
                      schedule=RegularizationSchedule(lambda0=0.0, floor=0.0))
    with pytest.raises(FloatingPointError):
        opt.step(np.zeros(3, dtype=complex), stub(np.zeros(3, dtype=complex)), stub)


def test_sr_direction_gauge_invariant():
    # a constant shift of ln psi changes neither force, covariance, nor
    # the solved direction
    rng = np.random.default_rng(7)
    h = J1J2(2, 2, J1=1.0, J2=0.5, boundary="open")
    rbm = Rbm(4, 3)
    params = rbm.init_parameters(rng, scale=0.3)
    batch = exact_sector_ensemble(rbm, h, params, weight=2)
    shifted = exact_sector_ensemble(rbm, h, params, weight=2)
    shifted.log_psi = shifted.log_psi + (2.0 - 1.3j)
    m = estimate_moments(batch, 0.5)
    ms = estimate_moments(shifted, 0.5)
    d = solve_sr(regularize(m, 0.01), m.force, tol=1e-10)
    ds = solve_sr(regularize(ms, 0.01), ms.force, tol=1e-10)
    assert np.allclose(d, ds, atol=1e-8)
