"""Stochastic reconfiguration step: regularized covariance solve plus a
fixed or adaptive (embedded Heun) learning-rate controller."""

from dataclasses import dataclass, field

import numpy as np

from .solvers import cg, minres


@dataclass
class RegularizationSchedule:
    """Diagonal shift lambda(p) = max(lambda0 * decay^p, floor)."""
    lambda0: float = 100.0
    decay: float = 0.9
    floor: float = 1e-4

    def value(self, p):
        return max(self.lambda0 * self.decay ** p, self.floor)


class RegularizedCovariance:
    """Covariance with its diagonal scaled: s_kk -> s_kk * (1 + lambda)."""

    def __init__(self, cov, lam):
        self.cov = cov
        self.lam = lam
        self._diag = cov.diagonal()

    @property
    def shape(self):
        return self.cov.shape

    @property
    def is_dense(self):
        return getattr(self.cov, "is_dense", False)

    def matvec(self, v):
        return self.cov.matvec(v) + self.lam * (self._diag * v)

    def diagonal(self):
        return self._diag * (1.0 + self.lam)

    def dense(self):
        d = self.cov.dense().copy()
        idx = np.arange(d.shape[0])
        d[idx, idx] *= (1.0 + self.lam)
        return d


def regularize(moments, lam):
    """Apply the diagonal regularization to the covariance of one step's
    moments; off-diagonal entries are untouched."""
    return RegularizedCovariance(moments.covariance, lam)


def solve_sr(cov, force, tol=1e-6, max_iter=1000, kind="minres"):
    """Solve s d = f for the SR update direction.

    Dense systems go through the compiled MINRES kernel; matrix-free
    covariances use the operator loop. kind="cg" selects conjugate
    gradients (used for the feedforward path).
    """
    if not np.all(np.isfinite(force)):
        raise FloatingPointError("non-finite force vector")
    if np.all(force == 0):
        return np.zeros_like(force)
    A = cov.dense() if getattr(cov, "is_dense", False) else cov.matvec
    if kind == "cg":
        result = cg(A, force, tol=tol, max_iter=max_iter,
                    diag_precond=cov.diagonal())
    else:
        result = minres(A, force, tol=tol, max_iter=max_iter)
    if not np.all(np.isfinite(result.x)):
        raise FloatingPointError("non-finite SR direction")
    return result.x


@dataclass
class FixedStep:
    """Constant learning rate: alpha <- alpha - eta * d."""
    eta: float = 1e-3


@dataclass
class HeunStep:
    """Embedded Euler/Heun pair treating d(alpha)/dt = -d as a flow.

    The trial Euler step and the trapezoidal corrector differ at second
    order; their difference is the local error estimate, and eta is
    adapted by a standard second-order controller. Growth/shrink factors,
    safety factor, and the eta clamp are the usual embedded-pair defaults.
    """
    tol: float = 1e-8
    eta: float = 1e-3
    safety: float = 0.9
    min_factor: float = 0.2
    max_factor: float = 2.0
    eta_min: float = 1e-6
    eta_max: float = 1.0
    max_rejects: int = 20


class ControllerError(RuntimeError):
    pass


@dataclass
class StepInfo:
    energy: float
    cost: float
    eta: float
    rejects: int = 0
    solver_calls: int = 0


class SrOptimizer:
    """One SR training lane: regularization schedule state, solver options,
    and the learning-rate controller."""

    def __init__(self, controller=None, schedule=None, solver_tol=1e-6,
                 solver_max_iter=1000, solver_kind="minres"):
        self.controller = controller if controller is not None else HeunStep()
        self.schedule = schedule if schedule is not None else RegularizationSchedule()
        self.solver_tol = solver_tol
        self.solver_max_iter = solver_max_iter
        self.solver_kind = solver_kind
        self.p = 0  # update-step counter driving lambda(p)

    def _direction(self, moments):
        lam = self.schedule.value(self.p)
        reg = regularize(moments, lam)
        return solve_sr(reg, moments.force, tol=self.solver_tol,
                        max_iter=self.solver_max_iter, kind=self.solver_kind)

    def step(self, params, moments, moment_fn):
        """Advance parameters by one SR update.

        moments are the estimates at `params`; moment_fn re-estimates
        moments at a trial point (fresh samples) for the Heun corrector.
        Returns (new_params, StepInfo).
        """
        ctrl = self.controller
        info = StepInfo(energy=moments.energy, cost=moments.cost, eta=0.0)
        if isinstance(ctrl, FixedStep):
            d = self._direction(moments)
            info.solver_calls = 1
            info.eta = ctrl.eta
            self.p += 1
            return params - ctrl.eta * d, info

        d1 = self._direction(moments)
        info.solver_calls = 1
        if np.all(d1 == 0):
            info.eta = ctrl.eta
            self.p += 1
            return params.copy(), info
        sqrtP = np.sqrt(len(params))
        rejects = 0
        while True:
            eta = ctrl.eta
            trial = params - eta * d1
            m2 = moment_fn(trial)
            d2 = self._direction(m2)
            info.solver_calls += 1
            err = 0.5 * eta * np.linalg.norm(d1 - d2) / sqrtP
            if not np.isfinite(err):
                raise ControllerError("non-finite Heun error estimate")
            # accept within tolerance; also accept once the step size cannot
            # shrink further (eta at its floor, or the reject budget is
            # spent) -- stalling there would deadlock on noisy directions
            if err <= ctrl.tol or eta <= ctrl.eta_min or rejects >= ctrl.max_rejects:
                factor = ctrl.max_factor if err == 0.0 else min(
                    ctrl.max_factor, max(ctrl.min_factor,
                                         ctrl.safety * np.sqrt(ctrl.tol / err)))
                ctrl.eta = min(ctrl.eta_max, max(ctrl.eta_min, eta * factor))
                info.eta = eta
                self.p += 1
                return params - 0.5 * eta * (d1 + d2), info
            rejects += 1
            info.rejects = rejects
            factor = max(ctrl.min_factor, ctrl.safety * np.sqrt(ctrl.tol / err))
            ctrl.eta = max(ctrl.eta_min, eta * factor)
