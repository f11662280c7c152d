"""Iterative solvers for Hermitian (possibly indefinite) complex systems.

MINRES started from x0 = 0 returns the minimum-residual iterate; on a
consistent singular system the Krylov space lies in range(A), so the
returned solution is also minimum-norm. CG is provided as a cheaper
fallback for positive-definite systems.
"""

from dataclasses import dataclass

import numpy as np
import numba


@dataclass
class SolveResult:
    x: np.ndarray
    residual: float       # ||A x - b|| / ||b||
    iterations: int
    converged: bool


_EPS = np.finfo(float).eps


def _minres_loop(matvec, b, tol, max_iter):
    n = len(b)
    x = np.zeros(n, dtype=complex)
    beta1 = np.sqrt(np.real(np.vdot(b, b)))
    if beta1 == 0.0:
        return x, 0.0, 0, True
    r1 = b.copy()
    r2 = b.copy()
    y = b.copy()
    oldb = 0.0
    beta = beta1
    dbar = epsln = 0.0
    phibar = beta1
    cs, sn = -1.0, 0.0
    w = np.zeros(n, dtype=complex)
    w2 = np.zeros(n, dtype=complex)
    itn = 0
    while itn < max_iter:
        itn += 1
        v = y / beta
        y = matvec(v)
        if itn >= 2:
            y = y - (beta / oldb) * r1
        alfa = np.real(np.vdot(v, y))
        y = y - (alfa / beta) * r2
        r1 = r2
        r2 = y
        oldb = beta
        beta = np.sqrt(max(np.real(np.vdot(y, y)), 0.0))
        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        gamma = max(np.hypot(gbar, beta), _EPS)
        cs = gbar / gamma
        sn = beta / gamma
        phi = cs * phibar
        phibar = sn * phibar
        w1 = w2
        w2 = w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x = x + phi * w
        if phibar <= tol * beta1:
            return x, phibar / beta1, itn, True
        if beta <= _EPS * beta1:  # Krylov space exhausted
            return x, phibar / beta1, itn, phibar <= tol * beta1
    return x, phibar / beta1, itn, False


@numba.njit(cache=True)
def _minres_dense(A, b, tol, max_iter):  # pragma: no cover - exercised via minres()
    n = b.shape[0]
    eps = 2.220446049250313e-16
    x = np.zeros(n, dtype=np.complex128)
    beta1 = 0.0
    for i in range(n):
        beta1 += (b[i].real * b[i].real + b[i].imag * b[i].imag)
    beta1 = np.sqrt(beta1)
    if beta1 == 0.0:
        return x, 0.0, 0, True
    r1 = b.copy()
    r2 = b.copy()
    y = b.copy()
    oldb = 0.0
    beta = beta1
    dbar = 0.0
    epsln = 0.0
    phibar = beta1
    cs = -1.0
    sn = 0.0
    w = np.zeros(n, dtype=np.complex128)
    w2 = np.zeros(n, dtype=np.complex128)
    itn = 0
    while itn < max_iter:
        itn += 1
        v = y / beta
        y = A @ v
        if itn >= 2:
            y = y - (beta / oldb) * r1
        alfa = 0.0
        for i in range(n):
            alfa += (v[i].conjugate() * y[i]).real
        y = y - (alfa / beta) * r2
        r1 = r2
        r2 = y
        oldb = beta
        bsq = 0.0
        for i in range(n):
            bsq += (y[i].real * y[i].real + y[i].imag * y[i].imag)
        beta = np.sqrt(bsq)
        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        gamma = np.sqrt(gbar * gbar + beta * beta)
        if gamma < eps:
            gamma = eps
        cs = gbar / gamma
        sn = beta / gamma
        phi = cs * phibar
        phibar = sn * phibar
        w1 = w2
        w2 = w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x = x + phi * w
        if phibar <= tol * beta1:
            return x, phibar / beta1, itn, True
        if beta <= eps * beta1:
            return x, phibar / beta1, itn, phibar <= tol * beta1
    return x, phibar / beta1, itn, False


def minres(A, b, tol=1e-6, max_iter=1000):
    """Solve the Hermitian system A x = b to relative residual tol.

    A may be a dense ndarray, or any object with a matvec method, or a
    callable v -> A v.
    """
    b = np.asarray(b, dtype=complex)
    if not np.all(np.isfinite(b)):
        raise FloatingPointError("non-finite right-hand side")
    if isinstance(A, np.ndarray):
        if not np.all(np.isfinite(A)):
            raise FloatingPointError("non-finite matrix entries")
        x, res, itn, ok = _minres_dense(np.ascontiguousarray(A, dtype=complex),
                                        np.ascontiguousarray(b), tol, max_iter)
        return SolveResult(x, res, itn, ok)
    matvec = A.matvec if hasattr(A, "matvec") else A
    x, res, itn, ok = _minres_loop(matvec, b, tol, max_iter)
    return SolveResult(x, res, itn, ok)


def cg(A, b, tol=1e-6, max_iter=1000, diag_precond=None):
    """Conjugate gradients for Hermitian positive-definite systems.

    diag_precond, if given, is the (positive real) diagonal of a Jacobi
    preconditioner; it leaves the solution unchanged but collapses the
    iteration count on covariances with widely spread diagonals.
    """
    b = np.asarray(b, dtype=complex)
    if not np.all(np.isfinite(b)):
        raise FloatingPointError("non-finite right-hand side")
    matvec = (lambda v: A @ v) if isinstance(A, np.ndarray) else (
        A.matvec if hasattr(A, "matvec") else A)
    bnorm = np.linalg.norm(b)
    x = np.zeros_like(b)
    if bnorm == 0.0:
        return SolveResult(x, 0.0, 0, True)
    if diag_precond is not None:
        d = np.asarray(diag_precond, dtype=float)
        floor = max(d.max(), 0.0) * 1e-14
        minv = 1.0 / np.maximum(d, floor) if floor > 0.0 else None
    else:
        minv = None
    r = b.copy()
    z = r * minv if minv is not None else r
    p = z.copy()
    rz = np.real(np.vdot(r, z))
    for itn in range(1, max_iter + 1):
        Ap = matvec(p)
        alpha = rz / np.real(np.vdot(p, Ap))
        x += alpha * p
        r -= alpha * Ap
        rnorm = np.linalg.norm(r)
        if rnorm <= tol * bnorm:
            return SolveResult(x, rnorm / bnorm, itn, True)
        z = r * minv if minv is not None else r
        rz_new = np.real(np.vdot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    return SolveResult(x, np.linalg.norm(r) / bnorm, max_iter, False)
