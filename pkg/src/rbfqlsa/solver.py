"""Classical solution of the preconditioned collocation system."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .assembly import CollocationSystem, preconditioner
from .geometry import PointSet
from .kernel import WendlandKernel

__all__ = [
    "SolveResult",
    "ConvergenceError",
    "conjugate_gradient",
    "condition_number",
    "evaluate_solution_at",
    "l2_relative_error",
    "solve_system",
    "manufactured_solution",
]

DESK_LIMIT = 4096


class ConvergenceError(RuntimeError):
    pass


@dataclass
class SolveResult:
    c: np.ndarray
    iterations: int
    residual: float
    kappa: float
    u_bar_at_points: np.ndarray
    runtime_ns: int
    method: str = "cg"

    def to_json(self):
        data = asdict(self)
        for key in ("c", "u_bar_at_points"):
            data[key] = np.asarray(data[key]).tolist()
        return json.dumps(data)


def _is_symmetric(A, rtol=1e-12):
    diff = A - A.T
    if sp.issparse(diff):
        err = abs(diff).max() if diff.nnz else 0.0
        scale = abs(A).max()
    else:
        err = np.abs(diff).max()
        scale = np.abs(A).max()
    return err <= rtol * max(scale, 1e-300)


def conjugate_gradient(A, b, tol=1e-10, max_iter=None, x0=None):
    """Unpreconditioned conjugate gradients for a symmetric positive definite ``A``.

    Returns ``(x, iterations, relative_residual)``; the residual is recomputed
    from ``b - A x`` at exit.  Reduction order is that of the underlying
    matrix-vector product and ``numpy.dot``, fixed for a given input.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if not _is_symmetric(A):
        raise ValueError("conjugate gradients needs a symmetric matrix")
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if max_iter is None:
        max_iter = 10 * n
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0, 0.0
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    p = r.copy()
    rr = r @ r
    k = 0
    while np.sqrt(rr) > tol * bnorm:
        if k >= max_iter:
            raise ConvergenceError(
                f"CG did not reach {tol:g} in {max_iter} iterations "
                f"(residual {np.sqrt(rr) / bnorm:.3e})"
            )
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0:
            raise ValueError("matrix is not positive definite")
        alpha = rr / pAp
        x += alpha * p
        r -= alpha * Ap
        rr_new = r @ r
        p = r + (rr_new / rr) * p
        rr = rr_new
        k += 1
    res = np.linalg.norm(b - A @ x) / bnorm
    return x, k, float(res)


def condition_number(A) -> float:
    """``lambda_max / lambda_min`` from a dense symmetric eigensolve."""
    dense = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    if dense.shape[0] > DESK_LIMIT:
        raise ValueError(f"dense eigensolve limited to N <= {DESK_LIMIT}")
    evals = sla.eigvalsh(0.5 * (dense + dense.T))
    if evals[0] <= 0:
        raise ValueError(f"matrix is not positive definite (min eigenvalue {evals[0]:.3e})")
    return float(evals[-1] / evals[0])


def evaluate_solution_at(kernel: WendlandKernel, points: PointSet, c, delta: float, x):
    """Collocation solution at ``x`` (a ``d``-vector or an ``(m, d)`` array).

    ``c`` are the preconditioned coefficients; the expansion uses ``P c``.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (points.n,):
        raise ValueError(f"expected {points.n} coefficients, got {c.shape}")
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != points.d:
        raise ValueError("evaluation point has the wrong dimension")
    d = points.d
    c_raw = c.copy()
    c_raw[: points.n_interior] *= delta**2
    centres = points.points
    rho = np.linalg.norm(x[:, None, :] - centres[None, :, :], axis=2) / delta
    ni = points.n_interior
    vals = -(delta ** (-d - 2)) * kernel.evaluate("lap", rho[:, :ni]) @ c_raw[:ni]
    vals = vals + delta ** (-d) * kernel.evaluate("phi", rho[:, ni:]) @ c_raw[ni:]
    return float(vals[0]) if single else vals


def l2_relative_error(u_num, u_exact) -> float:
    u_num = np.asarray(u_num)
    u_exact = np.asarray(u_exact)
    if u_num.shape != u_exact.shape:
        raise ValueError("vectors must have equal length")
    denom = np.linalg.norm(u_exact)
    if denom == 0:
        raise ValueError("exact solution has zero norm")
    return float(np.linalg.norm(u_num - u_exact) / denom)


def manufactured_solution(d):
    """``u = prod sin(pi x_j)`` on the unit cube: returns ``(u, f, g)``."""

    def u(x):
        return np.prod(np.sin(np.pi * np.atleast_2d(x)), axis=1)

    def f(x):
        return d * np.pi**2 * u(x)

    def g(x):
        return np.zeros(len(np.atleast_2d(x)))

    return u, f, g


def solve_system(system: CollocationSystem, evaluation, method="direct", tol=1e-10, max_iter=None,
                 compute_kappa=True) -> SolveResult:
    """Solve ``A c = b`` and evaluate ``u_bar = M c`` at the collocation points.

    ``method`` is ``"cg"`` or ``"direct"`` (dense Cholesky).
    """
    if system.b is None:
        raise ValueError("system has no right-hand side")
    t0 = time.perf_counter_ns()
    if method == "cg":
        c, iters, res = conjugate_gradient(system.A, system.b, tol=tol, max_iter=max_iter)
    elif method == "direct":
        dense = system.A.toarray()
        c = sla.cho_solve(sla.cho_factor(dense), system.b)
        iters = 0
        res = float(np.linalg.norm(system.b - system.A @ c) / max(np.linalg.norm(system.b), 1e-300))
    else:
        raise ValueError(f"unknown method {method!r}")
    elapsed = time.perf_counter_ns() - t0
    kappa = condition_number(system.A) if compute_kappa else float("nan")
    u_bar = evaluation.M @ c
    return SolveResult(c, iters, res, kappa, u_bar, elapsed, method)
