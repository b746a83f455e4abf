"""Filtering-based linear solver and solution-state preparation, end to end.

Stage 1 runs the adiabatic evolution to reach a state with constant overlap on
``|0>|c>``.  Stage 2 applies the eigenstate filter ``R_l(H1 / s; 1 / (s kappa))``,
which keeps the null space of ``H1`` and suppresses everything else.  Stage 3
projects on the ``|0>`` flag.  Solution-state preparation then applies the
block encoding of the dilated evaluation matrix to ``|0^{m+1}>|1>|c>``.

Quantum cost is reported as a resource ledger; wall-clock time of the
simulation says nothing about it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..assembly import max_row_nonzeros
from .adiabatic import DEFAULT_C_T, DEFAULT_P, aqc_evolve
from .encoding import block_encode_sparse, build_H1
from .filtering import MAX_GAP, FilterSpec, apply_filter
from .state import fidelity, next_power_of_two, normalize, pad_system, pad_vector, state_distance

__all__ = [
    "QLSAResult",
    "SolutionStateResult",
    "LowSuccessProbabilityError",
    "qlsa_solve",
    "prepare_solution_state",
    "padded_dilation",
    "solution_probability_bound",
    "PROBABILITY_FLOOR",
]

PROBABILITY_FLOOR = 1e-4


class LowSuccessProbabilityError(RuntimeError):
    pass


@dataclass
class QLSAResult:
    c_state: np.ndarray
    c_exact: np.ndarray
    success_probability: float
    fidelity: float
    distance: float
    mu0: complex
    mu1: complex
    eps_int: float
    resources: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "success_probability": self.success_probability,
            "fidelity": self.fidelity,
            "distance": self.distance,
            "mu0_abs": abs(self.mu0),
            "mu1_abs": abs(self.mu1),
            "eps_int": self.eps_int,
            "resources": self.resources,
        }


def _sparsity_pow2(A):
    return next_power_of_two(max(1, max_row_nonzeros(A)))


def qlsa_solve(
    A_hat,
    b_state,
    eps_L: float = 1e-4,
    p: float = DEFAULT_P,
    c_T: float = DEFAULT_C_T,
    steps: int | None = None,
    floor: float = PROBABILITY_FLOOR,
) -> QLSAResult:
    """Approximate ``|c> = A_hat^{-1} |b> / norm`` with the three-stage pipeline.

    ``A_hat`` must be symmetric with spectrum in ``[1/kappa, 1]``.  Systems whose
    size is not a power of two are padded with a unit diagonal block; the
    returned state lives on the original coordinates.
    """
    if not 0 < eps_L < 0.5:
        raise ValueError(f"eps_L must lie in (0, 1/2), got {eps_L}")
    A = sp.csc_matrix(A_hat)
    b = np.asarray(b_state)
    n_orig = A.shape[0]
    if len(b) != n_orig:
        raise ValueError("A_hat and b_state sizes differ")
    if abs(np.linalg.norm(b) - 1.0) > 1e-10:
        raise ValueError("b_state must be normalized")
    A, b = pad_system(A, b)
    n = A.shape[0]
    dense = A.toarray()
    evals = np.linalg.eigvalsh(0.5 * (dense + dense.T))
    if evals[0] <= 0 or evals[-1] > 1.0 + 1e-10:
        raise ValueError(f"spectrum [{evals[0]:.3e}, {evals[-1]:.6f}] is not inside (0, 1]")
    kappa = max(1.0, 1.0 / evals[0])
    s = _sparsity_pow2(A)

    aqc = aqc_evolve(dense, b, T=c_T * kappa, steps=steps, p=p, kappa=kappa)

    gap = min(1.0 / (s * kappa), MAX_GAP)
    spec = FilterSpec.for_target(gap, eps_L)
    H = build_H1(dense, b) / s
    filtered, prob_filter = apply_filter(H, spec, aqc.state.amplitudes)
    branch = filtered[:n] * math.sqrt(prob_filter)
    prob = float(np.vdot(branch, branch).real)
    if prob < floor:
        raise LowSuccessProbabilityError(
            f"success probability {prob:.3e} below floor {floor:g} "
            f"(|mu0| = {abs(aqc.mu0):.3e}, kappa = {kappa:.3g}, T = {aqc.schedule.T:.3g})"
        )
    c_tilde = normalize(branch[:n_orig])
    c_exact = normalize(np.linalg.solve(dense, b)[:n_orig])
    m = s.bit_length() - 1
    resources = {
        "n_padded": n,
        "sparsity": s,
        "kappa": kappa,
        "evolution_time": aqc.schedule.T,
        "aqc_steps": aqc.schedule.steps,
        "p": p,
        "filter_gap": gap,
        "filter_degree_ell": spec.degree_ell,
        "polynomial_degree": spec.polynomial_degree,
        "U_H1_queries": 2 * spec.degree_ell,
        "filter_bound": spec.bound,
        "projected_qubits": m + 5,
        "amplification_repetitions": math.ceil(1.0 / math.sqrt(prob)),
    }
    return QLSAResult(
        c_state=c_tilde,
        c_exact=c_exact,
        success_probability=prob,
        fidelity=fidelity(c_tilde, c_exact),
        distance=state_distance(c_tilde, c_exact),
        mu0=aqc.mu0,
        mu1=aqc.mu1,
        eps_int=aqc.eps_int,
        resources=resources,
    )


def padded_dilation(M_hat):
    """``[[0, M_hat], [M_hat^T, 0]]`` after padding ``M_hat`` with a unit diagonal block."""
    M = pad_system(M_hat)
    return sp.bmat([[None, M], [M.T, None]], format="csc")


def solution_probability_bound(q, delta, tau, d, C, s):
    """``[(q / delta)^(2 tau - d) / (C s)]^2``."""
    return ((q / delta) ** (2 * tau - d) / (C * s)) ** 2


@dataclass
class SolutionStateResult:
    u_state: np.ndarray
    success_probability: float
    lower_bound: float | None
    sparsity: int
    meta: dict = field(default_factory=dict)


def prepare_solution_state(M_hat_dilation, s_M: int | None, c_state, lower_bound=None, slack=0.0):
    """Apply the dilation's block encoding to ``|0^{m+1}>|1>|c>`` and keep the all-zero branch.

    Returns the renormalized state, proportional to ``M_hat c``, and the
    probability ``||M_hat c||^2 / s^2``.  With ``lower_bound`` given, a
    probability below ``lower_bound * (1 - slack)`` raises.
    """
    D = sp.csc_matrix(M_hat_dilation)
    two_n = D.shape[0]
    n = two_n // 2
    c = np.asarray(c_state)
    if abs(np.linalg.norm(c) - 1.0) > 1e-8:
        raise ValueError("c_state must be normalized")
    if len(c) < n:
        c = pad_vector(c, n)
    if len(c) != n:
        raise ValueError(f"c_state has {len(c)} entries for a {two_n}-dim dilation")
    if s_M is None:
        s_M = _sparsity_pow2(D)
    enc = block_encode_sparse(D, s_M)
    inp = np.zeros(two_n, dtype=np.result_type(c, float))
    inp[n:] = c  # |1>|c>
    out = enc.apply(inp)
    branch = out[:n]  # ancillas and flag all zero
    prob = float(np.vdot(branch, branch).real)
    if prob == 0:
        raise ValueError("evaluation matrix annihilated the state")
    if lower_bound is not None and prob < lower_bound * (1.0 - slack):
        raise LowSuccessProbabilityError(f"probability {prob:.3e} below bound {lower_bound:.3e}")
    return SolutionStateResult(
        branch / math.sqrt(prob), prob, lower_bound, s_M, {"ancillas": enc.a, "dim": enc.dim}
    )
