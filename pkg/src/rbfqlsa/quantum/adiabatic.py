"""Adiabatic evolution along ``H(f) = (1 - f) H0 + f H1`` with the AQC(p) schedule.

The schedule solves ``f' = c_p (1 - f + f / kappa)^p`` with ``f(0) = 0`` and
``f(1) = 1``, which has the closed form

    f(v) = kappa / (kappa - 1) * (1 - (1 + v (kappa^(p-1) - 1))^(1 / (1 - p)))

The Schroedinger equation ``i d/dv psi = T H(f(v)) psi`` is integrated with
the fourth-order Magnus scheme on two Gauss points.  Each step applies an
exact exponential of a Hermitian generator, so the propagator is unitary to
rounding and the null vector ``|1>|b>`` of every ``H(f)`` is never mixed in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .encoding import build_H0, build_H1
from .state import QuantumRegisterState, is_power_of_two

__all__ = [
    "ScheduleSpec",
    "AQCResult",
    "IntegratorError",
    "schedule_f",
    "hamiltonian",
    "aqc_evolve",
    "default_steps",
]

DEFAULT_C_T = 10.0
DEFAULT_P = 1.5
DRIFT_TOL = 1e-8


class IntegratorError(RuntimeError):
    pass


def schedule_f(v, kappa: float, p: float = DEFAULT_P):
    """AQC(p) schedule on ``[0, 1]``; endpoints are returned exactly."""
    if not kappa > 1:
        raise ValueError(f"schedule needs kappa > 1, got {kappa}")
    if not 1 < p < 2:
        raise ValueError(f"p must lie in (1, 2), got {p}")
    v = np.asarray(v, dtype=float)
    if np.any((v < 0) | (v > 1)):
        raise ValueError("v must lie in [0, 1]")
    base = 1.0 + v * (kappa ** (p - 1.0) - 1.0)
    f = kappa / (kappa - 1.0) * (1.0 - base ** (1.0 / (1.0 - p)))
    f = np.where(v == 0.0, 0.0, np.where(v == 1.0, 1.0, f))
    return float(f) if f.ndim == 0 else f


def default_steps(T: float) -> int:
    return int(max(200, math.ceil(T)))


@dataclass(frozen=True)
class ScheduleSpec:
    kappa: float
    p: float = DEFAULT_P
    T: float | None = None
    steps: int | None = None
    c_T: float = DEFAULT_C_T

    def __post_init__(self):
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if not 1 < self.p < 2:
            raise ValueError(f"p must lie in (1, 2), got {self.p}")
        if self.T is None:
            object.__setattr__(self, "T", float(self.c_T * self.kappa))
        if self.T <= 0:
            raise ValueError("evolution time must be positive")
        if self.steps is None:
            object.__setattr__(self, "steps", default_steps(self.T))
        if int(self.steps) < 1:
            raise ValueError("need at least one step")

    def f(self, v):
        # kappa = 1 has a constant gap; the schedule degenerates to f = v
        if self.kappa <= 1.0 + 1e-12:
            return np.asarray(v, dtype=float)
        return schedule_f(v, self.kappa, self.p)


@dataclass
class AQCResult:
    state: QuantumRegisterState
    mu0: complex
    mu1: complex
    eps_int: float
    schedule: ScheduleSpec
    c_exact: np.ndarray = field(repr=False)

    def to_dict(self):
        return {
            "mu0_abs": abs(self.mu0),
            "mu1_abs": abs(self.mu1),
            "eps_int": self.eps_int,
            "T": self.schedule.T,
            "steps": self.schedule.steps,
            "kappa": self.schedule.kappa,
            "p": self.schedule.p,
        }


def hamiltonian(f, H0, H1):
    return (1.0 - f) * H0 + f * H1


def _expm_herm(K):
    """``exp(-i K)`` for Hermitian ``K``."""
    evals, vecs = np.linalg.eigh(K)
    return (vecs * np.exp(-1j * evals)) @ vecs.conj().T


def _magnus4(psi, H0, H1, spec: ScheduleSpec, steps: int):
    T = spec.T
    dv = 1.0 / steps
    offs = (0.5 - math.sqrt(3.0) / 6.0, 0.5 + math.sqrt(3.0) / 6.0)
    dH = H1 - H0
    comm = H1 @ H0 - H0 @ H1  # [H(f2), H(f1)] = (f2 - f1) [H1, H0]
    v = np.arange(steps) * dv
    fa = spec.f(v + offs[0] * dv)
    fb = spec.f(v + offs[1] * dv)
    for f1, f2 in zip(fa, fb):
        Ha = H0 + f1 * dH
        Hb = H0 + f2 * dH
        K = 0.5 * dv * T * (Ha + Hb) - 1j * (math.sqrt(3.0) / 12.0) * (dv * T) ** 2 * (f2 - f1) * comm
        psi = _expm_herm(K) @ psi
    return psi


def aqc_evolve(A_hat, b_state, T=None, steps=None, p=DEFAULT_P, kappa=None, estimate_error=True):
    """Evolve ``|0>|b>`` from ``H0`` to ``H1`` and return the final state.

    ``kappa`` defaults to ``1 / lambda_min(A_hat)`` (``A_hat`` is assumed to have
    spectrum in ``[1/kappa, 1]``).  With ``estimate_error`` the run is repeated
    with half the step size; the returned state is the fine one and ``eps_int``
    is the distance between the two, a conservative estimate of the
    integration error.
    """
    A = A_hat.toarray() if sp.issparse(A_hat) else np.asarray(A_hat, dtype=float)
    b = np.asarray(b_state, dtype=complex)
    n = len(b)
    if A.shape != (n, n):
        raise ValueError("A_hat and b_state sizes differ")
    if not is_power_of_two(n):
        raise ValueError(f"system size {n} is not a power of two")
    if abs(np.linalg.norm(b) - 1.0) > 1e-10:
        raise ValueError("b_state must be normalized")
    evals = np.linalg.eigvalsh(0.5 * (A + A.T))
    if kappa is None:
        if evals[0] <= 0:
            raise ValueError("A_hat must be positive definite")
        kappa = max(1.0, 1.0 / evals[0])
    spec = ScheduleSpec(float(kappa), p, T, steps)

    H0 = build_H0(b)
    H1 = build_H1(A, b)
    psi0 = np.zeros(2 * n, dtype=complex)
    psi0[:n] = b
    psi = _magnus4(psi0, H0, H1, spec, spec.steps)
    eps_int = float("nan")
    if estimate_error:
        fine = _magnus4(psi0, H0, H1, spec, 2 * spec.steps)
        eps_int = float(np.linalg.norm(fine - psi))
        psi = fine
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > DRIFT_TOL:
        raise IntegratorError(f"unitarity drift {drift:.3e} exceeds {DRIFT_TOL:g}")
    psi = psi / np.linalg.norm(psi)

    c = np.linalg.solve(A, b)
    c = c / np.linalg.norm(c)
    mu0 = complex(np.vdot(c, psi[:n]))
    mu1 = complex(np.vdot(b, psi[n:]))
    nq = n.bit_length() - 1
    state = QuantumRegisterState(psi, (("flag", 1), ("sys", nq)))
    return AQCResult(state, mu0, mu1, eps_int, spec, c)
