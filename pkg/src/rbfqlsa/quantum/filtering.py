"""Chebyshev eigenstate filter.

    R_l(x; D) = T_l(-1 + 2 (x^2 - D^2) / (1 - D^2)) / T_l(-1 - 2 D^2 / (1 - D^2))

is an even polynomial of degree ``2l`` with ``R_l(0) = 1`` that is uniformly
small on ``D <= |x| <= 1``.  Scalars are evaluated through the closed forms
``cos(l arccos y)`` / ``cosh(l arccosh y)`` using ratios of exponentials, so
large ``l`` never overflows.  Matrices are filtered with a three-term
recurrence normalized by ``T_k`` at the reference point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .encoding import BlockEncoding

__all__ = [
    "FilterSpec",
    "chebyshev_t",
    "eval_filter",
    "apply_filter",
    "filter_matrix",
    "filter_degree",
    "block_encode_filter",
    "MAX_GAP",
]

MAX_GAP = 1.0 / math.sqrt(12.0)


def filter_degree(gap: float, eps: float) -> int:
    """Smallest ``l`` with ``2 exp(-sqrt(2) l gap) <= eps``."""
    if not 0 < gap < 1:
        raise ValueError(f"gap must lie in (0, 1), got {gap}")
    if not 0 < eps < 2:
        raise ValueError(f"target error must lie in (0, 2), got {eps}")
    ell = max(1, math.ceil(math.log(2.0 / eps) / (math.sqrt(2.0) * gap)))
    while ell > 1 and 2.0 * math.exp(-math.sqrt(2.0) * (ell - 1) * gap) <= eps:
        ell -= 1
    while 2.0 * math.exp(-math.sqrt(2.0) * ell * gap) > eps:
        ell += 1
    return ell


@dataclass(frozen=True)
class FilterSpec:
    """Filter half-degree ``degree_ell``, gap ``D`` and the error level it guarantees."""

    degree_ell: int
    gap: float
    target_eps: float

    def __post_init__(self):
        if int(self.degree_ell) != self.degree_ell or self.degree_ell < 1:
            raise ValueError("degree_ell must be a positive integer")
        if not 0 < self.gap < 1:
            raise ValueError(f"gap must lie in (0, 1), got {self.gap}")
        if self.bound > self.target_eps * (1 + 1e-12):
            raise ValueError(
                f"l={self.degree_ell} only guarantees {self.bound:.3e} > target {self.target_eps:.3e}"
            )

    @classmethod
    def for_target(cls, gap, eps):
        return cls(filter_degree(gap, eps), float(gap), float(eps))

    @classmethod
    def from_degree(cls, ell, gap):
        """Spec whose target is exactly the decay bound of the given degree."""
        return cls(int(ell), float(gap), 2.0 * math.exp(-math.sqrt(2.0) * ell * gap))

    @property
    def bound(self):
        return 2.0 * math.exp(-math.sqrt(2.0) * self.degree_ell * self.gap)

    @property
    def polynomial_degree(self):
        return 2 * self.degree_ell


def chebyshev_t(ell: int, y):
    """``T_ell(y)`` for real ``y`` through its trigonometric / hyperbolic forms."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    inside = np.abs(y) <= 1.0
    out[inside] = np.cos(ell * np.arccos(y[inside]))
    big = ~inside
    out[big] = np.sign(y[big]) ** ell * np.cosh(ell * np.arccosh(np.abs(y[big])))
    return out


def _argument(x, gap):
    return -1.0 + 2.0 * (np.asarray(x, dtype=float) ** 2 - gap**2) / (1.0 - gap**2)


def eval_filter(x, spec: FilterSpec):
    """``R_l(x; D)`` evaluated without overflow for any ``l``."""
    ell, gap = spec.degree_ell, spec.gap
    y = _argument(x, gap)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    # same code path as the samples so that x = 0 gives exactly 1
    a0 = float(np.arccosh(np.abs(_argument(0.0, gap))))
    # 1 / |T_l(y0)| and the sign of T_l(y0), y0 < -1
    inv_ref = 2.0 * math.exp(-ell * a0) / (1.0 + math.exp(-2.0 * ell * a0))
    sign_ref = (-1.0) ** ell
    out = np.empty_like(y)
    inside = np.abs(y) <= 1.0
    out[inside] = np.cos(ell * np.arccos(y[inside])) * inv_ref * sign_ref
    big = ~inside
    a = np.arccosh(np.abs(y[big]))
    ratio = np.exp(ell * (a - a0)) * (1.0 + np.exp(-2.0 * ell * a)) / (1.0 + np.exp(-2.0 * ell * a0))
    out[big] = np.sign(y[big]) ** ell * sign_ref * ratio
    return float(out[0]) if scalar else out


def _spectral_check(H):
    dense = H.toarray() if sp.issparse(H) else np.asarray(H)
    if not np.allclose(dense, dense.conj().T, atol=1e-12):
        raise ValueError("filter argument must be Hermitian")
    evals = np.linalg.eigvalsh(dense)
    if evals[0] < -1 - 1e-10 or evals[-1] > 1 + 1e-10:
        raise ValueError(f"spectrum [{evals[0]:.6f}, {evals[-1]:.6f}] leaves [-1, 1]")


def _recurrence(H, spec: FilterSpec, vecs):
    """``R_l(H) vecs`` via ``w_k = T_k(X) v / T_k(y0)``, ``X = -I + 2(H^2 - D^2)/(1 - D^2)``."""
    ell, gap = spec.degree_ell, spec.gap
    y0 = -1.0 - 2.0 * gap**2 / (1.0 - gap**2)
    c = 2.0 / (1.0 - gap**2)

    def X(v):
        return -v + c * (H @ (H @ v) - gap**2 * v)

    w_prev = vecs
    w = X(vecs) / y0
    rho_prev = y0  # T_1 / T_0
    for _ in range(1, ell):
        rho = 2.0 * y0 - 1.0 / rho_prev  # T_{k+1} / T_k
        w, w_prev = (2.0 * X(w) - w_prev / rho_prev) / rho, w
        rho_prev = rho
    return w


def apply_filter(H1_over_s, spec: FilterSpec, state, check=True):
    """``R_l(H) state``, normalized, and its squared norm (ancilla success probability)."""
    state = np.asarray(state)
    if abs(np.linalg.norm(state) - 1.0) > 1e-8:
        raise ValueError("state must be normalized")
    if check:
        _spectral_check(H1_over_s)
    out = _recurrence(H1_over_s, spec, state.astype(np.result_type(state, float)))
    prob = float(np.vdot(out, out).real)
    if prob == 0:
        raise ValueError("filter annihilated the state")
    return out / math.sqrt(prob), prob


def filter_matrix(H, spec: FilterSpec, check=True):
    """Dense ``R_l(H)``."""
    if check:
        _spectral_check(H)
    n = H.shape[0]
    return _recurrence(H, spec, np.eye(n))


def block_encode_filter(H, spec: FilterSpec) -> BlockEncoding:
    """One-ancilla unitary dilation ``[[R, S], [S, -R]]`` with ``S = sqrt(I - R^2)``."""
    R = filter_matrix(H, spec)
    R = 0.5 * (R + R.conj().T)
    evals, vecs = sla.eigh(R)
    S = (vecs * np.sqrt(np.clip(1.0 - evals**2, 0.0, None))) @ vecs.conj().T
    U = np.block([[R, S], [S, -R]])
    return BlockEncoding(U, 1.0, 1, 0.0, "R_l", {"ell": spec.degree_ell, "gap": spec.gap})
