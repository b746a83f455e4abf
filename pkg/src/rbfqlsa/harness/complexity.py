"""Cost exponents of the classical and quantum RBF solvers.

With ``delta = C h^(1 - beta/tau)`` both solvers reach accuracy ``eps`` at cost
``eps^-e`` up to logarithmic factors, where

    classical  e_c = beta / (beta - 2) * (1 + d / tau + d / beta)
    quantum    e_q = beta / (beta - 2) * (4 + d / tau)

so ``e_c > e_q`` exactly when ``d > 3 beta``.  Integer and ``Fraction`` inputs
are kept exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

__all__ = ["ComplexityModel", "complexity_exponents", "tau_of"]


def _exact(x):
    return Fraction(x) if isinstance(x, Rational) else x


def tau_of(d, k):
    """``d/2 + k + 1/2`` as an exact fraction."""
    return Fraction(d, 2) + k + Fraction(1, 2)


@dataclass(frozen=True)
class ComplexityModel:
    d: object
    tau: object
    beta: object
    classical_exponent: object
    quantum_exponent: object
    q_advantage: bool

    def to_dict(self):
        def num(x):
            if isinstance(x, Fraction):
                return int(x) if x.denominator == 1 else float(x)
            return x

        return {
            "d": num(self.d),
            "tau": num(self.tau),
            "beta": num(self.beta),
            "classical": num(self.classical_exponent),
            "quantum": num(self.quantum_exponent),
            "advantage": self.q_advantage,
        }


def complexity_exponents(d, tau, beta) -> ComplexityModel:
    if not beta > 2:
        raise ValueError(f"beta must exceed 2, got {beta}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if not d > 0:
        raise ValueError(f"dimension must be positive, got {d}")
    d, tau, beta = _exact(d), _exact(tau), _exact(beta)
    pre = beta / (beta - 2)
    classical = pre * (1 + d / tau + d / beta)
    quantum = pre * (4 + d / tau)
    return ComplexityModel(d, tau, beta, classical, quantum, bool(d > 3 * beta))
