"""Wendland compactly supported radial functions as exact polynomials.

Each kernel is stored as integer monomial coefficients on ``[0, 1]`` so that
derivatives and the divisions by ``r`` appearing in the radial Laplacian and
bilaplacian can be carried out exactly.  Floating point only enters at
evaluation time.

==========  ===========================================================  =========
k           phi_{d,k}(r) on [0, 1], l = floor(d/2) + k + 1              Smoothness
==========  ===========================================================  =========
0           (1-r)^l                                                      C^0
1           (1-r)^(l+1) [(l+1) r + 1]                                    C^2
2           (1-r)^(l+2) [(l^2+4l+3) r^2 + (3l+6) r + 3]                  C^4
3           (1-r)^(l+3) [(l^3+9l^2+23l+15) r^3 + (6l^2+36l+45) r^2       C^6
            + (15l+45) r + 15]
==========  ===========================================================  =========

The positive normalising constant is fixed to 1.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

__all__ = [
    "WendlandKernel",
    "make_wendland",
    "eval_phi",
    "eval_derivative",
    "radial_laplacian",
    "radial_bilaplacian",
    "poly_eval_exact",
]

MAX_DIMENSION = 20


class KernelSmoothnessWarning(UserWarning):
    """Requested derivative is discontinuous across the support boundary."""


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def _poly_add(*polys):
    n = max(len(p) for p in polys)
    out = [0] * n
    for p in polys:
        for i, c in enumerate(p):
            out[i] += c
    return out


def _poly_scale(a, c):
    return [c * x for x in a]


def _poly_deriv(a):
    if len(a) <= 1:
        return [0]
    return [i * a[i] for i in range(1, len(a))]


def _poly_div_rpow(a, power):
    """Divide by ``r**power``; the low coefficients must vanish exactly."""
    if any(c != 0 for c in a[:power]):
        raise ValueError(
            f"polynomial is not divisible by r^{power}: low coefficients {a[:power]}"
        )
    out = list(a[power:])
    return out if out else [0]


def _trim(a):
    a = list(a)
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def _one_minus_r_pow(e):
    return [comb(e, i) * (-1) ** i for i in range(e + 1)]


def _table_factor(k, ell):
    """Return (exponent, polynomial factor) of the Table row for ``k``."""
    if k == 0:
        return ell, [1]
    if k == 1:
        return ell + 1, [1, ell + 1]
    if k == 2:
        return ell + 2, [3, 3 * ell + 6, ell**2 + 4 * ell + 3]
    if k == 3:
        return ell + 3, [
            15,
            15 * ell + 45,
            6 * ell**2 + 36 * ell + 45,
            ell**3 + 9 * ell**2 + 23 * ell + 15,
        ]
    raise ValueError(f"smoothness index k must be in 0..3, got {k}")


def _split_root_one(a):
    """Write ``a(r) = (1 - r)^m c(r)`` with ``c(1) != 0`` (exact synthetic division)."""
    a = _trim(a)
    m = 0
    while len(a) > 1 and sum(a) == 0:
        # a(r) = (r - 1) b(r); b from high degree down
        n = len(a) - 1
        b = [0] * n
        acc = 0
        for i in range(n, 0, -1):
            acc = a[i] + acc
            b[i - 1] = acc
        a = [-c for c in b]  # (r - 1) b = (1 - r)(-b)
        m += 1
    return m, a


def poly_eval_exact(coeffs, r):
    """Evaluate integer coefficients at a rational ``r`` without rounding."""
    r = Fraction(r)
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * r + c
    return acc


@dataclass(frozen=True)
class WendlandKernel:
    """Polynomial form of ``phi_{d,k}`` and its radial differential operators.

    Coefficient tuples are integer monomial coefficients in increasing degree.
    ``lap_coeffs`` and ``bilap_coeffs`` are ``None`` when the kernel is not
    smooth enough for the operator to have a removable singularity at 0.
    """

    d: int
    k: int
    ell: int
    exponent: int
    factor: tuple
    phi_coeffs: tuple
    deriv_coeffs: tuple
    lap_coeffs: tuple | None
    bilap_coeffs: tuple | None
    _float: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def tau(self) -> float:
        """Sobolev order of the native space, ``d/2 + k + 1/2``."""
        return self.d / 2 + self.k + 0.5

    def coefficients(self, which="phi"):
        """Float monomial coefficients for ``phi``, ``d1``..``d4``, ``lap`` or ``bilap``."""
        if which not in self._float:
            exact = self._exact(which)
            self._float[which] = np.array([float(c) for c in exact])
        return self._float[which]

    def factored(self, which="phi"):
        """``(m, c)`` with the polynomial equal to ``(1 - r)^m c(r)``, ``c`` as floats."""
        key = ("factored", which)
        if key not in self._float:
            m, cof = _split_root_one(list(self._exact(which)))
            self._float[key] = (m, np.array([float(c) for c in cof]))
        return self._float[key]

    def _exact(self, which):
        if which == "phi":
            return self.phi_coeffs
        if which in ("d1", "d2", "d3", "d4"):
            return self.deriv_coeffs[int(which[1]) - 1]
        if which == "lap":
            if self.lap_coeffs is None:
                raise ValueError("radial Laplacian requires k >= 1")
            return self.lap_coeffs
        if which == "bilap":
            if self.bilap_coeffs is None:
                raise ValueError("radial bilaplacian requires k >= 2")
            return self.bilap_coeffs
        raise KeyError(which)

    def evaluate(self, which, r):
        """Vectorised evaluation of one of the stored polynomials, zero for r >= 1."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("radius must be nonnegative")
        # factored form avoids cancellation near the support edge
        m, cof = self.factored(which)
        rc = np.minimum(r, 1.0)
        vals = np.polynomial.polynomial.polyval(rc, cof) * (1.0 - rc) ** m
        return np.where(r < 1.0, vals, 0.0)

    def to_dict(self):
        return {
            "d": self.d,
            "k": self.k,
            "ell": self.ell,
            "tau": self.tau,
            "exponent": self.exponent,
            "factor": list(self.factor),
            "phi": list(self.phi_coeffs),
            "derivatives": [list(c) for c in self.deriv_coeffs],
            "laplacian": None if self.lap_coeffs is None else list(self.lap_coeffs),
            "bilaplacian": None if self.bilap_coeffs is None else list(self.bilap_coeffs),
        }


def make_wendland(d: int, k: int) -> WendlandKernel:
    """Build ``phi_{d,k}`` from the explicit Wendland formulas.

    Parameters
    ----------
    d : int
        Spatial dimension, ``1 <= d <= 20``.
    k : int
        Smoothness index in ``{0, 1, 2, 3}``; the kernel is ``C^{2k}``.
    """
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    if d > MAX_DIMENSION:
        raise ValueError(f"dimension above {MAX_DIMENSION} is not supported")
    if int(k) != k or k not in (0, 1, 2, 3):
        raise ValueError(f"smoothness index k must be in 0..3, got {k}")
    d, k = int(d), int(k)
    ell = d // 2 + k + 1
    exponent, factor = _table_factor(k, ell)
    phi = _trim(_poly_mul(_one_minus_r_pow(exponent), factor))

    derivs = []
    cur = phi
    for _ in range(4):
        cur = _trim(_poly_deriv(cur))
        derivs.append(tuple(cur))
    d1, d2, d3, d4 = (list(c) for c in derivs)

    lap = None
    if k >= 1:
        # phi'' + (d-1) phi'/r
        lap = tuple(_trim(_poly_add(d2, _poly_scale(_poly_div_rpow(d1, 1), d - 1))))

    bilap = None
    if k >= 2:
        # phi'''' + 2(d-1) phi'''/r + (d-1)(d-3) (r phi'' - phi')/r^3
        tail = _poly_add(_poly_mul([0, 1], d2), _poly_scale(d1, -1))
        bilap = tuple(
            _trim(
                _poly_add(
                    d4,
                    _poly_scale(_poly_div_rpow(d3, 1), 2 * (d - 1)),
                    _poly_scale(_poly_div_rpow(tail, 3), (d - 1) * (d - 3)),
                )
            )
        )

    return WendlandKernel(
        d=d,
        k=k,
        ell=ell,
        exponent=exponent,
        factor=tuple(factor),
        phi_coeffs=tuple(phi),
        deriv_coeffs=tuple(derivs),
        lap_coeffs=lap,
        bilap_coeffs=bilap,
    )


def _check_radius(r):
    if np.any(np.asarray(r) < 0):
        raise ValueError("radius must be nonnegative")


def eval_phi(kernel: WendlandKernel, r):
    """``phi(r)``, exactly zero outside the unit support."""
    _check_radius(r)
    return kernel.evaluate("phi", r)


def eval_derivative(kernel: WendlandKernel, order: int, r):
    """Exact ``order``-th derivative of ``phi`` at ``r`` (zero for ``r >= 1``)."""
    if order not in (1, 2, 3, 4):
        raise ValueError(f"derivative order must be in 1..4, got {order}")
    if order > 2 * kernel.k:
        warnings.warn(
            f"derivative of order {order} of a C^{2 * kernel.k} kernel is "
            "discontinuous at r = 1",
            KernelSmoothnessWarning,
            stacklevel=2,
        )
    _check_radius(r)
    return kernel.evaluate(f"d{order}", r)


def radial_laplacian(kernel: WendlandKernel, r):
    """``Delta Phi`` as a function of ``r = ||x||``; finite at ``r = 0``."""
    if kernel.k < 1:
        raise ValueError("radial Laplacian requires k >= 1")
    _check_radius(r)
    return kernel.evaluate("lap", r)


def radial_bilaplacian(kernel: WendlandKernel, r):
    """``Delta^2 Phi`` as a function of ``r = ||x||``; finite at ``r = 0``."""
    if kernel.k < 2:
        raise ValueError("radial bilaplacian requires k >= 2")
    _check_radius(r)
    return kernel.evaluate("bilap", r)
