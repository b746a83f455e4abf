"""Sparse symmetric collocation matrices for the Poisson problem.

With ``Phi_delta(x) = delta^-d Phi(x / delta)`` and interior points listed
first, the raw collocation matrix has blocks

    A_II = Delta^2 Phi_delta,   A_IB = -Delta Phi_delta,   A_BB = Phi_delta

evaluated at ``x_i - x_j``.  The diagonal rescaling
``P = diag(delta^2 .. delta^2, 1 .. 1)`` gives ``A = P A_raw P`` in which every
block carries the same ``delta^-d`` factor.  The evaluation matrix
``M = M_raw P`` maps preconditioned coefficients to values of the collocation
solution at the points.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.spatial import cKDTree

from .kernel import WendlandKernel
from .geometry import PointSet

__all__ = [
    "CollocationSystem",
    "EvaluationMatrix",
    "neighbour_pairs",
    "assemble_collocation",
    "assemble_rhs",
    "assemble_evaluation",
    "normalize_for_encoding",
    "preconditioner",
    "max_row_nonzeros",
]


@dataclass(frozen=True)
class CollocationSystem:
    A_raw: sp.csc_matrix
    A: sp.csc_matrix
    delta: float
    n_interior: int
    sparsity: int
    b: np.ndarray | None = None
    eta: float | None = None
    kappa: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def P(self):
        return preconditioner(self.n, self.n_interior, self.delta)

    def with_rhs(self, b):
        return replace(self, b=np.asarray(b, dtype=float))


@dataclass(frozen=True)
class EvaluationMatrix:
    M: sp.csc_matrix
    M_hat: sp.csc_matrix
    scale: float
    sparsity: int
    n_interior: int
    delta: float

    @property
    def dilation(self):
        """Hermitian ``[[0, M_hat], [M_hat^T, 0]]`` of size ``2N``."""
        return sp.bmat([[None, self.M_hat], [self.M_hat.T, None]], format="csc")


def preconditioner(n, n_interior, delta):
    diag = np.ones(n)
    diag[:n_interior] = delta**2
    return sp.diags(diag, format="csc")


def max_row_nonzeros(mat) -> int:
    """Largest number of stored nonzeros in any row or column."""
    mat = sp.csc_matrix(mat)
    mat.eliminate_zeros()
    cols = np.diff(mat.indptr)
    rows = np.bincount(mat.indices, minlength=mat.shape[0])
    return int(max(cols.max(initial=0), rows.max(initial=0)))


def neighbour_pairs(points, radius):
    """All ordered pairs ``(i, j)`` with ``||x_i - x_j|| < radius``, diagonal included.

    Returns ``rows, cols, dist`` arrays.
    """
    points = np.asarray(points, dtype=float)
    tree = cKDTree(points)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    if len(pairs):
        dist = np.linalg.norm(points[pairs[:, 0]] - points[pairs[:, 1]], axis=1)
        keep = dist < radius
        pairs, dist = pairs[keep], dist[keep]
    else:
        pairs, dist = np.empty((0, 2), dtype=int), np.empty(0)
    n = len(points)
    diag = np.arange(n)
    rows = np.concatenate([diag, pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([diag, pairs[:, 1], pairs[:, 0]])
    dist = np.concatenate([np.zeros(n), dist, dist])
    return rows, cols, dist


def _check(kernel, points, delta):
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"support radius must lie in (0, 1], got {delta}")
    if kernel.k < 2:
        raise ValueError("collocation needs a C^4 kernel (k >= 2)")
    if points.d != kernel.d:
        raise ValueError(f"kernel dimension {kernel.d} != point dimension {points.d}")


def _csc(vals, rows, cols, n):
    mat = sp.csc_matrix((vals, (rows, cols)), shape=(n, n))
    mat.sort_indices()
    return mat


def radial_blocks(kernel: WendlandKernel, points: PointSet, delta: float):
    """Unscaled radial evaluations ``F_II = L2 phi``, ``F_IB = L1 phi``, ``F_BB = phi``.

    Returned as one sparse matrix in which each entry holds the radial function
    that belongs to its block, evaluated at ``r_ij / delta``.
    """
    rows, cols, dist = neighbour_pairs(points.points, delta)
    rho = dist / delta
    ni = points.n_interior
    ii = (rows < ni) & (cols < ni)
    bb = (rows >= ni) & (cols >= ni)
    ib = ~(ii | bb)
    vals = np.empty_like(rho)
    vals[ii] = kernel.evaluate("bilap", rho[ii])
    vals[ib] = kernel.evaluate("lap", rho[ib])
    vals[bb] = kernel.evaluate("phi", rho[bb])
    return rows, cols, vals, (ii, ib, bb)


def assemble_collocation(kernel: WendlandKernel, points: PointSet, delta: float) -> CollocationSystem:
    """Raw and preconditioned collocation matrices, stored CSC with sorted rows."""
    _check(kernel, points, delta)
    d = kernel.d
    rows, cols, vals, (ii, ib, bb) = radial_blocks(kernel, points, delta)
    raw = np.empty_like(vals)
    raw[ii] = delta ** (-d - 4) * vals[ii]
    raw[ib] = -(delta ** (-d - 2)) * vals[ib]
    raw[bb] = delta ** (-d) * vals[bb]
    n = points.n
    A_raw = _csc(raw, rows, cols, n)
    P = preconditioner(n, points.n_interior, delta)
    A = sp.csc_matrix(P @ A_raw @ P)
    A.sort_indices()
    return CollocationSystem(
        A_raw=A_raw,
        A=A,
        delta=float(delta),
        n_interior=points.n_interior,
        sparsity=max_row_nonzeros(A),
        meta={"q": points.q, "h": points.h, "d": d, "k": kernel.k},
    )


def assemble_rhs(f, g, points: PointSet, delta: float) -> np.ndarray:
    """``b = P b_raw`` with ``b_raw = [f(x_I), g(x_B)]``.

    ``f`` and ``g`` take an ``(n, d)`` array of points and return ``n`` values.
    """
    fi = np.asarray(f(points.interior), dtype=float).reshape(-1) if points.n_interior else np.empty(0)
    gb = np.asarray(g(points.boundary), dtype=float).reshape(-1) if len(points.boundary) else np.empty(0)
    if fi.shape != (points.n_interior,) or gb.shape != (len(points.boundary),):
        raise ValueError("field values do not match the number of points")
    b = np.concatenate([delta**2 * fi, gb])
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side contains non-finite values")
    return b


def assemble_evaluation(kernel: WendlandKernel, points: PointSet, delta: float) -> EvaluationMatrix:
    """``M = M_raw P``: columns ``-delta^-d L1 phi`` (interior) and ``delta^-d phi`` (boundary)."""
    _check(kernel, points, delta)
    d = kernel.d
    rows, cols, dist = neighbour_pairs(points.points, delta)
    rho = dist / delta
    ni = points.n_interior
    interior_col = cols < ni
    vals = np.empty_like(rho)
    vals[interior_col] = -kernel.evaluate("lap", rho[interior_col])
    vals[~interior_col] = kernel.evaluate("phi", rho[~interior_col])
    vals *= delta ** (-d)
    n = points.n
    M = _csc(vals, rows, cols, n)
    peak = max(-float(kernel.evaluate("lap", 0.0)), float(kernel.evaluate("phi", 0.0)))
    scale = peak * delta ** (-d)
    M_hat = sp.csc_matrix(M / scale)
    M_hat.sort_indices()
    return EvaluationMatrix(
        M=M,
        M_hat=M_hat,
        scale=scale,
        sparsity=max_row_nonzeros(M),
        n_interior=ni,
        delta=float(delta),
    )


def normalize_for_encoding(system: CollocationSystem | sp.spmatrix, dense_limit: int = 4096):
    """``A_hat = A / ||A||_2`` so its spectrum lies in ``[1/kappa, 1]``.

    The norm comes from a dense symmetric eigensolve up to ``dense_limit`` and
    from Lanczos (``eigsh``) beyond it.
    """
    A = system.A if isinstance(system, CollocationSystem) else sp.csc_matrix(system)
    if A.shape[0] <= dense_limit:
        dense = A.toarray()
        evals = np.linalg.eigvalsh(0.5 * (dense + dense.T))
        lo, hi = evals[0], evals[-1]
    else:
        hi = spla.eigsh(A, k=1, which="LA", return_eigenvectors=False)[0]
        lo = spla.eigsh(A, k=1, sigma=0.0, which="LM", return_eigenvectors=False)[0]
    if lo <= 0:
        raise ValueError(f"matrix is not positive definite (min eigenvalue {lo:.3e})")
    eta = float(hi)
    A_hat = sp.csc_matrix(A / eta)
    A_hat.sort_indices()
    return A_hat, eta
