"""Explicit block encodings as dense unitaries.

A block encoding ``(U, eta, a)`` of an operator ``T`` on ``D`` dimensions is a
unitary on ``2^a * D`` dimensions whose top-left ``D x D`` block (ancillas
prepared and projected on ``|0^a>``) equals ``T / eta``.

The sparse-access construction follows the two-isometry recipe
``U_A = U_L^dagger U_R``:

    U_R |0>|0^m>|j> = s^-1/2 sum_l (A_{nu(j,l), j} |0> + sqrt(1 - A^2) |1>) |l>|nu(j,l)>
    U_L |0>|0^m>|i> = s^-1/2 sum_l |0>|l>|i>

For ``U_R`` to be unitary, ``j -> nu(j, l)`` has to be a bijection for every
``l``.  The nonzero pattern is therefore edge coloured into ``s`` matchings
(a bipartite graph of maximum degree ``s`` needs exactly ``s`` colours), and
each matching is completed to a permutation with dummy edges that carry the
value 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .state import is_power_of_two

__all__ = [
    "BlockEncoding",
    "EncodingError",
    "edge_colouring",
    "embed",
    "block_encode_sparse",
    "block_encode_projector",
    "block_encode_H0",
    "block_encode_H1",
    "block_encode_controlled",
    "product_encoding",
    "householder_state_prep",
    "build_H0",
    "build_H1",
]

CONSTRUCTION_TOL = 1e-12
UNITARY_TOL = 1e-10

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
KET0 = np.array([[1.0, 0.0], [0.0, 0.0]])
KET1 = np.array([[0.0, 0.0], [0.0, 1.0]])


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class BlockEncoding:
    """``eta * (<0^a| (x) I) U (|0^a> (x) I)`` approximates the target within ``epsilon``."""

    U: np.ndarray
    eta: float
    a: int
    epsilon: float = 0.0
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self):
        return self.U.shape[0]

    @property
    def system_dim(self):
        return self.U.shape[0] >> self.a

    def block(self):
        """The scaled top-left block ``eta * U[:D, :D]``."""
        D = self.system_dim
        return self.eta * self.U[:D, :D]

    def unitarity_error(self) -> float:
        U = self.U
        return float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())

    def encoding_error(self, target) -> float:
        target = target.toarray() if sp.issparse(target) else np.asarray(target)
        return float(np.abs(self.block() - target).max())

    def apply(self, vec):
        """``U (|0^a> (x) vec)`` as a full ``2^a D`` vector."""
        full = np.zeros(self.dim, dtype=np.result_type(self.U, vec))
        full[: self.system_dim] = vec
        return self.U @ full


def embed(op, dims, targets):
    """Lift ``op`` acting on tensor factors ``targets`` (in that order) to all of ``dims``.

    ``dims`` lists factor sizes, most significant first.  Returns a sparse CSR
    matrix.
    """
    dims = list(dims)
    targets = list(targets)
    rest = [i for i in range(len(dims)) if i not in targets]
    order = targets + rest
    inner = int(np.prod([dims[i] for i in targets]))
    outer = int(np.prod([dims[i] for i in rest])) if rest else 1
    op = sp.csr_matrix(op)
    if op.shape != (inner, inner):
        raise EncodingError(f"operator of shape {op.shape} does not act on factors {targets}")
    full = sp.kron(op, sp.identity(outer, format="csr"), format="coo")
    total = inner * outer
    # position in the permuted ordering -> original basis index
    perm = np.arange(total).reshape(dims).transpose(order).reshape(-1)
    return sp.csr_matrix((full.data, (perm[full.row], perm[full.col])), shape=(total, total))


def edge_colouring(pattern, s):
    """Colour the nonzeros of a square ``pattern`` with ``s`` colours so no two
    entries in one row or column share a colour.

    Columns are the left vertices and rows the right ones (bipartite
    alternating-path colouring).  Returns ``perm`` with ``perm[l, j]`` the row
    that colour ``l`` assigns to column ``j`` (completed to a permutation) and a
    boolean ``real[l, j]`` that is False on completion edges.
    """
    pattern = sp.csc_matrix(pattern)
    n = pattern.shape[0]
    if pattern.shape != (n, n):
        raise EncodingError("pattern must be square")
    left = -np.ones((n, s), dtype=np.int64)  # left[j, c] = row
    right = -np.ones((n, s), dtype=np.int64)  # right[i, c] = column
    for j in range(n):
        for i in pattern.indices[pattern.indptr[j] : pattern.indptr[j + 1]]:
            free_j = np.flatnonzero(left[j] < 0)
            free_i = np.flatnonzero(right[i] < 0)
            if not len(free_j) or not len(free_i):
                raise EncodingError(f"more than {s} nonzeros in a row or column")
            a, b = free_j[0], free_i[0]
            if right[i, a] >= 0:
                # flip the a/b alternating path that starts at row i
                path = []
                node, on_right, col = i, True, a
                while True:
                    if on_right:
                        nxt = right[node, col]
                        if nxt < 0:
                            break
                        path.append((nxt, node, col))
                    else:
                        nxt = left[node, col]
                        if nxt < 0:
                            break
                        path.append((node, nxt, col))
                    node, on_right, col = nxt, not on_right, (b if col == a else a)
                for jj, ii, c in path:
                    left[jj, c] = -1
                    right[ii, c] = -1
                for jj, ii, c in path:
                    c2 = b if c == a else a
                    left[jj, c2] = ii
                    right[ii, c2] = jj
            left[j, a] = i
            right[i, a] = j
    perm = np.empty((s, n), dtype=np.int64)
    real = np.zeros((s, n), dtype=bool)
    for c in range(s):
        cols = left[:, c]
        real[c] = cols >= 0
        free_rows = np.flatnonzero(right[:, c] < 0)
        perm[c] = cols
        perm[c, ~real[c]] = free_rows
    return perm, real


def _hadamard_layer(m):
    H = np.array([[1.0]])
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    for _ in range(m):
        H = np.kron(H, h)
    return H


def block_encode_sparse(A_hat, s: int) -> BlockEncoding:
    """``(s, m+1, 0)`` encoding of a real symmetric ``A_hat`` with ``|entries| <= 1``.

    Registers, most significant first: rotation flag (1 qubit), colour register
    ``l`` (``m = log2 s`` qubits), system (``n`` qubits).
    """
    A = sp.csc_matrix(A_hat)
    A.sort_indices()
    n_dim = A.shape[0]
    if A.shape != (n_dim, n_dim):
        raise EncodingError("matrix must be square")
    if not is_power_of_two(n_dim):
        raise EncodingError(f"dimension {n_dim} is not a power of two")
    if not is_power_of_two(s):
        raise EncodingError(f"sparsity {s} is not a power of two")
    if np.iscomplexobj(A.data):
        raise EncodingError("only real matrices are supported")
    if A.nnz and np.abs(A.data).max() > 1.0 + CONSTRUCTION_TOL:
        raise EncodingError("entries must satisfy |A_ij| <= 1")
    m = s.bit_length() - 1
    perm, real = edge_colouring(A, s)

    # value attached to colour l at the row it lands on
    dense = A.toarray()
    vals = np.zeros((s, n_dim))
    cols = np.arange(n_dim)
    for col in range(s):
        rows = perm[col]
        vals[col, rows] = np.where(real[col], dense[rows, cols], 0.0)
    vals = np.clip(vals, -1.0, 1.0)

    block = s * n_dim
    dim = 2 * block
    # O_A1: |f, l, j> -> |f, l, perm[l, j]>
    src = np.arange(dim)
    f, rem = np.divmod(src, block)
    l, j = np.divmod(rem, n_dim)
    dst = f * block + l * n_dim + perm[l, j]
    O = sp.csc_matrix((np.ones(dim), (dst, src)), shape=(dim, dim))
    # flag rotation controlled on (l, i)
    a = vals.reshape(-1)
    c = np.sqrt(np.clip(1.0 - a * a, 0.0, None))
    idx = np.arange(block)
    R = sp.csc_matrix(
        (
            np.concatenate([a, c, -c, a]),
            (
                np.concatenate([idx, idx + block, idx, idx + block]),
                np.concatenate([idx, idx, idx + block, idx + block]),
            ),
        ),
        shape=(dim, dim),
    )
    H = embed(_hadamard_layer(m), [2, s, n_dim], [1])
    U_R = R @ O @ H
    U_A = (H.T @ U_R).toarray()
    return BlockEncoding(
        U_A, float(s), m + 1, 0.0, "A", {"m": m, "n": n_dim.bit_length() - 1, "colours": s}
    )


def householder_state_prep(b):
    """Unitary ``O_b`` with ``O_b |0> = |b>`` (a phased Householder reflection)."""
    b = np.asarray(b)
    if abs(np.linalg.norm(b) - 1.0) > 1e-10:
        raise EncodingError("state must be normalized")
    n = len(b)
    dtype = complex if np.iscomplexobj(b) else float
    phase = b[0] / abs(b[0]) if abs(b[0]) > 0 else 1.0
    u = np.zeros(n, dtype=dtype)
    u[0] = phase
    v = u - b
    D = np.eye(n, dtype=dtype)
    D[0, 0] = phase
    nv = np.vdot(v, v).real
    if nv < 1e-30:
        return D
    Hh = np.eye(n, dtype=dtype) - 2.0 * np.outer(v, v.conj()) / nv
    return Hh @ D


def block_encode_projector(b_state) -> BlockEncoding:
    """``(1, 1, 0)`` encoding of ``I - |b><b|`` using ``O_b`` twice."""
    b = np.asarray(b_state)
    Ob = householder_state_prep(b)
    n = len(b)
    zero = np.zeros((n, n))
    zero[0, 0] = 1.0
    mid = np.kron(SIGMA_X, zero) + np.kron(np.eye(2), np.eye(n) - zero)
    big = np.kron(np.eye(2), Ob)
    U = big @ mid @ big.conj().T
    return BlockEncoding(U, 1.0, 1, 0.0, "P_perp")


def block_encode_controlled(enc: BlockEncoding) -> BlockEncoding:
    """Encoding of ``|0><0| (x) I + |1><1| (x) T`` on ``[control, system]``.

    The control qubit becomes the most significant system qubit; ancillas stay
    in front.  Requires ``eta = 1`` so the identity branch needs no rescaling.
    """
    if abs(enc.eta - 1.0) > 0:
        raise EncodingError("controlled encoding needs eta = 1")
    anc = 2**enc.a
    D = enc.system_dim
    dims = [anc, 2, D]
    U = embed(KET0, dims, [1]) + embed(KET1, dims, [1]) @ embed(enc.U, dims, [0, 2])
    return BlockEncoding(U.toarray(), 1.0, enc.a, enc.epsilon, f"ctrl({enc.label})")


def _swap_into_system(op_on_anc_sys, a_dim, sys_dim):
    """``sigma_x`` on a new leading system qubit tensored with ``op`` on ``[anc, sys]``."""
    dims = [a_dim, 2, sys_dim]
    return embed(SIGMA_X, dims, [1]) @ embed(op_on_anc_sys, dims, [0, 2])


def block_encode_H0(b_state) -> BlockEncoding:
    """``(1, 1, 0)`` encoding of ``H0 = sigma_x (x) P_perp``."""
    P = block_encode_projector(b_state)
    U = _swap_into_system(P.U, 2, P.system_dim)
    return BlockEncoding(U.toarray(), 1.0, 1, 0.0, "H0")


def product_encoding(encodings, label="") -> BlockEncoding:
    """Encoding of ``T_1 T_2 ... T_k`` from encodings of each factor.

    Every factor gets its own ancilla register, ordered as given; the result has
    ``eta = prod eta_i`` and ``a = sum a_i``.
    """
    encodings = list(encodings)
    D = encodings[0].system_dim
    if any(e.system_dim != D for e in encodings):
        raise EncodingError("all factors must act on the same system dimension")
    dims = [2**e.a for e in encodings] + [D]
    k = len(encodings)
    U = sp.identity(int(np.prod(dims)), format="csr")
    for i, e in enumerate(encodings):
        U = U @ embed(e.U, dims, [i, k])
    U = U.toarray()
    eta = float(np.prod([e.eta for e in encodings]))
    a = sum(e.a for e in encodings)
    eps = sum(e.epsilon * eta / e.eta for e in encodings)
    return BlockEncoding(U, eta, a, eps, label)


def block_encode_H1(U_A: BlockEncoding, b_state) -> BlockEncoding:
    """``(s, m+3, 0)`` encoding of ``H1 = [[0, A P_perp], [P_perp A, 0]]``.

    ``H1 = C (sigma_x (x) A) C`` with ``C = |0><0| (x) I + |1><1| (x) P_perp``.
    """
    b = np.asarray(b_state)
    if U_A.system_dim != len(b):
        raise EncodingError(f"encoding acts on {U_A.system_dim} dims but b has {len(b)}")
    C = block_encode_controlled(block_encode_projector(b))
    X = BlockEncoding(
        _swap_into_system(U_A.U, 2**U_A.a, U_A.system_dim).toarray(), U_A.eta, U_A.a, U_A.epsilon
    )
    enc = product_encoding([C, X, C], label="H1")
    return enc


def build_H0(b_state):
    b = np.asarray(b_state)
    P = np.eye(len(b)) - np.outer(b, b.conj())
    return np.kron(SIGMA_X, P)


def build_H1(A_hat, b_state):
    b = np.asarray(b_state)
    A = A_hat.toarray() if sp.issparse(A_hat) else np.asarray(A_hat)
    P = np.eye(len(b)) - np.outer(b, b.conj())
    n = len(b)
    H = np.zeros((2 * n, 2 * n), dtype=np.result_type(A, P))
    H[:n, n:] = A @ P
    H[n:, :n] = P @ A
    return H
