"""State vectors with an explicit register layout.

Registers are ordered most significant first, so a layout
``(("anc", 2), ("flag", 1), ("sys", 3))`` indexes amplitudes as
``anc * 16 + flag * 8 + sys``.  Ancillas are always listed before the system
register, which makes the block ``<0^a| U |0^a>`` the top-left ``D x D`` corner
of ``U``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "QuantumRegisterState",
    "fidelity",
    "state_distance",
    "normalize",
    "next_power_of_two",
    "pad_system",
    "pad_vector",
]

NORM_TOL = 1e-10


def next_power_of_two(n: int) -> int:
    if n < 1:
        raise ValueError("size must be positive")
    return 1 << (int(n) - 1).bit_length()


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def normalize(vec):
    vec = np.asarray(vec, dtype=complex)
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return vec / nrm


def pad_vector(vec, size):
    vec = np.asarray(vec)
    if len(vec) > size:
        raise ValueError("vector longer than the padded size")
    out = np.zeros(size, dtype=vec.dtype)
    out[: len(vec)] = vec
    return out


def pad_system(A, b=None):
    """Pad ``A`` with a unit diagonal block (and ``b`` with zeros) to a power of two.

    The padded solution is ``[c, 0]``, so normalized states are unchanged on the
    original coordinates.
    """
    A = sp.csc_matrix(A)
    n = A.shape[0]
    size = next_power_of_two(n)
    if size > n:
        A = sp.block_diag([A, sp.identity(size - n)], format="csc")
        A.sort_indices()
    if b is None:
        return A
    return A, pad_vector(np.asarray(b), size)


@dataclass(frozen=True)
class QuantumRegisterState:
    """Normalized amplitudes with a named register layout."""

    amplitudes: np.ndarray
    layout: tuple

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        layout = tuple((str(name), int(q)) for name, q in self.layout)
        object.__setattr__(self, "layout", layout)
        if amps.shape != (2 ** sum(q for _, q in layout),):
            raise ValueError(f"{len(amps)} amplitudes do not fit layout {layout}")
        if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {np.linalg.norm(amps):.12f} differs from 1")

    @classmethod
    def from_vector(cls, vec, layout):
        return cls(normalize(vec), layout)

    @property
    def n_qubits(self):
        return sum(q for _, q in self.layout)

    def tensor(self):
        """Amplitudes reshaped to one axis per register."""
        return self.amplitudes.reshape([2**q for _, q in self.layout])

    def project(self, **fixed):
        """Unnormalized amplitudes of the remaining registers with ``fixed`` registers set.

        ``state.project(flag=0)`` is ``(<0|_flag (x) I) |state>``.
        """
        names = [name for name, _ in self.layout]
        index = []
        for name in names:
            index.append(fixed.pop(name) if name in fixed else slice(None))
        if fixed:
            raise KeyError(f"unknown registers {sorted(fixed)}")
        return self.tensor()[tuple(index)].reshape(-1)

    def probability(self, **fixed):
        return float(np.linalg.norm(self.project(**fixed)) ** 2)

    def sample(self, register: str, shots: int, seed=None):
        """Simulated measurement counts of one register.

        Exact probabilities are the default everywhere else; this is a
        seeded demonstration mode. Returns an integer array of length
        ``2**q`` for the register's ``q`` qubits.
        """
        names = [name for name, _ in self.layout]
        if register not in names:
            raise KeyError(f"unknown register {register!r}")
        if shots < 1:
            raise ValueError("shots must be positive")
        axis = names.index(register)
        probs = np.abs(self.tensor()) ** 2
        other = tuple(i for i in range(len(names)) if i != axis)
        marginal = probs.sum(axis=other) if other else probs
        marginal = marginal / marginal.sum()
        return np.random.default_rng(seed).multinomial(int(shots), marginal)


def _as_vec(state):
    if isinstance(state, QuantumRegisterState):
        return state.amplitudes
    return np.asarray(state, dtype=complex)


def fidelity(state_a, state_b) -> float:
    """``|<a|b>|`` for normalized states (global phase irrelevant)."""
    a, b = _as_vec(state_a), _as_vec(state_b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    for v in (a, b):
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise ValueError("fidelity needs normalized states")
    return float(min(1.0, abs(np.vdot(a, b))))


def state_distance(state_a, state_b) -> float:
    """``min_theta || a - e^{i theta} b ||`` for normalized states."""
    a, b = _as_vec(state_a), _as_vec(state_b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))
