"""Spin-1/2 operators and encoded bases for two three-spin qubits.

The Hilbert space is the tensor product of six spin-1/2 factors ordered
``a1 a2 a3 b1 b2 b3`` (``a1`` is the most significant factor). Each factor
uses the ordering ``(up, down)``, so basis index 0 is ``|up up up up up up>``
and index 63 is ``|down ... down>``. Units: hbar = 1, ``S_z`` has
eigenvalues +-1/2.

Within each qubit, spins 1 and 2 share the doubly occupied dot and spin 3
sits alone in the other dot.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

SPIN_LABELS: tuple[str, ...] = ("a1", "a2", "a3", "b1", "b2", "b3")
N_SPINS = len(SPIN_LABELS)
DIM = 2**N_SPINS

_SX = 0.5 * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = 0.5 * np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SZ = 0.5 * np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_SINGLE = {"x": _SX, "y": _SY, "z": _SZ}

UP = np.array([1.0, 0.0])
DOWN = np.array([0.0, 1.0])

Pair = tuple[str, str]
PairLike = Union[str, Sequence[str]]


def spin_index(label: str) -> int:
    """Tensor-factor position of a spin label such as ``"a3"``."""
    try:
        return SPIN_LABELS.index(label)
    except ValueError:
        raise ValueError(f"unknown spin label {label!r}") from None


def canonical_pair(pair: PairLike) -> Pair:
    """Normalize ``"a3b1"``, ``("b1", "a3")`` etc. to a canonically ordered tuple.

    Raises ``ValueError`` for unknown labels or a repeated spin.
    """
    if isinstance(pair, str):
        if len(pair) != 4:
            raise ValueError(f"cannot parse spin pair {pair!r}")
        i, j = pair[:2], pair[2:]
    else:
        i, j = pair
    ii, jj = spin_index(i), spin_index(j)
    if ii == jj:
        raise ValueError(f"exchange pair needs two distinct spins, got {i!r} twice")
    return (i, j) if ii < jj else (j, i)


def pair_name(pair: PairLike) -> str:
    i, j = canonical_pair(pair)
    return i + j


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def _spin_op(index: int, axis: str) -> np.ndarray:
    left = np.eye(2**index)
    right = np.eye(2 ** (N_SPINS - index - 1))
    return _readonly(np.kron(np.kron(left, _SINGLE[axis]), right))


def pauli_spin_op(label: str, axis: str) -> np.ndarray:
    """``S_axis`` on spin ``label``, identity on the other five spins (64x64)."""
    if axis not in _SINGLE:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")
    return _spin_op(spin_index(label), axis)


@lru_cache(maxsize=None)
def _exchange(pair: Pair) -> np.ndarray:
    i, j = pair
    op = sum(pauli_spin_op(i, a) @ pauli_spin_op(j, a) for a in "xyz")
    # S_i.S_j is real in the S_z basis
    return _readonly(np.ascontiguousarray(op.real))


def exchange_op(i: str, j: str | None = None) -> np.ndarray:
    """Heisenberg exchange ``S_i . S_j`` on the 64-dim space.

    Accepts either two labels or a single pair spec (``"a1a3"``).
    """
    pair = canonical_pair(i if j is None else (i, j))
    return _exchange(pair)


@lru_cache(maxsize=None)
def total_spin_ops() -> tuple[np.ndarray, np.ndarray]:
    """Return ``(S_tot^2, S_tot_z)`` for all six spins."""
    comps = [sum(pauli_spin_op(s, a) for s in SPIN_LABELS) for a in "xyz"]
    s2 = sum(c @ c for c in comps)
    return _readonly(np.ascontiguousarray(s2.real)), _readonly(np.ascontiguousarray(comps[2].real))


def _kron(*vs: np.ndarray) -> np.ndarray:
    out = np.ones(1)
    for v in vs:
        out = np.kron(out, v)
    return out


S0 = (_kron(UP, DOWN) - _kron(DOWN, UP)) / np.sqrt(2)
T0 = (_kron(UP, DOWN) + _kron(DOWN, UP)) / np.sqrt(2)
T_MINUS = _kron(DOWN, DOWN)
T_PLUS = _kron(UP, UP)


@lru_cache(maxsize=None)
def _qubit_states() -> tuple[np.ndarray, ...]:
    r3 = np.sqrt(3.0)
    r2 = np.sqrt(2.0)
    states = (
        _kron(S0, UP),
        _kron(S0, DOWN),
        (r2 * _kron(T_PLUS, DOWN) - _kron(T0, UP)) / r3,
        (_kron(T0, DOWN) - r2 * _kron(T_MINUS, UP)) / r3,
        _kron(T_PLUS, UP),
        (_kron(T_PLUS, DOWN) + r2 * _kron(T0, UP)) / r3,
        (r2 * _kron(T0, DOWN) + _kron(T_MINUS, UP)) / r3,
        _kron(T_MINUS, DOWN),
    )
    return tuple(_readonly(s) for s in states)


def single_qubit_states(qubit: str = "a") -> list[np.ndarray]:
    """The eight three-spin states ``|1>..|8>`` as 8-dim vectors on one qubit.

    ``|1>, |2>`` carry the pair singlet; ``|2>`` and ``|4>`` are the logical
    ``|0>`` and ``|1>``. The vectors are identical for both qubits since each
    lives on its own three-spin factor.
    """
    if qubit not in ("a", "b"):
        raise ValueError(f"qubit must be 'a' or 'b', got {qubit!r}")
    return list(_qubit_states())


SECTORS = {"S0": (0.0, 0.0), "S1": (1.0, -1.0)}


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis of one total-spin sector.

    ``vectors`` is a ``(64, dim)`` array whose columns are the basis states
    in the listed order. For ``S1`` columns 0-3 are ``|00>, |01>, |10>, |11>``.
    """

    sector: str
    S: float
    Sz: float
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def project(self, op: np.ndarray) -> np.ndarray:
        """Matrix elements ``<b_m|op|b_n>`` of a 64x64 operator."""
        return self.vectors.conj().T @ op @ self.vectors


@lru_cache(maxsize=None)
def build_subspace_basis(sector: str) -> SubspaceBasis:
    """Encoded basis for ``"S1"`` (9-dim, S=1, Sz=-1) or ``"S0"`` (5-dim, S=0, Sz=0)."""
    if sector not in SECTORS:
        raise ValueError(f"sector must be 'S0' or 'S1', got {sector!r}")
    q = (None,) + _qubit_states()  # 1-based like the printed basis

    def kk(m: int, n: int) -> np.ndarray:
        return np.kron(q[m], q[n])

    if sector == "S1":
        h3 = np.sqrt(3.0) / 2
        cols = [
            kk(2, 2),
            kk(2, 4),
            kk(4, 2),
            kk(4, 4),
            h3 * kk(1, 8) - 0.5 * kk(2, 7),
            h3 * kk(3, 8) - 0.5 * kk(4, 7),
            -h3 * kk(8, 1) + 0.5 * kk(7, 2),
            -h3 * kk(8, 3) + 0.5 * kk(7, 4),
            0.5 * np.sqrt(6 / 5) * (kk(6, 8) + kk(8, 6)) - np.sqrt(2 / 5) * kk(7, 7),
        ]
    else:
        r = 1 / np.sqrt(2.0)
        cols = [
            r * (kk(1, 2) - kk(2, 1)),
            r * (kk(1, 4) - kk(2, 3)),
            r * (kk(3, 2) - kk(4, 1)),
            r * (kk(3, 4) - kk(4, 3)),
            0.5 * (kk(5, 8) - kk(8, 5) + kk(7, 6) - kk(6, 7)),
        ]
    S, Sz = SECTORS[sector]
    vectors = np.ascontiguousarray(np.array(cols).T.astype(complex))
    return SubspaceBasis(sector, S, Sz, _readonly(vectors))
