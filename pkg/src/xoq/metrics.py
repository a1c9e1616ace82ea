"""CNOT objectives, leakage, local invariants and matrix exports."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CNOT = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ],
    dtype=complex,
)

# Bell ("magic") basis used for the local invariants
MAGIC = np.array(
    [
        [1, 0, 0, 1j],
        [0, 1j, 1, 0],
        [0, 1j, -1, 0],
        [1, 0, 0, -1j],
    ],
    dtype=complex,
) / np.sqrt(2)

N_ENCODED = 4


def _matrix(u, dims: tuple[int, ...] | None = None) -> np.ndarray:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    if dims is not None and u.shape[0] not in dims:
        raise ValueError(f"expected dimension in {dims}, got {u.shape[0]}")
    return u


def cnot_overlap(u) -> complex:
    """``U[1,1] + U[2,2] + U[3,4] + U[4,3]`` (1-based) over the encoded block."""
    u = _matrix(u)
    if u.shape[0] < N_ENCODED:
        raise ValueError("matrix smaller than the encoded block")
    return complex(u[0, 0] + u[1, 1] + u[2, 3] + u[3, 2])


def objective_f9(u9) -> float:
    """Fixed-step objective on the 9x9 ``S=1`` block; zero iff the encoded block is a phased CNOT."""
    u9 = _matrix(u9, (9,))
    return float(np.sqrt(max(0.0, 1.0 - abs(cnot_overlap(u9)) / 4)))


def objective_f_joint(u5, u9) -> float:
    """Variable-step objective combining the ``S=0`` (5x5) and ``S=1`` (9x9) blocks."""
    u5 = _matrix(u5, (5,))
    u9 = _matrix(u9, (9,))
    val = 2.0 - abs(cnot_overlap(u5)) / 4 - abs(cnot_overlap(u9)) / 4
    return float(np.sqrt(max(0.0, val)))


def encoded_block(u) -> tuple[np.ndarray, float]:
    """Upper-left 4x4 block and the leakage between encoded and leaked states.

    Leakage is the Frobenius norm of the two off-diagonal blocks that couple
    the first four basis states to the rest.
    """
    u = _matrix(u)
    block = u[:N_ENCODED, :N_ENCODED].copy()
    off = np.concatenate([u[:N_ENCODED, N_ENCODED:].ravel(), u[N_ENCODED:, :N_ENCODED].ravel()])
    return block, float(np.linalg.norm(off))


def sector_phase(u) -> complex:
    """Unit-modulus phase of the CNOT overlap (1 when the overlap vanishes)."""
    s = cnot_overlap(u)
    return s / abs(s) if abs(s) > 1e-15 else 1.0 + 0.0j


def dephased_block(u) -> np.ndarray:
    """Encoded block with the sector phase divided out."""
    block, _ = encoded_block(u)
    return block / sector_phase(u)


@dataclass(frozen=True)
class ObjectiveReport:
    f9: float
    f_joint: float
    leakage: float
    per_sector_phase: tuple[complex, complex]

    @property
    def phase_mismatch(self) -> float:
        """Angle between the S=0 and S=1 phases, in radians."""
        p5, p9 = self.per_sector_phase
        return float(abs(np.angle(p9 / p5)))

    def phases_agree(self, tol: float = 1e-2) -> bool:
        return self.phase_mismatch <= tol

    def as_dict(self) -> dict:
        return {
            "f9": self.f9,
            "f_joint": self.f_joint,
            "leakage": self.leakage,
            "phase_S0_rad": float(np.angle(self.per_sector_phase[0])),
            "phase_S1_rad": float(np.angle(self.per_sector_phase[1])),
        }


def objective_report(u5, u9) -> ObjectiveReport:
    u5 = _matrix(u5, (5,))
    u9 = _matrix(u9, (9,))
    _, leak5 = encoded_block(u5)
    _, leak9 = encoded_block(u9)
    return ObjectiveReport(
        f9=objective_f9(u9),
        f_joint=objective_f_joint(u5, u9),
        leakage=float(np.hypot(leak5, leak9)),
        per_sector_phase=(sector_phase(u5), sector_phase(u9)),
    )


@dataclass(frozen=True)
class MakhlinInvariants:
    g1: complex
    g2: float

    def as_tuple(self) -> tuple[complex, float]:
        return self.g1, self.g2


def makhlin_invariants(v, atol: float = 1e-10) -> MakhlinInvariants:
    """Local invariants ``(G1, G2)`` of a two-qubit unitary.

    CNOT gives ``(0, 1)``, the identity ``(1, 3)`` and SWAP ``(-1, -3)``.
    """
    v = _matrix(v, (4,))
    if not np.allclose(v.conj().T @ v, np.eye(4), atol=atol):
        raise ValueError("makhlin_invariants needs a unitary 4x4 matrix")
    vb = MAGIC.conj().T @ v @ MAGIC
    det = np.linalg.det(v)
    m = vb.T @ vb
    tr2 = np.trace(m) ** 2
    g1 = tr2 / (16 * det)
    g2 = (tr2 - np.trace(m @ m)) / (4 * det)
    return MakhlinInvariants(complex(g1), float(g2.real))


def _nearest_unitary(a: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(a)
    return w @ vh


def encoded_makhlin(u) -> MakhlinInvariants:
    """Invariants of the encoded block after polar projection onto the unitaries.

    Small leakage leaves the block slightly non-unitary; the projection
    removes it so the invariants stay defined.
    """
    block, _ = encoded_block(u)
    return makhlin_invariants(_nearest_unitary(block))


# ---------------------------------------------------------------------------
# heatmap export
# ---------------------------------------------------------------------------

HEATMAP_HEADER = ("row", "col", "modulus", "phase_radians")


def _phase(z: complex) -> float:
    if abs(z) < 1e-12:
        return 0.0
    p = float(np.angle(z))
    # keep phases in (-pi, pi]
    return np.pi if p <= -np.pi else p


def export_matrix_heatmap(u, path) -> Path:
    """Write modulus and phase of every entry as CSV rows (1-based indices)."""
    u = _matrix(u)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HEATMAP_HEADER)
        for i in range(u.shape[0]):
            for j in range(u.shape[1]):
                z = complex(u[i, j])
                w.writerow([i + 1, j + 1, repr(abs(z)), repr(_phase(z))])
    return path


def read_matrix_heatmap(path) -> np.ndarray:
    """Rebuild the complex matrix from an exported heatmap."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    n = max(int(r["row"]) for r in rows)
    out = np.zeros((n, n), dtype=complex)
    for r in rows:
        out[int(r["row"]) - 1, int(r["col"]) - 1] = float(r["modulus"]) * np.exp(1j * float(r["phase_radians"]))
    return out
