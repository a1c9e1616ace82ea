import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import block_diag
from scipy.stats import unitary_group

from xoq.metrics import (
    CNOT,
    cnot_overlap,
    dephased_block,
    encoded_block,
    encoded_makhlin,
    export_matrix_heatmap,
    makhlin_invariants,
    objective_f9,
    objective_f_joint,
    objective_report,
    read_matrix_heatmap,
    sector_phase,
)

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def embedded(block, dim, rest=None):
    rest = np.eye(dim - 4) if rest is None else rest
    return block_diag(block, rest)


def random_local(seed):
    return np.kron(unitary_group.rvs(2, random_state=seed), unitary_group.rvs(2, random_state=seed + 1))


def test_identity_fixtures():
    assert objective_f9(np.eye(9)) == pytest.approx(np.sqrt(0.5), abs=1e-12)
    assert objective_f_joint(np.eye(5), np.eye(9)) == pytest.approx(1.0, abs=1e-12)


def test_exact_cnot_gives_zero():
    assert objective_f9(embedded(CNOT, 9)) == pytest.approx(0.0, abs=1e-12)
    assert objective_f_joint(embedded(CNOT, 5), embedded(CNOT, 9)) == pytest.approx(0.0, abs=1e-12)


def test_sector_phases_are_free():
    u5 = np.exp(0.3j) * embedded(CNOT, 5)
    u9 = np.exp(-1.7j) * embedded(CNOT, 9)
    assert objective_f_joint(u5, u9) == pytest.approx(0.0, abs=1e-12)
    rep = objective_report(u5, u9)
    assert rep.leakage == pytest.approx(0.0, abs=1e-14)
    assert rep.phase_mismatch == pytest.approx(2.0, abs=1e-12)
    assert not rep.phases_agree(0.1)
    np.testing.assert_allclose(dephased_block(u9), CNOT, atol=1e-14)


def test_dimension_checks():
    with pytest.raises(ValueError):
        objective_f9(np.eye(5))
    with pytest.raises(ValueError):
        objective_f_joint(np.eye(9), np.eye(5))
    with pytest.raises(ValueError):
        cnot_overlap(np.eye(3))
    with pytest.raises(ValueError):
        encoded_block(np.ones((4, 5)))


def test_leakage_of_coupled_block():
    u = np.eye(5, dtype=complex)
    c, s = np.cos(0.2), np.sin(0.2)
    u[[0, 4], [0, 4]] = c
    u[0, 4], u[4, 0] = -s, s
    block, leak = encoded_block(u)
    assert leak == pytest.approx(np.sqrt(2) * s)
    assert block.shape == (4, 4)


def test_sector_phase_of_zero_overlap():
    assert sector_phase(np.zeros((5, 5))) == 1.0


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_objective_bounds_random_unitaries(seed):
    u5 = unitary_group.rvs(5, random_state=seed)
    u9 = unitary_group.rvs(9, random_state=seed + 1)
    f9 = objective_f9(u9)
    fj = objective_f_joint(u5, u9)
    assert 0.0 <= f9 <= 1.0
    assert 0.0 <= fj <= np.sqrt(2.0)
    # global phase does not matter
    assert objective_f_joint(np.exp(1j * seed) * u5, u9) == pytest.approx(fj, abs=1e-12)


@pytest.mark.parametrize(
    "gate,expected",
    [(CNOT, (0.0, 1.0)), (np.eye(4), (1.0, 3.0)), (SWAP, (-1.0, -3.0))],
)
def test_makhlin_fixtures(gate, expected):
    mk = makhlin_invariants(gate)
    assert abs(mk.g1 - expected[0]) <= 1e-9
    assert abs(mk.g2 - expected[1]) <= 1e-9


def test_makhlin_local_dressing_invariance():
    base = makhlin_invariants(CNOT)
    rng = np.random.default_rng(0)
    for k in range(1000):
        s = int(rng.integers(2**31 - 2))
        v = random_local(s) @ CNOT @ random_local(s + 7)
        mk = makhlin_invariants(np.exp(1j * k) * v)
        assert abs(mk.g1 - base.g1) <= 1e-9 and abs(mk.g2 - base.g2) <= 1e-9


def test_makhlin_rejects_non_unitary():
    with pytest.raises(ValueError):
        makhlin_invariants(2 * np.eye(4))


def test_encoded_makhlin_of_embedded_cnot():
    mk = encoded_makhlin(embedded(random_local(3) @ CNOT, 9))
    assert abs(mk.g1) <= 1e-9 and abs(mk.g2 - 1) <= 1e-9


def test_heatmap_round_trip(tmp_path):
    u = unitary_group.rvs(9, random_state=4)
    u[2, 3] = 0.0
    path = export_matrix_heatmap(u, tmp_path / "u.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "row,col,modulus,phase_radians"
    assert len(lines) == 82
    assert lines[1].startswith("1,1,")
    np.testing.assert_allclose(read_matrix_heatmap(path), u, atol=1e-14)


def test_heatmap_phase_range(tmp_path):
    u = np.diag([-1.0 + 0j, 1j, -1j, 1.0])
    back = read_matrix_heatmap(export_matrix_heatmap(u, tmp_path / "d.csv"))
    np.testing.assert_allclose(back, u, atol=1e-15)
    rows = [r.split(",") for r in (tmp_path / "d.csv").read_text().splitlines()[1:]]
    phases = [float(r[3]) for r in rows]
    assert all(-np.pi < p <= np.pi for p in phases)
    assert float(rows[0][3]) == pytest.approx(np.pi)
