import itertools

import numpy as np
import pytest

from xoq.spin import (
    DIM,
    SPIN_LABELS,
    build_subspace_basis,
    canonical_pair,
    exchange_op,
    pauli_spin_op,
    single_qubit_states,
    total_spin_ops,
)

ALL_PAIRS = list(itertools.combinations(SPIN_LABELS, 2))


def basis_state(bits: str) -> np.ndarray:
    """Product state from a string like 'udduud' (u = up)."""
    v = np.zeros(DIM)
    v[int(bits.replace("u", "0").replace("d", "1"), 2)] = 1.0
    return v


def test_sz_on_all_up():
    up = basis_state("uuuuuu")
    np.testing.assert_allclose(pauli_spin_op("a1", "z") @ up, 0.5 * up)


def test_ordering_a1_most_significant():
    v = basis_state("duuuuu")
    assert np.argmax(v) == 32
    np.testing.assert_allclose(pauli_spin_op("a1", "z") @ v, -0.5 * v)
    np.testing.assert_allclose(pauli_spin_op("b3", "z") @ v, 0.5 * v)


@pytest.mark.parametrize("label", SPIN_LABELS)
def test_su2_commutator(label):
    sx, sy, sz = (pauli_spin_op(label, a) for a in "xyz")
    np.testing.assert_allclose(sx @ sy - sy @ sx, 1j * sz, atol=1e-14)


def test_different_labels_commute():
    for i, j in ALL_PAIRS:
        for a, b in itertools.product("xyz", repeat=2):
            A, B = pauli_spin_op(i, a), pauli_spin_op(j, b)
            assert np.array_equal(A @ B, B @ A)


def test_bad_axis_and_label():
    with pytest.raises(ValueError):
        pauli_spin_op("a1", "w")
    with pytest.raises(ValueError):
        pauli_spin_op("c1", "x")


def test_exchange_spectrum():
    w = np.linalg.eigvalsh(exchange_op("a1", "a2"))
    assert np.sum(np.isclose(w, 0.25)) == 48
    assert np.sum(np.isclose(w, -0.75)) == 16


def test_exchange_symmetric_and_hermitian():
    np.testing.assert_array_equal(exchange_op("a1", "a2"), exchange_op("a2", "a1"))
    np.testing.assert_array_equal(exchange_op("a3b1"), exchange_op("b1", "a3"))
    for p in ALL_PAIRS:
        e = exchange_op(*p)
        np.testing.assert_allclose(e, e.conj().T)


def test_exchange_same_spin_rejected():
    with pytest.raises(ValueError):
        exchange_op("a1", "a1")


def test_pair_singlet_expectation():
    # singlet on (a1, a2), spectators down
    v = (basis_state("uddddd") - basis_state("dudddd")) / np.sqrt(2)
    assert np.isclose(v @ exchange_op("a1", "a2") @ v, -0.75)


def test_canonical_pair():
    assert canonical_pair("b1a3") == ("a3", "b1")
    assert canonical_pair(("a2", "a1")) == ("a1", "a2")
    with pytest.raises(ValueError):
        canonical_pair("a1")


def test_total_spin_on_all_down():
    s2, sz = total_spin_ops()
    down = basis_state("dddddd")
    np.testing.assert_allclose(sz @ down, -3 * down)
    np.testing.assert_allclose(s2 @ down, 12 * down)


@pytest.mark.parametrize("pair", ALL_PAIRS)
def test_exchange_commutes_with_total_spin(pair):
    e = exchange_op(*pair)
    for op in total_spin_ops():
        assert np.linalg.norm(op @ e - e @ op, 2) <= 1e-12


def test_single_qubit_states_orthonormal():
    q = np.array(single_qubit_states("a"))
    np.testing.assert_allclose(q @ q.T, np.eye(8), atol=1e-14)
    np.testing.assert_array_equal(q, np.array(single_qubit_states("b")))
    with pytest.raises(ValueError):
        single_qubit_states("c")


def test_single_qubit_state_2_and_8():
    q = single_qubit_states()
    # |2> = (|udd> - |dud>)/sqrt2 with index = 4*s1 + 2*s2 + s3, u=0, d=1
    expected = np.zeros(8)
    expected[0b011] = 1 / np.sqrt(2)
    expected[0b101] = -1 / np.sqrt(2)
    np.testing.assert_allclose(q[1], expected)
    e8 = np.zeros(8)
    e8[7] = 1.0
    np.testing.assert_allclose(q[7], e8)


def test_three_spin_total_spin():
    half = {"x": np.array([[0, 1], [1, 0]]) / 2, "y": np.array([[0, -1j], [1j, 0]]) / 2, "z": np.diag([0.5, -0.5])}
    eye = np.eye(2)
    s2 = np.zeros((8, 8), dtype=complex)
    for a in "xyz":
        total = (
            np.kron(np.kron(half[a], eye), eye) + np.kron(np.kron(eye, half[a]), eye) + np.kron(np.kron(eye, eye), half[a])
        )
        s2 += total @ total
    for k, v in enumerate(single_qubit_states(), start=1):
        expected = 0.75 if k <= 4 else 3.75
        assert abs(v @ s2 @ v - expected) <= 1e-12


@pytest.mark.parametrize("sector,dim,S,Sz", [("S1", 9, 1.0, -1.0), ("S0", 5, 0.0, 0.0)])
def test_subspace_basis_quantum_numbers(sector, dim, S, Sz):
    b = build_subspace_basis(sector)
    assert b.dim == dim
    v = b.vectors
    np.testing.assert_allclose(v.conj().T @ v, np.eye(dim), atol=1e-12)
    s2, sz = total_spin_ops()
    assert np.abs(s2 @ v - S * (S + 1) * v).max() <= 1e-12
    assert np.abs(sz @ v - Sz * v).max() <= 1e-12


def test_encoded_vectors_are_logical_products():
    q = single_qubit_states()
    v = build_subspace_basis("S1").vectors
    for col, (m, n) in enumerate([(2, 2), (2, 4), (4, 2), (4, 4)]):
        np.testing.assert_array_equal(v[:, col], np.kron(q[m - 1], q[n - 1]))


def test_s0_first_vector():
    q = single_qubit_states()
    v = build_subspace_basis("S0").vectors[:, 0]
    np.testing.assert_allclose(v, (np.kron(q[0], q[1]) - np.kron(q[1], q[0])) / np.sqrt(2))


def test_unknown_sector():
    with pytest.raises(ValueError):
        build_subspace_basis("S2")


@pytest.mark.parametrize("pair", ALL_PAIRS)
def test_projected_exchange_hermitian_and_closed(pair):
    e = exchange_op(*pair)
    for sector in ("S0", "S1"):
        b = build_subspace_basis(sector)
        m = b.project(e)
        np.testing.assert_allclose(m, m.conj().T, atol=1e-14)
        # the sector is invariant: nothing leaks to its orthogonal complement
        leak = e @ b.vectors - b.vectors @ m
        assert np.abs(leak).max() <= 1e-12
