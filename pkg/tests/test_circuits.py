import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from aldvqe.circuits import (
    Circuit,
    ShotCounts,
    derive_seed,
    draw_outcomes,
    expand_pauli_exp,
    expectation,
    gate_matrix,
    Gate,
    hartree_fock_state,
    measurement_groups,
    run,
    sample_counts,
    unitary,
)
from aldvqe.operators import QubitOperator, dense_matrix

LETTERS = "XYZ"


def random_circuit(rng, n, depth=12, paulis=True):
    c = Circuit(n)
    kinds = ["RX", "RY", "RZ", "H", "X"] + (["CX", "ISWAP"] if n > 1 else []) + (["PAULIEXP"] if paulis else [])
    for _ in range(depth):
        k = kinds[int(rng.integers(len(kinds)))]
        if k in ("CX", "ISWAP"):
            a, b = rng.choice(n, 2, replace=False)
            c.append(k, int(a), int(b))
        elif k == "PAULIEXP":
            m = int(rng.integers(1, n + 1))
            qs = sorted(int(q) for q in rng.choice(n, m, replace=False))
            c.append(k, *qs, pauli="".join(LETTERS[int(i)] for i in rng.integers(3, size=m)), angle=float(rng.normal()))
        elif k in ("H", "X"):
            c.append(k, int(rng.integers(n)))
        else:
            c.append(k, int(rng.integers(n)), angle=float(rng.normal()))
    return c


@pytest.mark.parametrize("kind", ["RX", "RY", "RZ", "H", "X", "CX", "ISWAP"])
def test_gate_matrices_unitary(kind):
    qs = (0, 1) if kind in ("CX", "ISWAP") else (0,)
    m = gate_matrix(Gate(kind, qs, 0.37 if kind.startswith("R") else None))
    np.testing.assert_allclose(m @ m.conj().T, np.eye(m.shape[0]), atol=1e-14)


def test_little_endian_convention():
    psi = run(Circuit(3).append("X", 1))
    assert abs(psi[0b010]) == pytest.approx(1.0)
    psi = run(Circuit(2).append("X", 0).append("CX", 0, 1))
    assert abs(psi[0b11]) == pytest.approx(1.0)


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_pauli_exp_direct_equals_ladder(seed, n):
    c = random_circuit(np.random.default_rng(seed), n)
    a, b = run(c), run(c, pauli_exp="ladder")
    assert abs(abs(np.vdot(a, b)) - 1.0) < 1e-12


@given(st.integers(0, 2**32 - 1))
def test_pauli_exp_matches_matrix_exponential(seed):
    rng = np.random.default_rng(seed)
    letters = "".join(LETTERS[int(i)] for i in rng.integers(3, size=3))
    theta = float(rng.normal())
    c = Circuit(3).append("PAULIEXP", 0, 1, 2, pauli=letters, angle=theta)
    p = dense_matrix(QubitOperator.from_list([(" ".join(f"{l}{i}" for i, l in enumerate(letters)), 1.0)], 3))
    expected = math.cos(theta / 2) * np.eye(8) - 1j * math.sin(theta / 2) * p
    np.testing.assert_allclose(unitary(c), expected, atol=1e-12)
    assert all(g.kind in ("H", "RX", "CX", "RZ") for g in expand_pauli_exp(c.gates[0]))


@given(st.integers(0, 2**32 - 1))
def test_circuit_text_round_trip(seed):
    c = random_circuit(np.random.default_rng(seed), 3)
    back = Circuit.from_text(c.to_text())
    assert back.n_qubits == 3 and len(back) == len(c)
    np.testing.assert_allclose(unitary(back), unitary(c), atol=1e-12)


def test_circuit_validation():
    with pytest.raises(ValueError):
        Circuit(2).append("CX", 0, 0)
    with pytest.raises(ValueError):
        Circuit(2).append("RX", 3, angle=0.1)
    with pytest.raises(ValueError):
        Circuit(2).append("RX", 0)
    with pytest.raises(ValueError):
        Circuit.from_text("RX 0 0.1\n")


def test_depth_counts_parallel_layers():
    c = Circuit(3).append("H", 0).append("H", 1).append("CX", 0, 1).append("X", 2)
    assert c.depth() == 2
    assert c.depth(multi_qubit_only=True) == 1


def test_hartree_fock_occupies_lowest():
    psi = hartree_fock_state(4, 2)
    assert psi[0b0011] == 1.0 and np.count_nonzero(psi) == 1


@given(st.integers(0, 2**32 - 1))
def test_measurement_groups_reproduce_energy(seed):
    rng = np.random.default_rng(seed)
    n = 3
    terms = {}
    for _ in range(8):
        x, z = int(rng.integers(2**n)), int(rng.integers(2**n))
        terms[(x, z)] = float(rng.normal())
    op = QubitOperator(terms, n)
    psi = run(random_circuit(rng, n, 10))
    groups = measurement_groups(op)
    total = op.constant.real
    for g in groups:
        # every member is diagonalised by the group basis change
        probs = np.abs(run(g.basis_circuit(), psi)) ** 2
        vals = np.arange(2**n)
        for mask, c in zip(g.masks(), g.coefficients()):
            parity = np.array([bin(v & mask).count("1") & 1 for v in vals])
            total += c * float(probs @ (1 - 2 * parity))
    assert total == pytest.approx(expectation(psi, op), abs=1e-10)
    assert sum(len(g.terms) for g in groups) == len([k for k in terms if k != (0, 0)])


def test_sampling_is_seeded_and_chunk_stable():
    psi = run(Circuit(3).append("H", 0).append("RY", 1, angle=0.7).append("CX", 1, 2))
    a = sample_counts(psi, 40_000, 7)
    b = sample_counts(psi, 40_000, 7)
    c = sample_counts(psi, 40_000, 8)
    assert a.counts == b.counts and a.counts != c.counts
    assert a.shots == 40_000
    # the first chunk is a prefix of a longer run's first chunk
    short = sample_counts(psi, 100, 7)
    assert sum(short.counts.values()) == 100


@given(st.integers(0, 2**32 - 1))
def test_inverse_cdf_draw_matches_reference(seed):
    rng = np.random.default_rng(seed)
    p = rng.random(8)
    p /= p.sum()
    u = rng.random(200)
    cdf = np.cumsum(p) / p.sum()
    ref = np.minimum((cdf[None, :] <= u[:, None]).sum(axis=1), 7)
    np.testing.assert_array_equal(draw_outcomes(p, u), ref)


def test_shot_counts_json_round_trip():
    c = ShotCounts({"01": 3, "10": 5}, 2)
    assert ShotCounts.from_json(c.to_json()) == c


def test_derive_seed_streams_are_independent_of_order():
    a = np.random.default_rng(derive_seed(1, 2, 3)).random()
    b = np.random.default_rng(derive_seed(derive_seed(1, 2), 3)).random()
    assert a == b
    assert np.random.default_rng(derive_seed(1, 3, 2)).random() != a
