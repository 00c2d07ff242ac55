import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aldvqe.ansatz import (
    AnsatzEnergy,
    AnsatzSpec,
    adapt_vqe,
    ansatz_state,
    build_circuit,
    chemically_aware_filter,
    commutator_gradient,
    raw_excitation_count,
    uccsd_pool,
)
from aldvqe.circuits import expectation, hartree_fock_state
from aldvqe.operators import commutator, number_operator, sz_operator
from aldvqe.vqe import VqeConfig, minimize, parameter_shift_gradient


def test_pool_sizes():
    assert len(uccsd_pool(2, 4)) == 2  # one single pair, one paired double
    assert raw_excitation_count(uccsd_pool(2, 4)) == 3
    assert len(uccsd_pool(4, 8)) == 15
    assert len(uccsd_pool(4, 8, spin_adapt=False)) == raw_excitation_count(uccsd_pool(4, 8))
    with pytest.raises(ValueError):
        uccsd_pool(3, 8)


def test_generators_anti_hermitian_and_symmetry_preserving():
    for e in uccsd_pool(4, 8):
        g = e.generator
        assert g.is_anti_hermitian()
        assert commutator(g, number_operator(8)).is_zero(1e-12)
        assert commutator(g, sz_operator(8)).is_zero(1e-12)


def test_filter_keeps_only_allowed(states22, states44):
    for ints, H in states22.values():
        kept = chemically_aware_filter(uccsd_pool(2, 4), hartree_fock_state(4, 2), H)
        assert [e.kind for e in kept] == ["paired"]
    for ints, H in states44.values():
        pool = uccsd_pool(4, 8)
        kept = chemically_aware_filter(pool, hartree_fock_state(8, 4), H)
        assert len(kept) < len(pool)
        for e in pool:
            g = commutator_gradient(H, e.generator, hartree_fock_state(8, 4))
            assert (e in kept) == (abs(g) >= 1e-12)


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_gradients_agree(states44, seed):
    _, H = states44["TS"]
    pool = uccsd_pool(4, 8)[:6]
    rng = np.random.default_rng(seed)
    spec = AnsatzSpec(pool, rng.normal(scale=0.3, size=len(pool)), 8, 4)
    ev = AnsatzEnergy(H, spec)
    e, g = ev.energy_and_gradient(spec.theta)
    np.testing.assert_allclose(g, parameter_shift_gradient(H, spec), atol=1e-9)
    h = 1e-6
    fd = [(ev.energy(spec.theta + h * np.eye(len(pool))[k]) - ev.energy(spec.theta - h * np.eye(len(pool))[k])) / (2 * h)
          for k in range(len(pool))]
    np.testing.assert_allclose(g, fd, atol=1e-7)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_fast_energy_matches_circuit(states22, seed):
    _, H = states22["R"]
    pool = uccsd_pool(2, 4)
    spec = AnsatzSpec(pool, np.random.default_rng(seed).normal(size=2), 4, 2)
    psi = ansatz_state(spec)
    assert AnsatzEnergy(H, spec).energy(spec.theta) == pytest.approx(expectation(psi, H), abs=1e-12)
    np.testing.assert_allclose(np.abs(psi), np.abs(AnsatzEnergy(H, spec).state(spec.theta)), atol=1e-12)


def test_circuit_starts_with_hartree_fock():
    spec = AnsatzSpec.zeros(uccsd_pool(2, 4), 4, 2)
    c = build_circuit(spec)
    assert [g.kind for g in c.gates[:2]] == ["X", "X"]
    assert all(g.kind == "PAULIEXP" for g in c.gates[2:])


def test_vqe_is_variational_and_converges(states22):
    ints, H = states22["TS"]
    pool = uccsd_pool(2, 4)
    res = minimize(H, AnsatzSpec.zeros(pool, 4, 2), VqeConfig())
    assert res.converged
    energies = [e for _, e in res.history]
    assert all(b <= a + 1e-14 for a, b in zip(energies, energies[1:]))


def test_vqe_config_validation():
    with pytest.raises(ValueError):
        VqeConfig(energy_tol=0)
    with pytest.raises(ValueError):
        VqeConfig(gradient="finite-difference")


def test_parameter_shift_optimizer_matches_adjoint(states22):
    _, H = states22["P1"]
    spec = AnsatzSpec.zeros(uccsd_pool(2, 4), 4, 2)
    a = minimize(H, spec, VqeConfig())
    b = minimize(H, spec, VqeConfig(gradient="parameter-shift"))
    assert a.energy == pytest.approx(b.energy, abs=1e-9)


def test_adapt_monotone_and_stops(states44):
    _, H = states44["R"]
    res = adapt_vqe(H, uccsd_pool(4, 8), 4, grad_threshold=1e-3)
    assert res.converged
    assert all(b <= a + 1e-12 for a, b in zip(res.energies, res.energies[1:]))
    assert res.max_gradients[-1] < 1e-3
    assert len(res.selected) == res.rounds == res.spec.n_parameters
    with pytest.raises(ValueError):
        adapt_vqe(H, uccsd_pool(4, 8), 4, grad_threshold=0)
