import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aldvqe.circuits import Circuit, ShotCounts, measurement_groups, run, sample_counts
from aldvqe.noisy_backend import (
    MitigationSpec,
    NoiseModel,
    PreparedState,
    Symmetry,
    SymmetryViolation,
    amplitude_damping_kraus,
    counts_from_distribution,
    density_matrix_run,
    dephasing_kraus,
    estimate_energy,
    execution_circuits,
    is_trace_preserving,
    measurable,
    pmsv_filter,
    prepare_state,
    repeat_experiments,
    total_variation,
    trajectory_run,
    tv_bound,
)
from aldvqe.operators import QubitOperator
from aldvqe.transpiler import transpile

from test_circuits import random_circuit

probs01 = st.floats(0, 1)


@given(probs01)
def test_kraus_sets_trace_preserving(p):
    assert is_trace_preserving(amplitude_damping_kraus(p))
    assert is_trace_preserving(dephasing_kraus(p))


def test_noise_model_validation_and_round_trip():
    m = NoiseModel()
    assert NoiseModel.from_dict(m.to_dict()) == m
    assert NoiseModel.ideal().is_ideal and not m.is_ideal
    with pytest.raises(ValueError):
        NoiseModel(gamma1=1.5)
    with pytest.raises(ValueError):
        NoiseModel.from_dict({"t1": 0.1})


def native(seed, n, depth=10):
    return transpile(random_circuit(np.random.default_rng(seed), n, depth))[0]


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_zero_noise_trajectories_equal_ideal_sampling(seed, n):
    c = native(seed, n)
    a = trajectory_run(c, NoiseModel.ideal(), 3000, seed)
    b = sample_counts(run(c), 3000, seed)
    assert a.counts == b.counts


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_ideal_density_equals_statevector(seed, n):
    c = native(seed, n)
    np.testing.assert_allclose(density_matrix_run(c, NoiseModel.ideal()), np.abs(run(c)) ** 2, atol=1e-12)


def test_pure_damping_relaxes_to_ground():
    c = Circuit(1).append("RX", 0, angle=math.pi)
    for _ in range(200):
        c.append("RZ", 0, angle=0.0)
    p = density_matrix_run(c, NoiseModel(gamma1=0.05, lambda1=0, gamma2=0, lambda2=0, readout_flip=0))
    assert p[0] > 0.9999


def test_readout_flip_only():
    p = density_matrix_run(Circuit(2).append("RZ", 0, angle=0.1), NoiseModel(0, 0, 0, 0, 0.1))
    np.testing.assert_allclose(p, [0.81, 0.09, 0.09, 0.01], atol=1e-12)


def test_noise_rejects_non_native():
    with pytest.raises(ValueError):
        density_matrix_run(Circuit(1).append("H", 0), NoiseModel())
    with pytest.raises(ValueError):
        density_matrix_run(Circuit(7), NoiseModel())


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1))
def test_trajectories_converge_to_density(seed):
    c = native(seed, 2, 8)
    noise = NoiseModel(0.05, 0.03, 0.1, 0.05, 0.02)
    counts = trajectory_run(c, noise, 20_000, seed)
    assert total_variation(counts, density_matrix_run(c, noise)) < tv_bound(2, 20_000)


def test_estimate_energy_from_exact_distributions(states22, optima22):
    _, H = states22["R"]
    _, e, circ = optima22["R"]
    ps = prepare_state("R", H, circ, NoiseModel.ideal())
    assert ps.exact_energy() == pytest.approx(e, abs=1e-10)
    counts = [ps.sample(i, 200_000, i) for i in range(len(ps.groups))]
    est = estimate_energy(counts, H, ps.groups)
    assert abs(est.energy - e) < 5 * est.stderr + 1e-9


def test_execution_circuits_prepare_target(states22, optima22):
    _, H = states22["TS"]
    circ = optima22["TS"][2]
    groups = measurement_groups(H)
    for mode in ("unitary", "state", "auto"):
        cs = execution_circuits(circ, groups, mode)
        for c, g in zip(cs, groups):
            target = run(circ.copy().extend(g.basis_circuit().gates))
            assert abs(abs(np.vdot(run(c), target)) - 1) < 1e-10
    auto = execution_circuits(circ, groups, "auto")
    uni = execution_circuits(circ, groups, "unitary")
    assert all(a.depth() <= u.depth() for a, u in zip(auto, uni))


def test_spin_parity_symmetries(states22):
    _, H = states22["R"]
    spec = MitigationSpec.spin_parities(H, 2)
    assert [s.expected for s in spec.symmetries] == [-1, -1, 1]
    with pytest.raises(ValueError):
        MitigationSpec((Symmetry(0b1, 1),), H)  # Z0 alone does not commute with the double excitation terms
    with pytest.raises(ValueError):
        Symmetry(0b11, 0)


counts_strategy = st.dictionaries(st.integers(0, 15), st.integers(1, 50), min_size=1)


@given(counts_strategy)
def test_pmsv_keeps_exactly_the_consistent_shots(raw):
    counts = ShotCounts({format(k, "04b"): v for k, v in raw.items()}, 4)
    spec = MitigationSpec((Symmetry(0b0101, -1, "a"), Symmetry(0b1010, -1, "b")))
    ok = {k for k in raw if bin(k & 0b0101).count("1") % 2 and bin(k & 0b1010).count("1") % 2}
    if not ok:
        with pytest.raises(SymmetryViolation):
            pmsv_filter(counts, spec, {})
        return
    res = pmsv_filter(counts, spec, {})
    assert {int(k, 2) for k in res.counts.counts} == ok
    assert res.retained_fraction == pytest.approx(sum(raw[k] for k in ok) / sum(raw.values()))
    assert not res.flagged


def test_pmsv_passes_through_rotated_groups():
    counts = ShotCounts({"0000": 5, "0001": 5}, 4)
    spec = MitigationSpec((Symmetry(0b0101, 1, "a"),))
    assert not measurable(spec.symmetries[0], {0: "X"})
    res = pmsv_filter(counts, spec, {0: "X"})
    assert res.flagged and res.retained_fraction == 1.0 and res.counts == counts


def test_repeat_experiments_deterministic(states22, optima22):
    _, H = states22["P1"]
    ps = prepare_state("P1", H, optima22["P1"][2], NoiseModel())
    mit = MitigationSpec.spin_parities(H, 2)
    a = repeat_experiments(ps, 4, 2000, 11, mit)
    b = repeat_experiments(ps, 4, 2000, 11, mit)
    np.testing.assert_array_equal(a.energies, b.energies)
    np.testing.assert_array_equal(a.mitigated, b.mitigated)
    assert np.all((a.retained > 0) & (a.retained <= 1))
    with pytest.raises(ValueError):
        repeat_experiments(ps, 1, 100, 0)


def test_trajectory_engine_matches_density_engine(states22, optima22):
    _, H = states22["R"]
    circ = optima22["R"][2]
    dens = prepare_state("R", H, circ, NoiseModel())
    traj = PreparedState("R", H, dens.groups, dens.circuits, NoiseModel(), engine="trajectory")
    a = repeat_experiments(dens, 10, 5000, 3)
    b = repeat_experiments(traj, 10, 5000, 3)
    assert abs(a.mean - b.mean) < 4 * math.hypot(a.std, b.std) / math.sqrt(10)


def test_counts_from_distribution_total():
    c = counts_from_distribution(np.array([0.5, 0.5]), 1000, 1)
    assert c.shots == 1000 and set(c.counts) <= {"0", "1"}
    with pytest.raises(ValueError):
        estimate_energy([c], QubitOperator.identity(2), [])


def test_basis_state_sweep_has_zero_spread():
    from aldvqe.noisy_backend import shots_sweep

    H = QubitOperator.from_list([("Z0", 0.5), ("Z0 Z1", -0.25), ("X1", 0.1)], 2)
    circ = Circuit(2).append("X", 0)
    ps = prepare_state("basis", H, circ, NoiseModel.ideal())
    zg = [i for i, g in enumerate(ps.groups) if all(v == "Z" for v in g.basis.values())]
    ps = PreparedState("basis", H, [ps.groups[i] for i in zg], [ps.circuits[i] for i in zg], NoiseModel.ideal())
    H_z = QubitOperator.from_list([("Z0", 0.5), ("Z0 Z1", -0.25)], 2)
    ps.hamiltonian = H_z
    stats = shots_sweep(ps, [100, 1000], 5, 0)
    assert all(s.std == 0.0 for s in stats)
    assert stats[0].mean == pytest.approx(-0.5 + 0.25)
