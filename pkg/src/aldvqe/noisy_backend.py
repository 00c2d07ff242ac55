"""Shot-based noisy emulation, energy estimation from counts and symmetry post-selection.

Noise is attached to every native gate: amplitude damping toward ``|0>`` and
then phase-flip dephasing on each qubit the gate touches, with separate
strengths for one- and two-qubit gates. Readout flips act on the final bits.

Two engines produce counts:

* ``trajectory``: one pure state per shot, Kraus branches sampled per gate.
* ``density``: exact outcome distribution from the density operator, then
  inverse-CDF sampling. Statistically identical, and much cheaper when the
  same circuit is sampled many times.

Both draw measurement uniforms from the same chunked streams as
``circuits.sample_counts``; with every noise parameter at 0 all three give
identical counts for the same seed.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .circuits import (
    Circuit,
    MeasurementGroup,
    ShotCounts,
    apply_1q,
    apply_2q,
    derive_seed,
    draw_outcomes,
    gate_matrix,
    measurement_groups,
    sample_distribution,
    shot_chunks,
)
from .operators import QubitOperator, commutator
from .transpiler import NATIVE, is_native

log = logging.getLogger(__name__)

DENSITY_MAX_QUBITS = 6
ENGINES = ("density", "trajectory")


# --------------------------------------------------------------------------
# noise model


@dataclass(frozen=True)
class NoiseModel:
    gamma1: float = 0.005
    lambda1: float = 0.002
    gamma2: float = 0.02
    lambda2: float = 0.008
    readout_flip: float = 0.01

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not (isinstance(v, (int, float)) and 0.0 <= v <= 1.0):
                raise ValueError(f"noise parameter {k}={v!r} outside [0, 1]")

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown noise keys {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})

    def to_dict(self) -> dict:
        return asdict(self)

    def gate_channel(self, arity: int) -> tuple[float, float]:
        """(damping, dephasing) applied to each operand of a gate of this arity."""
        return (self.gamma1, self.lambda1) if arity == 1 else (self.gamma2, self.lambda2)

    @property
    def is_ideal(self) -> bool:
        return not any(asdict(self).values())


def amplitude_damping_kraus(gamma: float) -> list[np.ndarray]:
    return [
        np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex),
    ]


def dephasing_kraus(lam: float) -> list[np.ndarray]:
    return [math.sqrt(1 - lam) * np.eye(2, dtype=complex), math.sqrt(lam) * np.diag([1.0, -1.0]).astype(complex)]


def is_trace_preserving(kraus: Sequence[np.ndarray], atol: float = 1e-12) -> bool:
    s = sum(k.conj().T @ k for k in kraus)
    return bool(np.allclose(s, np.eye(s.shape[0]), atol=atol, rtol=0))


def _check_native(circuit: Circuit):
    if not is_native(circuit):
        raise ValueError(f"noisy execution needs a native circuit; found {sorted(circuit.kinds() - NATIVE)}")


def _bit_indices(n: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(1 << n)
    one = idx[(idx >> q) & 1 == 1]
    return one ^ (1 << q), one


# --------------------------------------------------------------------------
# trajectories


def _damp(psi: np.ndarray, q: int, gamma: float, u: np.ndarray, n: int) -> np.ndarray:
    zero, one = _bit_indices(n, q)
    p1 = np.sum(np.abs(psi[:, one]) ** 2, axis=1)
    jump = u < gamma * p1
    out = psi.copy()
    out[jump, :] = 0.0
    out[np.ix_(jump, zero)] = psi[np.ix_(jump, one)]
    out[np.ix_(~jump, one)] *= math.sqrt(1 - gamma)
    norm = np.linalg.norm(out, axis=1, keepdims=True)
    return out / norm


def _dephase(psi: np.ndarray, q: int, lam: float, u: np.ndarray, n: int) -> np.ndarray:
    _, one = _bit_indices(n, q)
    flip = u < lam
    psi[np.ix_(flip, one)] *= -1
    return psi


def _readout(outcomes: np.ndarray, p: float, rng: np.random.Generator, n: int) -> np.ndarray:
    flips = rng.random((outcomes.size, n)) < p
    return outcomes ^ (flips.astype(np.int64) << np.arange(n)).sum(axis=1)


def trajectory_run(circuit: Circuit, noise: NoiseModel, shots: int, seed) -> ShotCounts:
    """Sample ``shots`` noisy trajectories from ``|0...0>``.

    Channels with a zero parameter are skipped outright, so the zero-noise run
    consumes exactly the measurement stream of ``sample_counts``.
    """
    _check_native(circuit)
    n = circuit.n_qubits
    dim = 1 << n
    outcomes = []
    for m, mrng, nrng in shot_chunks(shots, seed):
        psi = np.zeros((m, dim), dtype=complex)
        psi[:, 0] = 1.0
        for g in circuit.gates:
            if g.is_measure:
                continue
            u = gate_matrix(g)
            psi = apply_1q(psi, u, g.qubits[0]) if len(g.qubits) == 1 else apply_2q(psi, u, *g.qubits)
            gamma, lam = noise.gate_channel(len(g.qubits))
            for q in g.qubits:
                if gamma > 0:
                    psi = _damp(psi, q, gamma, nrng.random(m), n)
                if lam > 0:
                    psi = _dephase(psi, q, lam, nrng.random(m), n)
        out = draw_outcomes(np.abs(psi) ** 2, mrng.random(m))
        if noise.readout_flip > 0:
            out = _readout(out, noise.readout_flip, nrng, n)
        outcomes.append(out)
    return ShotCounts.from_outcomes(np.concatenate(outcomes), n)


# --------------------------------------------------------------------------
# density-matrix oracle


def _conj_1q(rho: np.ndarray, k: np.ndarray, q: int) -> np.ndarray:
    """``K rho K^dag``; kernels act on the last axis, so go via transposes."""
    a = apply_1q(rho, k.conj(), q)  # rho K^dag
    return apply_1q(a.T, k, q).T


def _conj_2q(rho: np.ndarray, u: np.ndarray, q0: int, q1: int) -> np.ndarray:
    a = apply_2q(rho, u.conj(), q0, q1)
    return apply_2q(a.T, u, q0, q1).T


def density_matrix_run(circuit: Circuit, noise: NoiseModel) -> np.ndarray:
    """Exact outcome distribution (readout flips included) for ``n <= 6`` qubits."""
    _check_native(circuit)
    n = circuit.n_qubits
    if n > DENSITY_MAX_QUBITS:
        raise ValueError(f"density-matrix oracle limited to {DENSITY_MAX_QUBITS} qubits, got {n}")
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    for g in circuit.gates:
        if g.is_measure:
            continue
        u = gate_matrix(g)
        rho = _conj_1q(rho, u, g.qubits[0]) if len(g.qubits) == 1 else _conj_2q(rho, u, *g.qubits)
        gamma, lam = noise.gate_channel(len(g.qubits))
        for q in g.qubits:
            if gamma > 0:
                rho = sum(_conj_1q(rho, k, q) for k in amplitude_damping_kraus(gamma))
            if lam > 0:
                rho = sum(_conj_1q(rho, k, q) for k in dephasing_kraus(lam))
    tr = np.trace(rho).real
    if abs(tr - 1) > 1e-10:
        raise ArithmeticError(f"density operator trace drifted to {tr}")
    probs = np.clip(np.diag(rho).real, 0.0, None)
    f = noise.readout_flip
    if f > 0:
        idx = np.arange(dim)
        for q in range(n):
            probs = (1 - f) * probs + f * probs[idx ^ (1 << q)]
    return probs / probs.sum()


def counts_from_distribution(probs: np.ndarray, shots: int, seed) -> ShotCounts:
    n = probs.shape[-1].bit_length() - 1
    return sample_distribution(probs, shots, seed, n)


def total_variation(counts: ShotCounts, probs: np.ndarray) -> float:
    vals, cnt = counts.as_arrays()
    emp = np.zeros_like(probs)
    emp[vals] = cnt / cnt.sum()
    return 0.5 * float(np.abs(emp - probs).sum())


def tv_bound(n_qubits: int, shots: int) -> float:
    """Acceptance envelope ``5 sqrt(ln(2^n) / shots)``."""
    return 5.0 * math.sqrt(n_qubits * math.log(2) / shots)


# --------------------------------------------------------------------------
# energies from counts


@dataclass(frozen=True)
class EnergyEstimate:
    energy: float
    stderr: float


def group_energies(counts: ShotCounts, group: MeasurementGroup) -> tuple[np.ndarray, np.ndarray]:
    """Distinct outcomes' group energies ``sum_j c_j (-1)^{|b & m_j|}`` and their counts."""
    vals, cnt = counts.as_arrays()
    masks, coefs = group.masks(), group.coefficients()
    parity = (np.bitwise_count(vals[:, None] & masks[None, :]) & 1).astype(np.int64)
    return (coefs[None, :] * (1 - 2 * parity)).sum(axis=1), cnt


def estimate_energy(
    counts: Sequence[ShotCounts | None], H: QubitOperator, groups: Sequence[MeasurementGroup]
) -> EnergyEstimate:
    """Sum of per-group sample means plus the identity offset.

    The standard error treats groups as independent and uses the empirical
    per-shot variance within each group, which for a single-term group is the
    binomial ``(1 - <P>^2) c^2 / N``.
    """
    if len(counts) != len(groups) or any(c is None for c in counts):
        raise ValueError(f"need counts for all {len(groups)} measurement groups")
    energy = H.constant.real
    var = 0.0
    for c, g in zip(counts, groups):
        if c.shots == 0:
            raise ValueError("measurement group has no shots")
        e, w = group_energies(c, g)
        n = w.sum()
        mean = float((w * e).sum() / n)
        energy += mean
        var += float((w * (e - mean) ** 2).sum() / n) / n
    return EnergyEstimate(energy, math.sqrt(var))


# --------------------------------------------------------------------------
# symmetry verification


class SymmetryViolation(ValueError):
    """Every shot of a group broke a symmetry."""


@dataclass(frozen=True)
class Symmetry:
    mask: int  # Z on these qubits
    expected: int  # +1 or -1
    label: str = ""

    def __post_init__(self):
        if self.expected not in (1, -1):
            raise ValueError("symmetry eigenvalue must be +1 or -1")
        if self.mask <= 0:
            raise ValueError("symmetry needs a non-empty Z support")

    def operator(self, n_qubits: int) -> QubitOperator:
        return QubitOperator({(0, self.mask): 1.0}, n_qubits)


@dataclass
class MitigationSpec:
    symmetries: tuple[Symmetry, ...]
    hamiltonian: QubitOperator | None = field(default=None, repr=False)

    def __post_init__(self):
        self.symmetries = tuple(self.symmetries)
        if self.hamiltonian is not None:
            for s in self.symmetries:
                if not commutator(self.hamiltonian, s.operator(self.hamiltonian.n_qubits)).is_zero():
                    raise ValueError(f"symmetry {s.label or bin(s.mask)} does not commute with the Hamiltonian")

    @classmethod
    def spin_parities(cls, H: QubitOperator, n_electrons: int) -> "MitigationSpec":
        """Alpha parity (even qubits), beta parity (odd qubits) and total parity.

        Expected values come from the closed-shell reference.
        """
        n = H.n_qubits
        alpha = sum(1 << q for q in range(0, n, 2))
        beta = sum(1 << q for q in range(1, n, 2))
        n_a = n_b = n_electrons // 2
        sy = (
            Symmetry(alpha, (-1) ** n_a, "alpha-parity"),
            Symmetry(beta, (-1) ** n_b, "beta-parity"),
            Symmetry(alpha | beta, (-1) ** n_electrons, "particle-parity"),
        )
        return cls(sy, H)


class PmsvResult(NamedTuple):
    counts: ShotCounts
    retained_fraction: float
    skipped: tuple[str, ...]  # symmetries not measurable in this basis

    @property
    def flagged(self) -> bool:
        return bool(self.skipped)


def measurable(sym: Symmetry, basis: dict[int, str]) -> bool:
    """A Z-string is readable when every qubit it touches is measured in Z (or not rotated)."""
    return all(basis.get(q, "Z") == "Z" for q in range(sym.mask.bit_length()) if sym.mask >> q & 1)


def pmsv_filter(counts: ShotCounts, spec: MitigationSpec, basis: dict[int, str]) -> PmsvResult:
    """Drop shots whose measured symmetry eigenvalues disagree with the expected ones."""
    usable = [s for s in spec.symmetries if measurable(s, basis)]
    skipped = tuple(s.label or bin(s.mask) for s in spec.symmetries if s not in usable)
    if skipped:
        log.debug("PMSV: %s not measurable in basis %s; passed through", skipped, basis)
    kept = {}
    for key, c in counts.counts.items():
        v = int(key, 2)
        if all((-1) ** ((v & s.mask).bit_count() & 1) == s.expected for s in usable):
            kept[key] = c
    total = counts.shots
    if not kept:
        raise SymmetryViolation("PMSV discarded every shot")
    out = ShotCounts(kept, counts.n_qubits)
    return PmsvResult(out, out.shots / total, skipped)


# --------------------------------------------------------------------------
# repeated experiments


@dataclass
class PreparedState:
    """Everything needed to sample one state's energy: groups and their native circuits."""

    label: str
    hamiltonian: QubitOperator
    groups: list[MeasurementGroup]
    circuits: list[Circuit]
    noise: NoiseModel
    engine: str = "density"
    distributions: list[np.ndarray] | None = None

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}; choose from {ENGINES}")
        if len(self.groups) != len(self.circuits):
            raise ValueError("one circuit per measurement group required")
        for c in self.circuits:
            _check_native(c)
        if self.engine == "density" and self.distributions is None:
            self.distributions = [density_matrix_run(c, self.noise) for c in self.circuits]

    def sample(self, index: int, shots: int, seed) -> ShotCounts:
        if self.engine == "density":
            return counts_from_distribution(self.distributions[index], shots, seed)
        return trajectory_run(self.circuits[index], self.noise, shots, seed)

    def exact_energy(self) -> float:
        """Infinite-shot noisy energy (density engine only)."""
        if self.distributions is None:
            raise ValueError("exact noisy energy needs the density engine")
        e = self.hamiltonian.constant.real
        for p, g in zip(self.distributions, self.groups):
            vals = np.arange(p.size)
            parity = (np.bitwise_count(vals[:, None] & g.masks()[None, :]) & 1).astype(np.int64)
            e += float(p @ (g.coefficients()[None, :] * (1 - 2 * parity)).sum(axis=1))
        return e


@dataclass(frozen=True)
class ExperimentResult:
    energy: float
    stderr: float
    retained_fraction: float  # mean over groups that were filtered, 1.0 if none


def run_experiment(
    state: PreparedState, shots: int, seed, mitigation: MitigationSpec | None = None
) -> tuple[ExperimentResult, ExperimentResult | None]:
    """One experiment: ``shots`` per group. Returns (raw, mitigated) from the same samples."""
    raw = [state.sample(i, shots, derive_seed(seed, i)) for i in range(len(state.groups))]
    est = estimate_energy(raw, state.hamiltonian, state.groups)
    plain = ExperimentResult(est.energy, est.stderr, 1.0)
    if mitigation is None:
        return plain, None
    filtered, kept = [], []
    for c, g in zip(raw, state.groups):
        res = pmsv_filter(c, mitigation, g.basis)
        filtered.append(res.counts)
        if len(res.skipped) < len(mitigation.symmetries):
            kept.append(res.retained_fraction)
    est_m = estimate_energy(filtered, state.hamiltonian, state.groups)
    return plain, ExperimentResult(est_m.energy, est_m.stderr, float(np.mean(kept)) if kept else 1.0)


@dataclass
class RepeatStats:
    shots: int
    energies: np.ndarray
    mitigated: np.ndarray | None = None
    retained: np.ndarray | None = None

    @property
    def mean(self) -> float:
        return float(self.energies.mean())

    @property
    def std(self) -> float:
        return float(self.energies.std(ddof=1))

    @property
    def mitigated_mean(self) -> float | None:
        return None if self.mitigated is None else float(self.mitigated.mean())

    @property
    def mitigated_std(self) -> float | None:
        return None if self.mitigated is None else float(self.mitigated.std(ddof=1))


def repeat_experiments(
    state: PreparedState,
    n_experiments: int,
    shots: int,
    seed,
    mitigation: MitigationSpec | None = None,
) -> RepeatStats:
    """Independent experiments; experiment ``k`` uses stream ``(k,)`` of ``seed``."""
    if n_experiments < 2:
        raise ValueError("need at least two experiments for a standard deviation")
    if mitigation is not None:
        unfiltered = [i for i, g in enumerate(state.groups) if not any(measurable(s, g.basis) for s in mitigation.symmetries)]
        if unfiltered:
            log.warning("%s: PMSV cannot check groups %s in their measured bases; they pass through", state.label, unfiltered)
    raw, mit, ret = [], [], []
    for k in range(n_experiments):
        a, b = run_experiment(state, shots, derive_seed(seed, k), mitigation)
        raw.append(a.energy)
        if b is not None:
            mit.append(b.energy)
            ret.append(b.retained_fraction)
    return RepeatStats(
        shots,
        np.array(raw),
        np.array(mit) if mitigation is not None else None,
        np.array(ret) if mitigation is not None else None,
    )


def shots_sweep(
    state: PreparedState,
    budgets: Sequence[int],
    n_experiments: int,
    seed,
    mitigation: MitigationSpec | None = None,
) -> list[RepeatStats]:
    """``repeat_experiments`` per budget; budget ``i`` uses stream ``(i,)`` of ``seed``."""
    return [
        repeat_experiments(state, n_experiments, b, derive_seed(seed, i), mitigation) for i, b in enumerate(budgets)
    ]


COMPILATION = ("auto", "unitary", "state")


def execution_circuits(ansatz: Circuit, groups: Sequence[MeasurementGroup], compilation: str = "auto") -> list[Circuit]:
    """Native circuits measuring each group on the state ``ansatz`` prepares from ``|0...0>``.

    ``unitary`` transpiles ansatz + basis change exactly. ``state`` replaces the
    ansatz by a sparse state-preparation circuit for the same state, which only
    agrees on the actual input. ``auto`` keeps whichever is shallower per group.
    Every returned circuit is checked to prepare the intended state within 1e-10.
    """
    from .circuits import run
    from .transpiler import decompose, optimize, state_distance, state_preparation, transpile

    if compilation not in COMPILATION:
        raise ValueError(f"unknown compilation {compilation!r}; choose from {COMPILATION}")
    prep = state_preparation(run(ansatz)) if compilation != "unitary" else None
    out = []
    for g in groups:
        full = ansatz.copy().extend(g.basis_circuit().gates)
        target = run(full)
        cands = []
        if compilation != "state":
            cands.append(transpile(full)[0])
        if prep is not None:
            cands.append(optimize(decompose(prep.copy().extend(g.basis_circuit().gates))))
        best = min(cands, key=lambda c: (c.depth(), c.gate_count()))
        err = state_distance(run(best), target)
        if err > 1e-10:
            raise ArithmeticError(f"compiled measurement circuit misses its target state by {err:.2e}")
        out.append(best)
    return out


def prepare_state(
    label: str,
    H: QubitOperator,
    ansatz: Circuit,
    noise: NoiseModel,
    engine: str = "density",
    compilation: str = "auto",
) -> PreparedState:
    """Group ``H`` and compile one native measurement circuit per group."""
    groups = measurement_groups(H)
    return PreparedState(label, H, groups, execution_circuits(ansatz, groups, compilation), noise, engine)
