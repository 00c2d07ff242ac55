"""Gate-level circuit IR, statevector simulation, measurement grouping and shot sampling.

States are plain complex ``numpy`` arrays of length ``2**n`` (little-endian,
qubit 0 is the least significant bit). Every kernel here also accepts a
leading batch axis, ``(..., 2**n)``, and acts elementwise on it, so a batch of
trajectories evolves bit-for-bit like the single-state run.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .operators import QubitOperator, apply_operator, pauli_action, pauli_letters

ONE_QUBIT = ("RX", "RY", "RZ", "H", "X")
TWO_QUBIT = ("CX", "ISWAP")
ROTATIONS = ("RX", "RY", "RZ")
KINDS = ONE_QUBIT + TWO_QUBIT + ("PAULIEXP", "MEASURE")

SHOT_CHUNK = 16384


@dataclass(frozen=True)
class Gate:
    """One IR instruction.

    ``PAULIEXP`` carries ``pauli``, one letter per operand qubit, and denotes
    ``exp(-i angle/2 P)``; rotations use the same half-angle convention.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    pauli: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated operand in {self.kind} {self.qubits}")
        arity = {**{k: 1 for k in ONE_QUBIT}, **{k: 2 for k in TWO_QUBIT}}.get(self.kind)
        if arity is not None and len(self.qubits) != arity:
            raise ValueError(f"{self.kind} takes {arity} qubit(s), got {self.qubits}")
        if self.kind in ROTATIONS + ("PAULIEXP",):
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle")
        if self.kind == "PAULIEXP":
            if not self.pauli or len(self.pauli) != len(self.qubits) or set(self.pauli) - set("XYZ"):
                raise ValueError(f"bad Pauli {self.pauli!r} for qubits {self.qubits}")

    @property
    def is_measure(self) -> bool:
        return self.kind == "MEASURE"

    def normalized_angle(self) -> float | None:
        """Angle folded into (-2pi, 2pi] for comparisons."""
        if self.angle is None:
            return None
        a = math.fmod(self.angle, 4 * math.pi)
        if a > 2 * math.pi:
            a -= 4 * math.pi
        elif a <= -2 * math.pi:
            a += 4 * math.pi
        return a

    def to_line(self) -> str:
        parts = [self.kind, *map(str, self.qubits)]
        if self.pauli is not None:
            parts.append(self.pauli)
        if self.angle is not None:
            parts.append(repr(float(self.angle)))
        return " ".join(parts)


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def append(self, kind: str, *qubits: int, angle: float | None = None, pauli: str | None = None) -> "Circuit":
        g = Gate(kind, tuple(qubits), None if angle is None else float(angle), pauli)
        if any(q < 0 or q >= self.n_qubits for q in g.qubits):
            raise ValueError(f"{kind} operand {qubits} outside {self.n_qubits} qubits")
        self.gates.append(g)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self.append(g.kind, *g.qubits, angle=g.angle, pauli=g.pauli)
        return self

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def copy(self) -> "Circuit":
        return Circuit(self.n_qubits, list(self.gates))

    def gate_count(self) -> int:
        return sum(1 for g in self.gates if not g.is_measure)

    def depth(self, multi_qubit_only: bool = False) -> int:
        """Greedy left-to-right layering; measurements are not counted."""
        level = [0] * self.n_qubits
        for g in self.gates:
            if g.is_measure or (multi_qubit_only and len(g.qubits) < 2):
                continue
            d = 1 + max(level[q] for q in g.qubits)
            for q in g.qubits:
                level[q] = d
        return max(level, default=0)

    def entangling_layers(self) -> int:
        return self.depth(multi_qubit_only=True)

    def kinds(self) -> set[str]:
        return {g.kind for g in self.gates}

    def to_text(self) -> str:
        return "\n".join([f"qubits {self.n_qubits}", *(g.to_line() for g in self.gates)]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines or not lines[0].lower().startswith("qubits"):
            raise ValueError("circuit text must start with 'qubits N'")
        circ = cls(int(lines[0].split()[1]))
        for ln in lines[1:]:
            tok = ln.split()
            kind = tok[0].upper()
            rest = tok[1:]
            if kind == "PAULIEXP":
                circ.append(kind, *map(int, rest[:-2]), pauli=rest[-2], angle=float(rest[-1]))
            elif kind in ROTATIONS:
                circ.append(kind, *map(int, rest[:-1]), angle=float(rest[-1]))
            elif kind == "MEASURE":
                circ.append(kind, *map(int, rest))
            else:
                circ.append(kind, *map(int, rest))
        return circ


# --------------------------------------------------------------------------
# gate matrices (two-qubit local index = b0 + 2*b1 for operands (q0, q1))

_I2 = np.eye(2, dtype=np.complex128)
PAULI_MATRICES = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
CX_MATRIX = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=np.complex128)
ISWAP_MATRIX = np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)


def rotation(axis: str, angle: float) -> np.ndarray:
    return math.cos(angle / 2) * _I2 - 1j * math.sin(angle / 2) * PAULI_MATRICES[axis]


def gate_matrix(g: Gate) -> np.ndarray:
    if g.kind in ROTATIONS:
        return rotation(g.kind[1], g.angle)
    if g.kind == "H":
        return H_MATRIX
    if g.kind == "X":
        return PAULI_MATRICES["X"]
    if g.kind == "CX":
        return CX_MATRIX
    if g.kind == "ISWAP":
        return ISWAP_MATRIX
    raise ValueError(f"no fixed matrix for {g.kind}")


def apply_1q(state: np.ndarray, u: np.ndarray, q: int) -> np.ndarray:
    n = state.shape[-1].bit_length() - 1
    v = state.reshape(-1, 1 << (n - 1 - q), 2, 1 << q)
    s0, s1 = v[:, :, 0, :], v[:, :, 1, :]
    out = np.empty_like(v)
    out[:, :, 0, :] = u[0, 0] * s0 + u[0, 1] * s1
    out[:, :, 1, :] = u[1, 0] * s0 + u[1, 1] * s1
    return out.reshape(state.shape)


_PAIR_CACHE: dict[tuple[int, int, int], tuple[np.ndarray, ...]] = {}


def _pair_indices(n: int, q0: int, q1: int) -> tuple[np.ndarray, ...]:
    key = (n, q0, q1)
    if key not in _PAIR_CACHE:
        basis = np.arange(1 << n, dtype=np.int64)
        base = basis[((basis >> q0) & 1 == 0) & ((basis >> q1) & 1 == 0)]
        _PAIR_CACHE[key] = tuple(base | (b0 << q0) | (b1 << q1) for b1 in (0, 1) for b0 in (0, 1))
    return _PAIR_CACHE[key]


def apply_2q(state: np.ndarray, u: np.ndarray, q0: int, q1: int) -> np.ndarray:
    n = state.shape[-1].bit_length() - 1
    idx = _pair_indices(n, q0, q1)
    parts = [state[..., i] for i in idx]
    out = np.empty_like(state)
    for k in range(4):
        acc = u[k, 0] * parts[0]
        for m in range(1, 4):
            if u[k, m] != 0:
                acc = acc + u[k, m] * parts[m]
        out[..., idx[k]] = acc
    return out


def pauli_key(qubits: Sequence[int], letters: str) -> tuple[int, int]:
    x = z = 0
    for q, c in zip(qubits, letters):
        if c in "XY":
            x |= 1 << q
        if c in "YZ":
            z |= 1 << q
    return x, z


def apply_pauli_exp(state: np.ndarray, key: tuple[int, int], angle: float, n_qubits: int) -> np.ndarray:
    """``exp(-i angle/2 P) psi = cos(angle/2) psi - i sin(angle/2) P psi``."""
    src, sign = pauli_action(key, n_qubits)
    return math.cos(angle / 2) * state - 1j * math.sin(angle / 2) * (sign * state[..., src])


def expand_pauli_exp(g: Gate) -> list[Gate]:
    """CX-ladder expansion: basis change, parity chain, RZ, uncompute."""
    qs, letters = g.qubits, g.pauli
    pre, post = [], []
    for q, c in zip(qs, letters):
        if c == "X":
            pre.append(Gate("H", (q,)))
            post.append(Gate("H", (q,)))
        elif c == "Y":
            pre.append(Gate("RX", (q,), math.pi / 2))
            post.append(Gate("RX", (q,), -math.pi / 2))
    chain = [Gate("CX", (qs[i], qs[i + 1])) for i in range(len(qs) - 1)]
    return pre + chain + [Gate("RZ", (qs[-1],), g.angle)] + chain[::-1] + post


def expand_circuit(circ: Circuit) -> Circuit:
    out = Circuit(circ.n_qubits)
    for g in circ.gates:
        out.gates.extend(expand_pauli_exp(g) if g.kind == "PAULIEXP" else [g])
    return out


def apply_gate(state: np.ndarray, g: Gate, n_qubits: int) -> np.ndarray:
    if g.kind == "MEASURE":
        return state
    if g.kind == "PAULIEXP":
        return apply_pauli_exp(state, pauli_key(g.qubits, g.pauli), g.angle, n_qubits)
    if len(g.qubits) == 1:
        return apply_1q(state, gate_matrix(g), g.qubits[0])
    return apply_2q(state, gate_matrix(g), g.qubits[0], g.qubits[1])


def run(circuit: Circuit, initial: np.ndarray | None = None, pauli_exp: str = "direct") -> np.ndarray:
    """Apply ``circuit`` to ``initial`` (default ``|0...0>``).

    ``pauli_exp="ladder"`` routes PAULIEXP gates through their CX-ladder
    expansion instead of the direct sparse action.
    """
    dim = 1 << circuit.n_qubits
    if initial is None:
        state = np.zeros(dim, dtype=np.complex128)
        state[0] = 1.0
    else:
        state = np.asarray(initial, dtype=np.complex128)
        if state.shape[-1] != dim:
            raise ValueError(f"state dimension {state.shape[-1]} != 2**{circuit.n_qubits}")
    gates = expand_circuit(circuit).gates if pauli_exp == "ladder" else circuit.gates
    for g in gates:
        state = apply_gate(state, g, circuit.n_qubits)
    return state


def unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary, obtained by running every basis state as one batch."""
    dim = 1 << circuit.n_qubits
    return run(circuit, np.eye(dim, dtype=np.complex128)).T


def hartree_fock_state(n_qubits: int, n_electrons: int) -> np.ndarray:
    """Basis state with the ``n_electrons`` lowest spin-orbitals occupied."""
    if not 0 <= n_electrons <= n_qubits:
        raise ValueError(f"{n_electrons} electrons do not fit in {n_qubits} qubits")
    state = np.zeros(1 << n_qubits, dtype=np.complex128)
    state[(1 << n_electrons) - 1] = 1.0
    return state


def expectation(state: np.ndarray, op: QubitOperator) -> float:
    if not op.is_hermitian():
        raise ValueError("expectation requires a Hermitian operator")
    if state.shape[-1] != 1 << op.n_qubits:
        raise ValueError("state and operator qubit counts differ")
    val = np.vdot(state, apply_operator(op, state))
    if abs(val.imag) > 1e-10:
        raise ArithmeticError(f"expectation has imaginary residual {val.imag:.3g}")
    return float(val.real)


def bitstring(index: int, n_qubits: int) -> str:
    """Qubit 0 is the rightmost character."""
    return format(index, f"0{n_qubits}b")


# --------------------------------------------------------------------------
# measurement grouping


@dataclass(frozen=True)
class MeasurementGroup:
    """Qubit-wise commuting terms measured together.

    ``basis`` maps qubit -> measured letter; ``terms`` keeps the original Pauli
    keys with their (real) coefficients. After ``basis_circuit`` every term is
    read off as the parity of the bits in ``support_mask(key)``.
    """

    basis: dict[int, str]
    terms: tuple[tuple[tuple[int, int], float], ...]
    n_qubits: int

    def basis_circuit(self) -> Circuit:
        c = Circuit(self.n_qubits)
        for q in sorted(self.basis):
            if self.basis[q] == "X":
                c.append("H", q)
            elif self.basis[q] == "Y":
                c.append("RX", q, angle=math.pi / 2)
        return c

    def masks(self) -> np.ndarray:
        return np.array([k[0] | k[1] for k, _ in self.terms], dtype=np.int64)

    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms])


def support_mask(key: tuple[int, int]) -> int:
    return key[0] | key[1]


def measurement_groups(op: QubitOperator) -> list[MeasurementGroup]:
    """Greedy qubit-wise-commuting partition, largest |coefficient| first."""
    if not op.is_hermitian():
        raise ValueError("measurement grouping requires a Hermitian operator")
    items = sorted(
        ((k, c.real) for k, c in op.terms.items() if k != (0, 0)),
        key=lambda kc: (-abs(kc[1]), kc[0]),
    )
    groups: list[tuple[dict[int, str], list]] = []
    for key, coef in items:
        letters = pauli_letters(key, op.n_qubits)
        for basis, members in groups:
            if all(basis.get(q, c) == c for q, c in letters.items()):
                basis.update(letters)
                members.append((key, coef))
                break
        else:
            groups.append((dict(letters), [(key, coef)]))
    return [MeasurementGroup(dict(sorted(b.items())), tuple(m), op.n_qubits) for b, m in groups]


# --------------------------------------------------------------------------
# sampling


@dataclass
class ShotCounts:
    counts: dict[str, int]
    n_qubits: int

    @property
    def shots(self) -> int:
        return sum(self.counts.values())

    def to_json(self) -> str:
        return json.dumps({"n_qubits": self.n_qubits, "counts": dict(sorted(self.counts.items()))}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ShotCounts":
        d = json.loads(text)
        return cls({k: int(v) for k, v in d["counts"].items()}, int(d["n_qubits"]))

    @classmethod
    def from_outcomes(cls, outcomes: np.ndarray, n_qubits: int) -> "ShotCounts":
        vals, cnt = np.unique(outcomes, return_counts=True)
        return cls({bitstring(int(v), n_qubits): int(c) for v, c in zip(vals, cnt)}, n_qubits)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        keys = sorted(self.counts)
        return (
            np.array([int(k, 2) for k in keys], dtype=np.int64),
            np.array([self.counts[k] for k in keys], dtype=np.int64),
        )


def derive_seed(seed, *key: int) -> np.random.SeedSequence:
    """Child stream ``key`` of ``seed`` (an int or a SeedSequence), by counter not by draw order."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key))
    return np.random.SeedSequence(int(seed), spawn_key=tuple(key))


def shot_chunks(shots: int, seed) -> Iterator[tuple[int, np.random.Generator, np.random.Generator]]:
    """Yield ``(n, measurement_rng, noise_rng)`` per fixed-size shot chunk.

    Chunk ``c`` always draws from streams ``(c, 0)`` and ``(c, 1)``, so results do
    not depend on how chunks are scheduled.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    for c, start in enumerate(range(0, shots, SHOT_CHUNK)):
        n = min(SHOT_CHUNK, shots - start)
        yield (
            n,
            np.random.Generator(np.random.PCG64(derive_seed(seed, c, 0))),
            np.random.Generator(np.random.PCG64(derive_seed(seed, c, 1))),
        )


def draw_outcomes(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw; ``probs`` is ``(dim,)`` or ``(len(u), dim)``."""
    cdf = np.cumsum(probs, axis=-1)
    cdf = cdf / cdf[..., -1:]
    if cdf.ndim == 1:
        # same count of cdf entries <= u, without the (shots, dim) temporary
        out = np.searchsorted(cdf, u, side="right")
    else:
        out = (cdf <= u[:, None]).sum(axis=-1)
    return np.minimum(out, probs.shape[-1] - 1)


def sample_distribution(probs: np.ndarray, shots: int, seed, n_qubits: int) -> ShotCounts:
    outcomes = [draw_outcomes(probs, mrng.random(n)) for n, mrng, _ in shot_chunks(shots, seed)]
    return ShotCounts.from_outcomes(np.concatenate(outcomes), n_qubits)


def sample_counts(state: np.ndarray, shots: int, seed) -> ShotCounts:
    """Sample ``shots`` computational-basis outcomes from ``|amp|**2``."""
    n = state.shape[-1].bit_length() - 1
    return sample_distribution(np.abs(state) ** 2, shots, seed, n)
