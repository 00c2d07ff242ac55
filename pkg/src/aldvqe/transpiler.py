"""Lowering to the native set {RX, RY, RZ, ISWAP} and peephole optimization."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuits import (
    PAULI_MATRICES,
    ROTATIONS,
    Circuit,
    Gate,
    expand_circuit,
    gate_matrix,
    pauli_key,
    rotation,
    unitary,
)

NATIVE = frozenset(ROTATIONS + ("ISWAP", "MEASURE"))
ANGLE_TOL = 1e-12
_HALF_PI = math.pi / 2


def _cx_native(c: int, t: int) -> list[Gate]:
    return [
        Gate("ISWAP", (c, t)),
        Gate("RY", (c,), _HALF_PI),
        Gate("ISWAP", (c, t)),
        Gate("RZ", (c,), _HALF_PI),
        Gate("RX", (t,), _HALF_PI),
        Gate("RZ", (t,), math.pi),
    ]


def decompose(circuit: Circuit) -> Circuit:
    """Rewrite H, X and CX into native gates; PAULIEXP must be lowered first."""
    out = Circuit(circuit.n_qubits)
    for g in circuit.gates:
        if g.kind in NATIVE:
            out.gates.append(g)
        elif g.kind == "H":
            q = g.qubits
            out.gates += [Gate("RZ", q, _HALF_PI), Gate("RX", q, _HALF_PI), Gate("RZ", q, _HALF_PI)]
        elif g.kind == "X":
            out.gates.append(Gate("RX", g.qubits, math.pi))
        elif g.kind == "CX":
            out.gates += _cx_native(*g.qubits)
        else:
            raise ValueError(f"cannot decompose {g.kind}; expand PAULIEXP gates first")
    # each single-qubit run is one SU(2) element; emit it as at most three rotations
    gates = out.gates
    while (merged := _merge_1q_runs(gates, out.n_qubits)) is not None:
        gates = merged
    return Circuit(out.n_qubits, gates)


def is_native(circuit: Circuit) -> bool:
    return circuit.kinds() <= NATIVE


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """``min_phi max|u - e^{i phi} v|`` with phi taken from the overlap."""
    ov = np.vdot(v, u)
    ph = ov / abs(ov) if abs(ov) > 1e-300 else 1.0
    return float(np.abs(u - ph * v).max())


def equivalent(a: Circuit, b: Circuit, atol: float = 1e-10) -> bool:
    return a.n_qubits == b.n_qubits and phase_distance(unitary(a), unitary(b)) < atol


# --------------------------------------------------------------------------
# single-qubit resynthesis


def _fold(a: float) -> float:
    """Fold into (-pi, pi]; global phase is ignored so 2pi-periodicity is enough."""
    a = math.remainder(a, 2 * math.pi)
    return math.pi if a == -math.pi else a


def _frames() -> dict[tuple[str, str], tuple[np.ndarray, float]]:
    """For each Euler basis (outer, inner): W with W A W^dag = Z and W B W^dag = s*Y."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    s = np.diag([1, 1j])
    group = [np.eye(2, dtype=complex)]
    frontier = list(group)
    while frontier:
        nxt = []
        for m in frontier:
            for gen in (h, s):
                cand = gen @ m
                if not any(phase_distance(cand, e) < 1e-9 for e in group):
                    group.append(cand)
                    nxt.append(cand)
        frontier = nxt
    out = {}
    for a in "XYZ":
        for b in "XYZ":
            if a == b:
                continue
            for w in group:
                if np.allclose(w @ PAULI_MATRICES[a] @ w.conj().T, PAULI_MATRICES["Z"]):
                    wb = w @ PAULI_MATRICES[b] @ w.conj().T
                    for sign in (1.0, -1.0):
                        if np.allclose(wb, sign * PAULI_MATRICES["Y"]):
                            out[(a, b)] = (w, sign)
                    if (a, b) in out:
                        break
    return out


_EULER_FRAMES = _frames()
_BASIS_ORDER = (("Z", "X"), ("Z", "Y"), ("X", "Z"), ("X", "Y"), ("Y", "Z"), ("Y", "X"))


def _zyz(u: np.ndarray) -> tuple[float, float, float]:
    """``u ~ Rz(phi) Ry(theta) Rz(lam)`` up to phase."""
    v = u / np.sqrt(np.linalg.det(u))
    theta = 2 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    s = math.atan2(v[1, 1].imag, v[1, 1].real)  # (phi + lam) / 2
    d = math.atan2(v[1, 0].imag, v[1, 0].real)  # (phi - lam) / 2
    if abs(v[1, 0]) < 1e-14:
        d = 0.0
    if abs(v[1, 1]) < 1e-14:
        s = 0.0
    return s + d, theta, s - d


def synthesize_1q(u: np.ndarray, q: int) -> list[Gate]:
    """Shortest Euler-angle sequence (over six bases) equal to ``u`` up to phase."""
    best: list[Gate] | None = None
    for outer, inner in _BASIS_ORDER:
        w, sign = _EULER_FRAMES[(outer, inner)]
        phi, theta, lam = _zyz(w @ u @ w.conj().T)
        seq = [(outer, lam), (inner, sign * theta), (outer, phi)]
        gates = [Gate("R" + ax, (q,), _fold(t)) for ax, t in seq if abs(_fold(t)) > ANGLE_TOL]
        if len(gates) == 2 and gates[0].kind == gates[1].kind:
            gates = [Gate(gates[0].kind, (q,), _fold(gates[0].angle + gates[1].angle))]
            gates = [g for g in gates if abs(g.angle) > ANGLE_TOL]
        if best is None or len(gates) < len(best):
            if phase_distance(_product_1q(gates), u) < 1e-11:
                best = gates
        if best is not None and len(best) <= 1:
            break
    if best is None:
        raise ArithmeticError("single-qubit resynthesis failed")
    return best


def _product_1q(gates: Sequence[Gate]) -> np.ndarray:
    m = np.eye(2, dtype=complex)
    for g in gates:
        m = rotation(g.kind[1], g.angle) @ m
    return m


def _touched(g: Gate, n: int) -> tuple[int, ...]:
    if g.kind == "MEASURE" and not g.qubits:
        return tuple(range(n))
    return g.qubits


# --------------------------------------------------------------------------
# passes; each returns a new gate list or None when nothing changed


def _merge_1q_runs(gates: list[Gate], n: int) -> list[Gate] | None:
    runs: list[list[int]] = []
    open_run: dict[int, list[int]] = {}
    for i, g in enumerate(gates):
        if g.kind in ROTATIONS:
            open_run.setdefault(g.qubits[0], []).append(i)
        else:
            for q in _touched(g, n):
                if q in open_run:
                    runs.append(open_run.pop(q))
    runs.extend(open_run.values())

    replace: dict[int, list[Gate]] = {}
    drop: set[int] = set()
    for run in runs:
        seq = [gates[i] for i in run]
        q = seq[0].qubits[0]
        new = synthesize_1q(_product_1q(seq), q)
        if len(new) < len(seq):
            replace[run[-1]] = new
            drop.update(run[:-1])
    if not replace:
        return None
    out = []
    for i, g in enumerate(gates):
        if i in replace:
            out.extend(replace[i])
        elif i not in drop:
            out.append(g)
    return out


def _iswap_pairs(gates: list[Gate], n: int) -> list[Gate] | None:
    """``ISWAP . (RZ_a(x) RZ_b(y)) . ISWAP == RZ_a(y + pi) RZ_b(x + pi)`` up to phase."""
    for i, g in enumerate(gates):
        if g.kind != "ISWAP":
            continue
        a, b = g.qubits
        acc = {a: 0.0, b: 0.0}
        between = []
        for j in range(i + 1, len(gates)):
            h = gates[j]
            if not set(_touched(h, n)) & {a, b}:
                continue
            if h.kind == "RZ":
                acc[h.qubits[0]] += h.angle
                between.append(j)
                continue
            if h.kind == "ISWAP" and set(h.qubits) == {a, b}:
                new = [Gate("RZ", (a,), _fold(acc[b] + math.pi)), Gate("RZ", (b,), _fold(acc[a] + math.pi))]
                new = [x for x in new if abs(x.angle) > ANGLE_TOL]
                skip = set(between) | {i, j}
                out = []
                for k, gk in enumerate(gates):
                    if k == i:
                        out.extend(new)
                    elif k not in skip:
                        out.append(gk)
                return out
            break
    return None


def _local_factors(u: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Split ``u = kron(B_q1, A_q0)`` when the two-qubit block is a product."""
    r = u.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    uu, s, vh = np.linalg.svd(r)
    if s[1] > 1e-9:
        return None
    b = np.sqrt(s[0]) * uu[:, 0].reshape(2, 2)
    a = np.sqrt(s[0]) * vh[0, :].reshape(2, 2)
    return a / np.sqrt(abs(np.linalg.det(a))), b / np.sqrt(abs(np.linalg.det(b)))


def _block_unitary(seq: Sequence[Gate], a: int, b: int) -> np.ndarray:
    local = {a: 0, b: 1}
    m = np.eye(4, dtype=complex)
    for g in seq:
        if len(g.qubits) == 1:
            u1 = gate_matrix(g)
            op = np.kron(np.eye(2), u1) if local[g.qubits[0]] == 0 else np.kron(u1, np.eye(2))
        else:
            op = gate_matrix(g)
            if local[g.qubits[0]] == 1:  # ISWAP is symmetric; kept general for safety
                swap = np.eye(4)[[0, 2, 1, 3]]
                op = swap @ op @ swap
        m = op @ m
    return m


def _collapse_local_blocks(gates: list[Gate], n: int) -> list[Gate] | None:
    """Replace an ISWAP-bearing two-qubit block that acts as a product of 1q gates."""
    for i, g in enumerate(gates):
        if g.kind != "ISWAP":
            continue
        a, b = g.qubits
        members = [i]
        iswap_ends = []
        for j in range(i + 1, len(gates)):
            h = gates[j]
            qs = set(_touched(h, n))
            if not qs & {a, b}:
                continue
            if not qs <= {a, b} or h.kind == "MEASURE":
                break
            members.append(j)
            if h.kind == "ISWAP":
                iswap_ends.append(len(members))
        for end in reversed(iswap_ends):
            block = members[:end]
            u = _block_unitary([gates[k] for k in block], a, b)
            factors = _local_factors(u)
            if factors is None:
                continue
            new = synthesize_1q(factors[0], a) + synthesize_1q(factors[1], b)
            if len(new) >= len(block):
                continue
            check = _block_unitary(new, a, b)
            if phase_distance(check, u) > 1e-11:
                continue
            skip = set(block)
            out = []
            for k, gk in enumerate(gates):
                if k == block[-1]:
                    out.extend(new)
                elif k not in skip:
                    out.append(gk)
            return out
    return None


def _adjacent_on(gates: list[Gate], i: int, q: int, step: int, n: int) -> int | None:
    j = i + step
    while 0 <= j < len(gates):
        if q in _touched(gates[j], n):
            return j
        j += step
    return None


def _route_z_rotations(gates: list[Gate], n: int) -> list[Gate] | None:
    """Move RZ across an ISWAP to the partner qubit when that lowers the depth.

    ``ISWAP . RZ_a(x) == RZ_b(x) . ISWAP``: ISWAP maps Z_a to Z_b.
    """
    gates = list(gates)
    depth = Circuit(n, gates).depth()
    moved = False
    i = 0
    while i < len(gates):
        g = gates[i]
        if g.kind == "ISWAP":
            for side in (0, 1):
                q, p = g.qubits[side], g.qubits[1 - side]
                for step in (-1, 1):
                    j = _adjacent_on(gates, i, q, step, n)
                    if j is None or gates[j].kind != "RZ":
                        continue
                    rz = Gate("RZ", (p,), gates[j].angle)
                    trial = list(gates)
                    if step < 0:
                        trial.insert(i + 1, rz)
                        del trial[j]
                    else:
                        del trial[j]
                        trial.insert(i, rz)
                    d = Circuit(n, trial).depth()
                    if d < depth:
                        gates, depth, moved = trial, d, True
                        i = trial.index(g, max(i - 1, 0))
                        break
                else:
                    continue
                break
        i += 1
    return gates if moved else None


_PASSES = (_merge_1q_runs, _iswap_pairs, _collapse_local_blocks, _route_z_rotations)


def optimize(circuit: Circuit) -> Circuit:
    """Run the peephole passes to a fixpoint.

    Every rewrite strictly lowers (ISWAP count, gate count, depth)
    lexicographically, so the loop ends, and a second call finds nothing to do.
    """
    if not is_native(circuit):
        raise ValueError(f"optimize expects a native circuit, got {sorted(circuit.kinds() - NATIVE)}")
    gates = list(circuit.gates)
    changed = True
    while changed:
        changed = False
        for p in _PASSES:
            new = p(gates, circuit.n_qubits)
            if new is not None:
                gates = new
                changed = True
    return Circuit(circuit.n_qubits, gates)


# --------------------------------------------------------------------------
# PAULIEXP lowering by simultaneous diagonalization
#
# A run of mutually commuting Pauli rotations equals V^dag D V with V a
# Clifford that maps every string to a signed Z-string, and D a phase
# polynomial. Rows are (x, z, sign) with (1, 1) meaning Y.

_MAX_CANDIDATES = 256


def _bit(v: int, q: int) -> int:
    return (v >> q) & 1


def _conjugate(rows, op: str, a: int, b: int | None = None):
    """Heisenberg update ``P -> V P V^dag`` for V in {H, S, CX(a, b)}."""
    out = []
    for x, z, r in rows:
        if op == "H":
            r ^= _bit(x, a) & _bit(z, a)
            xa, za = _bit(x, a), _bit(z, a)
            x = (x & ~(1 << a)) | (za << a)
            z = (z & ~(1 << a)) | (xa << a)
        elif op == "S":
            r ^= _bit(x, a) & _bit(z, a)
            z ^= _bit(x, a) << a
        else:
            r ^= _bit(x, a) & _bit(z, b) & (_bit(x, b) ^ _bit(z, a) ^ 1)
            x ^= _bit(x, a) << b
            z ^= _bit(z, b) << a
        out.append((x, z, r))
    return out


def _gf2_rank(vecs) -> int:
    basis: list[int] = []
    for v in vecs:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def _independent_rows(keys, n: int):
    basis, rows = [], []
    for x, z in keys:
        w = x | (z << n)
        for b in basis:
            w = min(w, w ^ b)
        if w:
            basis.append(w)
            rows.append((x, z, 0))
    return rows


def _diagonalizer(rows, n: int, hadamards, order):
    """Clifford op list turning ``rows`` into Z-strings, or None if this choice fails."""
    rows = [rows[i] for i in order]
    ops = []

    def do(op, a, b=None):
        nonlocal rows
        rows = _conjugate(rows, op, a, b)
        ops.append((op, a, b))

    for q in hadamards:
        do("H", q)
    r = len(rows)
    if _gf2_rank([x for x, _, _ in rows]) < r:
        return None
    pivots = []
    for i in range(r):
        x, z, _ = rows[i]
        if x == 0:
            return None
        p = (x & -x).bit_length() - 1
        pivots.append(p)
        for k in range(r):
            if k != i and _bit(rows[k][0], p):
                xk, zk, _ = rows[k]
                rows[k] = (xk ^ x, zk ^ z, 0)
    for i, p in enumerate(pivots):
        for j in range(n):
            if j != p and _bit(rows[i][0], j):
                do("CX", p, j)
    for i, p in enumerate(pivots):
        if _bit(rows[i][1], p):
            do("S", p)
    # commuting rows leave a symmetric Z block on the pivots; CZ clears it
    for i in range(r):
        for k in range(i + 1, r):
            if _bit(rows[i][1], pivots[k]):
                do("H", pivots[k])
                do("CX", pivots[i], pivots[k])
                do("H", pivots[k])
    for p in pivots:
        do("H", p)
    return ops


def _diagonalizers(keys, n: int):
    rows = _independent_rows(keys, n)
    support = 0
    for x, z, _ in rows:
        support |= x | z
    qs = [q for q in range(n) if _bit(support, q)]
    orders = list(itertools.permutations(range(len(rows)))) if len(rows) <= 4 else [
        tuple(range(len(rows))),
        tuple(reversed(range(len(rows)))),
    ]
    found, k_min = 0, None
    for k in range(len(qs) + 1):
        if k_min is not None and k > k_min + 1:
            break
        for sub in itertools.combinations(qs, k):
            for order in orders:
                ops = _diagonalizer(rows, n, sub, order)
                if ops is None:
                    continue
                k_min = k if k_min is None else k_min
                found += 1
                yield ops
                if found >= _MAX_CANDIDATES:
                    return


def _clifford_gates(ops, inverse: bool = False) -> list[Gate]:
    out = []
    for op, a, b in reversed(ops) if inverse else ops:
        if op == "H":
            out.append(Gate("H", (a,)))
        elif op == "S":
            out.append(Gate("RZ", (a,), -_HALF_PI if inverse else _HALF_PI))
        else:
            out.append(Gate("CX", (a, b)))
    return out


def _hamming(a: int, b: int) -> int:
    return (a ^ b).bit_count()


@lru_cache(maxsize=4096)
def _gray_order(masks: tuple[int, ...]) -> tuple[int, ...]:
    """Visit order from 0 through all masks and back to 0 with fewest bit flips."""
    m = len(masks)
    if m > 9:  # greedy nearest neighbour
        left, cur, out = list(masks), 0, []
        while left:
            nxt = min(left, key=lambda v: (_hamming(v, cur), v))
            left.remove(nxt)
            out.append(nxt)
            cur = nxt
        return tuple(out)
    best: dict[tuple[int, int], tuple[int, int | None]] = {(1 << i, i): (masks[i].bit_count(), None) for i in range(m)}
    for s in range(1, 1 << m):
        for i in range(m):
            if (s, i) not in best:
                continue
            c = best[(s, i)][0]
            for j in range(m):
                if s >> j & 1:
                    continue
                key, nc = (s | 1 << j, j), c + _hamming(masks[i], masks[j])
                if key not in best or nc < best[key][0]:
                    best[key] = (nc, i)
    full = (1 << m) - 1
    end = min(range(m), key=lambda i: (best[(full, i)][0] + masks[i].bit_count(), i))
    path, s, i = [], full, end
    while i is not None:
        path.append(masks[i])
        prev = best[(s, i)][1]
        s ^= 1 << i
        i = prev
    return tuple(reversed(path))


def _phase_polynomial(terms: dict[int, float], n: int) -> list[Gate]:
    """Gates for prod exp(-i a/2 Z_mask): parities accumulate on a shared target."""
    gates: list[Gate] = []
    rem = dict(terms)
    while rem:
        counts = [sum(_bit(m, q) for m in rem) for q in range(n)]
        t = max(range(n), key=lambda q: (counts[q], -q))
        mine = sorted(m ^ (1 << t) for m in rem if _bit(m, t))
        cur = 0
        for m in _gray_order(tuple(mine)):
            gates += [Gate("CX", (q, t)) for q in range(n) if _bit(m ^ cur, q)]
            cur = m
            gates.append(Gate("RZ", (t,), rem.pop(m | 1 << t)))
        gates += [Gate("CX", (q, t)) for q in range(n) if _bit(cur, q)]
    return gates


def _commute(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return ((a[0] & b[1]) ^ (a[1] & b[0])).bit_count() % 2 == 0


def synthesize_pauli_block(block: Sequence[Gate], n: int) -> list[Gate]:
    """Lower commuting PAULIEXP gates to {H, RZ, CX}, fewest CX then shallowest."""
    paulis = [(pauli_key(g.qubits, g.pauli), g.angle) for g in block]
    keys = [k for k, _ in paulis]
    if not all(_commute(a, b) for a, b in itertools.combinations(keys, 2)):
        raise ValueError("PAULIEXP block does not commute")
    best, best_cost = None, None
    for ops in _diagonalizers(keys, n):
        terms: dict[int, float] = {}
        for (x, z), a in paulis:
            ((x2, z2, s),) = _conjugate_all([(x, z, 0)], ops)
            terms[z2] = terms.get(z2, 0.0) + (-a if s else a)
        terms = {m: a for m, a in terms.items() if abs(a) > ANGLE_TOL}
        body = _clifford_gates(ops) + _phase_polynomial(terms, n) + _clifford_gates(ops, inverse=True)
        cost = (sum(g.kind == "CX" for g in body), Circuit(n, body).depth(), len(body))
        if best_cost is None or cost < best_cost:
            best, best_cost = body, cost
    return best


def _conjugate_all(rows, ops):
    for op, a, b in ops:
        rows = _conjugate(rows, op, a, b)
    return rows


def lower_pauli_exps(circuit: Circuit, method: str = "diagonalize") -> Circuit:
    """Replace PAULIEXP gates by {H, RX, RZ, CX}.

    ``"ladder"`` expands each gate on its own; ``"diagonalize"`` collects
    maximal runs of consecutive, mutually commuting PAULIEXP gates and
    synthesizes each run jointly.
    """
    if method == "ladder":
        return expand_circuit(circuit)
    if method != "diagonalize":
        raise ValueError(f"unknown PAULIEXP lowering {method!r}")
    out: list[Gate] = []
    run: list[Gate] = []
    memo: dict[tuple, list[Gate]] = {}

    def flush():
        if run:
            key = tuple((g.qubits, g.pauli, g.angle) for g in run)
            if key not in memo:
                memo[key] = synthesize_pauli_block(run, circuit.n_qubits)
            out.extend(memo[key])
            run.clear()

    for g in circuit.gates:
        if g.kind == "PAULIEXP":
            k = pauli_key(g.qubits, g.pauli)
            if not all(_commute(k, pauli_key(h.qubits, h.pauli)) for h in run):
                flush()
            run.append(g)
        else:
            flush()
            out.append(g)
    flush()
    return Circuit(circuit.n_qubits, out)


# --------------------------------------------------------------------------
# input-aware compilation: circuits that only need to be right on |0...0>
#
# Sparse state preparation by backward merging: repeatedly align two support
# strings with CX so they differ in one bit, then fold their amplitudes into
# one with a (multi-)controlled SU(2) rotation; finally X the survivor to
# |0...0>. The inverse of that sequence prepares the state.

_SPARSE_TOL = 1e-12


def _su2(a0: complex, a1: complex) -> np.ndarray:
    """SU(2) matrix sending (a0, a1) to (|a|, 0)."""
    r = math.hypot(abs(a0), abs(a1))
    return np.array([[a0.conjugate(), a1.conjugate()], [-a1, a0]], dtype=complex) / r


def _su2_root(u: np.ndarray, k: int) -> np.ndarray:
    w, v = np.linalg.eig(u)
    return v @ np.diag(np.exp(1j * np.angle(w) / k)) @ np.linalg.inv(v)


def _zyz_exact(u: np.ndarray) -> tuple[float, float, float]:
    """``u == Rz(b) Ry(c) Rz(d)`` exactly (no phase) for ``u`` in SU(2)."""
    c = 2 * math.atan2(abs(u[1, 0]), abs(u[0, 0]))
    s = -2 * np.angle(u[0, 0]) if abs(u[0, 0]) > 1e-14 else 0.0  # b + d
    t = 2 * np.angle(u[1, 0]) if abs(u[1, 0]) > 1e-14 else 0.0  # b - d
    b, d = (s + t) / 2, (s - t) / 2
    cand = rotation("Z", b) @ rotation("Y", c) @ rotation("Z", d)
    if not np.allclose(cand, u, atol=1e-10):  # the other sheet of the half angles
        b += 2 * math.pi
    return float(b), float(c), float(d)


def _controlled_su2(u: np.ndarray, control: int, target: int) -> list[Gate]:
    """Two-CX construction ``A X B X C`` with ``ABC = I``; exact because det u = 1."""
    b, c, d = _zyz_exact(u)
    seq = [
        Gate("RZ", (target,), (d - b) / 2),
        Gate("CX", (control, target)),
        Gate("RZ", (target,), -(d + b) / 2),
        Gate("RY", (target,), -c / 2),
        Gate("CX", (control, target)),
        Gate("RY", (target,), c / 2),
        Gate("RZ", (target,), b),
    ]
    return [g for g in seq if g.kind == "CX" or abs(_fold(g.angle)) > ANGLE_TOL]


def _multi_controlled_su2(u: np.ndarray, controls: Sequence[int], target: int) -> list[Gate]:
    """All-ones-controlled ``u`` via signed powers of ``u^(1/2^(m-1))`` over control parities."""
    m = len(controls)
    if m == 0:
        b, c, d = _zyz_exact(u)
        return [Gate("RZ", (target,), d), Gate("RY", (target,), c), Gate("RZ", (target,), b)]
    if m == 1:
        return _controlled_su2(u, controls[0], target)
    v = _su2_root(u, 1 << (m - 1))
    out: list[Gate] = []
    for subset in range(1, 1 << m):
        members = [controls[i] for i in range(m) if subset >> i & 1]
        lead, rest = members[-1], members[:-1]
        par = [Gate("CX", (q, lead)) for q in rest]
        power = v if len(members) % 2 else v.conj().T
        out += par + _controlled_su2(power, lead, target) + par[::-1]
    return out


def _control_set(x: int, others: list[int], q: int, n: int) -> list[int]:
    """Greedy smallest set of bits (not q) on which ``x`` differs from every string in ``others``."""
    chosen: list[int] = []
    left = [y for y in others]
    while left:
        best = max(
            (b for b in range(n) if b != q and b not in chosen),
            key=lambda b: (sum((y >> b & 1) != (x >> b & 1) for y in left), -b),
        )
        chosen.append(best)
        left = [y for y in left if (y >> best & 1) == (x >> best & 1)]
    return sorted(chosen)


def _merge_cost(n_align: int, n_controls: int) -> int:
    if n_controls == 0:
        return n_align
    if n_controls == 1:
        return n_align + 2
    m = n_controls
    return n_align + 2 * ((1 << m) - 1) + sum(2 * (bin(s).count("1") - 1) for s in range(1, 1 << m))


def state_preparation(psi: np.ndarray) -> Circuit:
    """Circuit over {X, CX, RY, RZ} with ``run(circuit) == e^{i phi} psi``."""
    psi = np.asarray(psi, dtype=complex)
    n = psi.size.bit_length() - 1
    if psi.size != 1 << n or abs(np.linalg.norm(psi) - 1) > 1e-9:
        raise ValueError("expected a normalized state of length 2**n")
    amps = {int(i): complex(psi[i]) for i in np.flatnonzero(np.abs(psi) > _SPARSE_TOL)}
    ops: list[Gate] = []  # applied to psi, mapping it to a basis state

    def apply_cx(c, t):
        nonlocal amps
        amps = {(k ^ (1 << t)) if k >> c & 1 else k: a for k, a in amps.items()}
        ops.append(Gate("CX", (c, t)))

    while len(amps) > 1:
        keys = sorted(amps)
        best = None
        for i, x1 in enumerate(keys):
            for x2 in keys[i + 1 :]:
                diff = [b for b in range(n) if (x1 ^ x2) >> b & 1]
                for q in diff:
                    flip = sum(1 << t for t in diff if t != q)
                    moved = [y ^ flip if y >> q & 1 else y for y in keys]
                    lo = (x1 ^ flip if x1 >> q & 1 else x1) & ~(1 << q)
                    others = [y for y in moved if y & ~(1 << q) != lo]
                    ctrl = _control_set(lo, others, q, n)
                    cost = (_merge_cost(len(diff) - 1, len(ctrl)), x1, x2, q)
                    if best is None or cost < best[0]:
                        best = (cost, q, diff, lo, ctrl)
        _, q, diff, lo, ctrl = best
        for t in diff:
            if t != q:
                apply_cx(q, t)
        u = _su2(amps.get(lo, 0j), amps.get(lo | (1 << q), 0j))
        flips = [Gate("X", (b,)) for b in ctrl if not lo >> b & 1]
        ops += flips + _multi_controlled_su2(u, ctrl, q) + flips
        amps[lo] = math.hypot(abs(amps.pop(lo, 0j)), abs(amps.pop(lo | (1 << q), 0j)))
    (last,) = amps
    ops += [Gate("X", (b,)) for b in range(n) if last >> b & 1]
    return Circuit(n, _invert(ops))


def _invert(ops: Sequence[Gate]) -> list[Gate]:
    out = []
    for g in reversed(ops):
        out.append(g if g.kind in ("X", "CX", "H") else Gate(g.kind, g.qubits, -g.angle))
    return out


def state_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``min_phi ||a - e^{i phi} b||``."""
    ov = np.vdot(b, a)
    ph = ov / abs(ov) if abs(ov) > 1e-300 else 1.0
    return float(np.linalg.norm(a - ph * b))


# --------------------------------------------------------------------------
# reporting


@dataclass
class TranspileReport:
    input_depth: int
    input_gates: int
    decomposed_depth: int
    decomposed_gates: int
    output_depth: int
    output_gates: int
    n_qubits: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)

    def to_text(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in self.as_dict().items()) + "\n"


def transpile(circuit: Circuit, lowering: str = "diagonalize") -> tuple[Circuit, TranspileReport]:
    """Lower PAULIEXP, decompose, optimize.

    The report's input figures are those of the gate-level IR, i.e. with every
    PAULIEXP written as its CX ladder, so they do not depend on ``lowering``.
    """
    ir = expand_circuit(circuit)
    dec = decompose(lower_pauli_exps(circuit, lowering))
    opt = optimize(dec)
    rep = TranspileReport(
        ir.depth(), ir.gate_count(), dec.depth(), dec.gate_count(), opt.depth(), opt.gate_count(), circuit.n_qubits
    )
    return opt, rep


@dataclass
class GroupTranspileSummary:
    """Min-max resource ranges over the measurement-basis variants of one ansatz."""

    n_qubits: int
    input_depth: tuple[int, int]
    input_gates: tuple[int, int]
    output_depth: tuple[int, int]
    output_gates: tuple[int, int]
    reports: list[TranspileReport]

    def to_text(self) -> str:
        def rng(t):
            return f"{t[0]}-{t[1]}" if t[0] != t[1] else str(t[0])

        return (
            f"qubits={self.n_qubits}\n"
            f"before_depth={rng(self.input_depth)}\nbefore_gates={rng(self.input_gates)}\n"
            f"after_depth={rng(self.output_depth)}\nafter_gates={rng(self.output_gates)}\n"
        )


def summarize(reports: list[TranspileReport]) -> GroupTranspileSummary:
    def mm(attr):
        vals = [getattr(r, attr) for r in reports]
        return (min(vals), max(vals))

    return GroupTranspileSummary(
        reports[0].n_qubits, mm("input_depth"), mm("input_gates"), mm("output_depth"), mm("output_gates"), reports
    )
