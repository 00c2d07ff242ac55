"""Fermionic and Pauli operator algebra, Jordan-Wigner mapping and exact diagonalization.

Qubit ordering is little-endian throughout: qubit ``q`` is bit ``q`` of a basis
index. Spin-orbitals are interleaved, ``2p`` is orbital ``p`` spin-up and
``2p + 1`` is orbital ``p`` spin-down, and spin-orbital ``j`` lives on qubit ``j``.

A Pauli string is stored as a pair of bitmasks ``(x, z)`` and denotes the
Hermitian operator ``i**popcount(x & z) * X**x Z**z``, i.e. a qubit carries
``X`` when only its x bit is set, ``Z`` for only z, and ``Y`` for both.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

COEFF_TOL = 1e-14
DENSE_QUBIT_LIMIT = 16

_PHASES = (1.0, 1.0j, -1.0, -1.0j)
_LETTER_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def _popcount(v: int) -> int:
    return bin(v).count("1")


def pauli_product(a: tuple[int, int], b: tuple[int, int]) -> tuple[complex, tuple[int, int]]:
    """Multiply two Pauli strings; returns ``(phase, key)`` with ``a*b = phase * P[key]``."""
    xa, za = a
    xb, zb = b
    x, z = xa ^ xb, za ^ zb
    k = _popcount(xa & za) + _popcount(xb & zb) + 2 * _popcount(za & xb) - _popcount(x & z)
    return _PHASES[k % 4], (x, z)


def pauli_label(key: tuple[int, int]) -> str:
    x, z = key
    if not x and not z:
        return "I"
    parts = []
    q = 0
    while (x | z) >> q:
        bx, bz = (x >> q) & 1, (z >> q) & 1
        if bx or bz:
            parts.append(("Y" if bz else "X") if bx else "Z")
            parts[-1] += str(q)
        q += 1
    return " ".join(parts)


def parse_pauli(label: str) -> tuple[int, int]:
    """Parse ``"X0 Y1 Z3"`` (or ``"I"``/``""``) into an ``(x, z)`` key."""
    x = z = 0
    for tok in label.replace(",", " ").split():
        if tok == "I":
            continue
        m = re.fullmatch(r"([XYZ])(\d+)", tok)
        if m is None:
            raise ValueError(f"bad Pauli token {tok!r}")
        q = int(m.group(2))
        bx, bz = _LETTER_BITS[m.group(1)]
        if (x | z) >> q & 1:
            raise ValueError(f"qubit {q} repeated in {label!r}")
        x |= bx << q
        z |= bz << q
    return x, z


def pauli_letters(key: tuple[int, int], n_qubits: int) -> dict[int, str]:
    """Map qubit -> letter for the non-identity positions of ``key``."""
    x, z = key
    out = {}
    for q in range(n_qubits):
        bx, bz = (x >> q) & 1, (z >> q) & 1
        if bx or bz:
            out[q] = ("Y" if bz else "X") if bx else "Z"
    return out


class QubitOperator:
    """Weighted sum of Pauli strings on a fixed number of qubits.

    Instances are canonical on construction (duplicates merged, tiny
    coefficients dropped) and treated as immutable.
    """

    __slots__ = ("terms", "n_qubits", "_sparse")

    def __init__(self, terms: Mapping[tuple[int, int], complex] | None = None, n_qubits: int = 0):
        self.n_qubits = int(n_qubits)
        limit = 1 << self.n_qubits
        clean: dict[tuple[int, int], complex] = {}
        for (x, z), c in (terms or {}).items():
            if x >= limit or z >= limit or x < 0 or z < 0:
                raise ValueError(f"Pauli string {pauli_label((x, z))} exceeds {n_qubits} qubits")
            c = complex(c)
            if abs(c) >= COEFF_TOL:
                clean[(x, z)] = c
        self.terms = clean
        self._sparse = None

    # construction helpers
    @classmethod
    def from_list(cls, items: Iterable[tuple[str, complex]], n_qubits: int) -> "QubitOperator":
        acc: dict[tuple[int, int], complex] = {}
        for label, c in items:
            key = parse_pauli(label)
            acc[key] = acc.get(key, 0.0) + c
        return cls(acc, n_qubits)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "QubitOperator":
        return cls({(0, 0): coeff}, n_qubits)

    @classmethod
    def zero(cls, n_qubits: int) -> "QubitOperator":
        return cls({}, n_qubits)

    # algebra
    def _check(self, other: "QubitOperator") -> None:
        if not isinstance(other, QubitOperator):
            raise TypeError(f"expected QubitOperator, got {type(other).__name__}")
        if other.n_qubits != self.n_qubits:
            raise ValueError(f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = QubitOperator.identity(self.n_qubits, other)
        self._check(other)
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc.get(k, 0.0) + c
        return QubitOperator(acc, self.n_qubits)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return QubitOperator({k: c * other for k, c in self.terms.items()}, self.n_qubits)
        self._check(other)
        acc: dict[tuple[int, int], complex] = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                phase, k = pauli_product(ka, kb)
                acc[k] = acc.get(k, 0.0) + phase * ca * cb
        return QubitOperator(acc, self.n_qubits)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, QubitOperator):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.terms == other.terms

    def __hash__(self):
        return hash((self.n_qubits, frozenset(self.terms.items())))

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return f"QubitOperator(0, n_qubits={self.n_qubits})"
        body = " + ".join(f"({c:.6g}) [{pauli_label(k)}]" for k, c in sorted(self.terms.items()))
        return f"QubitOperator({body}, n_qubits={self.n_qubits})"

    def isclose(self, other: "QubitOperator", atol: float = 1e-12) -> bool:
        self._check(other)
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0.0) - other.terms.get(k, 0.0)) <= atol for k in keys)

    def is_zero(self, atol: float = 1e-12) -> bool:
        return all(abs(c) <= atol for c in self.terms.values())

    @property
    def constant(self) -> complex:
        return self.terms.get((0, 0), 0.0)

    def adjoint(self) -> "QubitOperator":
        return QubitOperator({k: c.conjugate() for k, c in self.terms.items()}, self.n_qubits)

    def max_imag(self) -> float:
        return max((abs(c.imag) for c in self.terms.values()), default=0.0)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return self.max_imag() <= atol

    def is_anti_hermitian(self, atol: float = 1e-12) -> bool:
        return all(abs(c.real) <= atol for c in self.terms.values())

    def real(self) -> "QubitOperator":
        """Drop imaginary parts (for operators already known to be Hermitian)."""
        return QubitOperator({k: c.real for k, c in self.terms.items()}, self.n_qubits)

    def sparse(self) -> sp.csr_matrix:
        """Sparse ``2**n x 2**n`` matrix, cached on the instance."""
        if self._sparse is None:
            self._sparse = _build_sparse(self.terms, self.n_qubits)
        return self._sparse


def add(a: QubitOperator, b: QubitOperator) -> QubitOperator:
    return a + b


def multiply(a: QubitOperator, b: QubitOperator) -> QubitOperator:
    return a * b


def scale(a: QubitOperator, c: complex) -> QubitOperator:
    return a * c


def commutator(a: QubitOperator, b: QubitOperator) -> QubitOperator:
    """``[a, b]``; only anticommuting string pairs contribute."""
    a._check(b)
    acc: dict[tuple[int, int], complex] = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            # strings anticommute iff the symplectic product is odd
            if (_popcount(ka[0] & kb[1]) + _popcount(ka[1] & kb[0])) % 2:
                phase, k = pauli_product(ka, kb)
                acc[k] = acc.get(k, 0.0) + 2.0 * phase * ca * cb
    return QubitOperator(acc, a.n_qubits)


# --------------------------------------------------------------------------
# dense / sparse representations


def pauli_action(key: tuple[int, int], n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(idx, sign)`` such that ``(P @ psi) == sign * psi[..., idx]``."""
    x, z = key
    dim = 1 << n_qubits
    out = np.arange(dim, dtype=np.int64)
    src = out ^ x
    parity = np.bitwise_count(src & z) & 1
    sign = _PHASES[_popcount(x & z) % 4] * (1.0 - 2.0 * parity)
    return src, sign.astype(np.complex128)


def _build_sparse(terms: Mapping[tuple[int, int], complex], n_qubits: int) -> sp.csr_matrix:
    dim = 1 << n_qubits
    rows, cols, vals = [], [], []
    basis = np.arange(dim, dtype=np.int64)
    for key, c in terms.items():
        src, sign = pauli_action(key, n_qubits)
        rows.append(basis)
        cols.append(src)
        vals.append(c * sign)
    if not rows:
        return sp.csr_matrix((dim, dim), dtype=np.complex128)
    m = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    return m.tocsr()


def apply_operator(op: QubitOperator, state: np.ndarray) -> np.ndarray:
    out = np.zeros_like(state, dtype=np.complex128)
    for key, c in op.terms.items():
        src, sign = pauli_action(key, op.n_qubits)
        out += c * sign * state[..., src]
    return out


def dense_matrix(op: QubitOperator) -> np.ndarray:
    if op.n_qubits > DENSE_QUBIT_LIMIT:
        raise ValueError(f"{op.n_qubits} qubits exceeds the dense limit of {DENSE_QUBIT_LIMIT}")
    return op.sparse().toarray()


# --------------------------------------------------------------------------
# fermions

CREATE, ANNIHILATE = 1, 0
Ladder = tuple[tuple[int, int], ...]


class FermionOperator:
    """Sum of products of ladder operators, kept in the order written.

    ``terms`` maps a ladder sequence ``((mode, action), ...)`` to its coefficient,
    with ``action`` 1 for creation and 0 for annihilation. The empty sequence is
    the identity.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Ladder, complex] | None = None):
        clean = {}
        for seq, c in (terms or {}).items():
            c = complex(c)
            if abs(c) >= COEFF_TOL:
                clean[tuple((int(m), int(a)) for m, a in seq)] = c
        self.terms = clean

    @classmethod
    def term(cls, seq: Iterable[tuple[int, int]], coeff: complex = 1.0) -> "FermionOperator":
        return cls({tuple(seq): coeff})

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        acc = dict(self.terms)
        for k, c in other.terms.items():
            acc[k] = acc.get(k, 0.0) + c
        return FermionOperator(acc)

    def __sub__(self, other):
        return self + other * -1.0

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return FermionOperator({k: c * other for k, c in self.terms.items()})
        acc: dict[Ladder, complex] = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                k = ka + kb
                acc[k] = acc.get(k, 0.0) + ca * cb
        return FermionOperator(acc)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, FermionOperator) and self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        def fmt(seq):
            return " ".join(f"a{m}{'^' if a else ''}" for m, a in seq) or "1"

        return "FermionOperator(" + " + ".join(f"({c:.6g}) {fmt(s)}" for s, c in self.terms.items()) + ")"

    def adjoint(self) -> "FermionOperator":
        return FermionOperator(
            {tuple((m, 1 - a) for m, a in reversed(seq)): c.conjugate() for seq, c in self.terms.items()}
        )

    def max_mode(self) -> int:
        return max((m for seq in self.terms for m, _ in seq), default=-1)


def jordan_wigner(op: FermionOperator, n_modes: int) -> QubitOperator:
    """Map a fermionic operator onto ``n_modes`` qubits.

    ``a_j^dag -> (X_j - iY_j)/2 Z_{j-1}...Z_0`` and ``a_j -> (X_j + iY_j)/2 Z_{j-1}...Z_0``.
    """
    if op.max_mode() >= n_modes:
        raise ValueError(f"mode {op.max_mode()} out of range for {n_modes} modes")
    ladders: dict[tuple[int, int], QubitOperator] = {}

    def ladder(mode: int, action: int) -> QubitOperator:
        if (mode, action) not in ladders:
            zs = (1 << mode) - 1
            sign = -0.5j if action == CREATE else 0.5j
            ladders[(mode, action)] = QubitOperator(
                {(1 << mode, zs): 0.5, (1 << mode, zs | (1 << mode)): sign}, n_modes
            )
        return ladders[(mode, action)]

    acc = QubitOperator.zero(n_modes)
    for seq, c in op.terms.items():
        prod = QubitOperator.identity(n_modes, c)
        for mode, action in seq:
            prod = prod * ladder(mode, action)
            if not prod.terms:
                break
        acc = acc + prod
    return acc


def ladder_matrix(op: FermionOperator, n_modes: int) -> np.ndarray:
    """Dense matrix of ``op`` in the occupation-number basis, built from bit operations.

    Independent of the Pauli algebra: ``a_j |n>`` clears bit ``j`` with sign
    ``(-1)**(number of occupied modes below j)``.
    """
    if n_modes > DENSE_QUBIT_LIMIT:
        raise ValueError(f"{n_modes} modes exceeds the dense limit")
    dim = 1 << n_modes
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for seq, c in op.terms.items():
        for col in range(dim):
            state, amp = col, c
            for mode, action in reversed(seq):
                bit = (state >> mode) & 1
                if bit == action:
                    amp = 0.0
                    break
                if _popcount(state & ((1 << mode) - 1)) % 2:
                    amp = -amp
                state ^= 1 << mode
            if amp != 0.0:
                mat[state, col] += amp
    return mat


def number_operator(n_modes: int) -> QubitOperator:
    """Total particle number ``sum_j (I - Z_j)/2``."""
    terms = {(0, 0): 0.5 * n_modes}
    for j in range(n_modes):
        terms[(0, 1 << j)] = -0.5
    return QubitOperator(terms, n_modes)


def sz_operator(n_modes: int) -> QubitOperator:
    """``S_z = (N_alpha - N_beta) / 2`` for the interleaved ordering."""
    terms = {}
    for j in range(n_modes):
        terms[(0, 1 << j)] = -0.25 if j % 2 == 0 else 0.25
    return QubitOperator(terms, n_modes)


# --------------------------------------------------------------------------
# integrals


@dataclass(frozen=True, eq=False)
class MolecularIntegrals:
    """Active-space integrals: ``h[p, q]`` and chemists' ``g[p, q, r, s] = (pq|rs)``, in Hartree."""

    n_orbitals: int
    n_electrons: int
    spin_2s: int
    core_energy: float
    h: np.ndarray
    g: np.ndarray
    orbsym: tuple[int, ...] | None = None

    def __post_init__(self):
        n = self.n_orbitals
        if n < 1:
            raise ValueError("n_orbitals must be positive")
        if not 0 < self.n_electrons <= 2 * n:
            raise ValueError(f"n_electrons={self.n_electrons} outside (0, {2 * n}]")
        if abs(self.spin_2s) > self.n_electrons or (self.n_electrons - self.spin_2s) % 2:
            raise ValueError(f"MS2={self.spin_2s} inconsistent with {self.n_electrons} electrons")
        if self.h.shape != (n, n) or self.g.shape != (n, n, n, n):
            raise ValueError("integral array shapes do not match n_orbitals")
        if not np.allclose(self.h, self.h.T, atol=1e-12, rtol=0):
            raise ValueError("one-body integrals are not symmetric")
        g = self.g
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if not np.allclose(g, g.transpose(perm), atol=1e-12, rtol=0):
                raise ValueError("two-body integrals lack 8-fold permutational symmetry")

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_orbitals


_HEADER_RE = re.compile(r"&FCI(.*?)(&END|/)", re.IGNORECASE | re.DOTALL)


def _namelist_int(body: str, key: str, default: int | None = None) -> int:
    m = re.search(rf"\b{key}\s*=\s*([-+]?\d+)", body, re.IGNORECASE)
    if m is None:
        if default is None:
            raise ValueError(f"FCIDUMP header lacks {key}")
        return default
    return int(m.group(1))


def _g_slots(p, q, r, s):
    return {
        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
    }


def parse_fcidump(text: str) -> MolecularIntegrals:
    """Parse FCIDUMP text (1-based indices) into symmetry-completed integrals."""
    m = _HEADER_RE.search(text)
    if m is None:
        raise ValueError("malformed FCIDUMP: no &FCI ... &END namelist")
    body = m.group(1)
    norb = _namelist_int(body, "NORB")
    nelec = _namelist_int(body, "NELEC")
    ms2 = _namelist_int(body, "MS2", 0)
    if norb < 1:
        raise ValueError(f"malformed FCIDUMP: NORB={norb}")
    orbsym = None
    sm = re.search(r"ORBSYM\s*=\s*([\d,\s]+?)(?=\s*[A-Za-z&/]|$)", body, re.IGNORECASE)
    if sm:
        vals = [int(v) for v in re.split(r"[,\s]+", sm.group(1).strip()) if v]
        if len(vals) == norb:
            orbsym = tuple(vals)

    h = np.zeros((norb, norb))
    g = np.zeros((norb, norb, norb, norb))
    core = 0.0
    seen_h: dict[tuple[int, int], float] = {}
    seen_g: dict[tuple[int, int, int, int], float] = {}
    seen_core: float | None = None

    for lineno, line in enumerate(text[m.end():].splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 5:
            raise ValueError(f"FCIDUMP integral line {lineno}: expected 5 fields, got {line!r}")
        value = float(fields[0].replace("D", "E").replace("d", "e"))
        idx = tuple(int(f) for f in fields[1:])
        if any(i < 0 or i > norb for i in idx):
            raise ValueError(f"FCIDUMP index out of range [1, {norb}] in {line.strip()!r}")
        p, q, r, s = idx
        if idx == (0, 0, 0, 0):
            if seen_core is not None and abs(seen_core - value) > 1e-10:
                raise ValueError("inconsistent duplicate core energy")
            seen_core = core = value
        elif r == 0 and s == 0:
            if q == 0:
                continue  # orbital energy line, not needed
            key = (p - 1, q - 1)
            for slot in (key, key[::-1]):
                if slot in seen_h and abs(seen_h[slot] - value) > 1e-10:
                    raise ValueError(f"inconsistent duplicate one-body entry {idx}")
                seen_h[slot] = value
                h[slot] = value
        elif 0 in idx:
            raise ValueError(f"FCIDUMP index pattern {idx} is not a valid integral")
        else:
            for slot in _g_slots(p - 1, q - 1, r - 1, s - 1):
                if slot in seen_g and abs(seen_g[slot] - value) > 1e-10:
                    raise ValueError(f"inconsistent duplicate two-body entry {idx}")
                seen_g[slot] = value
                g[slot] = value
    return MolecularIntegrals(norb, nelec, ms2, core, h, g, orbsym)


def read_fcidump(path) -> MolecularIntegrals:
    with open(path) as fh:
        return parse_fcidump(fh.read())


def format_fcidump(ints: MolecularIntegrals, tol: float = 1e-14) -> str:
    """Serialize to FCIDUMP text, one entry per symmetry-unique integral."""
    n = ints.n_orbitals
    sym = ints.orbsym or (1,) * n
    lines = [
        f" &FCI NORB={n},NELEC={ints.n_electrons},MS2={ints.spin_2s},",
        "  ORBSYM=" + ",".join(str(v) for v in sym) + ",",
        "  ISYM=1,",
        " &END",
    ]
    for p in range(n):
        for q in range(p + 1):
            for r in range(n):
                for s in range(r + 1):
                    if (p * (p + 1) // 2 + q) < (r * (r + 1) // 2 + s):
                        continue
                    v = float(ints.g[p, q, r, s])
                    if abs(v) > tol:
                        lines.append(f"{v!r:>24} {p + 1:4d} {q + 1:4d} {r + 1:4d} {s + 1:4d}")
    for p in range(n):
        for q in range(p + 1):
            v = float(ints.h[p, q])
            if abs(v) > tol:
                lines.append(f"{v!r:>24} {p + 1:4d} {q + 1:4d}    0    0")
    lines.append(f"{float(ints.core_energy)!r:>24}    0    0    0    0")
    return "\n".join(lines) + "\n"


def hamiltonian_from_integrals(ints: MolecularIntegrals) -> FermionOperator:
    """Second-quantized Hamiltonian over interleaved spin-orbitals.

    ``H = E_core + sum h_pq a+_ps a_qs + 1/2 sum (pq|rs) a+_ps a+_rt a_st a_qs``.
    """
    n = ints.n_orbitals
    acc: dict[Ladder, float] = {}
    if ints.core_energy != 0.0:
        acc[()] = ints.core_energy
    for p in range(n):
        for q in range(n):
            v = ints.h[p, q]
            if v == 0.0:
                continue
            for s in (0, 1):
                key = ((2 * p + s, CREATE), (2 * q + s, ANNIHILATE))
                acc[key] = acc.get(key, 0.0) + v
    nz = np.argwhere(ints.g != 0.0)
    for p, q, r, s in nz:
        v = 0.5 * ints.g[p, q, r, s]
        for sig in (0, 1):
            for tau in (0, 1):
                ps, qs = 2 * p + sig, 2 * q + sig
                rt, st = 2 * r + tau, 2 * s + tau
                if ps == rt or qs == st:
                    continue
                key = ((ps, CREATE), (rt, CREATE), (st, ANNIHILATE), (qs, ANNIHILATE))
                acc[key] = acc.get(key, 0.0) + v
    return FermionOperator(acc)


def qubit_hamiltonian(ints: MolecularIntegrals) -> QubitOperator:
    """Jordan-Wigner qubit Hamiltonian with the (vanishing) imaginary parts removed."""
    op = jordan_wigner(hamiltonian_from_integrals(ints), ints.n_qubits)
    if not op.is_hermitian():
        raise ValueError(f"qubit Hamiltonian not Hermitian (max |Im| = {op.max_imag():.3g})")
    return op.real()


# --------------------------------------------------------------------------
# exact diagonalization


@dataclass(frozen=True)
class GroundState:
    energy: float
    n_electrons: int
    spin_2s: int | None
    sector_size: int
    vector: np.ndarray  # full-space amplitudes, zero outside the sector


def sector_indices(n_qubits: int, n_electrons: int, spin_2s: int | None = None) -> np.ndarray:
    basis = np.arange(1 << n_qubits, dtype=np.int64)
    alpha_mask = sum(1 << q for q in range(0, n_qubits, 2))
    n_alpha = np.bitwise_count(basis & alpha_mask).astype(np.int64)
    n_total = np.bitwise_count(basis).astype(np.int64)
    keep = n_total == n_electrons
    if spin_2s is not None:
        keep &= (2 * n_alpha - n_total) == spin_2s
    return basis[keep]


def exact_ground_energy(op: QubitOperator, n_electrons: int, spin_2s: int | None = 0) -> GroundState:
    """Lowest eigenvalue within the fixed particle-number (and, unless ``None``, S_z) sector."""
    if op.n_qubits > DENSE_QUBIT_LIMIT:
        raise ValueError(f"{op.n_qubits} qubits exceeds the dense limit of {DENSE_QUBIT_LIMIT}")
    if not 0 <= n_electrons <= op.n_qubits:
        raise ValueError(f"{n_electrons} electrons do not fit in {op.n_qubits} spin-orbitals")
    idx = sector_indices(op.n_qubits, n_electrons, spin_2s)
    if idx.size == 0:
        raise ValueError(f"empty sector N={n_electrons}, 2Sz={spin_2s}")
    block = op.sparse()[idx][:, idx].toarray()
    w, v = np.linalg.eigh(block)
    vec = np.zeros(1 << op.n_qubits, dtype=np.complex128)
    vec[idx] = v[:, 0]
    return GroundState(float(w[0]), n_electrons, spin_2s, int(idx.size), vec)
