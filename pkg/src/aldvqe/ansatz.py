"""UCCSD excitation pool, symmetry filtering, ADAPT selection and ansatz circuits."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import circuits
from .circuits import Circuit, hartree_fock_state
from .operators import (
    ANNIHILATE,
    CREATE,
    FermionOperator,
    QubitOperator,
    jordan_wigner,
    pauli_action,
    pauli_letters,
)

log = logging.getLogger(__name__)

FILTER_TOL = 1e-12


def _flip(so: int) -> int:
    return so ^ 1


def _sorted_with_parity(idx: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    out = list(idx)
    sign = 1
    for i in range(len(out)):
        for j in range(len(out) - 1 - i):
            if out[j] > out[j + 1]:
                out[j], out[j + 1] = out[j + 1], out[j]
                sign = -sign
    return tuple(out), sign


@dataclass(frozen=True, eq=False)
class Excitation:
    """Spin-adapted excitation ``G = JW(T - T^dag)`` summed over its mirror components.

    Each component is ``(occupied, virtual, sign)`` in spin-orbital indices with
    ``T = a+_a (a+_b) (a_j) a_i`` for sorted ``occupied=(i, j)``, ``virtual=(a, b)``.
    """

    kind: str
    components: tuple[tuple[tuple[int, ...], tuple[int, ...], int], ...]
    generator: QubitOperator

    @property
    def label(self) -> str:
        occ, virt, _ = self.components[0]
        return f"{self.kind}:{','.join(map(str, occ))}->{','.join(map(str, virt))}"

    def pauli_terms(self) -> list[tuple[tuple[int, int], float]]:
        """Generator terms as ``(key, c)`` with ``G = sum i*c*P``, in a fixed order."""
        return [(k, v.imag) for k, v in sorted(self.generator.terms.items())]


def excitation_operator(occupied: tuple[int, ...], virtual: tuple[int, ...]) -> FermionOperator:
    seq = [(a, CREATE) for a in virtual] + [(i, ANNIHILATE) for i in reversed(occupied)]
    t = FermionOperator.term(seq)
    return t - t.adjoint()


def make_excitation(kind: str, components, n_qubits: int) -> Excitation:
    op = FermionOperator()
    for occ, virt, sign in components:
        op = op + excitation_operator(occ, virt) * sign
    gen = jordan_wigner(op, n_qubits)
    if not gen.is_anti_hermitian():
        raise ArithmeticError(f"generator for {components} is not anti-Hermitian")
    gen = QubitOperator({k: 1j * v.imag for k, v in gen.terms.items()}, n_qubits)
    return Excitation(kind, tuple(components), gen)


def uccsd_pool(n_electrons: int, n_spin_orbitals: int, spin_adapt: bool = True) -> list[Excitation]:
    """Spin-preserving singles and doubles over a closed-shell reference.

    With ``spin_adapt`` the alpha/beta mirror images of an excitation share one
    generator (and therefore one parameter). Singles come first; both blocks
    are ordered lexicographically by their leading component.
    """
    if n_electrons % 2:
        raise ValueError("uccsd_pool needs a closed-shell (even) electron count")
    if n_spin_orbitals % 2 or n_electrons > n_spin_orbitals:
        raise ValueError(f"cannot place {n_electrons} electrons in {n_spin_orbitals} spin-orbitals")
    occ = range(n_electrons)
    virt = range(n_electrons, n_spin_orbitals)

    raw_singles = [((i,), (a,)) for i in occ for a in virt if i % 2 == a % 2]
    raw_doubles = [
        ((i, j), (a, b))
        for i, j in itertools.combinations(occ, 2)
        for a, b in itertools.combinations(virt, 2)
        if (i % 2) + (j % 2) == (a % 2) + (b % 2)
    ]

    def grouped(raw):
        seen, out = set(), []
        for o, v in raw:
            if (o, v) in seen:
                continue
            comps = [(o, v, 1)]
            seen.add((o, v))
            if spin_adapt:
                fo, so = _sorted_with_parity(tuple(_flip(x) for x in o))
                fv, sv = _sorted_with_parity(tuple(_flip(x) for x in v))
                if (fo, fv) != (o, v):
                    comps.append((fo, fv, so * sv))
                    seen.add((fo, fv))
            out.append(comps)
        return out

    pool = []
    for comps in grouped(raw_singles):
        pool.append(make_excitation("single", comps, n_spin_orbitals))
    for comps in grouped(raw_doubles):
        (i, j), (a, b), _ = comps[0]
        paired = j == _flip(i) and b == _flip(a)
        pool.append(make_excitation("paired" if paired else "double", comps, n_spin_orbitals))
    return pool


def raw_excitation_count(pool: list[Excitation]) -> int:
    return sum(len(e.components) for e in pool)


def commutator_gradient(H: QubitOperator, gen: QubitOperator, state: np.ndarray) -> float:
    """``<psi|[H, G]|psi>`` for anti-Hermitian ``G``, i.e. ``2 Re <psi|H G|psi>``."""
    g_psi = gen.sparse() @ state
    return float(2.0 * np.vdot(H.sparse() @ state, g_psi).real)


def chemically_aware_filter(
    pool: list[Excitation], reference: np.ndarray, H: QubitOperator, tol: float = FILTER_TOL
) -> list[Excitation]:
    """Drop excitations whose gradient at ``reference`` vanishes (symmetry-forbidden)."""
    kept = [e for e in pool if abs(commutator_gradient(H, e.generator, reference)) >= tol]
    log.debug("chemically aware filter kept %d of %d excitations", len(kept), len(pool))
    return kept


# --------------------------------------------------------------------------
# ansatz realization


@dataclass
class AnsatzSpec:
    """Ordered excitations and their amplitudes; ``U = prod_k exp(theta_k G_k)``, first applied first."""

    excitations: list[Excitation]
    theta: np.ndarray
    n_qubits: int
    n_electrons: int

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if self.theta.size != len(self.excitations):
            raise ValueError(f"{self.theta.size} amplitudes for {len(self.excitations)} excitations")

    @classmethod
    def zeros(cls, excitations, n_qubits: int, n_electrons: int) -> "AnsatzSpec":
        return cls(list(excitations), np.zeros(len(excitations)), n_qubits, n_electrons)

    def with_theta(self, theta) -> "AnsatzSpec":
        return AnsatzSpec(list(self.excitations), np.array(theta, dtype=float), self.n_qubits, self.n_electrons)

    @property
    def n_parameters(self) -> int:
        return len(self.excitations)


def trotter_gates(spec: AnsatzSpec) -> list[tuple[int, tuple[int, int], float]]:
    """``(parameter index, Pauli key, c)``; the gate is ``PAULIEXP(P, -2 c theta)``."""
    return [(k, key, c) for k, exc in enumerate(spec.excitations) for key, c in exc.pauli_terms()]


def build_circuit(spec: AnsatzSpec) -> Circuit:
    """HF preparation followed by one PAULIEXP per generator term (first-order Trotter)."""
    circ = Circuit(spec.n_qubits)
    for q in range(spec.n_electrons):
        circ.append("X", q)
    for k, key, c in trotter_gates(spec):
        letters = pauli_letters(key, spec.n_qubits)
        qs = sorted(letters)
        circ.append("PAULIEXP", *qs, pauli="".join(letters[q] for q in qs), angle=-2.0 * c * spec.theta[k])
    return circ


class AnsatzEnergy:
    """Fast energy and gradient evaluation of ``<HF|U(theta)^dag H U(theta)|HF>``."""

    def __init__(self, H: QubitOperator, spec: AnsatzSpec):
        if H.n_qubits != spec.n_qubits:
            raise ValueError("Hamiltonian and ansatz qubit counts differ")
        self.H = H
        self.spec = spec
        self.Hs = H.real().sparse()
        self.reference = hartree_fock_state(spec.n_qubits, spec.n_electrons)
        self.gates = trotter_gates(spec)
        self._actions = [pauli_action(key, spec.n_qubits) for _, key, _ in self.gates]
        self.n_evaluations = 0

    def angles(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.array([-2.0 * c * theta[k] for k, _, c in self.gates])

    def _forward(self, phis: np.ndarray) -> np.ndarray:
        psi = self.reference
        for (src, sign), phi in zip(self._actions, phis):
            psi = np.cos(phi / 2) * psi - 1j * np.sin(phi / 2) * (sign * psi[src])
        return psi

    def state(self, theta) -> np.ndarray:
        return self._forward(self.angles(theta))

    def energy_at_angles(self, phis: np.ndarray) -> float:
        psi = self._forward(phis)
        self.n_evaluations += 1
        return float(np.vdot(psi, self.Hs @ psi).real)

    def energy(self, theta) -> float:
        return self.energy_at_angles(self.angles(theta))

    def _chain(self, dphi: np.ndarray) -> np.ndarray:
        grad = np.zeros(self.spec.n_parameters)
        for (k, _, c), d in zip(self.gates, dphi):
            grad[k] += -2.0 * c * d
        return grad

    def energy_and_gradient(self, theta) -> tuple[float, np.ndarray]:
        """Reverse-mode (adjoint) gradient, one forward and one backward sweep."""
        phis = self.angles(theta)
        psi = self._forward(phis)
        lam = self.Hs @ psi
        energy = float(np.vdot(psi, lam).real)
        self.n_evaluations += 1
        dphi = np.zeros(len(phis))
        for j in range(len(phis) - 1, -1, -1):
            src, sign = self._actions[j]
            p_psi = sign * psi[src]
            dphi[j] = float(np.vdot(lam, p_psi).imag)
            c, s = np.cos(phis[j] / 2), np.sin(phis[j] / 2)
            psi = c * psi + 1j * s * p_psi
            lam = c * lam + 1j * s * (sign * lam[src])
        return energy, self._chain(dphi)

    def parameter_shift_gradient(self, theta) -> np.ndarray:
        """Two-point +-pi/2 shift on each PAULIEXP, summed per parameter."""
        phis = self.angles(theta)
        dphi = np.zeros(len(phis))
        for j in range(len(phis)):
            shifted = phis.copy()
            shifted[j] += np.pi / 2
            e_plus = self.energy_at_angles(shifted)
            shifted[j] -= np.pi
            e_minus = self.energy_at_angles(shifted)
            dphi[j] = 0.5 * (e_plus - e_minus)
        return self._chain(dphi)


def ansatz_state(spec: AnsatzSpec) -> np.ndarray:
    return circuits.run(build_circuit(spec))


# --------------------------------------------------------------------------
# ADAPT


@dataclass
class AdaptResult:
    spec: AnsatzSpec
    energies: list[float]
    max_gradients: list[float]
    selected: list[int]
    converged: bool
    optimizer_ok: bool = True
    rounds: int = field(init=False)

    def __post_init__(self):
        self.rounds = len(self.selected)

    @property
    def energy(self) -> float:
        return self.energies[-1]


def adapt_vqe(
    H: QubitOperator,
    pool: list[Excitation],
    n_electrons: int,
    grad_threshold: float = 1e-3,
    max_rounds: int = 50,
    config=None,
) -> AdaptResult:
    """Grow the ansatz one excitation at a time by largest commutator gradient.

    The reference is the Hartree-Fock determinant. New amplitudes start at zero
    and earlier ones are warm-started from the previous optimum.
    """
    from .vqe import VqeConfig, minimize

    if grad_threshold <= 0:
        raise ValueError("grad_threshold must be positive")
    config = config or VqeConfig()
    n_qubits = H.n_qubits
    spec = AnsatzSpec.zeros([], n_qubits, n_electrons)
    psi = hartree_fock_state(n_qubits, n_electrons)
    energies = [float(np.vdot(psi, H.sparse() @ psi).real)]
    max_grads: list[float] = []
    selected: list[int] = []
    converged = False
    optimizer_ok = True
    for _ in range(max_rounds):
        grads = np.array([abs(commutator_gradient(H, e.generator, psi)) for e in pool])
        if grads.size == 0 or grads.max() < grad_threshold:
            max_grads.append(float(grads.max()) if grads.size else 0.0)
            converged = True
            break
        k = int(np.argmax(grads))  # first maximum -> lowest pool index on ties
        max_grads.append(float(grads[k]))
        selected.append(k)
        spec = AnsatzSpec(spec.excitations + [pool[k]], np.append(spec.theta, 0.0), n_qubits, n_electrons)
        res = minimize(H, spec, config)
        optimizer_ok &= res.converged
        spec = spec.with_theta(res.theta)
        energies.append(res.energy)
        psi = AnsatzEnergy(H, spec).state(spec.theta)
        log.info("ADAPT round %d: picked %s |g|=%.3e E=%.10f", len(selected), pool[k].label, grads[k], res.energy)
    return AdaptResult(spec, energies, max_grads, selected, converged, optimizer_ok)


def format_ansatz_report(spec: AnsatzSpec, energies: list[float] | None = None) -> str:
    lines = [f"qubits {spec.n_qubits}", f"electrons {spec.n_electrons}", f"parameters {spec.n_parameters}"]
    for exc, t in zip(spec.excitations, spec.theta):
        lines.append(f"excitation {exc.label} theta {t!r}")
    for i, e in enumerate(energies or []):
        lines.append(f"energy round {i} {e!r}")
    return "\n".join(lines) + "\n"
