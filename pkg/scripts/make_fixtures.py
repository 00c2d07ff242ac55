"""Regenerate the bundled FCIDUMP fixtures in src/aldvqe/data/.

All integrals are synthetic model Hamiltonians with point-group-like orbital
symmetry labels. They reproduce the qualitative reaction profile
(reactant < product < transition state) and nothing more; the core energies
are shifted so that the exact relative energies hit the targets below.

    python scripts/make_fixtures.py          # write files and print a summary
    python scripts/make_fixtures.py --check  # fail if the files on disk differ
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from aldvqe.operators import MolecularIntegrals, exact_ground_energy, format_fcidump, qubit_hamiltonian

DATA = Path(__file__).resolve().parents[1] / "src" / "aldvqe" / "data"
DIGITS = 10

# (2e, 2o): one gerade and one ungerade orbital, so singles are forbidden.
# tuple = (h00, h11, (00|00), (11|11), (00|11), (01|01))
MODELS_22 = {
    "r": (-1.25, -0.48, 0.67, 0.70, 0.66, 0.18),
    "ts": (-1.05, -0.70, 0.60, 0.62, 0.60, 0.20),
    "p1": (-1.18, -0.55, 0.65, 0.68, 0.64, 0.185),
}
TARGET_22 = {"r": -1.10, "ts": -1.06, "p1": -1.085}

# (4e, 4o): two irreps of a Z2 group, orbitals [A, B, A, B].
# tuple = (orbital energies, (h02, h13), coupling scale, rng seed)
IRREPS_44 = (0, 1, 0, 1)
MODELS_44 = {
    "r": ((-1.6, -1.3, -0.2, 0.1), (0.03, -0.02), 0.06, 10),
    "ts": ((-1.45, -1.2, -0.45, -0.25), (0.04, -0.03), 0.04, 11),
    "p1": ((-1.55, -1.25, -0.3, 0.0), (0.035, -0.025), 0.06, 12),
}
DIAG_44 = (0.62, 0.58, 0.50, 0.52)
COULOMB_44 = 0.45  # uniform (pp|qq) floor; a constant at fixed N
TARGET_44 = {"r": -3.20, "ts": -3.155, "p1": -3.188}

# H2 in a minimal basis at 0.7414 Angstrom, used as a familiar reference.
H2 = (-1.2524635735, -0.4759487172, 0.6744887663, 0.6973979494, 0.6636340479, 0.1812875334)
H2_CORE = 0.7137539936876182


def two_orbital(params) -> tuple[np.ndarray, np.ndarray]:
    h00, h11, j00, j11, j01, k01 = params
    h = np.diag([h00, h11])
    g = np.zeros((2, 2, 2, 2))
    g[0, 0, 0, 0], g[1, 1, 1, 1] = j00, j11
    g[0, 0, 1, 1] = g[1, 1, 0, 0] = j01
    for idx in ((0, 1, 0, 1), (1, 0, 1, 0), (0, 1, 1, 0), (1, 0, 0, 1)):
        g[idx] = k01
    return h, g


def four_orbital(eps, off, scale, seed) -> tuple[np.ndarray, np.ndarray]:
    """``g = sum_L B^L (x) B^L`` with symmetry-blocked B^L: PSD and 8-fold symmetric."""
    rng = np.random.default_rng(seed)
    n = len(eps)
    h = np.diag(np.asarray(eps, dtype=float))
    h[0, 2] = h[2, 0] = off[0]
    h[1, 3] = h[3, 1] = off[1]
    factors = [np.sqrt(COULOMB_44) * np.eye(n)]
    for p in range(n):
        b = np.zeros((n, n))
        b[p, p] = np.sqrt(DIAG_44[p])
        factors.append(b)
    for ell in range(6):
        b = np.zeros((n, n))
        irrep = ell % 2
        for p in range(n):
            for q in range(p, n):
                if IRREPS_44[p] ^ IRREPS_44[q] == irrep:
                    b[p, q] = b[q, p] = rng.normal() * scale * (0.8 if p == q else 1.0)
        factors.append(b)
    g = sum(np.einsum("pq,rs->pqrs", b, b) for b in factors)
    return h, g


def build(h, g, n_electrons, orbsym, target) -> MolecularIntegrals:
    h, g = np.round(h, DIGITS), np.round(g, DIGITS)
    n = h.shape[0]
    ints = MolecularIntegrals(n, n_electrons, 0, 0.0, h, g, orbsym)
    e_elec = exact_ground_energy(qubit_hamiltonian(ints), n_electrons, 0).energy
    core = 0.0 if target is None else round(target - e_elec, DIGITS)
    return MolecularIntegrals(n, n_electrons, 0, core, h, g, orbsym)


def fixtures() -> dict[str, MolecularIntegrals]:
    out = {}
    h, g = two_orbital(H2)
    out["h2_like"] = MolecularIntegrals(2, 2, 0, H2_CORE, h, g, (1, 2))
    for name, params in MODELS_22.items():
        out[f"{name}_22"] = build(*two_orbital(params), 2, (1, 2), TARGET_22[name])
    for name, params in MODELS_44.items():
        orbsym = tuple(i + 1 for i in IRREPS_44)
        out[f"{name}_44"] = build(*four_orbital(*params), 4, orbsym, TARGET_44[name])
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="compare against files on disk instead of writing")
    args = ap.parse_args(argv)
    bad = 0
    for name, ints in fixtures().items():
        text = format_fcidump(ints)
        path = DATA / f"{name}.fcidump"
        if args.check:
            if not path.exists() or path.read_text() != text:
                print(f"stale: {path}")
                bad += 1
            continue
        path.write_text(text)
        e0 = exact_ground_energy(qubit_hamiltonian(ints), ints.n_electrons, 0).energy
        print(f"{name:8s} norb={ints.n_orbitals} nelec={ints.n_electrons} E0={e0:.10f}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
