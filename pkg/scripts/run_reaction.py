"""Run the R/TS/P1 pipeline in every mode on the bundled (2e,2o) fixtures and print a table.

    python3 scripts/run_reaction.py --out runs/reaction [--experiments 100 --shots 100000]
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

from aldvqe.harness import HARTREE_TO_KCAL, MODES, RunConfig, execute


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/reaction")
    ap.add_argument("--shots", type=int, default=100_000)
    ap.add_argument("--experiments", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    print(f"{'mode':12s} {'E_R':>13s} {'dE_TS kcal':>11s} {'dE_P1 kcal':>11s} {'time s':>7s}")
    for mode in MODES:
        cfg = RunConfig(
            mode=mode, shots=args.shots, n_experiments=args.experiments, seed=args.seed,
            output_dir=str(Path(args.out) / mode.replace("+", "_")),
        )
        t0 = time.perf_counter()
        rep, _ = execute(cfg)
        print(
            f"{mode:12s} {rep.energy('R'):13.8f} {rep.delta('TS') * HARTREE_TO_KCAL:11.4f} "
            f"{rep.delta('P1') * HARTREE_TO_KCAL:11.4f} {time.perf_counter() - t0:7.1f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
