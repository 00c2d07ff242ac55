"""Energy dispersion versus shot budget for R/TS/P1, with the shots^-1/2 reference.

    python3 scripts/shots_convergence.py --out runs/shots [--mitigate]
"""
from __future__ import annotations

import argparse
import math
from pathlib import Path

from aldvqe.harness import RunConfig, shots_sweep, sweep_csv


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/shots")
    ap.add_argument("--budgets", default="1000,10000,30000,100000")
    ap.add_argument("--experiments", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--mitigate", action="store_true")
    args = ap.parse_args(argv)

    cfg = RunConfig(
        mode="noisy+pmsv" if args.mitigate else "noisy", n_experiments=args.experiments, seed=args.seed,
        shot_budgets=[int(b) for b in args.budgets.split(",")],
    )
    rows = shots_sweep(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "shots_sweep.csv").write_text(sweep_csv(rows))

    print(f"{'state':5s} {'shots':>7s} {'std mHa':>9s} {'std*sqrt(N)':>12s}")
    for r in rows:
        print(f"{r.state:5s} {r.shots:7d} {1e3 * r.std:9.4f} {r.std * math.sqrt(r.shots):12.4f}")
    print(f"wrote {out / 'shots_sweep.csv'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
