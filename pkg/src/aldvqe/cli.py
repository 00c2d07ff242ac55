"""Command-line entry point: ``aldvqe <subcommand> [options]``.

Exit codes: 0 success, 2 bad arguments or configuration, 3 pipeline failure
(the message names the stage and, where relevant, the state).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from .circuits import Circuit
from .harness import (
    BUNDLED_22,
    BUNDLED_44,
    PipelineError,
    ReactionReport,
    RunConfig,
    activespace_sweep,
    execute,
    shots_sweep,
    space_csv,
    sweep_csv,
)
from .transpiler import transpile

EXIT_CONFIG = 2
EXIT_PIPELINE = 3


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="RunConfig JSON; flags below override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=int, help="shots per measurement group per experiment")
    p.add_argument("--experiments", type=int, help="number of repeated experiments")
    p.add_argument("--out", help="output directory")
    p.add_argument("--mitigate", action="store_true", help="apply symmetry post-selection (noisy runs)")
    p.add_argument("--ansatz", choices=("filtered", "full", "adapt"))
    p.add_argument("--engine", choices=("density", "trajectory"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aldvqe", description="Reaction energies with UCCSD/ADAPT VQE on a noisy emulator.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (
        ("exact", "sector-restricted exact diagonalisation"),
        ("vqe", "noiseless VQE"),
        ("adapt", "noiseless ADAPT-VQE"),
        ("noisy", "noisy emulation at the noiseless optimum"),
    ):
        _common(sub.add_parser(name, help=text))

    t = sub.add_parser("transpile", help="transpile a circuit text file to the native gate set")
    t.add_argument("input", type=Path)
    t.add_argument("--out", type=Path, help="write the native circuit here")
    t.add_argument("--lowering", choices=("diagonalize", "ladder"), default="diagonalize")
    t.add_argument("--json", action="store_true", help="print the report as JSON instead of key=value")

    s = sub.add_parser("sweep-shots", help="energy mean/std versus shot budget")
    _common(s)
    s.add_argument("--budgets", help="comma-separated shot budgets")

    a = sub.add_parser("sweep-space", help="one report per active-space trio")
    _common(a)
    a.add_argument("--mode", choices=("exact", "vqe", "adapt", "noisy", "noisy+pmsv"))
    a.add_argument(
        "--trio", action="append", metavar="R=PATH,TS=PATH,P1=PATH",
        help="FCIDUMP trio (repeatable); defaults to the bundled (2,2) and (4,4) sets",
    )

    r = sub.add_parser("report", help="print a run directory's report")
    r.add_argument("run_dir", type=Path)
    return ap


def _config(args, mode: str | None) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
    if mode == "noisy" and args.mitigate:
        mode = "noisy+pmsv"
    elif mode is None and args.mitigate and cfg.mode == "noisy":
        mode = "noisy+pmsv"
    return cfg.with_overrides(
        mode=mode, seed=args.seed, shots=args.shots, n_experiments=args.experiments, output_dir=args.out,
        ansatz=args.ansatz, engine=args.engine,
    )


def _parse_trio(text: str) -> dict[str, str]:
    out = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        if not val:
            raise ValueError(f"bad trio entry {part!r}; expected LABEL=PATH")
        out[key.strip()] = val.strip()
    return out


def _run(args) -> int:
    cmd = args.command
    if cmd in ("exact", "vqe", "adapt", "noisy"):
        cfg = _config(args, cmd)
        report, path = execute(cfg)
        sys.stdout.write(report.summary())
        print(f"wrote {path}")
        return 0

    if cmd == "transpile":
        circ = Circuit.from_text(args.input.read_text())
        native, rep = transpile(circ, args.lowering)
        if args.out:
            args.out.write_text(native.to_text())
        else:
            sys.stdout.write(native.to_text())
        if args.json:
            print(json.dumps(rep.as_dict(), sort_keys=True))
        else:
            sys.stdout.write(rep.to_text())
        return 0

    if cmd == "sweep-shots":
        cfg = _config(args, None)
        if not cfg.mode.startswith("noisy"):
            cfg = replace(cfg, mode="noisy+pmsv" if args.mitigate else "noisy")
        budgets = [int(b) for b in args.budgets.split(",")] if args.budgets else None
        t0 = time.perf_counter()
        rows = shots_sweep(cfg, budgets)
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "shots_sweep.csv").write_text(sweep_csv(rows))
        (out / "meta.json").write_text(json.dumps({"timings_s": {"sweep": time.perf_counter() - t0}}) + "\n")
        sys.stdout.write(sweep_csv(rows))
        return 0

    if cmd == "sweep-space":
        cfg = _config(args, args.mode)
        trios = [_parse_trio(t) for t in args.trio] if args.trio else [BUNDLED_22, BUNDLED_44]
        rows = activespace_sweep(cfg, trios)
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "activespace_sweep.csv").write_text(space_csv(rows))
        sys.stdout.write(space_csv(rows))
        return 0

    if cmd == "report":
        data = json.loads((args.run_dir / "report.json").read_text())
        sys.stdout.write(ReactionReport.from_dict(data).summary())
        return 0
    raise AssertionError(cmd)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if exc.stage == "config" else EXIT_PIPELINE
    except (ValueError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: [stage=config] {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
