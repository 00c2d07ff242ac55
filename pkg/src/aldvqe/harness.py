"""Reaction-energy pipeline over the R / TS / P1 states, sweeps, and report files."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import platform
import time
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .ansatz import AnsatzSpec, adapt_vqe, build_circuit, chemically_aware_filter, uccsd_pool
from .circuits import Circuit, derive_seed, hartree_fock_state
from .noisy_backend import (
    COMPILATION,
    ENGINES,
    MitigationSpec,
    NoiseModel,
    Symmetry,
    prepare_state,
    repeat_experiments,
    shots_sweep as _shots_sweep,
)
from .operators import MolecularIntegrals, QubitOperator, exact_ground_energy, parse_fcidump, qubit_hamiltonian
from .vqe import VqeConfig, minimize

log = logging.getLogger(__name__)

HARTREE_TO_KCAL = 627.5094740631
STATES = ("R", "TS", "P1")
MODES = ("exact", "vqe", "adapt", "noisy", "noisy+pmsv")
ANSATZE = ("filtered", "full", "adapt")
FIXTURE_NOTE = (
    "Bundled integrals are synthetic model Hamiltonians built to the qualitative "
    "R < P1 < TS profile; absolute energies carry no chemical meaning."
)
BUNDLED_22 = {"R": "bundled:r_22", "TS": "bundled:ts_22", "P1": "bundled:p1_22"}
BUNDLED_44 = {"R": "bundled:r_44", "TS": "bundled:ts_44", "P1": "bundled:p1_44"}


class PipelineError(RuntimeError):
    def __init__(self, stage: str, state: str | None, cause: BaseException | str):
        self.stage, self.state = stage, state
        where = f"stage={stage}" + (f" state={state}" if state else "")
        super().__init__(f"[{where}] {cause}")


# --------------------------------------------------------------------------
# configuration


def resolve_fixture(ref: str, base: Path | None = None) -> str:
    """FCIDUMP text for ``bundled:<name>`` or a filesystem path (relative to ``base``)."""
    if ref.startswith("bundled:"):
        name = ref.split(":", 1)[1]
        res = resources.files("aldvqe") / "data" / f"{name}.fcidump"
        if not res.is_file():
            raise FileNotFoundError(f"no bundled fixture {name!r}")
        return res.read_text()
    path = Path(ref)
    if base is not None and not path.is_absolute():
        path = base / path
    return path.read_text()


def bundled_fixtures() -> list[str]:
    root = resources.files("aldvqe") / "data"
    return sorted(p.name[: -len(".fcidump")] for p in root.iterdir() if p.name.endswith(".fcidump"))


@dataclass
class RunConfig:
    states: dict[str, str] = field(default_factory=lambda: dict(BUNDLED_22))
    mode: str = "exact"
    ansatz: str = "filtered"  # source of theta for vqe and noisy modes
    adapt_threshold: float = 1e-3
    adapt_max_rounds: int = 50
    vqe: VqeConfig = field(default_factory=VqeConfig)
    noise: NoiseModel = field(default_factory=NoiseModel)
    shots: int = 100_000
    n_experiments: int = 100
    seed: int = 0
    engine: str = "density"
    compilation: str = "auto"
    symmetries: list[dict] | None = None  # None: alpha, beta and total parity
    shot_budgets: list[int] = field(default_factory=lambda: [1_000, 10_000, 30_000, 100_000])
    output_dir: str = "runs/latest"
    base_dir: str | None = None  # where relative FCIDUMP paths are resolved

    def __post_init__(self):
        if isinstance(self.vqe, dict):
            self.vqe = VqeConfig(**self.vqe)
        if isinstance(self.noise, dict):
            self.noise = NoiseModel.from_dict(self.noise)
        self.validate()

    def validate(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.ansatz not in ANSATZE:
            raise ValueError(f"ansatz must be one of {ANSATZE}, got {self.ansatz!r}")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.compilation not in COMPILATION:
            raise ValueError(f"compilation must be one of {COMPILATION}, got {self.compilation!r}")
        missing = [s for s in STATES if s not in self.states]
        if missing:
            raise ValueError(f"states {missing} lack an FCIDUMP reference")
        if self.mode.startswith("noisy"):
            if self.shots < 1:
                raise ValueError("noisy modes need shots >= 1")
            if self.n_experiments < 2:
                raise ValueError("noisy modes need at least 2 experiments")
        if self.adapt_threshold <= 0:
            raise ValueError("adapt_threshold must be positive")
        if any(b < 1 for b in self.shot_budgets):
            raise ValueError("shot budgets must be positive")

    def check_files(self):
        for label in STATES:
            try:
                resolve_fixture(self.states[label], self._base())
            except OSError as exc:
                raise ValueError(f"state {label}: cannot read {self.states[label]!r} ({exc})") from exc

    def _base(self) -> Path | None:
        return Path(self.base_dir) if self.base_dir else None

    @property
    def mitigate(self) -> bool:
        return self.mode == "noisy+pmsv"

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d

    def result_inputs(self) -> dict:
        """Everything that can change results; the destination directory cannot."""
        d = self.to_dict()
        d.pop("output_dir")
        return d

    @classmethod
    def from_dict(cls, d: dict, base_dir: str | None = None) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        d = dict(d)
        d.setdefault("base_dir", base_dir)
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), str(path.parent))

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


# --------------------------------------------------------------------------
# per-state solve


@dataclass
class StateResult:
    label: str
    n_electrons: int
    n_orbitals: int
    n_qubits: int
    energy: float
    std: float = 0.0  # over repeated experiments
    stderr: float = 0.0  # of the mean
    exact_energy: float | None = None
    noiseless_energy: float | None = None
    n_parameters: int | None = None
    raw_energy: float | None = None  # noisy+pmsv: unfiltered counterpart
    raw_std: float | None = None
    retained_fraction: float | None = None
    extra: dict = field(default_factory=dict)


def _stage(name: str, label: str | None, fn: Callable, *args, **kw):
    try:
        return fn(*args, **kw)
    except PipelineError:
        raise
    except Exception as exc:  # noqa: BLE001 - re-raised with the stage label
        raise PipelineError(name, label, f"{type(exc).__name__}: {exc}") from exc


def load_state(config: RunConfig, label: str) -> tuple[MolecularIntegrals, QubitOperator]:
    text = _stage("read", label, resolve_fixture, config.states[label], config._base())
    ints = _stage("parse", label, parse_fcidump, text)
    H = _stage("hamiltonian", label, qubit_hamiltonian, ints)
    return ints, H


def variational_ansatz(config: RunConfig, ints: MolecularIntegrals, H: QubitOperator) -> tuple[AnsatzSpec, float]:
    """Noiseless optimum for ``config.ansatz``: (spec at theta*, energy)."""
    nq, ne = ints.n_qubits, ints.n_electrons
    pool = uccsd_pool(ne, nq)
    if config.ansatz == "adapt":
        res = adapt_vqe(H, pool, ne, config.adapt_threshold, config.adapt_max_rounds, config.vqe)
        return res.spec, res.energy
    if config.ansatz == "filtered":
        pool = chemically_aware_filter(pool, hartree_fock_state(nq, ne), H)
    spec = AnsatzSpec.zeros(pool, nq, ne)
    res = minimize(H, spec, config.vqe)
    if not res.converged:
        log.warning("VQE stopped without meeting its tolerances after %d iterations", res.n_iterations)
    return spec.with_theta(res.theta), res.energy


def mitigation_spec(config: RunConfig, H: QubitOperator, n_electrons: int) -> MitigationSpec:
    if config.symmetries is None:
        return MitigationSpec.spin_parities(H, n_electrons)
    sy = []
    for item in config.symmetries:
        mask = sum(1 << int(q) for q in item["qubits"])
        sy.append(Symmetry(mask, int(item["expected"]), str(item.get("label", ""))))
    return MitigationSpec(tuple(sy), H)


def solve_state(config: RunConfig, label: str, index: int, circuits_out: dict[str, Circuit]) -> StateResult:
    ints, H = load_state(config, label)
    exact = _stage("exact", label, exact_ground_energy, H, ints.n_electrons, ints.spin_2s)
    base = dict(
        label=label, n_electrons=ints.n_electrons, n_orbitals=ints.n_orbitals, n_qubits=ints.n_qubits,
        exact_energy=exact.energy,
    )
    if config.mode == "exact":
        return StateResult(energy=exact.energy, **base)

    if config.mode == "adapt":
        cfg = replace(config, ansatz="adapt")
    else:
        cfg = config
    spec, e_opt = _stage("optimize", label, variational_ansatz, cfg, ints, H)
    ansatz = build_circuit(spec)
    circuits_out[f"{label}_ansatz"] = ansatz
    if config.mode in ("vqe", "adapt"):
        return StateResult(energy=e_opt, n_parameters=spec.n_parameters, noiseless_energy=e_opt, **base)

    prepared = _stage(
        "compile", label, prepare_state, label, H, ansatz, config.noise, config.engine, config.compilation
    )
    for k, c in enumerate(prepared.circuits):
        circuits_out[f"{label}_group{k:02d}"] = c
    mit = _stage("mitigation", label, mitigation_spec, config, H, ints.n_electrons) if config.mitigate else None
    stats = _stage(
        "sample", label, repeat_experiments, prepared, config.n_experiments, config.shots,
        derive_seed(config.seed, index), mit,
    )
    n = config.n_experiments
    extra = {"native_depths": [c.depth() for c in prepared.circuits]}
    if mit is None:
        return StateResult(
            energy=stats.mean, std=stats.std, stderr=stats.std / math.sqrt(n), n_parameters=spec.n_parameters,
            noiseless_energy=e_opt, extra=extra, **base,
        )
    return StateResult(
        energy=stats.mitigated_mean, std=stats.mitigated_std, stderr=stats.mitigated_std / math.sqrt(n),
        n_parameters=spec.n_parameters, noiseless_energy=e_opt, raw_energy=stats.mean, raw_std=stats.std,
        retained_fraction=float(stats.retained.mean()), extra=extra, **base,
    )


# --------------------------------------------------------------------------
# reaction report


@dataclass
class ReactionReport:
    method: str
    states: dict[str, StateResult]
    config: dict

    def energy(self, label: str) -> float:
        return self.states[label].energy

    def delta(self, label: str) -> float:
        return self.states[label].energy - self.states["R"].energy

    def delta_error(self, label: str) -> float:
        return math.hypot(self.states[label].stderr, self.states["R"].stderr)

    def as_dict(self) -> dict:
        rel = {
            label: {
                "delta_ha": self.delta(label),
                "delta_kcal_mol": self.delta(label) * HARTREE_TO_KCAL,
                "stderr_ha": self.delta_error(label),
            }
            for label in ("TS", "P1")
        }
        return {
            "header": {"method": self.method, "note": FIXTURE_NOTE, "version": __version__},
            "config": self.config,
            "states": {k: asdict(v) for k, v in self.states.items()},
            "relative": rel,
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.as_dict()), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["state", "method", "n_electrons", "n_orbitals", "energy_ha", "std_ha", "stderr_ha", "delta_ha",
             "delta_kcal_mol"]
        )
        for label in STATES:
            s = self.states[label]
            d = self.delta(label)
            w.writerow(
                [label, self.method, s.n_electrons, s.n_orbitals, repr(s.energy), repr(s.std), repr(s.stderr),
                 repr(d), repr(d * HARTREE_TO_KCAL)]
            )
        return buf.getvalue()

    @classmethod
    def from_dict(cls, d: dict) -> "ReactionReport":
        states = {k: StateResult(**v) for k, v in d["states"].items()}
        return cls(d["header"]["method"], states, d["config"])

    def summary(self) -> str:
        lines = [f"method: {self.method}", FIXTURE_NOTE]
        for label in STATES:
            s = self.states[label]
            err = f" +- {s.std:.6f}" if s.std else ""
            lines.append(f"  E[{label:2s}] = {s.energy:.8f} Ha{err}")
        for label in ("TS", "P1"):
            lines.append(
                f"  dE[{label}] = {self.delta(label):+.8f} Ha = {self.delta(label) * HARTREE_TO_KCAL:+.4f} kcal/mol"
            )
        return "\n".join(lines) + "\n"


def _plain(x):
    """JSON-safe copy: numpy scalars and arrays become Python numbers and lists."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, np.generic):
        return x.item()
    return x


def run_pipeline(config: RunConfig, circuits_out: dict[str, Circuit] | None = None) -> ReactionReport:
    """Solve every state and assemble the report (nothing is written)."""
    _stage("config", None, config.validate)
    _stage("config", None, config.check_files)
    circuits_out = {} if circuits_out is None else circuits_out
    states = {label: solve_state(config, label, i, circuits_out) for i, label in enumerate(STATES)}
    return ReactionReport(config.mode, states, config.result_inputs())


def environment() -> dict:
    import scipy

    return {
        "aldvqe": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def write_run(
    out_dir: str | Path,
    report: ReactionReport,
    circuits: dict[str, Circuit],
    timings: dict[str, float],
    extra_files: dict[str, str] | None = None,
) -> Path:
    """``report.json``, ``report.csv``, ``circuits/*.txt`` and ``meta.json`` (timings live only there)."""
    out = Path(out_dir)
    (out / "circuits").mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    (out / "report.csv").write_text(report.to_csv())
    for name, c in sorted(circuits.items()):
        (out / "circuits" / f"{name}.txt").write_text(c.to_text())
    for name, text in (extra_files or {}).items():
        (out / name).write_text(text)
    meta = {"environment": environment(), "output_dir": str(out), "seed": report.config.get("seed"), "timings_s": timings}
    (out / "meta.json").write_text(json.dumps(_plain(meta), sort_keys=True, indent=2) + "\n")
    return out


def execute(config: RunConfig) -> tuple[ReactionReport, Path]:
    t0 = time.perf_counter()
    circuits: dict[str, Circuit] = {}
    report = run_pipeline(config, circuits)
    path = write_run(config.output_dir, report, circuits, {"pipeline": time.perf_counter() - t0})
    return report, path


# --------------------------------------------------------------------------
# sweeps


@dataclass
class SweepRow:
    state: str
    shots: int
    mean: float
    std: float
    mitigated_mean: float | None = None
    mitigated_std: float | None = None


def shots_sweep(config: RunConfig, budgets: Sequence[int] | None = None, mitigate: bool | None = None) -> list[SweepRow]:
    """Mean and std over ``n_experiments`` per state and shot budget (theta fixed at the noiseless optimum)."""
    budgets = list(budgets or config.shot_budgets)
    mitigate = config.mitigate if mitigate is None else mitigate
    rows = []
    for i, label in enumerate(STATES):
        ints, H = load_state(config, label)
        spec, _ = _stage("optimize", label, variational_ansatz, config, ints, H)
        prepared = _stage(
            "compile", label, prepare_state, label, H, build_circuit(spec), config.noise, config.engine,
            config.compilation,
        )
        mit = mitigation_spec(config, H, ints.n_electrons) if mitigate else None
        stats = _stage(
            "sample", label, _shots_sweep, prepared, budgets, config.n_experiments, derive_seed(config.seed, i), mit
        )
        for st in stats:
            rows.append(SweepRow(label, st.shots, st.mean, st.std, st.mitigated_mean, st.mitigated_std))
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    with_mit = any(r.mitigated_mean is not None for r in rows)
    w.writerow(["state", "shots", "mean", "std"] + (["mitigated_mean", "mitigated_std"] if with_mit else []))
    for r in rows:
        vals = [r.state, r.shots, repr(r.mean), repr(r.std)]
        if with_mit:
            vals += [repr(r.mitigated_mean), repr(r.mitigated_std)]
        w.writerow(vals)
    return buf.getvalue()


@dataclass
class SpaceRow:
    n_electrons: int
    n_orbitals: int
    report: ReactionReport

    def as_list(self) -> list:
        r = self.report
        return [
            f"({self.n_electrons},{self.n_orbitals})", r.method, repr(r.energy("R")), repr(r.energy("TS")),
            repr(r.energy("P1")), repr(r.delta("TS")), repr(r.delta("P1")),
        ]


def activespace_sweep(config: RunConfig, trios: Sequence[dict[str, str]]) -> list[SpaceRow]:
    """One report per FCIDUMP trio; every trio must share electron and orbital counts."""
    if not trios:
        raise ValueError("activespace_sweep needs at least one trio")
    rows = []
    for trio in trios:
        cfg = replace(config, states=dict(trio))
        loaded = [load_state(cfg, s)[0] for s in STATES]
        shapes = {(i.n_electrons, i.n_orbitals) for i in loaded}
        if len(shapes) != 1:
            raise PipelineError("sweep-space", None, f"inconsistent trio {trio}: active spaces {sorted(shapes)}")
        ((ne, no),) = shapes
        rows.append(SpaceRow(ne, no, run_pipeline(cfg)))
    return rows


def space_csv(rows: Sequence[SpaceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["active_space", "method", "E_R", "E_TS", "E_P1", "dE_TS", "dE_P1"])
    for r in rows:
        w.writerow(r.as_list())
    return buf.getvalue()
