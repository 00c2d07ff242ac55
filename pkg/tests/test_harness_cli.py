import csv
import io
import json

import pytest
from hypothesis import given, strategies as st

from aldvqe.cli import EXIT_CONFIG, EXIT_PIPELINE, main
from aldvqe.harness import (
    BUNDLED_22,
    BUNDLED_44,
    HARTREE_TO_KCAL,
    PipelineError,
    ReactionReport,
    RunConfig,
    activespace_sweep,
    bundled_fixtures,
    execute,
    resolve_fixture,
    run_pipeline,
)
from aldvqe.noisy_backend import NoiseModel


def test_bundled_fixtures_listed():
    assert {"r_22", "ts_22", "p1_22", "r_44", "ts_44", "p1_44", "h2_like"} <= set(bundled_fixtures())
    with pytest.raises(FileNotFoundError):
        resolve_fixture("bundled:nope")


@given(
    st.sampled_from(["exact", "vqe", "adapt", "noisy", "noisy+pmsv"]),
    st.integers(0, 2**31),
    st.integers(1, 10**6),
    st.floats(0, 0.1),
)
def test_config_json_round_trip(mode, seed, shots, gamma):
    cfg = RunConfig(mode=mode, seed=seed, shots=shots, noise=NoiseModel(gamma2=gamma))
    back = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back == cfg


@pytest.mark.parametrize(
    "bad",
    [
        {"mode": "fast"},
        {"ansatz": "hea"},
        {"engine": "gpu"},
        {"states": {"R": "bundled:r_22"}},
        {"mode": "noisy", "n_experiments": 1},
        {"adapt_threshold": -1},
        {"typo_key": 1},
        {"noise": {"gamma9": 0.1}},
    ],
)
def test_config_rejects_bad_values(bad):
    with pytest.raises((ValueError, TypeError)):
        RunConfig.from_dict(bad)


def test_overrides_revalidate():
    with pytest.raises(ValueError):
        RunConfig().with_overrides(mode="nonsense")
    assert RunConfig().with_overrides(seed=None, shots=5).shots == 5


def test_mode_ordering_exact_is_lowest():
    exact = run_pipeline(RunConfig(mode="exact"))
    for mode in ("vqe", "adapt"):
        rep = run_pipeline(RunConfig(mode=mode))
        for s in ("R", "TS", "P1"):
            assert rep.energy(s) >= exact.energy(s) - 1e-10


def test_report_shape_and_units():
    rep = run_pipeline(RunConfig(mode="exact"))
    d = json.loads(rep.to_json())
    assert "synthetic" in d["header"]["note"]
    assert d["relative"]["TS"]["delta_kcal_mol"] == pytest.approx(rep.delta("TS") * HARTREE_TO_KCAL)
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert [r["state"] for r in rows] == ["R", "TS", "P1"]
    assert float(rows[0]["delta_ha"]) == 0.0
    assert ReactionReport.from_dict(d).to_json() == rep.to_json()
    # qualitative profile of the bundled fixtures
    assert rep.energy("R") < rep.energy("P1") < rep.energy("TS")


def test_written_run_layout(tmp_path):
    cfg = RunConfig(mode="vqe", output_dir=str(tmp_path / "run"))
    _, out = execute(cfg)
    assert {p.name for p in out.iterdir()} == {"report.json", "report.csv", "circuits", "meta.json"}
    assert sorted(p.name for p in (out / "circuits").iterdir()) == ["P1_ansatz.txt", "R_ansatz.txt", "TS_ansatz.txt"]
    meta = json.loads((out / "meta.json").read_text())
    assert "timings_s" in meta and "numpy" in meta["environment"]
    assert "timings" not in (out / "report.json").read_text()


def test_activespace_sweep_rows_and_inconsistency():
    rows = activespace_sweep(RunConfig(mode="exact"), [BUNDLED_22, BUNDLED_44])
    assert [(r.n_electrons, r.n_orbitals) for r in rows] == [(2, 2), (4, 4)]
    with pytest.raises(PipelineError, match="inconsistent trio"):
        activespace_sweep(RunConfig(mode="exact"), [{**BUNDLED_22, "P1": "bundled:p1_44"}])


def test_relative_paths_resolve_against_config(tmp_path):
    (tmp_path / "r.fcidump").write_text(resolve_fixture("bundled:r_22"))
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"states": {**BUNDLED_22, "R": "r.fcidump"}}))
    rep = run_pipeline(RunConfig.from_json(cfg_path))
    assert rep.energy("R") == pytest.approx(-1.10, abs=1e-9)


def test_cli_exact_and_report(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["exact", "--out", str(out)]) == 0
    assert main(["report", str(out)]) == 0
    assert "dE[TS]" in capsys.readouterr().out


def test_cli_transpile(tmp_path, capsys):
    src = tmp_path / "c.txt"
    src.write_text("qubits 2\nH 0\nCX 0 1\nPAULIEXP 0 1 XY 0.3\n")
    assert main(["transpile", str(src), "--out", str(tmp_path / "n.txt")]) == 0
    text = capsys.readouterr().out
    kv = dict(line.split("=") for line in text.strip().splitlines())
    assert int(kv["output_depth"]) <= int(kv["decomposed_depth"])
    assert main(["transpile", str(src), "--json"]) == 0
    assert "output_gates" in capsys.readouterr().out.splitlines()[-1]


def test_cli_noisy_mitigate_flag(tmp_path):
    out = tmp_path / "noisy"
    assert main(["noisy", "--mitigate", "--shots", "500", "--experiments", "3", "--out", str(out)]) == 0
    d = json.loads((out / "report.json").read_text())
    assert d["header"]["method"] == "noisy+pmsv"
    assert d["states"]["R"]["retained_fraction"] is not None
    assert (out / "circuits" / "R_group00.txt").exists()


def test_cli_sweeps(tmp_path):
    assert main(["sweep-shots", "--shots", "10", "--experiments", "3", "--budgets", "100,400", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "shots_sweep.csv").open()))
    assert [r["state"] for r in rows] == ["R", "R", "TS", "TS", "P1", "P1"]
    assert set(rows[0]) == {"state", "shots", "mean", "std"}
    assert main(["sweep-space", "--mode", "exact", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "activespace_sweep.csv").read_text().count("\n") == 3


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"mode": "bogus"}))
    assert main(["exact", "--config", str(bad)]) == EXIT_CONFIG
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"states": {**BUNDLED_22, "TS": "none.fcidump"}}))
    assert main(["exact", "--config", str(missing)]) == EXIT_CONFIG
    broken = tmp_path / "broken.fcidump"
    broken.write_text("&FCI NORB=2,NELEC=2,MS2=0,\n&END\n1.0 1 1\n")
    cfg = tmp_path / "broken.json"
    cfg.write_text(json.dumps({"states": {**BUNDLED_22, "P1": "broken.fcidump"}}))
    assert main(["exact", "--config", str(cfg)]) == EXIT_PIPELINE
    err = capsys.readouterr().err
    assert "stage=parse state=P1" in err


def test_vqe_relative_energies_match_exact():
    exact, vqe = run_pipeline(RunConfig(mode="exact")), run_pipeline(RunConfig(mode="vqe"))
    for s in ("TS", "P1"):
        assert abs(vqe.delta(s) - exact.delta(s)) < 1e-6


def test_relative_energies_are_recomputed_exactly():
    rep = run_pipeline(RunConfig(mode="noisy+pmsv", shots=2000, n_experiments=3))
    d = json.loads(rep.to_json())
    rows = {r["state"]: r for r in csv.DictReader(io.StringIO(rep.to_csv()))}
    for s in ("TS", "P1"):
        diff = d["states"][s]["energy"] - d["states"]["R"]["energy"]
        assert d["relative"][s]["delta_ha"] == diff
        assert float(rows[s]["delta_ha"]) == diff
        assert d["states"][s]["std"] > 0 and d["relative"][s]["stderr_ha"] > 0


def test_activespace_ordering_and_adapt_accuracy():
    exact = activespace_sweep(RunConfig(mode="exact"), [BUNDLED_22, BUNDLED_44])
    for row in exact:
        assert row.report.delta("TS") > row.report.delta("P1") > 0
    (adapt,) = activespace_sweep(RunConfig(mode="adapt"), [BUNDLED_44])
    for s in ("R", "TS", "P1"):
        assert abs(adapt.report.energy(s) - exact[1].report.energy(s)) < 1.6e-3


def test_single_budget_sweep_has_one_row_per_state():
    from aldvqe.harness import shots_sweep

    rows = shots_sweep(RunConfig(mode="noisy", n_experiments=3), [500])
    assert [(r.state, r.shots) for r in rows] == [("R", 500), ("TS", 500), ("P1", 500)]


@pytest.mark.xfail(strict=True, reason="in-sector noise leaves a state-dependent bias of a few mHa after PMSV")
def test_mitigated_relative_energies_within_two_standard_errors():
    noisy = run_pipeline(RunConfig(mode="noisy+pmsv", shots=100_000, n_experiments=100))
    exact = run_pipeline(RunConfig(mode="vqe"))
    for s in ("TS", "P1"):
        assert abs(noisy.delta(s) - exact.delta(s)) <= 2 * noisy.delta_error(s)
