"""Experiment harness: spec validation, artifacts, CLI behaviour, determinism."""

import json
import math
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from gemdiff import ParameterError, SignalSpec, StorageProtocol
from gemdiff.config import load_config
from gemdiff.harness import (
    CSV_FORMAT,
    JSON_FORMAT,
    ExperimentSpec,
    RuntimeGuardError,
    _cell,
    _check,
    _check_budget,
    _estimate_cell_steps,
    _parked_lead,
    _run_tasks,
    main,
)

TAU = 2.0 * math.pi
CONFIG = Path(__file__).resolve().parent.parent / "configs" / "rubidium_benchmark.cfg"


@pytest.fixture(scope="module")
def bench_config():
    return load_config(CONFIG)


@pytest.fixture(scope="module")
def cycle_run(tmp_path_factory):
    """One cheap full CLI run shared by the artifact tests."""
    out = tmp_path_factory.mktemp("cli") / "out"
    rc = main(
        [
            "storage-cycle",
            "--config",
            str(CONFIG),
            "--out",
            str(out),
            "--fidelity",
            "coarse",
            "--threads",
            "1",
        ]
    )
    assert rc == 0
    return out / "storage-cycle"


# ---------------------------------------------------------------------------
# spec and helpers
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs, match",
    [
        (dict(experiment="frobnicate"), "unknown experiment"),
        (dict(fidelity="ultra"), "unknown fidelity"),
        (dict(threads=0), "threads"),
        (dict(max_cell_steps=0.0), "max_cell_steps"),
        (dict(sweep_axes=(("warp_factor", (1.0,)),)), "not a config key"),
        (dict(sweep_axes=(("t_hold", ()),)), "no values"),
    ],
)
def test_experiment_spec_validation(bench_config, tmp_path, kwargs, match):
    base = dict(
        experiment="storage-cycle", config=bench_config, out_dir=tmp_path
    )
    base.update(kwargs)
    with pytest.raises(ParameterError, match=match):
        ExperimentSpec(**base)


def test_cell_formatting():
    assert _cell("text") == "text"
    assert _cell(None) == "nan"
    assert _cell(float("nan")) == "nan"
    assert _cell(True) == "1"
    assert _cell(False) == "0"
    assert _cell(np.int64(42)) == "42"
    assert _cell(0.1) == "0.1"
    assert _cell(1.0 / 3.0) == "0.333333333333"  # %.12g, locale-free


def test_check_kinds():
    assert _check("a", 1.001, 1.0, 0.01, "c")["passed"]
    assert not _check("a", 1.02, 1.0, 0.01, "c")["passed"]
    assert _check("a", 0.15, 0.1, 0.06, "c", kind="abs")["passed"]
    assert _check("a", 0.5, (0.0, 1.0), 0.0, "c", kind="range")["passed"]
    assert not _check("a", 1.5, (0.0, 1.0), 0.0, "c", kind="range")["passed"]
    assert _check("a", True, True, 0.0, "c", kind="bool")["passed"]
    # non-finite values must fail, never crash the summary
    assert not _check("a", float("nan"), 1.0, 0.5, "c")["passed"]
    assert not _check("a", None, 1.0, 0.5, "c")["passed"]
    with pytest.raises(ParameterError, match="unknown check kind"):
        _check("a", 1.0, 1.0, 0.1, "c", kind="fuzzy")


def test_tasks_return_in_submission_order():
    def job(i):
        def run():
            time.sleep(0.01 * (4 - i))  # later submissions finish first
            return i

        return run

    assert _run_tasks([job(i) for i in range(4)], threads=4) == [0, 1, 2, 3]
    assert _run_tasks([job(i) for i in range(4)], threads=1) == [0, 1, 2, 3]


def test_cost_estimate_and_budget(bench_config, tmp_path):
    cfg = bench_config
    one = _estimate_cell_steps(
        cfg.params, cfg.protocol, cfg.signal, n_medium=128, steps_per_width=32.0
    )
    many = _estimate_cell_steps(
        cfg.params,
        cfg.protocol,
        cfg.signal,
        n_medium=128,
        steps_per_width=32.0,
        n_cols=40,
    )
    assert many > 30.0 * one
    # an idle hold costs a few exact steps, a driven hold real stepping
    idle = StorageProtocol.standard(eta_write=cfg.protocol.eta_write, t_hold=1e-3)
    driven = replace(idle, control_on_hold=True)
    cheap = _estimate_cell_steps(
        cfg.params, idle, cfg.signal, n_medium=128, steps_per_width=32.0
    )
    dear = _estimate_cell_steps(
        cfg.params, driven, cfg.signal, n_medium=128, steps_per_width=32.0
    )
    assert dear > 10.0 * cheap

    spec = ExperimentSpec(
        experiment="storage-cycle",
        config=cfg,
        out_dir=tmp_path,
        max_cell_steps=1e4,
    )
    with pytest.raises(RuntimeGuardError, match="GEM_MAX_CELL_STEPS"):
        _check_budget(spec, 1e6)
    _check_budget(spec, 1e3)  # under the cap: no complaint


def test_parked_lead_flips_the_carrier_when_needed(bench_config):
    cfg = bench_config
    trial, lead = _parked_lead(cfg.params, cfg.protocol, cfg.signal)
    assert trial.carrier_mismatch == -cfg.params.carrier_mismatch
    assert lead == pytest.approx(3.9194e-6, rel=1e-4)
    # with a negligible carrier and an inverted gradient neither
    # orientation parks: both leads come out negative
    small = replace(cfg.params, carrier_mismatch=TAU * 1e6 / cfg.params.light_speed)
    pos = StorageProtocol.standard(eta_write=-cfg.protocol.eta_write, t_hold=0.0)
    with pytest.raises(ParameterError, match="no carrier orientation"):
        _parked_lead(small, pos, cfg.signal)


# ---------------------------------------------------------------------------
# artifacts of a real run
# ---------------------------------------------------------------------------


def test_summary_is_strict_sorted_json(cycle_run):
    text = (cycle_run / "summary.json").read_text()

    def reject(token):
        raise AssertionError("non-strict JSON constant %s" % token)

    summary = json.loads(text, parse_constant=reject)
    assert summary["format"] == JSON_FORMAT
    assert summary["experiment"] == "storage-cycle"
    assert summary["fidelity"] == "coarse"
    assert summary["passed"] is True
    assert list(summary) == sorted(summary)
    assert summary["config_digest"] == "09859cf03dac48d7"
    assert summary["results"]["beta"] == pytest.approx(-3.77252, abs=1e-4)
    assert summary["results"]["eff_full"] == pytest.approx(0.92574, abs=1e-4)
    for check in summary["checks"]:
        assert check["passed"] is True
        assert check["comparison"]


def test_csv_artifacts_are_tagged_and_clean(cycle_run):
    for name in ("breakdown", "write_trace", "read_trace"):
        text = (cycle_run / (name + ".csv")).read_text()
        lines = text.splitlines()
        assert lines[0] == "# format: " + CSV_FORMAT
        assert "# experiment: storage-cycle" in lines
        assert "# dataset: " + name in lines
        assert "# config: 09859cf03dac48d7" in lines
        assert any(line.startswith("# columns: ") for line in lines)
        assert "/tmp" not in text  # no local paths in shareable artifacts
    command = [
        line
        for line in (cycle_run / "breakdown.csv").read_text().splitlines()
        if line.startswith("# command: ")
    ]
    assert command == ["# command: gem storage-cycle --fidelity coarse"]
    assert (cycle_run / "traces.svg").read_text().startswith("<svg")


def test_artifacts_are_identical_across_thread_counts(cycle_run, tmp_path, capsys):
    rc = main(
        [
            "storage-cycle",
            "--config",
            str(CONFIG),
            "--out",
            str(tmp_path),
            "--fidelity",
            "coarse",
            "--threads",
            "2",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "PASS numeric_vs_full" in out
    assert "2/2 checks passed" in out
    other = tmp_path / "storage-cycle"
    names = sorted(p.name for p in cycle_run.iterdir())
    assert names == sorted(p.name for p in other.iterdir())
    for name in names:
        assert (cycle_run / name).read_bytes() == (other / name).read_bytes(), name


# ---------------------------------------------------------------------------
# CLI exit codes and environment defaults
# ---------------------------------------------------------------------------


def test_cli_reports_failed_checks(tmp_path, capsys):
    # a weak control drops the optical depth: echo leakage through the far
    # face becomes visible and its range check must fail
    rc = main(
        [
            "storage-cycle",
            "--config",
            str(CONFIG),
            "--out",
            str(tmp_path),
            "--fidelity",
            "coarse",
            "--threads",
            "1",
            "--set",
            "rabi_control=2pi*5 MHz",
        ]
    )
    assert rc == 1
    assert "FAIL echo_leakage_small" in capsys.readouterr().out


def test_cli_usage_errors_exit_2(tmp_path, capsys, monkeypatch):
    rc = main(
        ["storage-cycle", "--config", str(tmp_path / "missing.cfg")]
    )
    assert rc == 2
    assert "gem:" in capsys.readouterr().err

    rc = main(
        [
            "storage-cycle",
            "--config",
            str(CONFIG),
            "--out",
            str(tmp_path),
            "--set",
            "garbage",
        ]
    )
    assert rc == 2
    assert "key=value" in capsys.readouterr().err

    monkeypatch.setenv("GEM_MAX_CELL_STEPS", "1000")
    rc = main(
        [
            "storage-cycle",
            "--config",
            str(CONFIG),
            "--out",
            str(tmp_path),
            "--fidelity",
            "coarse",
        ]
    )
    assert rc == 2
    assert "exceeds the cap" in capsys.readouterr().err

    with pytest.raises(SystemExit) as exc:
        main(["frobnicate", "--config", str(CONFIG)])
    assert exc.value.code == 2


def test_environment_supplies_defaults(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("GEM_FIDELITY", "coarse")
    monkeypatch.setenv("GEM_OUT", str(tmp_path / "envout"))
    monkeypatch.setenv("GEM_THREADS", "1")
    rc = main(["storage-cycle", "--config", str(CONFIG)])
    assert rc == 0
    summary = json.loads(
        (tmp_path / "envout" / "storage-cycle" / "summary.json").read_text()
    )
    assert summary["fidelity"] == "coarse"
    capsys.readouterr()
