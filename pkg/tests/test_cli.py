"""CLI front end: config validation, emission, determinism, exit codes."""

import json

import numpy as np
import pytest

from qszego import analysis, cli, flow
from qszego.flow import FlowConfig
from qszego.rank_one import RationalState, to_spectrum
from qszego.trajectory import read_csv_columns


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


def z_config(cutoff=16, t_end=1.0):
    return {
        "initial": {"rational": {"b": 0.0, "c": 1.0, "p": 0.0}},
        "flow": {"dt": 1e-3, "t_end": t_end, "cutoff": cutoff,
                 "monitor_stride": 100, "spectrum_rank": 3},
    }


# ----------------------------------------------------------------- evolve-pde

def test_evolve_fixed_point_emits_constant_rows(tmp_path):
    cfg = write_config(tmp_path, z_config())
    out = tmp_path / "out"
    assert cli.main(["evolve", "--config", str(cfg), "--out", str(out)]) == 0
    cols = read_csv_columns(out / "trajectory.csv")
    assert set(cols) == {"t", "Q", "M", "E", "absJ", "H12", "H1",
                         "bmo_proxy", "sigma1", "sigma2", "sigma3"}
    assert np.all(cols["Q"] == 1.0)
    assert np.all(cols["E"] == 0.0)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["drift"]["Q"]["max_abs"] == 0.0
    assert summary["tail_flag_time"] is None
    assert summary["aborted"] is False


def test_evolve_deterministic_csv(tmp_path):
    cfg = write_config(tmp_path, {
        "initial": {"rational": {"b": 1.0, "c": 1.0, "p": 0.5}},
        "flow": {"dt": 1e-3, "t_end": 0.2, "cutoff": 48,
                 "monitor_stride": 20, "spectrum_rank": 4},
    })
    csvs, summaries = [], []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert cli.main(["evolve", "--config", str(cfg), "--out", str(out)]) == 0
        csvs.append((out / "trajectory.csv").read_bytes())
        summaries.append((out / "summary.json").read_bytes())
    assert csvs[0] == csvs[1]
    assert summaries[0] == summaries[1]


def test_evolve_instability_exit_code(tmp_path):
    cfg = write_config(tmp_path, {
        "initial": {"coeffs": [[5.0, 0.0], [0.0, 0.0]]},
        "flow": {"dt": 50.0, "t_end": 500.0, "cutoff": 1,
                 "monitor_stride": 1, "spectrum_rank": 1, "method": "rk4"},
    })
    out = tmp_path / "out"
    code = cli.main(["evolve", "--config", str(cfg), "--out", str(out)])
    assert code == 3
    assert (out / "trajectory.csv").exists()  # partial output retained
    summary = json.loads((out / "summary.json").read_text())
    assert summary["aborted"] is True


# -------------------------------------------------------------- config errors

def test_unknown_key_rejected(tmp_path, capsys):
    payload = z_config()
    payload["frobnicate"] = 1
    cfg = write_config(tmp_path, payload)
    assert cli.main(["evolve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "unknown keys" in capsys.readouterr().err


def test_two_initial_sources_rejected(tmp_path):
    payload = z_config()
    payload["initial"]["coeffs"] = [[1, 0]]
    cfg = write_config(tmp_path, payload)
    assert cli.main(["evolve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_kind_mismatch_rejected(tmp_path):
    payload = z_config()
    payload["kind"] = "compare"
    cfg = write_config(tmp_path, payload)
    assert cli.main(["evolve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_missing_config_rejected(tmp_path):
    assert cli.main(["evolve", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "o")]) == 2


def test_invalid_json_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert cli.main(["evolve", "--config", str(path),
                     "--out", str(tmp_path / "o")]) == 2


def test_seedless_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, z_config())
    code = cli.main(["--seedless", "evolve", "--config", str(cfg),
                     "--out", str(tmp_path / "o")])
    assert code == 2
    assert "reserved" in capsys.readouterr().err


def test_infeasible_blowup_target_rejected(tmp_path):
    cfg = write_config(tmp_path, {
        "target": {"Q": 4.0, "M": 1.0, "p_abs": 0.5},
        "flow": {"dt": 1e-3, "t_end": 1.0},
    })
    assert cli.main(["blowup-hunt", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 2


# ------------------------------------------------------------------ evolve-l1

def test_evolve_l1_outputs(tmp_path):
    cfg = write_config(tmp_path, {
        "initial": {"rational": {"b": 1.0, "c": 1.0, "p": 0.5}},
        "flow": {"dt": 1e-3, "t_end": 1.0, "monitor_stride": 100},
    })
    out = tmp_path / "out"
    assert cli.main(["evolve-l1", "--config", str(cfg), "--out", str(out)]) == 0
    cols = read_csv_columns(out / "trajectory.csv")
    assert abs(cols["Q"][0] - 7.0 / 3.0) < 1e-12
    coords = read_csv_columns(out / "coordinates.csv")
    assert abs(coords["abs_p"][0] - 0.5) < 1e-15
    summary = json.loads((out / "summary.json").read_text())
    # rk4 at dt = 1e-3; the 1e-9 budget belongs to the dt = 1e-4 runs
    assert summary["drift"]["Q"]["max_rel"] < 1e-7


# --------------------------------------------------------------- blowup-hunt

def test_blowup_hunt_pipeline(tmp_path):
    cfg = write_config(tmp_path, {
        "target": {"Q": 2.0, "M": 1.0, "p_abs": 0.5},
        "flow": {"dt": 5e-4, "t_end": 5.0, "monitor_stride": 20},
        "fit_sobolev_s": 1.0,
    })
    out = tmp_path / "out"
    assert cli.main(["blowup-hunt", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert abs(summary["resonance_residual"]) < 1e-10
    assert abs(summary["envelope"]["rate"] - 4.0) < 1e-12
    assert abs(summary["fit"]["abs_c_rate"] + 4.0) < 0.2
    assert abs(summary["fit"]["hs_sq_rate"] - 4.0) < 0.2


# ------------------------------------------------------------------- compare

def test_compare_pde_vs_ode(tmp_path):
    cfg = write_config(tmp_path, {
        "initial": {"blowup": {"Q": 2.0, "M": 1.0, "p_abs": 0.5}},
        "flow": {"dt": 1e-3, "t_end": 1.0, "cutoff": 256, "monitor_stride": 20},
        "p_ceiling": 0.9,
    })
    out = tmp_path / "out"
    assert cli.main(["compare", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["max_l2_deviation"] < 1e-6
    assert summary["l2_within_tolerance"] is True
    dev = read_csv_columns(out / "deviation.csv")
    assert np.max(dev["l2_dev"]) == pytest.approx(summary["max_l2_deviation"])
    assert (out / "pde.csv").exists() and (out / "ode.csv").exists()


# ----------------------------------------------------------------- lax-audit

def test_lax_audit_scaling(tmp_path):
    cfg = write_config(tmp_path, {
        "initial": {"rational": {"b": 1.0, "c": 1.0, "p": 0.5}},
        "cutoff": 96,
        "section": 24,
        "dts": [2e-3, 1e-3, 5e-4],
    })
    out = tmp_path / "out"
    assert cli.main(["lax-audit", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["scaling_ok"] is True
    cols = read_csv_columns(out / "residuals.csv")
    assert len(cols["dt"]) == 3


# ------------------------------------------------------------------- xy-demo

def test_xy_demo_reference(tmp_path):
    cfg = write_config(tmp_path, {"x0": 0.0, "y0": 1.0, "Q": 1.0, "dt": 1e-3})
    out = tmp_path / "out"
    assert cli.main(["xy-demo", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["within_bound"] is True
    assert abs(summary["blowup_time"]) <= 1.0
    path = read_csv_columns(out / "path.csv")
    assert {"t", "x", "y"} <= set(path)


# ----------------------------------------------------------------------- fit

def test_fit_subcommand_on_emitted_csv(tmp_path):
    run_cfg = write_config(tmp_path, {
        "target": {"Q": 2.0, "M": 1.0, "p_abs": 0.5},
        "flow": {"dt": 5e-4, "t_end": 5.0, "monitor_stride": 20},
    }, name="run.json")
    out = tmp_path / "run"
    assert cli.main(["blowup-hunt", "--config", str(run_cfg), "--out", str(out)]) == 0
    fit_cfg = write_config(tmp_path, {
        "csv": str(out / "trajectory.csv"),
        "column": "H1",
        "squared": True,
        "window": [1.5, 4.5],
    }, name="fit.json")
    fit_out = tmp_path / "fit"
    assert cli.main(["fit", "--config", str(fit_cfg), "--out", str(fit_out)]) == 0
    summary = json.loads((fit_out / "summary.json").read_text())
    assert abs(summary["fit"]["slope"] - 4.0) < 0.2


# ------------------------------------------------------------------ batching

def test_jobs_batch(tmp_path):
    batch = [
        {"name": "one", "x0": 0.0, "y0": 1.0, "Q": 1.0, "dt": 1e-3},
        {"name": "two", "x0": 0.0, "y0": -2.0, "Q": 4.0, "dt": 1e-3},
    ]
    cfg = write_config(tmp_path, batch)
    out = tmp_path / "out"
    assert cli.main(["xy-demo", "--config", str(cfg), "--out", str(out),
                     "--jobs", "2"]) == 0
    assert (out / "one" / "summary.json").exists()
    assert (out / "two" / "summary.json").exists()


def test_batch_requires_names(tmp_path):
    cfg = write_config(tmp_path, [{"x0": 0.0, "y0": 1.0, "Q": 1.0, "dt": 1e-3}])
    assert cli.main(["xy-demo", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 2


# ------------------------------------------------------------- analysis layer

def test_fit_exponential_examples():
    t = np.linspace(0.0, 2.0, 50)
    fit = analysis.fit_exponential(t, np.exp(3.0 * t))
    assert abs(fit.slope - 3.0) < 1e-9
    flat = analysis.fit_exponential(t, np.full_like(t, 2.5))
    assert abs(flat.slope) < 1e-12
    scaled = analysis.fit_exponential(t, 17.3 * np.exp(3.0 * t))
    assert abs(scaled.slope - fit.slope) < 1e-9


def test_fit_exponential_errors():
    t = np.linspace(0, 1, 20)
    with pytest.raises(ValueError, match="positive"):
        analysis.fit_exponential(t, np.linspace(-1, 1, 20))
    with pytest.raises(ValueError, match="too few"):
        analysis.fit_exponential(t[:5], np.exp(t[:5]))


def test_compare_trajectories_identical_and_interp():
    u0 = to_spectrum(RationalState(1.0, 1.0, 0.5), 32)
    cfg = FlowConfig(dt=1e-3, t_end=0.1, cutoff=32, monitor_stride=10)
    a = flow.evolve(u0, cfg)
    b = flow.evolve(u0, cfg)
    rep = analysis.compare_trajectories(a, b, tolerances={"Q": 0.0, "H1": 0.0})
    assert rep.passed
    assert all(v == 0.0 for v in rep.max_dev.values())
    cfg2 = FlowConfig(dt=5e-4, t_end=0.1, cutoff=32, monitor_stride=10)
    c = flow.evolve(u0, cfg2)
    with pytest.raises(ValueError, match="grids differ"):
        analysis.compare_trajectories(a, c)
    rep2 = analysis.compare_trajectories(a, c, interpolate=True)
    assert rep2.max_dev["Q"] < 1e-10


def test_global_order_refinement():
    # halving dt shrinks the rk4 global trajectory error ~16x
    u0 = to_spectrum(RationalState(1.0, 1.0, 0.5), 32)
    t_end = 0.5
    ref = flow.advance(u0, 2.5e-4, 2000, "rk4")
    e1 = np.linalg.norm(flow.advance(u0, 2e-3, 250, "rk4") - ref)
    e2 = np.linalg.norm(flow.advance(u0, 1e-3, 500, "rk4") - ref)
    assert 11.0 < e1 / e2 < 22.0


def test_shipped_example_configs_are_valid():
    import pathlib
    here = pathlib.Path(__file__).resolve().parent.parent / "configs"
    for cfg in sorted(here.glob("*.json")):
        payload = json.loads(cfg.read_text())
        assert isinstance(payload, dict)
        assert payload["kind"] in cli.KIND_BY_COMMAND.values()
