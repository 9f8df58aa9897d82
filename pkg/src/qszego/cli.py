"""Command-line front end: experiment orchestration with CSV/JSON emission.

Subcommands (one experiment kind each): ``evolve`` (spectral PDE run),
``evolve-l1`` (rank-one coordinate ODE run), ``compare`` (PDE vs ODE from the
same initial state), ``blowup-hunt`` (resonant-state construction plus rate
fits), ``lax-audit`` (commutator-residual dt-scaling), ``xy-demo`` (mean-mode
collapse), ``fit`` (exponential fit of a CSV column).

Every run reads a JSON config (``--config``), writes into ``--out``, and is
deterministic: identical configs produce byte-identical CSV files on the
same platform.  Unknown config keys are errors, not silent defaults.  Exit
codes: 0 success, 2 config error, 3 numerical abort (partial output is kept).

``--jobs N`` fans the entries of a config *array* across worker threads;
each entry needs a ``name`` and writes to its own subdirectory.  ``--seedless``
is reserved: nothing in the pipeline is randomized, and passing the flag is
rejected so scripts cannot silently rely on it.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, analysis, flow, rank_one
from .backend import KERNELS
from .flow import FlowConfig
from .spectrum import as_spectrum
from .trajectory import Trajectory, read_csv_columns

__all__ = ["RunSpec", "ConfigError", "run", "main"]

_FMT = "%.17g"

KIND_BY_COMMAND = {
    "evolve": "evolve-pde",
    "evolve-l1": "evolve-l1",
    "compare": "compare",
    "blowup-hunt": "blowup-hunt",
    "lax-audit": "lax-audit",
    "xy-demo": "xy-demo",
    "fit": "fit",
}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    """Invalid run configuration (maps to exit code 2)."""


@dataclass
class RunSpec:
    """A fully validated run request: kind, parameters, output directory."""

    kind: str
    name: str
    payload: dict
    outdir: Path


# ------------------------------------------------------------ config parsing

def _check_keys(d: dict, ctx: str, required: set[str], optional: set[str] = frozenset()):
    if not isinstance(d, dict):
        raise ConfigError(f"{ctx}: expected an object")
    unknown = set(d) - required - set(optional)
    if unknown:
        raise ConfigError(f"{ctx}: unknown keys {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"{ctx}: missing keys {sorted(missing)}")


def _as_complex(v, ctx: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if (isinstance(v, list) and len(v) == 2
            and all(isinstance(x, (int, float)) for x in v)):
        return complex(v[0], v[1])
    raise ConfigError(f"{ctx}: expected a number or [re, im] pair, got {v!r}")


def _as_number(v, ctx: str) -> float:
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"{ctx}: expected a number, got {v!r}")
    return float(v)


def _flow_config(d, ctx: str, *, need_cutoff: bool) -> FlowConfig:
    required = {"dt", "t_end"}
    optional = {"cutoff", "monitor_stride", "spectrum_rank", "method"}
    _check_keys(d, ctx, required, optional)
    if need_cutoff and "cutoff" not in d:
        raise ConfigError(f"{ctx}: cutoff is required for spectral runs")
    try:
        return FlowConfig(
            dt=_as_number(d["dt"], f"{ctx}.dt"),
            t_end=_as_number(d["t_end"], f"{ctx}.t_end"),
            cutoff=int(d["cutoff"]) if "cutoff" in d else None,
            monitor_stride=int(d.get("monitor_stride", 1)),
            spectrum_rank=int(d.get("spectrum_rank", 5)),
            method=d.get("method", "gauss6"),
        )
    except ValueError as exc:
        raise ConfigError(f"{ctx}: {exc}") from exc


def _rational_state(d, ctx: str) -> rank_one.RationalState:
    _check_keys(d, ctx, {"b", "c", "p"})
    try:
        return rank_one.RationalState(
            _as_complex(d["b"], f"{ctx}.b"),
            _as_complex(d["c"], f"{ctx}.c"),
            _as_complex(d["p"], f"{ctx}.p"),
        )
    except ValueError as exc:
        raise ConfigError(f"{ctx}: {exc}") from exc


def _blowup_state(d, ctx: str) -> rank_one.RationalState:
    _check_keys(d, ctx, {"Q", "M", "p_abs"})
    try:
        return rank_one.find_blowup_initial(
            _as_number(d["Q"], f"{ctx}.Q"),
            _as_number(d["M"], f"{ctx}.M"),
            _as_number(d["p_abs"], f"{ctx}.p_abs"),
        )
    except ValueError as exc:
        raise ConfigError(f"{ctx}: {exc}") from exc


def _initial_source(d, ctx: str, *, allow_coeffs: bool):
    """Return ("coeffs", array) or ("state", RationalState)."""
    allowed = {"rational", "blowup"} | ({"coeffs"} if allow_coeffs else set())
    _check_keys(d, ctx, set(), allowed)
    given = [k for k in ("coeffs", "rational", "blowup") if k in d]
    if len(given) != 1:
        raise ConfigError(
            f"{ctx}: exactly one initial-data source required, got {given or 'none'}"
        )
    key = given[0]
    if key == "coeffs":
        try:
            coeffs = np.array(
                [_as_complex(v, f"{ctx}.coeffs[{i}]") for i, v in enumerate(d[key])]
            )
            return "coeffs", as_spectrum(coeffs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{ctx}.coeffs: {exc}") from exc
    if key == "rational":
        return "state", _rational_state(d[key], f"{ctx}.rational")
    return "state", _blowup_state(d[key], f"{ctx}.blowup")


def _spectrum_from_source(source, cutoff: int):
    mode, value = source
    if mode == "coeffs":
        if len(value) != cutoff + 1:
            raise ConfigError(
                f"initial.coeffs has cutoff {len(value) - 1}, flow.cutoff is {cutoff}"
            )
        return value
    return rank_one.to_spectrum(value, cutoff)


# -------------------------------------------------------------------- output

def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, Path):
        return str(v)
    return v


def _write_summary(outdir: Path, summary: dict) -> None:
    text = json.dumps(_jsonable(summary), indent=2, sort_keys=True)
    (outdir / "summary.json").write_text(text + "\n")


def _write_table(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_FMT % v for v in row) + "\n")


def _coordinates_csv(path: Path, traj: rank_one.RationalTrajectory) -> None:
    _write_table(
        path,
        ["t", "re_b", "im_b", "re_c", "im_c", "re_p", "im_p", "abs_c", "abs_p"],
        [traj.t, traj.b.real, traj.b.imag, traj.c.real, traj.c.imag,
         traj.p.real, traj.p.imag, np.abs(traj.c), np.abs(traj.p)],
    )


def _base_summary(spec: RunSpec, record: Trajectory | None) -> dict:
    out = {
        "kind": spec.kind,
        "name": spec.name,
        "backend": KERNELS,
        "version": __version__,
        "config": spec.payload,
    }
    if record is not None:
        out["drift"] = record.drift()
        out["tail_flag_time"] = record.tail_flag_time()
        out["aborted"] = record.aborted
        out["abort_reason"] = record.abort_reason
        out["rows"] = len(record)
        out["t_final"] = float(record.t[-1]) if len(record) else None
    return out


# ------------------------------------------------------------------- runners

def _run_evolve(spec: RunSpec) -> int:
    d = spec.payload
    _check_keys(d, spec.kind, {"initial", "flow"}, {"kind", "name", "keep_states"})
    cfg = _flow_config(d["flow"], "flow", need_cutoff=True)
    source = _initial_source(d["initial"], "initial", allow_coeffs=True)
    u0 = _spectrum_from_source(source, cfg.cutoff)
    record = flow.evolve(u0, cfg, keep_states=bool(d.get("keep_states", False)))
    record.to_csv(spec.outdir / "trajectory.csv")
    _write_summary(spec.outdir, _base_summary(spec, record))
    return EXIT_NUMERIC if record.aborted else EXIT_OK


def _run_evolve_l1(spec: RunSpec) -> int:
    d = spec.payload
    _check_keys(d, spec.kind, {"initial", "flow"}, {"kind", "name", "tail_cutoff"})
    cfg = _flow_config(d["flow"], "flow", need_cutoff=False)
    _, state = _initial_source(d["initial"], "initial", allow_coeffs=False)
    traj = rank_one.evolve_ode(state, cfg)
    tail_cutoff = d.get("tail_cutoff")
    record = traj.to_trajectory(cfg.spectrum_rank,
                                int(tail_cutoff) if tail_cutoff is not None else None)
    record.to_csv(spec.outdir / "trajectory.csv")
    _coordinates_csv(spec.outdir / "coordinates.csv", traj)
    summary = _base_summary(spec, record)
    summary["initial_state"] = {"b": state.b, "c": state.c, "p": state.p}
    summary["resonance_residual"] = rank_one.resonance_residual(state)
    _write_summary(spec.outdir, summary)
    return EXIT_NUMERIC if traj.aborted else EXIT_OK


def _run_compare(spec: RunSpec) -> int:
    d = spec.payload
    _check_keys(d, spec.kind, {"initial", "flow"},
                {"kind", "name", "p_ceiling", "l2_tolerance"})
    cfg = _flow_config(d["flow"], "flow", need_cutoff=True)
    p_ceiling = _as_number(d.get("p_ceiling", 0.9), "p_ceiling")
    l2_tol = _as_number(d.get("l2_tolerance", 1e-6), "l2_tolerance")
    _, state = _initial_source(d["initial"], "initial", allow_coeffs=False)

    ode = rank_one.evolve_ode(state, cfg)
    inside = np.abs(ode.p) <= p_ceiling
    if not inside[0]:
        raise ConfigError("the initial state already violates the |p| ceiling")
    # compare up to the first ceiling crossing, not just rows that happen to
    # be inside (oscillating |p| may re-enter)
    outside = np.nonzero(~inside)[0]
    stop = int(outside[0] - 1) if outside.size else len(inside) - 1
    steps_per_row = cfg.monitor_stride
    pde_cfg = FlowConfig(
        dt=cfg.dt,
        t_end=stop * steps_per_row * cfg.dt,
        cutoff=cfg.cutoff,
        monitor_stride=cfg.monitor_stride,
        spectrum_rank=cfg.spectrum_rank,
        method=cfg.method,
    )
    u0 = rank_one.to_spectrum(state, cfg.cutoff)
    pde = flow.evolve(u0, pde_cfg, keep_states=True)

    nrows = min(len(pde.states), stop + 1)
    l2 = np.empty(nrows)
    for i in range(nrows):
        synth = rank_one.to_spectrum(ode.state_at(i), cfg.cutoff)
        l2[i] = float(np.linalg.norm(pde.states[i] - synth))
    ode_record = ode.to_trajectory(cfg.spectrum_rank, tail_cutoff=cfg.cutoff)

    pde.to_csv(spec.outdir / "pde.csv")
    ode_record.to_csv(spec.outdir / "ode.csv")
    _write_table(spec.outdir / "deviation.csv", ["t", "l2_dev"],
                 [pde.t[:nrows], l2])

    pde_clip = _clip_record(pde, nrows)
    ode_clip = _clip_record(ode_record, nrows)
    report = analysis.compare_trajectories(pde_clip, ode_clip)
    summary = _base_summary(spec, pde)
    summary["p_ceiling"] = p_ceiling
    summary["rows_compared"] = nrows
    summary["max_l2_deviation"] = float(np.max(l2))
    summary["l2_tolerance"] = l2_tol
    summary["l2_within_tolerance"] = bool(np.max(l2) <= l2_tol)
    summary["column_max_dev"] = report.max_dev
    summary["column_rms_dev"] = report.rms_dev
    _write_summary(spec.outdir, summary)
    if pde.aborted or ode.aborted:
        return EXIT_NUMERIC
    return EXIT_OK


def _clip_record(rec: Trajectory, n: int) -> Trajectory:
    return Trajectory(
        t=rec.t[:n], mass=rec.mass[:n], momentum=rec.momentum[:n],
        energy=rec.energy[:n], abs_cubic=rec.abs_cubic[:n],
        h_half=rec.h_half[:n], h_one=rec.h_one[:n], bmo=rec.bmo[:n],
        sigmas=rec.sigmas[:n], trace_norm=rec.trace_norm[:n],
        tail=rec.tail[:n],
    )


def _run_blowup_hunt(spec: RunSpec) -> int:
    d = spec.payload
    _check_keys(d, spec.kind, {"target", "flow"},
                {"kind", "name", "fit_sobolev_s"})
    _check_keys(d["target"], "target", {"Q", "M", "p_abs"})
    cfg = _flow_config(d["flow"], "flow", need_cutoff=False)
    s_exp = _as_number(d.get("fit_sobolev_s", 1.0), "fit_sobolev_s")
    q = _as_number(d["target"]["Q"], "target.Q")
    m = _as_number(d["target"]["M"], "target.M")
    p_abs = _as_number(d["target"]["p_abs"], "target.p_abs")
    try:
        state = rank_one.find_blowup_initial(q, m, p_abs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    traj = rank_one.evolve_ode(state, cfg)
    record = traj.to_trajectory(cfg.spectrum_rank)
    record.to_csv(spec.outdir / "trajectory.csv")
    _coordinates_csv(spec.outdir / "coordinates.csv", traj)

    summary = _base_summary(spec, record)
    summary["initial_state"] = {"b": state.b, "c": state.c, "p": state.p}
    summary["resonance_residual"] = rank_one.resonance_residual(state)
    env = rank_one.envelope_data(q, m)
    summary["envelope"] = {
        "rate": env.rate, "r_minus": env.r_minus, "r_plus": env.r_plus,
    }
    try:
        growth = rank_one.growth_diagnostic(traj, s=s_exp)
        cfit = analysis.fit_exponential(traj.t, traj.abs_c(),
                                        window=growth.window)
        summary["fit"] = {
            "sobolev_s": s_exp,
            "hs_sq_rate": growth.rate,
            "hs_sq_rate_target": (2.0 * s_exp - 1.0) * env.rate,
            "abs_c_rate": cfit.slope,
            "abs_c_rate_target": -env.rate,
            "window": list(growth.window),
            "n_points": growth.n_points,
        }
    except ValueError as exc:
        summary["fit"] = {"error": str(exc)}
    _write_summary(spec.outdir, summary)
    return EXIT_NUMERIC if traj.aborted else EXIT_OK


def _run_lax_audit(spec: RunSpec) -> int:
    d = spec.payload
    _check_keys(d, spec.kind, {"initial", "cutoff", "section", "dts"},
                {"kind", "name", "ratio_window"})
    cutoff = int(d["cutoff"])
    section = int(d["section"])
    dts = [_as_number(x, "dts[]") for x in d["dts"]]
    if len(dts) < 2 or any(x <= 0 for x in dts):
        raise ConfigError("dts: need at least two positive step sizes")
    window = d.get("ratio_window", [3.5, 4.5])
    if (not isinstance(window, list) or len(window) != 2):
        raise ConfigError("ratio_window: expected [lo, hi]")
    source = _initial_source(d["initial"], "initial", allow_coeffs=True)
    u0 = _spectrum_from_source(source, cutoff)
    try:
        residuals = [flow.lax_residual(u0, dt, section) for dt in dts]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    ratios = [residuals[i] / residuals[i + 1] for i in range(len(residuals) - 1)]
    _write_table(spec.outdir / "residuals.csv", ["dt", "residual"],
                 [np.array(dts), np.array(residuals)])
    summary = _base_summary(spec, None)
    summary["section"] = section
    summary["cutoff"] = cutoff
    summary["residuals"] = dict(zip((_FMT % x for x in dts), residuals))
    summary["ratios"] = ratios
    summary["ratio_window"] = window
    summary["scaling_ok"] = bool(all(window[0] <= r <= window[1] for r in ratios))
    _write_summary(spec.outdir, summary)
    return EXIT_OK


def _run_xy_demo(spec: RunSpec) -> int:
    d = spec.payload
    _check_keys(d, spec.kind, {"x0", "y0", "Q", "dt"}, {"kind", "name"})
    x0 = _as_number(d["x0"], "x0")
    y0 = _as_number(d["y0"], "y0")
    q = _as_number(d["Q"], "Q")
    dt = _as_number(d["dt"], "dt")
    try:
        res = flow.xy_blowup_time(x0, y0, q, dt)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    except RuntimeError as exc:
        summary = _base_summary(spec, None)
        summary["error"] = str(exc)
        _write_summary(spec.outdir, summary)
        return EXIT_NUMERIC
    _write_table(spec.outdir / "path.csv", ["t", "x", "y"],
                 [res.t, res.x, res.y])
    summary = _base_summary(spec, None)
    summary["blowup_time"] = res.time
    summary["direction"] = res.direction
    summary["threshold"] = res.threshold
    summary["bound"] = (1.0 / abs(y0)) if y0 != 0 else None
    summary["within_bound"] = (abs(res.time) <= 1.0 / abs(y0)) if y0 != 0 else None
    _write_summary(spec.outdir, summary)
    return EXIT_OK


def _run_fit(spec: RunSpec) -> int:
    d = spec.payload
    _check_keys(d, spec.kind, {"csv", "column"}, {"kind", "name", "window", "squared"})
    path = Path(d["csv"])
    if not path.exists():
        raise ConfigError(f"csv not found: {path}")
    cols = read_csv_columns(path)
    column = d["column"]
    if column not in cols or "t" not in cols:
        raise ConfigError(f"column {column!r} not in {sorted(cols)}")
    window = d.get("window")
    if window is not None:
        if not (isinstance(window, list) and len(window) == 2):
            raise ConfigError("window: expected [t0, t1]")
        window = (float(window[0]), float(window[1]))
    y = cols[column] ** 2 if d.get("squared", False) else cols[column]
    try:
        fit = analysis.fit_exponential(cols["t"], y, window=window)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    summary = _base_summary(spec, None)
    summary["fit"] = {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "window": list(fit.window),
        "residual_rms": fit.residual_rms,
        "n_points": fit.n_points,
        "column": column,
        "squared": bool(d.get("squared", False)),
    }
    _write_summary(spec.outdir, summary)
    return EXIT_OK


_RUNNERS = {
    "evolve-pde": _run_evolve,
    "evolve-l1": _run_evolve_l1,
    "compare": _run_compare,
    "blowup-hunt": _run_blowup_hunt,
    "lax-audit": _run_lax_audit,
    "xy-demo": _run_xy_demo,
    "fit": _run_fit,
}


def run(spec: RunSpec) -> int:
    """Execute one validated run; returns the process exit code.

    Emitted CSV and JSON files are bit-stable per platform: run timing goes
    to the status line, never into the summary.
    """
    spec.outdir.mkdir(parents=True, exist_ok=True)
    try:
        return _RUNNERS[spec.kind](spec)
    except ConfigError:
        raise
    except (ValueError, np.linalg.LinAlgError) as exc:
        summary = {"kind": spec.kind, "name": spec.name, "error": str(exc)}
        _write_summary(spec.outdir, summary)
        return EXIT_NUMERIC


# ---------------------------------------------------------------------- main

def _build_spec(kind: str, payload, outdir: Path, *, name_required: bool) -> RunSpec:
    if not isinstance(payload, dict):
        raise ConfigError("each run config must be a JSON object")
    if "kind" in payload and payload["kind"] != kind:
        raise ConfigError(
            f"config kind {payload['kind']!r} does not match subcommand ({kind})"
        )
    name = payload.get("name", "")
    if name_required and not name:
        raise ConfigError("each entry of a batch config needs a name")
    if name and not isinstance(name, str):
        raise ConfigError("name must be a string")
    target = outdir / name if name else outdir
    return RunSpec(kind=kind, name=name or kind, payload=payload, outdir=target)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qszego",
        description="Spectral experiments for the quadratic Szego-type flow",
    )
    parser.add_argument("--seedless", action="store_true",
                        help="reserved; the pipeline has no randomness and "
                             "the flag is rejected")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in KIND_BY_COMMAND:
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--out", type=Path, default=Path("runs"))
        sp.add_argument("--jobs", type=int, default=1)

    args = parser.parse_args(argv)
    if args.seedless:
        print("qszego: --seedless is reserved and rejected (no randomness exists)",
              file=sys.stderr)
        return EXIT_CONFIG

    kind = KIND_BY_COMMAND[args.command]
    try:
        raw = json.loads(args.config.read_text())
    except FileNotFoundError:
        print(f"qszego: config not found: {args.config}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"qszego: invalid JSON in {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if isinstance(raw, list):
            specs = [_build_spec(kind, entry, args.out, name_required=True)
                     for entry in raw]
        else:
            specs = [_build_spec(kind, raw, args.out, name_required=False)]
    except ConfigError as exc:
        print(f"qszego: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.jobs < 1:
        print("qszego: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    def _execute(spec: RunSpec) -> int:
        start = time.perf_counter()
        try:
            code = run(spec)
        except ConfigError as exc:
            print(f"qszego[{spec.name}]: config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        elapsed = time.perf_counter() - start
        print(f"qszego[{spec.name}]: {spec.kind} -> {spec.outdir} "
              f"(exit {code}, {elapsed:.2f}s)")
        return code

    if args.jobs == 1 or len(specs) == 1:
        codes = [_execute(s) for s in specs]
    else:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_execute, specs))
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
