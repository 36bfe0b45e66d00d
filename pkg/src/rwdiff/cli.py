"""Command-line driver.

    rwdiff <command> --config FILE [--seed N] [--threads K] [--out DIR]

Commands: simulate, ergodic, coupling, measure, limit. Every run writes
``summary.json`` and ``manifest.json`` to the output directory; the
manifest can be passed back as ``--config`` to repeat the run. Outputs are
a function of the config and seed only; thread count and output directory
are left out of the manifest for that reason.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error,
5 any other domain error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
from pathlib import Path
import sys

import numpy as np

from . import __version__
from .config import RunConfig, parse_config
from .coupling import comparison_triple, mirror_coupling_experiment, shift_coupling_experiment
from .dynamics import simulate_full_direct, simulate_full_factorized, simulate_spherical, simulate_temporal
from .errors import (
    ConfigError,
    DegenerateClockError,
    NumericalRankError,
    PseudoNormBlowupError,
    QuadratureError,
    RWDiffError,
)
from .measure import make_measure
from .state import SphericalState, to_full
from .statistics import clock_slope_estimate, ergodic_average, estimate_x_infinity, occupation_ks, time_ratio
from .streams import generator, map_paths, resolve_threads

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO, EXIT_DOMAIN = 0, 2, 3, 4, 5
NUMERIC_ERRORS = (PseudoNormBlowupError, QuadratureError, NumericalRankError, DegenerateClockError)

CSV_COLUMNS = ("s", "t", "tdot", "theta1", "theta2", "theta3", "x1", "x2", "x3", "clock")
ERGODIC_TOLERANCE = 0.03
KS_THRESHOLD = 0.02


def _clean(obj):
    """JSON-safe copy: NaN and inf become null, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def _write_json(path, obj):
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def write_trajectory_csv(path, sample):
    n = len(sample)
    cols = [sample.s, sample.t, sample.tdot]
    for block in (sample.theta, sample.x):
        if block is None:
            cols.extend([np.full(n, np.nan)] * 3)
        else:
            cols.extend(block.T)
    cols.append(sample.clock if sample.clock is not None else np.full(n, np.nan))
    np.savetxt(path, np.column_stack(cols), delimiter=",", fmt="%.17g", header=",".join(CSV_COLUMNS), comments="")


def _initial(cfg: RunConfig):
    init = cfg.values["initial"]
    e = SphericalState.from_direction(init["t"], init["tdot"], init["theta"])
    return e, np.array(init["x"], dtype=float)


# -- commands -----------------------------------------------------------------


def _simulate(cfg, out, threads):
    rep = cfg.get("simulate", "representation")
    e, x0 = _initial(cfg)
    csv = "csv" in cfg.get("output", "formats")
    traj_dir = out / "trajectories"
    if csv:
        traj_dir.mkdir(parents=True, exist_ok=True)

    def task(i, rt, rs):
        if rep == "temporal":
            path = simulate_temporal(e.temporal, cfg.model, cfg.integrator, rt)
        elif rep == "spherical":
            path = simulate_spherical(e, cfg.model, cfg.integrator, (rt, rs))
        elif rep == "full":
            path = simulate_full_factorized(to_full(e, x0, cfg.model), cfg.model, cfg.integrator, (rt, rs))
        else:
            path = simulate_full_direct(to_full(e, x0, cfg.model), cfg.model, cfg.integrator, rt)
        if csv:
            write_trajectory_csv(traj_dir / f"path_{i:05d}.csv", path)
        row = {"index": i, "t_end": path.t[-1], "tdot_end": path.tdot[-1], "time_ratio": time_ratio(path)}
        if path.clock is not None:
            row["clock_end"] = path.clock[-1]
        if path.x is not None:
            row["x_end"] = path.x[-1]
        if "max_defect" in path.diagnostics:
            row["max_defect"] = path.diagnostics["max_defect"]
        return row

    rows = map_paths(task, cfg.n_paths, cfg.master_seed, threads)
    return {"representation": rep, "paths": rows,
            "mean_time_ratio": float(np.mean([r["time_ratio"] for r in rows]))}


def _verdict(estimate, oracle, tolerance, relative=True):
    bound = tolerance * abs(oracle) if relative else tolerance
    return {"estimate": estimate, "oracle": oracle, "tolerance": tolerance,
            "pass": bool(abs(estimate - oracle) <= bound)}


def _ergodic(cfg, out, threads):
    sigma = cfg.integrator.sigma
    if sigma <= 0:
        raise ConfigError("the ergodic command needs integrator.sigma > 0", ["integrator.sigma must be positive"])
    nu = make_measure(cfg.model.hubble_limit(), sigma)
    burn_in = cfg.get("ergodic", "burn_in")
    e, _ = _initial(cfg)

    def task(i, rt, rs):
        path = simulate_spherical(e, cfg.model, cfg.integrator, (rt, rs))
        est = ergodic_average(path, lambda v: v)
        return {"index": i, "ergodic_mean": est.value, "stderr": est.stderr, "time_ratio": time_ratio(path),
                "occupation_ks": occupation_ks(path, nu, burn_in), "clock_slope": clock_slope_estimate(path)}

    rows = map_paths(task, cfg.n_paths, cfg.master_seed, threads)
    mean = lambda key: float(np.mean([r[key] for r in rows]))  # noqa: E731
    verdicts = {
        "ergodic_mean": _verdict(mean("ergodic_mean"), nu.mean, ERGODIC_TOLERANCE),
        "time_ratio": _verdict(mean("time_ratio"), nu.mean, ERGODIC_TOLERANCE),
        "clock_slope": _verdict(mean("clock_slope"), nu.clock_slope(sigma), ERGODIC_TOLERANCE),
        "occupation_ks": {"estimate": mean("occupation_ks"), "oracle": 0.0, "tolerance": KS_THRESHOLD,
                          "pass": bool(mean("occupation_ks") <= KS_THRESHOLD)},
    }
    with_err = [r for r in rows if r["stderr"] > 0]
    verdicts["paths_within_3_stderr"] = float(np.mean([abs(r["ergodic_mean"] - nu.mean) <= 3 * r["stderr"]
                                                       for r in with_err])) if with_err else None
    return {"paths": rows, "verdicts": verdicts}


def _coupling(cfg, out, threads):
    mode = cfg.get("coupling", "mode")
    cp = cfg.values["coupling"]
    e1, _ = _initial(cfg)
    e2 = SphericalState.from_direction(cp["t2"], cp["tdot2"], cp["theta2"])
    seed = cfg.master_seed

    def task(i, rt, rs):
        if mode == "comparison":
            return comparison_triple(e1.t, e1.tdot, cfg.model, cfg.integrator, rt)[3]
        if mode == "shift":
            return shift_coupling_experiment(e1.temporal, e2.temporal, cfg.model, cfg.integrator, (rt, rs))
        gens = (rt, rs, generator(seed, i, 2), generator(seed, i, 3))
        return mirror_coupling_experiment(e1, e2, cfg.model, cfg.integrator, gens)

    reports = map_paths(task, cfg.n_paths, seed, threads)
    fmts = cfg.get("output", "formats")
    if "json" in fmts:
        _write_json(out / "reports.json", [r.to_dict() for r in reports])
    if "csv" in fmts:
        lines = ["index,coupled,coupling_time"]
        for i, r in enumerate(reports):
            ct = "" if r.coupling_time is None else repr(float(r.coupling_time))
            lines.append(f"{i},{int(r.coupled)},{ct}")
        (out / "coupling_times.csv").write_text("\n".join(lines) + "\n")
    summary = {"mode": mode, "runs": len(reports)}
    if mode == "comparison":
        summary["total_violations"] = int(sum(r.diagnostics["violations"] for r in reports))
        summary["max_excess"] = float(max(r.diagnostics["max_excess"] for r in reports))
    else:
        times = [r.coupling_time for r in reports if r.coupled]
        summary["coupled_fraction"] = len(times) / len(reports)
        summary["median_coupling_time"] = float(np.median(times)) if times else None
    return summary


def measure_summary(a, b):
    nu = make_measure(a, b)
    return {"a": a, "b": b, "c": nu.c, "C": nu.norm_constant, "mean": nu.mean, "variance": nu.variance,
            "median": nu.median, "clock_slope": nu.clock_slope()}


def _measure(cfg, out, threads):
    a = cfg.get("measure", "a") or cfg.model.hubble_limit()
    b = cfg.get("measure", "b") or cfg.integrator.sigma
    summary = measure_summary(a, b)
    print(json.dumps(_clean(summary), indent=2, sort_keys=True))
    return summary


def _limit(cfg, out, threads):
    e, x0 = _initial(cfg)
    u0 = to_full(e, x0, cfg.model)

    def task(i, rt, rs):
        path = simulate_full_factorized(u0, cfg.model, cfg.integrator, (rt, rs))
        mid = int(np.searchsorted(path.s, 0.5 * path.s[-1]))
        est = estimate_x_infinity(path, cfg.model)
        half_bound = cfg.model.inv_alpha_tail(float(path.t[mid]))
        moved = float(np.linalg.norm(path.x[-1] - path.x[mid]))
        return {"index": i, "x_inf": est.x_inf, "certificate": est.certificate,
                "log_certificate": est.log_certificate, "moved_after_half": moved,
                "bound_at_half": half_bound, "bound_holds": bool(moved <= half_bound)}

    rows = map_paths(task, cfg.n_paths, cfg.master_seed, threads)
    if "csv" in cfg.get("output", "formats"):
        data = np.array([[r["index"], *r["x_inf"], r["certificate"], r["log_certificate"]] for r in rows])
        np.savetxt(out / "limit_points.csv", data, delimiter=",", fmt="%.17g",
                   header="index,x1,x2,x3,certificate,log_certificate", comments="")
    return {"paths": rows, "all_bounds_hold": all(r["bound_holds"] for r in rows),
            "max_certificate": max(r["certificate"] for r in rows)}


COMMAND_TABLE = {"simulate": _simulate, "ergodic": _ergodic, "coupling": _coupling,
                 "measure": _measure, "limit": _limit}


def manifest(cfg: RunConfig):
    data = cfg.to_dict()
    data["ensemble"]["threads"] = None
    data["output"]["directory"] = None
    canon = json.dumps(_clean(data), sort_keys=True, separators=(",", ":"))
    return {"config": data, "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
            "master_seed": cfg.master_seed, "command": cfg.command, "version": __version__}


def run(cfg: RunConfig, out_dir=None, threads=None):
    """Execute ``cfg`` and write its artifacts; returns the summary dict."""
    if cfg.command is None:
        raise ConfigError("no command given", ["run.command is required"])
    out = Path(out_dir or cfg.get("output", "directory"))
    out.mkdir(parents=True, exist_ok=True)
    threads = resolve_threads(threads if threads is not None else cfg.threads)
    body = COMMAND_TABLE[cfg.command](cfg, out, threads)
    summary = {"command": cfg.command, "master_seed": cfg.master_seed, "result": body}
    _write_json(out / "summary.json", summary)
    _write_json(out / "manifest.json", manifest(cfg))
    return summary


def build_parser():
    parser = argparse.ArgumentParser(prog="rwdiff", description="Relativistic diffusion experiments.")
    parser.add_argument("command", choices=sorted(COMMAND_TABLE))
    parser.add_argument("--config", help="INI config or a manifest.json from an earlier run")
    parser.add_argument("--seed", type=int, help="master seed (overrides ensemble.master_seed)")
    parser.add_argument("--threads", type=int, help="worker threads (default: RWDIFF_THREADS or 1)")
    parser.add_argument("--out", help="output directory (overrides output.directory)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text() if args.config else ""
    except OSError as exc:
        print(f"rwdiff: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text)
        if cfg.command is not None and cfg.command != args.command:
            raise ConfigError(f"config is for command {cfg.command!r}, not {args.command!r}")
        cfg = cfg.override("run", "command", args.command)
        if args.seed is not None:
            cfg = cfg.override("ensemble", "master_seed", args.seed)
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
        run(cfg, args.out, args.threads)
    except ConfigError as exc:
        print(f"rwdiff: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"rwdiff: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"rwdiff: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RWDiffError as exc:
        print(f"rwdiff: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
