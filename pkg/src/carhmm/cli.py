"""Command-line pipeline: preprocess, grid-search, fit, decode, interpret,
simulate, study, diagnose.

Every subcommand writes its outputs plus a run manifest (flags, input
hashes, seed, version) into the output directory.  Numeric CSV output is
written with 17 significant digits, and all randomness is driven by
mandatory seeds, so re-running a manifest reproduces byte-identical
numeric outputs.  Domain errors exit with status 1 and a named message;
usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .decode import viterbi
from .diagnostics import lag_density, qq_pairs, residual_acf, step_residuals, angle_residuals, steps_by_group
from .errors import CarHmmError
from .fit import FitConfig, fit_multistart
from .markov import interpret
from .model import CarHmmModel
from .preprocess import GridSpec, choose_grid, preprocess_track
from .series import read_series, write_series
from .simulate import Scenario, run_study, simulate_series, reconstruct_planar
from .track_io import model_from_dict, parse_track_csv, read_params, write_params

FMT = ".17g"


def _g(x) -> str:
    return format(float(x), FMT)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(outdir: Path, subcommand: str, args: dict, inputs: list, seed=None) -> None:
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "args": {k: v for k, v in args.items() if not k.startswith("_")},
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
        "seed": seed,
        "created": datetime.now(timezone.utc).isoformat(),
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_track(ns):
    return parse_track_csv(
        ns.track,
        time_col=ns.time_col,
        lat_col=ns.lat_col,
        lon_col=ns.lon_col,
        time_format=ns.time_format,
    )


def _cmd_preprocess(ns) -> int:
    out = _outdir(ns.output)
    track = _read_track(ns)
    spec = GridSpec(time_step=ns.time_step, group_cutoff=ns.cutoff)
    if spec.cutoff_exceeds_guideline:
        print("warning: group cutoff exceeds twice the time step", file=sys.stderr)
    series, groups = preprocess_track(track, spec)
    write_series(series, out / "series.csv")
    with open(out / "locations.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "idx", "time", "lat", "lon"])
        for gi, grp in enumerate(groups):
            for i in range(len(grp)):
                writer.writerow([gi, i, _g(grp.times[i]), _g(grp.lats[i]), _g(grp.lons[i])])
    _write_manifest(out, "preprocess", vars(ns), [ns.track])
    print(f"groups={series.n_groups_raw} used={series.n_groups} pairs={series.n_pairs} "
          f"mean_step_km={series.mean_step_km:.6g}")
    return 0


def _cmd_grid_search(ns) -> int:
    out = _outdir(ns.output)
    track = _read_track(ns)
    steps = np.arange(ns.step_min, ns.step_max + 1e-9, ns.step_by)
    spec, table = choose_grid(track, steps)
    with open(out / "metrics.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_step", "group_cutoff", "n_raw", "n_interp", "n_groups", "n_prop", "n_adj", "objective"])
        for row in table:
            writer.writerow(
                [_g(row["time_step"]), _g(row["group_cutoff"]), row["n_raw"], row["n_interp"],
                 row["n_groups"], _g(row["n_prop"]), _g(row["n_adj"]), _g(row["objective"])]
            )
    chosen_row = min(table, key=lambda r: (r["objective"], -r["time_step"], r["group_cutoff"]))
    with open(out / "chosen.json", "w") as fh:
        json.dump({"time_step": spec.time_step, "group_cutoff": spec.group_cutoff,
                   "n_prop": chosen_row["n_prop"], "n_adj": chosen_row["n_adj"]}, fh, indent=2)
        fh.write("\n")
    _write_manifest(out, "grid-search", vars(ns), [ns.track])
    print(f"selected time_step={spec.time_step:g} cutoff={spec.group_cutoff:g} "
          f"n_prop={chosen_row['n_prop']:.4f} n_adj={chosen_row['n_adj']:.4f}")
    return 0


def _cmd_fit(ns) -> int:
    out = _outdir(ns.output)
    series = read_series(ns.series)
    config = FitConfig(max_restarts=ns.restarts, seed=ns.seed, fix_phi_zero=ns.fix_phi_zero)
    result = fit_multistart(series, ns.k, ns.family, config)
    write_params(
        result.model,
        out / "params.json",
        mean_step_km=series.mean_step_km,
        time_step_min=series.time_step_min,
    )
    with open(out / "report.json", "w") as fh:
        json.dump(result.to_dict(), fh, indent=2)
        fh.write("\n")
    _write_manifest(out, "fit", vars(ns), [ns.series], seed=ns.seed)
    status = "ok" if result.passed() else (result.degenerate or "not converged")
    print(f"loglik={result.loglik:.6f} aic={result.aic:.6f} bic={result.bic:.6f} "
          f"restarts={result.restarts_used} status={status}")
    return 0


def _cmd_decode(ns) -> int:
    out = _outdir(ns.output)
    series = read_series(ns.series)
    model, _ = read_params(ns.params)
    path = viterbi(model, series)
    with open(out / "states.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "idx", "state"])
        for gi, labels in enumerate(path.paths):
            for t, state in enumerate(labels, start=1):
                writer.writerow([gi, t, int(state)])
    _write_manifest(out, "decode", vars(ns), [ns.series, ns.params])
    print(f"decoded {sum(len(p) for p in path.paths)} pairs in {len(path.paths)} groups")
    return 0


def _cmd_interpret(ns) -> int:
    out = _outdir(ns.output)
    model, meta = read_params(ns.params)
    time_step = ns.time_step if ns.time_step is not None else meta.get("time_step_min")
    mean_step = ns.mean_step_km if ns.mean_step_km is not None else meta.get("mean_step_km")
    info = interpret(model, time_step_min=time_step, mean_step_km=mean_step)
    doc = info.to_dict()
    with open(out / "interpretation.json", "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    _write_manifest(out, "interpret", vars(ns), [ns.params])
    for i in range(model.k):
        line = f"state {i + 1}: budget={info.delta[i]:.3f} residency={info.residency_steps[i]:.2f} steps"
        if info.residency_human is not None:
            line += f" ({info.residency_human[i]})"
        if info.reversion_km_per_step is not None:
            line += f" reversion={info.reversion_km_per_step[i]:.3f} km/step ({info.reversion_km_per_hr[i]:.3f} km/hr)"
        print(line)
    if not info.strictly_positive_A:
        print("note: transition matrix has zero entries (consistency condition not met)")
    return 0


def _cmd_simulate(ns) -> int:
    out = _outdir(ns.output)
    model, _ = read_params(ns.params)
    sim = simulate_series(model, ns.n, seed=ns.seed)
    write_series(sim.to_series(), out / "sim_series.csv")
    with open(out / "sim_states.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "idx", "state"])
        for t, state in enumerate(sim.states, start=1):
            writer.writerow([0, t, int(state)])
    if ns.planar:
        xy = reconstruct_planar(sim)
        with open(out / "sim_track.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["idx", "x", "y"])
            for i, (x, y) in enumerate(xy):
                writer.writerow([i, _g(x), _g(y)])
    _write_manifest(out, "simulate", vars(ns), [ns.params], seed=ns.seed)
    print(f"simulated {sim.n_pairs} pairs")
    return 0


def _cmd_study(ns) -> int:
    out = _outdir(ns.output)
    with open(ns.scenario) as fh:
        doc = json.load(fh)
    truth, _ = model_from_dict(doc["truth"])
    fit_spec = doc.get("fit", {})
    scenario = Scenario(
        truth=truth,
        track_length=int(doc["track_length"]),
        n_sims=int(doc["n_sims"]),
        fit_k=int(fit_spec.get("k", truth.k)),
        fit_family=fit_spec.get("family", truth.family),
        seed=int(doc["seed"]),
        max_restarts=int(fit_spec.get("max_restarts", 10)),
        fix_phi_zero=bool(fit_spec.get("fix_phi_zero", False)),
    )
    result = run_study(scenario, jobs=ns.jobs)
    with open(out / "study.json", "w") as fh:
        json.dump(result.to_dict(), fh, indent=2)
        fh.write("\n")
    with open(out / "replicates.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "included", "error", "loglik", "restarts", "reason"])
        for o in result.outcomes:
            writer.writerow([
                o.index,
                int(o.included),
                _g(o.error) if o.error is not None else "",
                _g(o.loglik) if o.loglik is not None else "",
                o.restarts_used,
                o.reason or "",
            ])
    _write_manifest(out, "study", vars(ns), [ns.scenario], seed=scenario.seed)
    print(f"error quartiles ({result.error_q1:.4f}, {result.error_q3:.4f}) "
          f"median {result.error_median:.4f} nonconverged {result.nonconverged}/{result.replicates}")
    return 0


def _cmd_diagnose(ns) -> int:
    out = _outdir(ns.output)
    series = read_series(ns.series)
    model, _ = read_params(ns.params)
    r_step = step_residuals(model, series)
    r_ang = angle_residuals(model, series)
    path = viterbi(model, series)
    with open(out / "residuals.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "idx", "step_resid", "angle_resid", "state"])
        for gi, (rs, ra, st) in enumerate(zip(r_step, r_ang, path.paths)):
            for t in range(len(rs)):
                writer.writerow([gi, t + 1, _g(rs[t]), _g(ra[t]), int(st[t])])
    acf_s, band = residual_acf(r_step, ns.max_lag)
    acf_a, _ = residual_acf(r_ang, ns.max_lag)
    with open(out / "acf.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lag", "step_acf", "angle_acf", "band"])
        for lag in range(1, ns.max_lag + 1):
            writer.writerow([lag, _g(acf_s[lag - 1]), _g(acf_a[lag - 1]), _g(band)])
    qt, qe = qq_pairs(r_step)
    qt_a, qe_a = qq_pairs(r_ang)
    with open(out / "qq.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series", "theoretical", "empirical"])
        for t, e in zip(qt, qe):
            writer.writerow(["step", _g(t), _g(e)])
        for t, e in zip(qt_a, qe_a):
            writer.writerow(["angle", _g(t), _g(e)])
    dens = lag_density(steps_by_group(series), lag=ns.lag, grid_size=ns.grid_size)
    with open(out / "lagdensity.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "density"])
        for i, x in enumerate(dens.x):
            for j, y in enumerate(dens.y):
                writer.writerow([_g(x), _g(y), _g(dens.density[i, j])])
    _write_manifest(out, "diagnose", vars(ns), [ns.series, ns.params])
    print(f"wrote residuals, acf (band {band:.4f}), qq, lag-{ns.lag} density")
    return 0


def _add_track_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--track", required=True, help="track CSV path")
    p.add_argument("--time-col", default="time")
    p.add_argument("--lat-col", default="lat")
    p.add_argument("--lon-col", default="lon")
    p.add_argument("--time-format", choices=["iso", "minutes"], default="iso")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carhmm",
        description="Autoregressive hidden Markov models for discrete-time movement data",
    )
    parser.add_argument("--version", action="version", version=f"carhmm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="interpolate a track and derive the step/angle series")
    _add_track_args(p)
    p.add_argument("--time-step", type=float, required=True, help="grid step, minutes")
    p.add_argument("--cutoff", type=float, required=True, help="group cutoff, minutes")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("grid-search", help="evaluate n_prop/n_adj over a grid of time steps")
    _add_track_args(p)
    p.add_argument("--step-min", type=float, default=60.0)
    p.add_argument("--step-max", type=float, default=120.0)
    p.add_argument("--step-by", type=float, default=3.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_grid_search)

    p = sub.add_parser("fit", help="maximum-likelihood fit with random restarts")
    p.add_argument("--series", required=True, help="series CSV from preprocess/simulate")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--family", choices=["gamma", "lognormal"], default="gamma")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--fix-phi-zero", action="store_true", help="fit the plain HMM")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("decode", help="Viterbi state path")
    p.add_argument("--series", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("interpret", help="activity budget, residency, reversion levels")
    p.add_argument("--params", required=True)
    p.add_argument("--time-step", type=float, default=None, help="minutes, overrides params file")
    p.add_argument("--mean-step-km", type=float, default=None, help="overrides params file")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_interpret)

    p = sub.add_parser("simulate", help="simulate a series from a parameter file")
    p.add_argument("--params", required=True)
    p.add_argument("--n", type=int, required=True, help="number of observation pairs")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--planar", action="store_true", help="also write the planar track")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("study", help="Monte-Carlo simulate/refit/decode study")
    p.add_argument("--scenario", required=True, help="scenario JSON")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_study)

    p = sub.add_parser("diagnose", help="probability-scale residuals and lag density")
    p.add_argument("--series", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--max-lag", type=int, default=20)
    p.add_argument("--lag", type=int, default=1)
    p.add_argument("--grid-size", type=int, default=128)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_diagnose)

    return parser


def _validate(ns) -> str | None:
    if getattr(ns, "k", None) is not None and ns.k < 1:
        return "--k must be at least 1"
    if getattr(ns, "n", None) is not None and ns.n < 1:
        return "--n must be at least 1"
    if getattr(ns, "restarts", None) is not None and ns.restarts < 1:
        return "--restarts must be at least 1"
    if getattr(ns, "time_step", None) is not None and ns.time_step is not None and ns.time_step <= 0:
        return "--time-step must be positive"
    if getattr(ns, "jobs", None) is not None and ns.jobs < 1:
        return "--jobs must be at least 1"
    return None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    problem = _validate(ns)
    if problem is not None:
        print(f"usage error: {problem}", file=sys.stderr)
        return 2
    try:
        return ns.func(ns)
    except CarHmmError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
