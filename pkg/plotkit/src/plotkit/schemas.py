"""Readers for the carhmm CLI file formats.

Each reader validates the header or keys it needs and raises
SchemaMismatch otherwise; missing files raise MissingInput.  Values are
consumed verbatim.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class PlotkitError(Exception):
    pass


class MissingInput(PlotkitError):
    pass


class SchemaMismatch(PlotkitError):
    pass


def _open_csv(path):
    path = Path(path)
    if not path.exists():
        raise MissingInput(f"input file {path} does not exist")
    return path


def _require_columns(path, fieldnames, required):
    missing = [c for c in required if c not in (fieldnames or [])]
    if missing:
        raise SchemaMismatch(f"{path}: missing columns {missing} (found {fieldnames})")


def read_lag_density(path):
    """lagdensity.csv: x,y,density long form -> (x, y, density matrix)."""
    path = _open_csv(path)
    xs, ys, vals = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _require_columns(path, reader.fieldnames, ["x", "y", "density"])
        for row in reader:
            xs.append(float(row["x"]))
            ys.append(float(row["y"]))
            vals.append(float(row["density"]))
    x = np.unique(xs)
    y = np.unique(ys)
    if len(x) * len(y) != len(vals):
        raise SchemaMismatch(f"{path}: grid is not complete ({len(vals)} cells for {len(x)}x{len(y)})")
    dens = np.empty((len(x), len(y)))
    xi = {v: i for i, v in enumerate(x)}
    yi = {v: i for i, v in enumerate(y)}
    for xv, yv, dv in zip(xs, ys, vals):
        dens[xi[xv], yi[yv]] = dv
    return x, y, dens


def read_qq(path):
    """qq.csv: series,theoretical,empirical -> {series: (theo, emp)}."""
    path = _open_csv(path)
    out: dict[str, list] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _require_columns(path, reader.fieldnames, ["series", "theoretical", "empirical"])
        for row in reader:
            out.setdefault(row["series"], []).append(
                (float(row["theoretical"]), float(row["empirical"]))
            )
    return {
        name: (np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))
        for name, pairs in out.items()
    }


def read_acf(path):
    """acf.csv: lag,step_acf,angle_acf,band."""
    path = _open_csv(path)
    lags, step, angle, band = [], [], [], None
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _require_columns(path, reader.fieldnames, ["lag", "step_acf", "angle_acf", "band"])
        for row in reader:
            lags.append(int(row["lag"]))
            step.append(float(row["step_acf"]))
            angle.append(float(row["angle_acf"]))
            band = float(row["band"])
    return np.array(lags), np.array(step), np.array(angle), band


def read_locations(path):
    """locations.csv: group,idx,time,lat,lon."""
    path = _open_csv(path)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _require_columns(path, reader.fieldnames, ["group", "idx", "time", "lat", "lon"])
        for row in reader:
            rows.append((int(row["group"]), int(row["idx"]), float(row["lat"]), float(row["lon"])))
    return rows


def read_states(path):
    """states.csv: group,idx,state -> {(group, idx): state}."""
    path = _open_csv(path)
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _require_columns(path, reader.fieldnames, ["group", "idx", "state"])
        for row in reader:
            out[(int(row["group"]), int(row["idx"]))] = int(row["state"])
    return out


def read_study(path):
    path = Path(path)
    if not path.exists():
        raise MissingInput(f"input file {path} does not exist")
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("bias", "scenario", "error_q1"):
        if key not in doc:
            raise SchemaMismatch(f"{path}: not a study result (missing {key!r})")
    if "track_length" not in doc["scenario"]:
        raise SchemaMismatch(f"{path}: scenario lacks track_length")
    return doc
