"""Track and parameter-set persistence.

Tracks are CSV files with a header row and configurable column names for
time, latitude, and longitude; times are either ISO-8601 timestamps or
numeric minutes.  Internally all times are real-valued minutes since the
Unix epoch.  Parameter sets are JSON documents carrying a schema tag so
files stay readable across versions.

Parsing never reorders or drops records: any violation is rejected with
the 1-based data-row number (header excluded).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .errors import (
    AntimeridianCrossing,
    InvalidModel,
    IoError,
    MissingColumn,
    NonMonotonicTime,
    OutOfRangeCoordinate,
    UnparsableRow,
)
from .geo import LatLon
from .model import CarHmmModel

PARAMS_SCHEMA = "carhmm/1"


@dataclass
class RawTrack:
    """Timestamped positions as ingested, times in minutes since epoch."""

    times: np.ndarray
    lats: np.ndarray
    lons: np.ndarray
    id: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.lats = np.asarray(self.lats, dtype=float)
        self.lons = np.asarray(self.lons, dtype=float)
        n = len(self.times)
        if n < 2:
            raise ValueError("a track needs at least 2 records")
        if len(self.lats) != n or len(self.lons) != n:
            raise ValueError("times, lats, lons must have equal length")

    def __len__(self) -> int:
        return len(self.times)

    def point(self, i: int) -> LatLon:
        return LatLon(float(self.lats[i]), float(self.lons[i]))


def _parse_time(raw: str, time_format: str) -> float:
    if time_format == "minutes":
        return float(raw)
    if time_format == "iso":
        text = raw.strip()
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        dt = datetime.fromisoformat(text)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return dt.timestamp() / 60.0
    raise ValueError(f"unknown time format {time_format!r}")


def parse_track_csv(
    path,
    time_col: str = "time",
    lat_col: str = "lat",
    lon_col: str = "lon",
    time_format: str = "iso",
    track_id: str | None = None,
) -> RawTrack:
    """Read a track CSV, validating order and coordinate ranges.

    Records must already be sorted by strictly increasing time; an
    out-of-order file is an error, not something to fix silently.
    """
    times, lats, lons = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (time_col, lat_col, lon_col):
            if col not in header:
                raise MissingColumn(f"column {col!r} not in header {header}")
        for row_no, row in enumerate(reader, start=1):
            try:
                t = _parse_time(row[time_col], time_format)
                lat = float(row[lat_col])
                lon = float(row[lon_col])
            except (TypeError, ValueError) as exc:
                raise UnparsableRow(str(exc), row=row_no) from exc
            if not -90.0 <= lat <= 90.0 or not -180.0 <= lon <= 180.0:
                raise OutOfRangeCoordinate(f"({lat}, {lon}) out of range", row=row_no)
            if times:
                if t <= times[-1]:
                    raise NonMonotonicTime(
                        f"time {t} does not increase past {times[-1]}", row=row_no
                    )
                if abs(lon - lons[-1]) > 180.0:
                    raise AntimeridianCrossing(
                        "consecutive longitudes differ by more than 180 degrees; "
                        "linear interpolation is invalid across the antimeridian",
                        row=row_no,
                    )
            times.append(t)
            lats.append(lat)
            lons.append(lon)
    if len(times) < 2:
        raise UnparsableRow("track has fewer than 2 records", row=len(times))
    name = track_id if track_id is not None else str(path)
    return RawTrack(np.array(times), np.array(lats), np.array(lons), id=name)


def write_track_csv(track: RawTrack, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "lat", "lon"])
        for t, la, lo in zip(track.times, track.lats, track.lons):
            writer.writerow([f"{t:.17g}", f"{la:.17g}", f"{lo:.17g}"])


def model_to_dict(
    model: CarHmmModel,
    mean_step_km: float | None = None,
    time_step_min: float | None = None,
) -> dict:
    out = {
        "schema": PARAMS_SCHEMA,
        "k": model.k,
        "family": model.family,
        "mu_rl": model.mu_rl.tolist(),
        "phi": model.phi.tolist(),
        "sigma": model.sigma.tolist(),
        "c": model.c.tolist(),
        "rho": model.rho.tolist(),
        "A": model.A.tolist(),
        "phi_fixed_zero": model.phi_fixed_zero,
    }
    if mean_step_km is not None:
        out["mean_step_km"] = mean_step_km
    if time_step_min is not None:
        out["time_step_min"] = time_step_min
    return out


def model_from_dict(doc: dict) -> tuple[CarHmmModel, dict]:
    """Build a model from a parameter document; returns (model, meta)."""
    if doc.get("schema") != PARAMS_SCHEMA:
        raise InvalidModel(f"unsupported parameter schema {doc.get('schema')!r}")
    model = CarHmmModel(
        k=int(doc["k"]),
        family=doc["family"],
        mu_rl=np.array(doc["mu_rl"], dtype=float),
        phi=np.array(doc["phi"], dtype=float),
        sigma=np.array(doc["sigma"], dtype=float),
        c=np.array(doc["c"], dtype=float),
        rho=np.array(doc["rho"], dtype=float),
        A=np.array(doc["A"], dtype=float),
        phi_fixed_zero=bool(doc.get("phi_fixed_zero", False)),
    )
    meta = {
        "mean_step_km": doc.get("mean_step_km"),
        "time_step_min": doc.get("time_step_min"),
    }
    return model, meta


def write_params(model: CarHmmModel, path, mean_step_km=None, time_step_min=None) -> None:
    """Serialize a model; floats round-trip exactly through read_params."""
    doc = model_to_dict(model, mean_step_km=mean_step_km, time_step_min=time_step_min)
    try:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write parameter file {path}: {exc}") from exc


def read_params(path) -> tuple[CarHmmModel, dict]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read parameter file {path}: {exc}") from exc
    return model_from_dict(doc)
