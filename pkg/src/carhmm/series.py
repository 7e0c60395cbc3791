"""Observation-series container and its on-disk CSV form.

A series is a list of groups; each group carries its initial step d0 and
the (step, angle) observation pairs that enter the likelihood.  The CSV
layout is `group,idx,d,theta` where idx 0 is the d0 row (empty theta) and
idx t >= 1 are the pairs, matching the in-memory ordering exactly.  A JSON
sidecar stores standardization and bookkeeping counts.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class SeriesGroup:
    d0: float
    d: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        if self.d.shape != self.theta.shape:
            raise ValueError("step and angle arrays must have equal length")

    @property
    def n_pairs(self) -> int:
        return len(self.d)


@dataclass
class ObservationSeries:
    groups: list[SeriesGroup]
    mean_step_km: float | None = None
    time_step_min: float | None = None
    n_interp_locations: int = 0
    n_raw_locations: int = 0
    n_groups_raw: int = 0
    n_excluded_groups: int = 0

    @property
    def n_groups(self) -> int:
        """Groups actually entering the likelihood."""
        return len(self.groups)

    @property
    def n_pairs(self) -> int:
        return sum(g.n_pairs for g in self.groups)

    def all_steps(self) -> np.ndarray:
        """Every step in every included group, d0 first per group."""
        parts = []
        for g in self.groups:
            parts.append([g.d0])
            parts.append(g.d)
        return np.concatenate(parts)

    def meta_dict(self) -> dict:
        return {
            "mean_step_km": self.mean_step_km,
            "time_step_min": self.time_step_min,
            "n_interp_locations": self.n_interp_locations,
            "n_raw_locations": self.n_raw_locations,
            "n_groups": self.n_groups,
            "n_groups_raw": self.n_groups_raw,
            "n_excluded_groups": self.n_excluded_groups,
            "n_pairs": self.n_pairs,
        }


def write_series(series: ObservationSeries, csv_path) -> None:
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "idx", "d", "theta"])
        for gi, g in enumerate(series.groups):
            writer.writerow([gi, 0, f"{g.d0:.17g}", ""])
            for t in range(g.n_pairs):
                writer.writerow([gi, t + 1, f"{g.d[t]:.17g}", f"{g.theta[t]:.17g}"])
    with open(csv_path.with_suffix(".json"), "w") as fh:
        json.dump(series.meta_dict(), fh, indent=2)
        fh.write("\n")


def read_series(csv_path) -> ObservationSeries:
    csv_path = Path(csv_path)
    rows: dict[int, dict] = {}
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            gi = int(row["group"])
            idx = int(row["idx"])
            entry = rows.setdefault(gi, {"d0": None, "d": [], "theta": []})
            if idx == 0:
                entry["d0"] = float(row["d"])
            else:
                entry["d"].append(float(row["d"]))
                entry["theta"].append(float(row["theta"]))
    groups = [
        SeriesGroup(d0=rows[gi]["d0"], d=np.array(rows[gi]["d"]), theta=np.array(rows[gi]["theta"]))
        for gi in sorted(rows)
    ]
    series = ObservationSeries(groups=groups)
    sidecar = csv_path.with_suffix(".json")
    if sidecar.exists():
        with open(sidecar) as fh:
            meta = json.load(fh)
        series.mean_step_km = meta.get("mean_step_km")
        series.time_step_min = meta.get("time_step_min")
        series.n_interp_locations = meta.get("n_interp_locations", 0)
        series.n_raw_locations = meta.get("n_raw_locations", 0)
        series.n_groups_raw = meta.get("n_groups_raw", 0)
        series.n_excluded_groups = meta.get("n_excluded_groups", 0)
    return series
