"""Track preprocessing: gap splitting, regular-grid interpolation, and the
step/angle series that feeds the likelihood.

A track is split into groups wherever the gap between consecutive raw
observations exceeds the group cutoff.  Each group is linearly
interpolated (in raw latitude/longitude degrees) onto its own regular
grid anchored at the group's first observation.  A group of m grid
locations contributes one initial step and m - 2 observation pairs
(d_(t,t+1), theta_t); groups that shrink below 3 locations are excluded
from the likelihood but still counted in the grid-selection metrics.

The two grid-selection metrics compare interpolated to observed location
counts: n_prop = interp / raw, and n_adj = (interp - 2 * groups) /
(raw - 2), the latter correcting for the two likelihood-unusable points
at the start of every group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllGroupsDegenerate, DegenerateGroup
from .geo import LatLon, deflection_angle, forward_bearing, great_circle_km, wrap_angle
from .series import ObservationSeries, SeriesGroup
from .track_io import RawTrack

# Tolerance for grid-point counting so exact multiples of the time step
# are not lost to floating-point rounding.
_GRID_EPS = 1e-9

ZERO_STEP_FLOOR_FRAC = 1e-8


@dataclass(frozen=True)
class GridSpec:
    time_step: float
    group_cutoff: float

    def __post_init__(self):
        if self.time_step <= 0.0:
            raise ValueError("time step must be positive")
        if self.group_cutoff < self.time_step:
            raise ValueError("group cutoff must be at least the time step")

    @property
    def cutoff_exceeds_guideline(self) -> bool:
        """True when the cutoff exceeds twice the time step."""
        return self.group_cutoff > 2.0 * self.time_step


@dataclass(frozen=True)
class GridMetrics:
    n_prop: float
    n_adj: float
    n_raw: int
    n_interp: int
    n_groups: int

    @property
    def groups_dominate(self) -> bool:
        """Flag set when the 2-per-group loss swallows the whole sample."""
        return self.n_adj <= 0.0


@dataclass
class TrackSegment:
    """A maximal run of raw observations with no over-cutoff gap."""

    times: np.ndarray
    lats: np.ndarray
    lons: np.ndarray

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class InterpolatedGroup:
    times: np.ndarray
    lats: np.ndarray
    lons: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def point(self, i: int) -> LatLon:
        return LatLon(float(self.lats[i]), float(self.lons[i]))


def split_groups(track: RawTrack, cutoff: float) -> list[TrackSegment]:
    """Split at every gap strictly greater than the cutoff, order preserved."""
    if cutoff <= 0.0:
        raise ValueError("cutoff must be positive")
    gaps = np.diff(track.times)
    breaks = np.nonzero(gaps > cutoff)[0] + 1
    segments = []
    for lo, hi in zip(np.r_[0, breaks], np.r_[breaks, len(track)]):
        segments.append(
            TrackSegment(track.times[lo:hi], track.lats[lo:hi], track.lons[lo:hi])
        )
    return segments


def interpolate_group(
    group: TrackSegment, time_step: float, strict: bool = True
) -> InterpolatedGroup:
    """Linearly interpolate one group onto its regular grid.

    The grid starts at the group's first observation time and ends at the
    last grid point not past its final observation.  With strict=True a
    grid of fewer than 2 points raises DegenerateGroup.
    """
    t0 = float(group.times[0])
    span = float(group.times[-1]) - t0
    n_pts = int(math.floor(span / time_step + _GRID_EPS)) + 1
    if n_pts < 2 and strict:
        raise DegenerateGroup(
            f"group spanning {span} min yields {n_pts} grid point(s) at step {time_step}"
        )
    grid = t0 + time_step * np.arange(n_pts)
    lats = np.interp(grid, group.times, group.lats)
    lons = np.interp(grid, group.times, group.lons)
    return InterpolatedGroup(grid, lats, lons)


def interpolate_track(track: RawTrack, spec: GridSpec) -> list[InterpolatedGroup]:
    return [
        interpolate_group(seg, spec.time_step, strict=False)
        for seg in split_groups(track, spec.group_cutoff)
    ]


def _leg_bearings(points: list[LatLon]) -> np.ndarray:
    """Travel bearing for each leg, carried through coincident positions.

    A leg between coincident points takes its bearing from the nearest
    preceding distinct location; if the whole prefix is coincident the
    previous bearing (0 at the start) is carried forward, making the
    deflection there 0.
    """
    m = len(points)
    bearings = np.zeros(m - 1)
    last = 0.0
    for j in range(m - 1):
        a, b = points[j], points[j + 1]
        if a != b:
            last = forward_bearing(a, b)
        else:
            for q in range(j - 1, -1, -1):
                if points[q] != b:
                    last = forward_bearing(points[q], b)
                    break
        bearings[j] = last
    return bearings


def derive_series(
    groups: list[InterpolatedGroup], standardize: bool = True
) -> ObservationSeries:
    """Turn interpolated groups into the step/angle series.

    Steps are great-circle kilometres between consecutive grid locations;
    angles are deflections at the interior locations.  Duplicate positions
    produce zero steps, which are floored at 1e-8 of the mean step so the
    gamma density stays proper.
    """
    kept: list[tuple[np.ndarray, list[LatLon]]] = []
    n_excluded = 0
    for grp in groups:
        if len(grp) < 3:
            n_excluded += 1
            continue
        pts = [grp.point(i) for i in range(len(grp))]
        steps = np.array(
            [great_circle_km(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]
        )
        kept.append((steps, pts))
    if not kept:
        raise AllGroupsDegenerate("no group has 3 or more grid locations")

    all_steps = np.concatenate([s for s, _ in kept])
    prelim_mean = float(all_steps.mean())
    if prelim_mean <= 0.0:
        raise AllGroupsDegenerate("track never moves; mean step is zero")
    floor = ZERO_STEP_FLOOR_FRAC * prelim_mean

    out_groups = []
    floored_steps = []
    for steps, pts in kept:
        steps = np.maximum(steps, floor)
        floored_steps.append(steps)
        bearings = _leg_bearings(pts)
        thetas = np.array(
            [wrap_angle(bearings[j + 1] - bearings[j]) for j in range(len(bearings) - 1)]
        )
        # pair t is (step t+1, angle t); step 0 is the initial condition
        out_groups.append(SeriesGroup(d0=float(steps[0]), d=steps[1:], theta=thetas))

    mean_step = float(np.concatenate(floored_steps).mean())
    if standardize:
        for g in out_groups:
            g.d0 /= mean_step
            g.d = g.d / mean_step
    n_interp = sum(len(g) for g in groups)
    return ObservationSeries(
        groups=out_groups,
        mean_step_km=mean_step if standardize else None,
        n_interp_locations=n_interp,
        n_raw_locations=0,
        n_groups_raw=len(groups),
        n_excluded_groups=n_excluded,
    )


def grid_metrics(track: RawTrack, spec: GridSpec) -> GridMetrics:
    """Evaluate n_prop and n_adj for one grid choice.

    Group counts here are the raw gap-split counts, before any exclusion
    of groups too short to contribute to the likelihood.
    """
    groups = interpolate_track(track, spec)
    n_interp = sum(len(g) for g in groups)
    n_raw = len(track)
    n_groups = len(groups)
    n_prop = n_interp / n_raw
    # n_adj is 0/0 on a 2-record track; report NaN rather than raise
    n_adj = (n_interp - 2 * n_groups) / (n_raw - 2) if n_raw > 2 else float("nan")
    return GridMetrics(n_prop, n_adj, n_raw, n_interp, n_groups)


def preprocess_track(track: RawTrack, spec: GridSpec) -> tuple[ObservationSeries, list[InterpolatedGroup]]:
    """Full pipeline for one grid choice: split, interpolate, derive, standardize."""
    groups = interpolate_track(track, spec)
    series = derive_series(groups, standardize=True)
    series.time_step_min = spec.time_step
    series.n_raw_locations = len(track)
    return series, groups


def choose_grid(
    track: RawTrack,
    time_steps,
    cutoff_multipliers=None,
) -> tuple[GridSpec, list[dict]]:
    """Grid search for the spec making both metrics as close to 1 as possible.

    Candidate cutoffs run from the time step to twice the time step in 5%
    increments of the step.  The objective is max(|n_prop - 1|,
    |n_adj - 1|); ties break toward the larger time step, then the smaller
    cutoff.  Returns the winning spec and the full metrics table.
    """
    if cutoff_multipliers is None:
        cutoff_multipliers = [1.0 + 0.05 * j for j in range(21)]
    time_steps = list(time_steps)
    if not time_steps:
        raise ValueError("empty time-step range")
    table = []
    best = None
    best_key = None
    for h in time_steps:
        for mult in cutoff_multipliers:
            spec = GridSpec(time_step=float(h), group_cutoff=float(h) * mult)
            m = grid_metrics(track, spec)
            if math.isnan(m.n_adj):
                objective = math.inf
            else:
                objective = max(abs(m.n_prop - 1.0), abs(m.n_adj - 1.0))
            table.append(
                {
                    "time_step": spec.time_step,
                    "group_cutoff": spec.group_cutoff,
                    "n_raw": m.n_raw,
                    "n_interp": m.n_interp,
                    "n_groups": m.n_groups,
                    "n_prop": m.n_prop,
                    "n_adj": m.n_adj,
                    "objective": objective,
                }
            )
            key = (objective, -spec.time_step, spec.group_cutoff)
            if best_key is None or key < best_key:
                best, best_key = spec, key
    return best, table
