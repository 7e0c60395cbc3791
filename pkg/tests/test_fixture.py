"""Checks on the bundled synthetic seal-like track.

The fixture was constructed to reproduce the summary statistics reported
for the original telemetry data set: 3,158 locations, sampling-gap
median/Q3 of 64/122 minutes, 251 groups at a 132-minute cutoff, and
interpolation bookkeeping n_prop ~ 0.991 / n_adj ~ 0.832 at the
(66, 132)-minute grid, which the grid search should select.
"""

from importlib import resources

import numpy as np
import pytest

from carhmm.preprocess import GridSpec, choose_grid, grid_metrics, preprocess_track, split_groups
from carhmm.track_io import parse_track_csv


@pytest.fixture(scope="module")
def seal_track():
    path = resources.files("carhmm.data") / "seal_synthetic.csv"
    return parse_track_csv(str(path), time_format="iso")


def test_fixture_row_count(seal_track):
    assert len(seal_track) == 3158


def test_fixture_gap_quartiles(seal_track):
    gaps = np.diff(seal_track.times)
    assert np.percentile(gaps, 50) == pytest.approx(64.0, abs=0.5)
    assert np.percentile(gaps, 75) == pytest.approx(122.0, abs=1.0)
    assert gaps.mean() == pytest.approx(100.0, abs=2.0)


def test_fixture_group_count(seal_track):
    assert len(split_groups(seal_track, 132.0)) == 251


def test_fixture_metrics_at_reference_grid(seal_track):
    m = grid_metrics(seal_track, GridSpec(66.0, 132.0))
    assert m.n_interp == 3129
    assert m.n_prop == pytest.approx(0.991, abs=0.02)
    assert m.n_adj == pytest.approx(0.832, abs=0.02)


def test_fixture_grid_search_selects_reference_spec(seal_track):
    spec, _ = choose_grid(seal_track, np.arange(60.0, 121.0, 3.0))
    assert spec.time_step == 66.0
    assert spec.group_cutoff == pytest.approx(132.0, abs=1e-9)


def test_fixture_mean_step_near_reported(seal_track):
    series, _ = preprocess_track(seal_track, GridSpec(66.0, 132.0))
    assert series.mean_step_km == pytest.approx(2.10, abs=0.05)
    assert series.n_interp_locations == 3129
