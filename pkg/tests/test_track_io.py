import numpy as np
import pytest

from carhmm.errors import (
    AntimeridianCrossing,
    InvalidModel,
    MissingColumn,
    NonMonotonicTime,
    OutOfRangeCoordinate,
    UnparsableRow,
)
from carhmm.model import CarHmmModel
from carhmm.track_io import RawTrack, parse_track_csv, read_params, write_params, write_track_csv

from conftest import seal3_model


def _write(tmp_path, text, name="track.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_minutes_track(tmp_path):
    path = _write(tmp_path, "time,lat,lon\n0,44.0,-63.0\n60,44.1,-63.1\n120,44.2,-63.2\n")
    track = parse_track_csv(path, time_format="minutes")
    assert len(track) == 3
    np.testing.assert_allclose(track.times, [0, 60, 120])
    np.testing.assert_allclose(track.lats, [44.0, 44.1, 44.2])


def test_parse_iso_track(tmp_path):
    path = _write(
        tmp_path,
        "time,lat,lon\n"
        "2014-03-01T00:00:00Z,44.0,-63.0\n"
        "2014-03-01T01:04:00Z,44.1,-63.1\n",
    )
    track = parse_track_csv(path, time_format="iso")
    assert track.times[1] - track.times[0] == pytest.approx(64.0)


def test_parse_remapped_columns(tmp_path):
    path = _write(tmp_path, "t,y,x\n0,44.0,-63.0\n60,44.1,-63.1\n")
    track = parse_track_csv(path, time_col="t", lat_col="y", lon_col="x", time_format="minutes")
    assert len(track) == 2


def test_tied_time_rejected_with_row(tmp_path):
    path = _write(tmp_path, "time,lat,lon\n0,44,-63\n60,44.1,-63\n60,44.2,-63\n")
    with pytest.raises(NonMonotonicTime) as err:
        parse_track_csv(path, time_format="minutes")
    assert err.value.row == 3


def test_decreasing_time_rejected(tmp_path):
    path = _write(tmp_path, "time,lat,lon\n0,44,-63\n50,44.1,-63\n40,44.2,-63\n")
    with pytest.raises(NonMonotonicTime):
        parse_track_csv(path, time_format="minutes")


def test_missing_column(tmp_path):
    path = _write(tmp_path, "time,lat\n0,44\n")
    with pytest.raises(MissingColumn):
        parse_track_csv(path, time_format="minutes")


def test_unparsable_row_named(tmp_path):
    path = _write(tmp_path, "time,lat,lon\n0,44,-63\nsoon,44.1,-63\n")
    with pytest.raises(UnparsableRow) as err:
        parse_track_csv(path, time_format="minutes")
    assert err.value.row == 2


def test_out_of_range_coordinate(tmp_path):
    path = _write(tmp_path, "time,lat,lon\n0,44,-63\n60,95.0,-63\n")
    with pytest.raises(OutOfRangeCoordinate) as err:
        parse_track_csv(path, time_format="minutes")
    assert err.value.row == 2


def test_antimeridian_crossing_rejected(tmp_path):
    path = _write(tmp_path, "time,lat,lon\n0,10,179.5\n60,10,-179.5\n")
    with pytest.raises(AntimeridianCrossing):
        parse_track_csv(path, time_format="minutes")


def test_track_round_trip(tmp_path):
    track = RawTrack(
        times=np.array([0.0, 64.0, 128.5]),
        lats=np.array([44.0, 44.123456, 44.25]),
        lons=np.array([-63.0, -63.01, -63.02]),
    )
    path = tmp_path / "out.csv"
    write_track_csv(track, path)
    back = parse_track_csv(path, time_format="minutes")
    np.testing.assert_array_equal(back.times, track.times)
    np.testing.assert_array_equal(back.lats, track.lats)
    np.testing.assert_array_equal(back.lons, track.lons)


def test_raw_track_requires_two_records():
    with pytest.raises(ValueError):
        RawTrack(times=np.array([0.0]), lats=np.array([1.0]), lons=np.array([2.0]))


def test_params_round_trip_trivial(tmp_path):
    model = CarHmmModel(
        k=1, family="gamma", mu_rl=[1.0], phi=[0.0], sigma=[0.5], c=[0.0], rho=[0.5],
        A=[[1.0]],
    )
    path = tmp_path / "params.json"
    write_params(model, path)
    back, meta = read_params(path)
    assert back.close_to(model)
    assert meta["mean_step_km"] is None


def test_params_round_trip_seal_exact(tmp_path):
    model = seal3_model()
    # perturb to full double precision to prove exact round-tripping
    model.mu_rl = model.mu_rl + np.pi * 1e-9
    path = tmp_path / "params.json"
    write_params(model, path, mean_step_km=2.10, time_step_min=66.0)
    back, meta = read_params(path)
    for name in ("mu_rl", "phi", "sigma", "c", "rho", "A"):
        np.testing.assert_array_equal(getattr(back, name), getattr(model, name))
    assert meta == {"mean_step_km": 2.10, "time_step_min": 66.0}


def test_row_sum_invariant_enforced():
    with pytest.raises(InvalidModel):
        CarHmmModel(
            k=2, family="gamma", mu_rl=[1, 2], phi=[0, 0], sigma=[1, 1], c=[0, 0],
            rho=[0.5, 0.5], A=[[0.6, 0.3], [0.5, 0.5]],
        )


def test_schema_tag_checked(tmp_path):
    path = tmp_path / "params.json"
    path.write_text('{"schema": "other/9", "k": 1}')
    with pytest.raises(InvalidModel):
        read_params(path)


def test_params_io_failures_named(tmp_path):
    from carhmm.errors import IoError

    with pytest.raises(IoError):
        read_params(tmp_path)  # a directory, not a file
    model = seal3_model()
    with pytest.raises(IoError):
        write_params(model, tmp_path / "missing" / "params.json")
