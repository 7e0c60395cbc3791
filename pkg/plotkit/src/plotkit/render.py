"""Figure renderers.

All functions take paths to carhmm output files plus an output image
path, draw with a fixed deterministic style, and return the output path.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import schemas

_STATE_COLORS = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"]


def _save(fig, out_path):
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_lag(density_csv, out_path, title="Step length lag plot"):
    """Heat map of the lagged step density with the y = x reference line."""
    x, y, dens = schemas.read_lag_density(density_csv)
    fig, ax = plt.subplots(figsize=(5.5, 5))
    mesh = ax.pcolormesh(x, y, dens.T, shading="auto", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="density")
    lim = [min(x[0], y[0]), max(x[-1], y[-1])]
    ax.plot(lim, lim, color="white", linestyle="--", linewidth=1.2)
    ax.set_xlabel("previous step length")
    ax.set_ylabel("step length")
    ax.set_title(title)
    ax.set_aspect("equal")
    return _save(fig, out_path)


def render_qq(qq_csv, out_path, series="step"):
    """Residual QQ plot against the uniform(-1, 1) reference."""
    data = schemas.read_qq(qq_csv)
    if series not in data:
        raise schemas.SchemaMismatch(f"series {series!r} not in {sorted(data)}")
    theo, emp = data[series]
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot([-1, 1], [-1, 1], color="grey", linewidth=1)
    ax.plot(theo, emp, ".", markersize=2.5, color="#1f77b4")
    ax.set_xlabel("uniform(-1, 1) quantiles")
    ax.set_ylabel("residual quantiles")
    ax.set_title(f"{series} residual QQ plot")
    ax.set_xlim(-1.05, 1.05)
    ax.set_ylim(-1.05, 1.05)
    return _save(fig, out_path)


def render_acf(acf_csv, out_path):
    """Residual autocorrelation with the +/- band."""
    lags, step, angle, band = schemas.read_acf(acf_csv)
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
    for ax, vals, name in ((axes[0], step, "step"), (axes[1], angle, "angle")):
        ax.axhline(0.0, color="black", linewidth=0.8)
        ax.axhline(band, color="grey", linestyle="--", linewidth=0.8)
        ax.axhline(-band, color="grey", linestyle="--", linewidth=0.8)
        ax.vlines(lags, 0, vals, color="#1f77b4")
        ax.plot(lags, vals, "o", markersize=3, color="#1f77b4")
        ax.set_xlabel("lag")
        ax.set_title(f"{name} residual ACF")
    axes[0].set_ylabel("autocorrelation")
    fig.tight_layout()
    return _save(fig, out_path)


def render_map(locations_csv, states_csv, out_path, title="Track with state estimates"):
    """Interpolated track coloured by decoded state.

    The decoded pair at index t sits at location index t within its group
    (the angle's vertex); locations without a decoded state (each group's
    first and last) are drawn grey.
    """
    locations = schemas.read_locations(locations_csv)
    states = schemas.read_states(states_csv)
    fig, ax = plt.subplots(figsize=(6.5, 6))
    by_group: dict[int, list] = {}
    for g, idx, lat, lon in locations:
        by_group.setdefault(g, []).append((idx, lat, lon))
    for g, pts in by_group.items():
        pts.sort()
        ax.plot([p[2] for p in pts], [p[1] for p in pts], color="0.8", linewidth=0.5, zorder=1)
    seen = set()
    for g, idx, lat, lon in locations:
        state = states.get((g, idx))
        if state is None:
            ax.plot(lon, lat, ".", color="0.6", markersize=2, zorder=2)
        else:
            color = _STATE_COLORS[(state - 1) % len(_STATE_COLORS)]
            label = f"state {state}" if state not in seen else None
            seen.add(state)
            ax.plot(lon, lat, ".", color=color, markersize=3, zorder=3, label=label)
    if seen:
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    ax.set_title(title)
    return _save(fig, out_path)


def render_bias(study_jsons, out_path):
    """Median parameter bias against track length, one line per parameter."""
    docs = [schemas.read_study(p) for p in study_jsons]
    docs.sort(key=lambda d: d["scenario"]["track_length"])
    lengths = [d["scenario"]["track_length"] for d in docs]
    params = sorted({k for d in docs for k in d["bias"]})
    fig, ax = plt.subplots(figsize=(6.5, 4))
    ax.axhline(0.0, color="black", linewidth=0.8)
    for name in params:
        ys = [d["bias"].get(name, np.nan) for d in docs]
        ax.plot(lengths, ys, marker="o", markersize=3, linewidth=1, label=name)
    ax.set_xlabel("track length")
    ax.set_ylabel("median bias")
    ax.set_title("Parameter bias vs track length")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return _save(fig, out_path)
