"""Model checking: one-step-ahead probability-scale residuals, residual
autocorrelation, QQ data, and lag-plot kernel densities.

The forecast distribution for the step at time t is a mixture over states
of step distributions whose means blend the reversion level with the
previous step; mixture weights are the filtered one-step-ahead state
probabilities.  The residual 2 F_t(d_t) - 1 is then uniform on (-1, 1)
under a correctly specified model, and likewise for angles through the
wrapped Cauchy mixture CDF.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .decode import filtered_predictive, viterbi
from .distributions import WrappedCauchy, wc_cdf
from .errors import DegenerateSeries, TooShort
from .model import GAMMA, CarHmmModel
from .series import ObservationSeries

SMALL_STATE_SAMPLE = 50


def _step_mixture_cdf(model: CarHmmModel, weights: np.ndarray, d: np.ndarray, d_prev: np.ndarray) -> np.ndarray:
    out = np.zeros(len(d))
    for b in range(model.k):
        # component means vary with the previous step, so evaluate the CDF
        # with per-observation parameters directly
        if model.family == GAMMA:
            means = (1.0 - model.phi[b]) * model.mu_rl[b] + model.phi[b] * d_prev
            shape = (means / model.sigma[b]) ** 2
            scale = model.sigma[b] ** 2 / means
            comp = special.gammainc(shape, d / scale)
        else:
            means = (1.0 - model.phi[b]) * model.mu_rl[b] + model.phi[b] * np.log(d_prev)
            comp = special.ndtr((np.log(d) - means) / model.sigma[b])
        out += weights[:, b] * comp
    return out


def step_residuals(model: CarHmmModel, series: ObservationSeries) -> list[np.ndarray]:
    """Per-group probability-scale step residuals in (-1, 1)."""
    preds = filtered_predictive(model, series)
    out = []
    for g, w in zip(series.groups, preds):
        d_prev = np.concatenate(([g.d0], g.d[:-1]))
        cdf = _step_mixture_cdf(model, w, g.d, d_prev)
        out.append(np.clip(2.0 * cdf - 1.0, -1.0 + 1e-15, 1.0 - 1e-15))
    return out


def angle_residuals(model: CarHmmModel, series: ObservationSeries) -> list[np.ndarray]:
    """Per-group probability-scale angle residuals in (-1, 1)."""
    preds = filtered_predictive(model, series)
    out = []
    for g, w in zip(series.groups, preds):
        cdf = np.zeros(g.n_pairs)
        for b in range(model.k):
            comp = wc_cdf(g.theta, WrappedCauchy(float(model.c[b]), float(model.rho[b])))
            cdf += w[:, b] * np.asarray(comp)
        out.append(np.clip(2.0 * cdf - 1.0, -1.0 + 1e-15, 1.0 - 1e-15))
    return out


def residual_acf(residual_groups: list[np.ndarray], max_lag: int):
    """Sample autocorrelation using within-group pairs only.

    Returns (acf values for lags 1..max_lag, the 2/sqrt(n) reference band).
    """
    groups = [np.asarray(r, dtype=float) for r in residual_groups]
    all_r = np.concatenate(groups)
    n = len(all_r)
    if n <= max_lag:
        raise TooShort(f"need more than {max_lag} residuals, have {n}")
    mean = all_r.mean()
    c0 = float(np.sum((all_r - mean) ** 2)) / n
    if c0 == 0.0:
        raise DegenerateSeries("residuals are constant; autocorrelation undefined")
    acf = np.empty(max_lag)
    for lag in range(1, max_lag + 1):
        s = 0.0
        for r in groups:
            if len(r) > lag:
                s += float(np.sum((r[:-lag] - mean) * (r[lag:] - mean)))
        acf[lag - 1] = s / (n * c0)
    return acf, 2.0 / np.sqrt(n)


def qq_pairs(residual_groups: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Sorted residuals against uniform(-1, 1) plotting positions."""
    r = np.sort(np.concatenate([np.asarray(g) for g in residual_groups]))
    n = len(r)
    theoretical = 2.0 * (np.arange(1, n + 1) - 0.5) / n - 1.0
    return theoretical, r


@dataclass
class LagDensity:
    lag: int
    x: np.ndarray
    y: np.ndarray
    density: np.ndarray  # shape (len(x), len(y)); density[i, j] at (x[i], y[j])
    bandwidths: tuple[float, float]

    def grid_mass(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.density, self.y, axis=1), self.x))

    def diagonal_local_maxima(self) -> int:
        """Count interior local maxima of the density along the line y = x."""
        diag = np.diag(self.density)
        count = 0
        for i in range(1, len(diag) - 1):
            if diag[i] > diag[i - 1] and diag[i] >= diag[i + 1]:
                count += 1
        return count


def _silverman(values: np.ndarray) -> float:
    n = len(values)
    sd = float(np.std(values, ddof=1))
    q75, q25 = np.percentile(values, [75, 25])
    iqr = float(q75 - q25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    if spread <= 0:
        spread = max(sd, 1e-3)
    return 0.9 * spread * n ** (-0.2)


def lag_density(step_groups: list[np.ndarray], lag: int = 1, grid_size: int = 128) -> LagDensity:
    """2D Gaussian kernel density of within-group lagged step pairs.

    Pairs are (d_(t-lag), d_t) including each group's initial step.
    Bandwidths follow Silverman's rule per axis; the grid spans
    [0, max step] on both axes.
    """
    xs, ys = [], []
    for g in step_groups:
        g = np.asarray(g, dtype=float)
        if len(g) > lag:
            xs.append(g[:-lag])
            ys.append(g[lag:])
    if not xs:
        raise TooShort(f"no group has more than lag={lag} steps")
    x_pts = np.concatenate(xs)
    y_pts = np.concatenate(ys)
    if len(x_pts) < lag + 10:
        raise TooShort(f"need more than {lag + 10} pairs, have {len(x_pts)}")
    d_max = float(max(x_pts.max(), y_pts.max()))
    gx = np.linspace(0.0, d_max, grid_size)
    hx = _silverman(x_pts)
    hy = _silverman(y_pts)
    kx = np.exp(-0.5 * ((gx[:, None] - x_pts[None, :]) / hx) ** 2) / (hx * np.sqrt(2.0 * np.pi))
    ky = np.exp(-0.5 * ((gx[:, None] - y_pts[None, :]) / hy) ** 2) / (hy * np.sqrt(2.0 * np.pi))
    density = (kx @ ky.T) / len(x_pts)
    return LagDensity(lag=lag, x=gx, y=gx.copy(), density=density, bandwidths=(hx, hy))


def steps_by_group(series: ObservationSeries) -> list[np.ndarray]:
    """Full step sequence per group, initial step first."""
    return [np.concatenate(([g.d0], g.d)) for g in series.groups]


def state_partitioned_residuals(
    model: CarHmmModel, series: ObservationSeries, residual_groups: list[np.ndarray]
) -> dict[int, dict]:
    """Split residuals by the Viterbi state at each pair.

    States with fewer than 50 residuals get a small-sample flag since
    uniformity checks are unreliable there.
    """
    paths = viterbi(model, series).paths
    labels = np.concatenate(paths)
    resid = np.concatenate([np.asarray(r) for r in residual_groups])
    out = {}
    for b in range(1, model.k + 1):
        vals = resid[labels == b]
        out[b] = {
            "residuals": vals,
            "n": int(len(vals)),
            "small_sample": bool(len(vals) < SMALL_STATE_SAMPLE),
        }
    return out
