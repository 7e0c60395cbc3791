"""Maximum-likelihood fitting.

Models are optimized over an unconstrained vector: per state
[mu_rl, phi, sigma, c, rho] mapped through log / scaled-logit / log /
half-angle-tangent / logit for the gamma family (mu_rl and phi stay raw
for the log-normal family), followed by row-wise multinomial logits of the
transition matrix with the diagonal as reference category.  That is
k^2 + 4k coordinates when everything is free, k^2 + 3k with phi pinned to
zero (the plain HMM).

The optimizer is L-BFGS-B on the negative log-likelihood with analytic
gradients from the forward-backward pass; a central finite-difference
gradient is available as a fallback backend and as a cross-check.
Convergence means projected-gradient max-norm below 1e-6 or relative
objective change below 1e-10, within 2000 iterations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import AllRestartsFailed, NonFinite, NonFiniteObjective, OptimizerFailure
from .likelihood import PackedSeries, packed_loglik, packed_loglik_grad
from .markov import stationary
from .model import GAMMA, LOGNORMAL, CarHmmModel
from .series import ObservationSeries

PHI_MAX = 1.0 - 1e-6
CLAMP = 1e-8

DEGENERATE_STATIONARY = "stationary entry below 0.01"
DEGENERATE_ANGLE = "angle concentration below 1e-3"
DEGENERATE_UNIFORM_ROW = "transition row with all entries equal"


def _logit(p):
    p = np.clip(p, CLAMP, 1.0 - CLAMP)
    return np.log(p) - np.log1p(-p)


def _sigmoid(v):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(v, dtype=float)))


def n_free_params(k: int, phi_fixed_zero: bool) -> int:
    return k * (4 if phi_fixed_zero else 5) + k * (k - 1)


def transform(model: CarHmmModel) -> np.ndarray:
    """Map a valid model to the unconstrained vector (clamping boundaries)."""
    k = model.k
    per_state = []
    for b in range(k):
        if model.family == GAMMA:
            per_state.append(math.log(model.mu_rl[b]))
            if not model.phi_fixed_zero:
                per_state.append(float(_logit(model.phi[b] / PHI_MAX)))
        else:
            per_state.append(float(model.mu_rl[b]))
            if not model.phi_fixed_zero:
                per_state.append(float(model.phi[b]))
        per_state.append(math.log(model.sigma[b]))
        c = np.clip(model.c[b], -math.pi + 1e-9, math.pi - 1e-9)
        per_state.append(math.tan(c / 2.0))
        per_state.append(float(_logit(model.rho[b])))
    rows = []
    a = np.clip(model.A, CLAMP, None)
    for i in range(k):
        for j in range(k):
            if j != i:
                rows.append(math.log(a[i, j] / a[i, i]))
    return np.array(per_state + rows)


def untransform(v: np.ndarray, k: int, family: str, phi_fixed_zero: bool = False) -> CarHmmModel:
    """Inverse of transform; always yields a valid model."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise NonFinite("unconstrained vector contains non-finite values")
    if len(v) != n_free_params(k, phi_fixed_zero):
        raise ValueError(f"expected {n_free_params(k, phi_fixed_zero)} coordinates, got {len(v)}")
    per = 4 if phi_fixed_zero else 5
    mu = np.empty(k)
    phi = np.zeros(k)
    sigma = np.empty(k)
    c = np.empty(k)
    rho = np.empty(k)
    for b in range(k):
        vals = v[per * b : per * (b + 1)]
        pos = 0
        if family == GAMMA:
            mu[b] = math.exp(float(np.clip(vals[pos], -300.0, 300.0)))
        else:
            mu[b] = vals[pos]
        pos += 1
        if not phi_fixed_zero:
            if family == GAMMA:
                phi[b] = PHI_MAX * float(_sigmoid(vals[pos]))
            else:
                phi[b] = vals[pos]
            pos += 1
        sigma[b] = math.exp(np.clip(vals[pos], -300.0, 300.0))
        c[b] = 2.0 * math.atan(vals[pos + 1])
        rho[b] = float(np.clip(_sigmoid(vals[pos + 2]), 1e-12, 1.0 - 1e-12))
    a = np.zeros((k, k))
    logits = v[per * k :]
    pos = 0
    for i in range(k):
        row = np.zeros(k)
        for j in range(k):
            if j != i:
                row[j] = np.clip(logits[pos], -500.0, 500.0)
                pos += 1
        row = np.exp(row - row.max())
        a[i] = row / row.sum()
    return CarHmmModel(
        k=k, family=family, mu_rl=mu, phi=phi, sigma=sigma, c=c, rho=rho, A=a,
        phi_fixed_zero=phi_fixed_zero,
    )


def _assemble_gradient(model: CarHmmModel, demis: np.ndarray, dA: np.ndarray) -> np.ndarray:
    """Chain natural-parameter gradients through the transform."""
    k = model.k
    fixed = model.phi_fixed_zero
    per = 4 if fixed else 5
    g = np.empty(n_free_params(k, fixed))
    for b in range(k):
        pos = per * b
        if model.family == GAMMA:
            g[pos] = demis[b, 0] * model.mu_rl[b]
            if not fixed:
                g[pos + 1] = demis[b, 1] * model.phi[b] * (1.0 - model.phi[b] / PHI_MAX)
        else:
            g[pos] = demis[b, 0]
            if not fixed:
                g[pos + 1] = demis[b, 1]
        off = 1 if fixed else 2
        g[pos + off] = demis[b, 2] * model.sigma[b]
        g[pos + off + 1] = demis[b, 3] * (1.0 + math.cos(model.c[b]))
        g[pos + off + 2] = demis[b, 4] * model.rho[b] * (1.0 - model.rho[b])
    pos = per * k
    for i in range(k):
        inner = float(dA[i] @ model.A[i])
        for j in range(k):
            if j != i:
                g[pos] = model.A[i, j] * (dA[i, j] - inner)
                pos += 1
    return g


def numerical_gradient(f, x: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Central finite differences with a relative step."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(len(x)):
        h = rel_step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


@dataclass
class FitConfig:
    max_restarts: int = 10
    seed: int = 0
    maxiter: int = 2000
    ftol: float = 1e-10
    gtol: float = 1e-6
    fix_phi_zero: bool = False
    gradient: str = "analytic"  # or "fd"


@dataclass
class FitResult:
    model: CarHmmModel
    loglik: float
    aic: float
    bic: float
    converged: bool
    degenerate: str | None
    restarts_used: int
    n_obs: int
    trace: dict = field(default_factory=dict)

    def passed(self) -> bool:
        return self.converged and self.degenerate is None

    def to_dict(self) -> dict:
        return {
            "loglik": self.loglik,
            "aic": self.aic,
            "bic": self.bic,
            "converged": self.converged,
            "degenerate": self.degenerate,
            "restarts_used": self.restarts_used,
            "n_obs": self.n_obs,
            "n_params": self.model.n_params,
            "trace": self.trace,
        }


def degeneracy_check(model: CarHmmModel) -> str | None:
    """None when the fit is usable, else the reason it is not.

    Thresholds: a stationary-distribution entry under 0.01, an angle
    concentration under 1e-3, or a transition row that is numerically
    uniform.
    """
    delta = stationary(model.A)
    if delta.min() < 0.01:
        return DEGENERATE_STATIONARY
    if model.rho.min() < 1e-3:
        return DEGENERATE_ANGLE
    spread = model.A.max(axis=1) - model.A.min(axis=1)
    if spread.min() < 1e-6:
        return DEGENERATE_UNIFORM_ROW
    return None


def order_states(model: CarHmmModel) -> CarHmmModel:
    """Canonical label order: ascending reversion level."""
    order = np.argsort(model.mu_rl, kind="stable")
    return model.permuted(order)


def random_start(
    k: int,
    family: str,
    rng: np.random.Generator,
    mean_step: float = 1.0,
    phi_fixed_zero: bool = False,
) -> np.ndarray:
    """Random unconstrained start covering the observed data scale.

    Reversion levels are drawn around the mean observed step so starts
    remain sensible for unstandardized series.
    """
    per = 4 if phi_fixed_zero else 5
    v = np.empty(n_free_params(k, phi_fixed_zero))
    shift = math.log(mean_step)
    for b in range(k):
        pos = per * b
        v[pos] = rng.uniform(math.log(0.1), math.log(3.0)) + shift
        off = 1
        if not phi_fixed_zero:
            # logit scale for gamma, raw (stable) autocorrelation for log-normal
            v[pos + 1] = rng.uniform(-2.0, 2.0) if family == GAMMA else rng.uniform(-0.9, 0.9)
            off = 2
        v[pos + off] = rng.uniform(math.log(0.1), math.log(1.0)) + (shift if family == GAMMA else 0.0)
        v[pos + off + 1] = 0.0  # c = 0
        v[pos + off + 2] = rng.uniform(-1.0, 1.0)
    v[per * k :] = rng.uniform(-2.0, 0.0, size=k * (k - 1))
    return v


_BAD_OBJECTIVE = 1e10


def _objective(v, packed, k, family, fixed, analytic):
    try:
        model = untransform(v, k, family, phi_fixed_zero=fixed)
    except NonFinite:
        return _BAD_OBJECTIVE, np.zeros(len(v))
    if analytic:
        try:
            ll, demis, dA = packed_loglik_grad(model, packed)
        except Exception:
            return _BAD_OBJECTIVE, np.zeros(len(v))
        if not np.isfinite(ll):
            return _BAD_OBJECTIVE, np.zeros(len(v))
        return -ll, -_assemble_gradient(model, demis, dA)

    def value(x):
        try:
            m = untransform(x, k, family, phi_fixed_zero=fixed)
        except NonFinite:
            return _BAD_OBJECTIVE
        try:
            ll = packed_loglik(m, packed)
        except Exception:
            return _BAD_OBJECTIVE
        return -ll if np.isfinite(ll) else _BAD_OBJECTIVE

    f = value(v)
    if f >= _BAD_OBJECTIVE:
        return _BAD_OBJECTIVE, np.zeros(len(v))
    return f, numerical_gradient(value, v)


def fit_once(
    series: ObservationSeries,
    k: int,
    family: str,
    start: np.ndarray,
    config: FitConfig | None = None,
    strict: bool = True,
) -> FitResult:
    """One quasi-Newton run from a given unconstrained start.

    With strict=True an optimizer that exhausts its iteration cap raises
    OptimizerFailure; fit_multistart runs non-strict and keeps the attempt.
    """
    config = config or FitConfig()
    packed = PackedSeries.from_series(series)
    analytic = config.gradient == "analytic"
    fixed = config.fix_phi_zero

    def fun(x):
        return _objective(x, packed, k, family, fixed, analytic)

    f0, _ = fun(np.asarray(start, dtype=float))
    if not np.isfinite(f0) or f0 >= _BAD_OBJECTIVE:
        raise NonFiniteObjective("objective is not finite at the starting point")
    res = minimize(
        fun,
        np.asarray(start, dtype=float),
        jac=True,
        method="L-BFGS-B",
        options={
            "maxiter": config.maxiter,
            "ftol": config.ftol,
            "gtol": config.gtol,
            "maxls": 50,
        },
    )
    model = order_states(untransform(res.x, k, family, phi_fixed_zero=fixed))
    loglik = -float(res.fun)
    converged = res.status == 0
    if strict and not converged:
        raise OptimizerFailure(f"no convergence in {config.maxiter} iterations: {res.message}")
    if family == LOGNORMAL and np.any(np.abs(model.phi) >= 1.0):
        # |phi| < 1 is sufficient (not necessary) for a stable step process;
        # estimates outside it may signal optimizer instability
        warnings.warn(
            f"log-normal fit has |phi| >= 1 ({model.phi.tolist()}); "
            "the step process may be unstable",
            stacklevel=2,
        )
    p = n_free_params(k, fixed)
    n = packed.n_pairs
    return FitResult(
        model=model,
        loglik=loglik,
        aic=-2.0 * loglik + 2.0 * p,
        bic=-2.0 * loglik + math.log(n) * p,
        converged=converged,
        degenerate=degeneracy_check(model),
        restarts_used=1,
        n_obs=n,
        trace={
            "iterations": int(res.nit),
            "func_evals": int(res.nfev),
            "status": int(res.status),
            "message": str(res.message),
        },
    )


def fit_multistart(
    series: ObservationSeries,
    k: int,
    family: str,
    config: FitConfig | None = None,
) -> FitResult:
    """Random restarts until a fit converges and passes the degeneracy screen.

    Draws up to max_restarts starting vectors from independent streams
    derived from (seed, restart index); returns the first passing fit, or
    the best-likelihood attempt flagged as failed when none pass.
    """
    config = config or FitConfig()
    steps = []
    for g in series.groups:
        steps.append([g.d0])
        steps.append(g.d)
    mean_step = float(np.concatenate(steps).mean())
    best: FitResult | None = None
    for r in range(config.max_restarts):
        rng = np.random.default_rng([config.seed, r])
        start = random_start(k, family, rng, mean_step=mean_step, phi_fixed_zero=config.fix_phi_zero)
        try:
            result = fit_once(series, k, family, start, config=config, strict=False)
        except NonFiniteObjective:
            continue
        result.restarts_used = r + 1
        if result.passed():
            return result
        if best is None or result.loglik > best.loglik:
            best = result
            best.restarts_used = r + 1
    if best is None:
        raise AllRestartsFailed(f"no restart produced a finite objective in {config.max_restarts} tries")
    best.restarts_used = config.max_restarts
    return best
