"""Model log-likelihood via scaled forward recursion over grouped series.

The likelihood of one group is

    delta . Diag(f(d1, theta1 | b)) . A . Diag(f(d2, theta2 | b)) ... 1

with delta the stationary distribution of A applied to the first
observation's state, and f the product of the step density (whose mean
mixes the reversion level with the previous step through phi) and the
angle density.  Groups are independent and share parameters, so the total
log-likelihood is the sum over groups.  Emission log densities are floored
at -700 before exponentiation so the filter stays defined on pathological
parameter proposals mid-optimization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .distributions import (
    GammaMeanSd,
    LogNormalAR,
    WrappedCauchy,
    gamma_logpdf,
    lognormal_logpdf,
    wc_logpdf,
)
from .errors import NumericUnderflow
from .markov import stationary
from .model import GAMMA, CarHmmModel
from .series import ObservationSeries, SeriesGroup

LOG_FLOOR = -700.0


def _family_code(family: str) -> int:
    return _kernels.GAMMA_CODE if family == GAMMA else _kernels.LOGNORMAL_CODE


@dataclass
class PackedSeries:
    """Groups flattened for the kernels: offsets[g]..offsets[g+1] index group g."""

    d0s: np.ndarray
    d: np.ndarray
    theta: np.ndarray
    offsets: np.ndarray

    @classmethod
    def from_series(cls, series: ObservationSeries) -> "PackedSeries":
        groups = [g for g in series.groups if g.n_pairs > 0]
        if not groups:
            raise ValueError("series has no observation pairs")
        d0s = np.array([g.d0 for g in groups])
        d = np.concatenate([g.d for g in groups])
        theta = np.concatenate([g.theta for g in groups])
        offsets = np.zeros(len(groups) + 1, dtype=np.int64)
        np.cumsum([g.n_pairs for g in groups], out=offsets[1:])
        return cls(d0s, d, theta, offsets)

    @property
    def n_pairs(self) -> int:
        return len(self.d)

    def kernel_args(self, model: CarHmmModel, delta: np.ndarray) -> tuple:
        return (
            _family_code(model.family),
            model.mu_rl,
            model.phi,
            model.sigma,
            model.c,
            model.rho,
            model.A,
            delta,
            self.d0s,
            self.d,
            self.theta,
            self.offsets,
        )


def conditional_step_mean(model: CarHmmModel, b: int, d_prev: float) -> float:
    """Mean of the step distribution in state b given the previous step.

    For the log-normal family this is the mean of the log step, with the
    previous step entering on the log scale.
    """
    if model.family == GAMMA:
        return (1.0 - model.phi[b]) * model.mu_rl[b] + model.phi[b] * d_prev
    return (1.0 - model.phi[b]) * model.mu_rl[b] + model.phi[b] * np.log(d_prev)


def emission_logdensity(model: CarHmmModel, b: int, d: float, d_prev: float, theta: float) -> float:
    """Joint log density of one (step, angle) pair in state b."""
    mean = conditional_step_mean(model, b, d_prev)
    if model.family == GAMMA:
        step = gamma_logpdf(d, GammaMeanSd(mean, float(model.sigma[b])))
    else:
        step = lognormal_logpdf(d, LogNormalAR(mean, float(model.sigma[b])))
    ang = wc_logpdf(theta, WrappedCauchy(float(model.c[b]), float(model.rho[b])))
    return step + ang


def emission_logdens_matrix(model: CarHmmModel, group: SeriesGroup) -> np.ndarray:
    """(n, k) matrix of floored emission log densities for one group."""
    from ._kernels import _numpy as ref

    return ref._emission_logdens(
        _family_code(model.family),
        model.mu_rl,
        model.phi,
        model.sigma,
        model.c,
        model.rho,
        group.d0,
        group.d,
        group.theta,
    )


def forward_from_logdens(logdens: np.ndarray, A: np.ndarray, delta: np.ndarray):
    """Scaled forward pass on an explicit emission matrix.

    Returns (loglik, filter states (n, k)); raises NumericUnderflow when the
    filter mass vanishes.
    """
    from ._kernels import _numpy as ref

    ll, alphas, _, _ = ref._forward(np.asarray(logdens, dtype=float), A, delta)
    if not np.isfinite(ll):
        raise NumericUnderflow("forward filter lost all mass")
    return ll, alphas


def group_loglik_from_logdens(logdens: np.ndarray, A: np.ndarray, delta: np.ndarray) -> float:
    return forward_from_logdens(logdens, A, delta)[0]


def group_loglik(model: CarHmmModel, group: SeriesGroup) -> float:
    if group.n_pairs < 1:
        raise ValueError("group has no observation pairs")
    delta = stationary(model.A)
    return group_loglik_from_logdens(emission_logdens_matrix(model, group), model.A, delta)


def total_loglik(model: CarHmmModel, series: ObservationSeries) -> float:
    packed = PackedSeries.from_series(series)
    return packed_loglik(model, packed)


def packed_loglik(model: CarHmmModel, packed: PackedSeries) -> float:
    delta = stationary(model.A)
    ll = _kernels.loglik(*packed.kernel_args(model, delta))
    if not np.isfinite(ll):
        raise NumericUnderflow("forward filter lost all mass")
    return ll


def packed_loglik_grad(model: CarHmmModel, packed: PackedSeries):
    """Log-likelihood and its gradient in the natural parameters.

    Returns (loglik, demis (k, 5), dA (k, k)) where demis columns follow
    (mu_rl, phi, sigma, c, rho) and dA includes the dependence of the
    stationary initial distribution on A.
    """
    delta = stationary(model.A)
    ll, demis, dA, gamma1 = _kernels.loglik_grad(*packed.kernel_args(model, delta))
    if not np.isfinite(ll):
        return ll, demis, dA
    k = model.k
    # initial-distribution term: delta solves delta (I - A + U) = 1.
    # gamma1/delta stays bounded as delta -> 0 (gamma1 carries a delta
    # factor), so the 0/0 case resolves to 0.
    w = np.divide(gamma1, delta, out=np.zeros(k), where=delta > 1e-290)
    z = np.linalg.inv(np.eye(k) - model.A + np.ones((k, k)))
    dA = dA + np.outer(delta, z @ w)
    return ll, demis, dA
