"""Emission distributions for step lengths and deflection angles.

Step lengths use a gamma distribution parameterized by its mean and
standard deviation, with shape (mean/sd)^2 and scale sd^2/mean, or
alternatively a log-normal on the log step.  Deflection angles use the
wrapped Cauchy with center c in [-pi, pi] and concentration rho in (0, 1):

    f(theta; c, rho) = (1 / 2pi) * (1 - rho^2) / (1 + rho^2 - 2 rho cos(theta - c))

All density and CDF functions accept scalars or numpy arrays.  Samplers
take an explicit numpy Generator; there is no module-level random state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError
from .geo import wrap_angle

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GammaMeanSd:
    """Gamma distribution given by mean > 0 and standard deviation > 0."""

    mean: float
    sd: float

    def __post_init__(self):
        if not (self.mean > 0.0 and self.sd > 0.0):
            raise DomainError(f"gamma mean and sd must be positive, got {self.mean}, {self.sd}")

    @property
    def shape(self) -> float:
        return (self.mean / self.sd) ** 2

    @property
    def scale(self) -> float:
        return self.sd**2 / self.mean


@dataclass(frozen=True)
class WrappedCauchy:
    c: float
    rho: float

    def __post_init__(self):
        if not -math.pi <= self.c <= math.pi:
            raise DomainError(f"wrapped Cauchy center {self.c} outside [-pi, pi]")
        if not 0.0 < self.rho < 1.0:
            raise DomainError(f"wrapped Cauchy concentration {self.rho} outside (0, 1)")


@dataclass(frozen=True)
class LogNormalAR:
    """Log-normal step distribution: log step is Normal(mean_log, sd_log)."""

    mean_log: float
    sd_log: float

    def __post_init__(self):
        if not self.sd_log > 0.0:
            raise DomainError(f"sd_log must be positive, got {self.sd_log}")


def gamma_logpdf(x, p: GammaMeanSd):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("gamma density requires x > 0")
    k, th = p.shape, p.scale
    out = (k - 1.0) * np.log(x) - x / th - k * math.log(th) - special.gammaln(k)
    return float(out) if out.ndim == 0 else out


def gamma_cdf(x, p: GammaMeanSd):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("gamma CDF requires x > 0")
    out = special.gammainc(p.shape, x / p.scale)
    return float(out) if out.ndim == 0 else out


def wc_logpdf(theta, p: WrappedCauchy):
    theta = np.asarray(theta, dtype=float)
    rho = p.rho
    denom = 1.0 + rho * rho - 2.0 * rho * np.cos(theta - p.c)
    out = math.log1p(-rho * rho) - _LOG_2PI - np.log(denom)
    return float(out) if out.ndim == 0 else out


def _wc_antideriv(x, rho: float):
    """Continuous antiderivative of the centered WC density on [-2pi, 2pi].

    Equals the CDF H(x) = 1/2 + atan(A tan(x/2)) / pi on [-pi, pi] with
    A = (1 + rho) / (1 - rho), extended by one full unit of probability per
    period outside that interval.
    """
    a = (1.0 + rho) / (1.0 - rho)
    x = np.asarray(x, dtype=float)
    shift = np.zeros_like(x)
    xw = np.where(x > math.pi, x - 2.0 * math.pi, x)
    shift = np.where(x > math.pi, 1.0, shift)
    xw = np.where(x < -math.pi, x + 2.0 * math.pi, xw)
    shift = np.where(x < -math.pi, -1.0, shift)
    # tan(pi/2) overflows harmlessly to a huge float; atan saturates.
    core = 0.5 + np.arctan(a * np.tan(xw / 2.0)) / math.pi
    core = np.where(xw == -math.pi, 0.0, core)
    return core + shift


def wc_cdf(theta, p: WrappedCauchy):
    """Wrapped Cauchy CDF on the support (-pi, pi]: integral from -pi to theta."""
    theta = np.asarray(theta, dtype=float)
    out = _wc_antideriv(theta - p.c, p.rho) - _wc_antideriv(-math.pi - p.c, p.rho)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def lognormal_logpdf(x, p: LogNormalAR):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("log-normal density requires x > 0")
    z = (np.log(x) - p.mean_log) / p.sd_log
    out = -np.log(x) - math.log(p.sd_log) - 0.5 * _LOG_2PI - 0.5 * z * z
    return float(out) if out.ndim == 0 else out


def lognormal_cdf(x, p: LogNormalAR):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("log-normal CDF requires x > 0")
    out = special.ndtr((np.log(x) - p.mean_log) / p.sd_log)
    return float(out) if out.ndim == 0 else out


def sample_gamma(p: GammaMeanSd, rng: np.random.Generator, size=None):
    return rng.gamma(p.shape, p.scale, size=size)


def sample_wc(p: WrappedCauchy, rng: np.random.Generator, size=None):
    """Inverse-CDF sampling of the wrapped Cauchy.

    theta = wrap(c + 2 atan(s tan(pi (u - 1/2)))) with s = (1-rho)/(1+rho),
    which keeps the draw inside the support for every u in (0, 1).
    """
    u = rng.uniform(size=size)
    s = (1.0 - p.rho) / (1.0 + p.rho)
    raw = p.c + 2.0 * np.arctan(s * np.tan(math.pi * (u - 0.5)))
    if size is None:
        return wrap_angle(float(raw))
    wrapped = np.remainder(raw + math.pi, 2.0 * math.pi) - math.pi
    return np.where(wrapped == -math.pi, math.pi, wrapped)


def sample_lognormal(p: LogNormalAR, rng: np.random.Generator, size=None):
    return np.exp(rng.normal(p.mean_log, p.sd_log, size=size))
