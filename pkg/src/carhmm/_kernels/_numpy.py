"""Pure-NumPy kernel backend.

Reference implementation of the scaled forward recursion and the
forward-backward gradient accumulation.  Semantics (including the -700
density floor and the per-step max shift) match the compiled backend
bit-for-bit in structure, if not in rounding.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, psi

_LOG_2PI = math.log(2.0 * math.pi)
LOG_FLOOR = -700.0

GAMMA = 0
LOGNORMAL = 1


def _emission_logdens(family, mu, phi, sigma, c, rho, d0, d, theta):
    """Log emission densities, shape (n, k); entries floored at LOG_FLOOR."""
    d_prev = np.concatenate(([d0], d[:-1]))[:, None]
    x = d[:, None]
    if family == GAMMA:
        mean = (1.0 - phi) * mu + phi * d_prev
        shape = (mean / sigma) ** 2
        scale = sigma**2 / mean
        step = (
            (shape - 1.0) * np.log(x)
            - x / scale
            - shape * np.log(scale)
            - gammaln(shape)
        )
    else:
        m = (1.0 - phi) * mu + phi * np.log(d_prev)
        z = (np.log(x) - m) / sigma
        step = -np.log(x) - np.log(sigma) - 0.5 * _LOG_2PI - 0.5 * z * z
    denom = 1.0 + rho * rho - 2.0 * rho * np.cos(theta[:, None] - c)
    ang = np.log1p(-rho * rho) - _LOG_2PI - np.log(denom)
    return np.maximum(step + ang, LOG_FLOOR)


def _forward(logf, A, delta):
    """Scaled forward pass; returns (loglik, alphas, cvals, shifts)."""
    n, k = logf.shape
    alphas = np.empty((n, k))
    cvals = np.empty(n)
    shifts = np.empty(n)
    ll = 0.0
    alpha = delta
    for t in range(n):
        if t > 0:
            alpha = alpha @ A
        m = logf[t].max()
        w = alpha * np.exp(logf[t] - m)
        cv = w.sum()
        if not cv > 0.0:
            return -np.inf, alphas, cvals, shifts
        alpha = w / cv
        alphas[t] = alpha
        cvals[t] = cv
        shifts[t] = m
        ll += math.log(cv) + m
    return ll, alphas, cvals, shifts


def loglik(family, mu, phi, sigma, c, rho, A, delta, d0s, d, theta, offsets):
    total = 0.0
    for g in range(len(offsets) - 1):
        lo, hi = offsets[g], offsets[g + 1]
        logf = _emission_logdens(family, mu, phi, sigma, c, rho, d0s[g], d[lo:hi], theta[lo:hi])
        ll, _, _, _ = _forward(logf, A, delta)
        if not np.isfinite(ll):
            return -np.inf
        total += ll
    return total


def _emission_partials(family, mu, phi, sigma, c, rho, d0, d, theta):
    """Per-observation partials of the log emission density, each (n, k)."""
    d_prev = np.concatenate(([d0], d[:-1]))[:, None]
    x = d[:, None]
    if family == GAMMA:
        mean = (1.0 - phi) * mu + phi * d_prev
        shape = (mean / sigma) ** 2
        scale = sigma**2 / mean
        dls = np.log(x) - np.log(scale) - psi(shape)
        dlth = x / scale**2 - shape / scale
        dl_dmean = dls * (2.0 * mean / sigma**2) + dlth * (-scale / mean)
        dl_dsig = dls * (-2.0 * shape / sigma) + dlth * (2.0 * sigma / mean)
        p_mu = dl_dmean * (1.0 - phi)
        p_phi = dl_dmean * (d_prev - mu)
        p_sig = dl_dsig
    else:
        m = (1.0 - phi) * mu + phi * np.log(d_prev)
        z = np.log(x) - m
        dl_dm = z / sigma**2
        p_mu = dl_dm * (1.0 - phi)
        p_phi = dl_dm * (np.log(d_prev) - mu)
        p_sig = -1.0 / sigma + z * z / sigma**3
    delta_ang = theta[:, None] - c
    denom = 1.0 + rho * rho - 2.0 * rho * np.cos(delta_ang)
    p_c = 2.0 * rho * np.sin(delta_ang) / denom
    p_rho = -2.0 * rho / (1.0 - rho * rho) - (2.0 * rho - 2.0 * np.cos(delta_ang)) / denom
    return p_mu, p_phi, p_sig, p_c, p_rho


def loglik_grad(family, mu, phi, sigma, c, rho, A, delta, d0s, d, theta, offsets):
    k = len(mu)
    total = 0.0
    demis = np.zeros((k, 5))
    dA = np.zeros((k, k))
    gamma1_sum = np.zeros(k)
    for g in range(len(offsets) - 1):
        lo, hi = offsets[g], offsets[g + 1]
        dg, tg = d[lo:hi], theta[lo:hi]
        logf = _emission_logdens(family, mu, phi, sigma, c, rho, d0s[g], dg, tg)
        ll, alphas, cvals, shifts = _forward(logf, A, delta)
        if not np.isfinite(ll):
            return -np.inf, demis, dA, gamma1_sum
        total += ll
        n = logf.shape[0]
        # scaled backward pass
        betas = np.empty((n, k))
        beta = np.ones(k)
        betas[n - 1] = beta
        fshift = np.exp(logf - shifts[:, None])
        for t in range(n - 2, -1, -1):
            beta = A @ (fshift[t + 1] * beta) / cvals[t + 1]
            betas[t] = beta
        gammas = alphas * betas
        # transition gradient: sum_t alpha_{t-1,p} fshift_t(q) beta_t(q) / c_t
        if n > 1:
            wb = fshift[1:] * betas[1:] / cvals[1:, None]
            dA += alphas[:-1].T @ wb
        # emission gradient, zeroing floored densities
        live = logf > LOG_FLOOR
        partials = _emission_partials(family, mu, phi, sigma, c, rho, d0s[g], dg, tg)
        gw = gammas * live
        for j, part in enumerate(partials):
            demis[:, j] += np.einsum("tb,tb->b", gw, part)
        gamma1_sum += gammas[0]
    return total, demis, dA, gamma1_sum
