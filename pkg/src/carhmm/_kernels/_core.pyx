# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend: scaled forward recursion and its gradient.

Same contract and semantics as the NumPy backend in _numpy.py; see the
package docstring in carhmm._kernels for the interface.
"""

import numpy as np

from libc.math cimport INFINITY, cos, exp, log, log1p, sin
from libc.stdint cimport int64_t

from scipy.special.cython_special cimport gammaln, psi

cdef double LOG2PI = 1.8378770664093454836
cdef double LOG_FLOOR = -700.0

GAMMA = 0
LOGNORMAL = 1


cdef inline double _emis(int family, double x, double d_prev, double th,
                         double mu_b, double phi_b, double sig_b,
                         double c_b, double rho_b) noexcept nogil:
    cdef double mean, shape, scale, step, m, z, denom
    if family == 0:
        mean = (1.0 - phi_b) * mu_b + phi_b * d_prev
        shape = (mean / sig_b) * (mean / sig_b)
        scale = sig_b * sig_b / mean
        step = (shape - 1.0) * log(x) - x / scale - shape * log(scale) - gammaln(shape)
    else:
        m = (1.0 - phi_b) * mu_b + phi_b * log(d_prev)
        z = (log(x) - m) / sig_b
        step = -log(x) - log(sig_b) - 0.5 * LOG2PI - 0.5 * z * z
    denom = 1.0 + rho_b * rho_b - 2.0 * rho_b * cos(th - c_b)
    step += log1p(-rho_b * rho_b) - LOG2PI - log(denom)
    return step if step > LOG_FLOOR else LOG_FLOOR


cdef inline void _emis_partials(int family, double x, double d_prev, double th,
                                double mu_b, double phi_b, double sig_b,
                                double c_b, double rho_b, double* out) noexcept nogil:
    cdef double mean, shape, scale, dls, dlth, dmean, dsig, m, z, dm
    cdef double dl = th - c_b
    cdef double denom = 1.0 + rho_b * rho_b - 2.0 * rho_b * cos(dl)
    if family == 0:
        mean = (1.0 - phi_b) * mu_b + phi_b * d_prev
        shape = (mean / sig_b) * (mean / sig_b)
        scale = sig_b * sig_b / mean
        dls = log(x) - log(scale) - psi(shape)
        dlth = x / (scale * scale) - shape / scale
        dmean = dls * (2.0 * mean / (sig_b * sig_b)) + dlth * (-scale / mean)
        dsig = dls * (-2.0 * shape / sig_b) + dlth * (2.0 * sig_b / mean)
        out[0] = dmean * (1.0 - phi_b)
        out[1] = dmean * (d_prev - mu_b)
        out[2] = dsig
    else:
        m = (1.0 - phi_b) * mu_b + phi_b * log(d_prev)
        z = log(x) - m
        dm = z / (sig_b * sig_b)
        out[0] = dm * (1.0 - phi_b)
        out[1] = dm * (log(d_prev) - mu_b)
        out[2] = -1.0 / sig_b + z * z / (sig_b * sig_b * sig_b)
    out[3] = 2.0 * rho_b * sin(dl) / denom
    out[4] = -2.0 * rho_b / (1.0 - rho_b * rho_b) - (2.0 * rho_b - 2.0 * cos(dl)) / denom


def loglik(int family, double[::1] mu, double[::1] phi, double[::1] sigma,
           double[::1] c, double[::1] rho, double[:, ::1] A, double[::1] delta,
           double[::1] d0s, double[::1] d, double[::1] theta, int64_t[::1] offsets):
    cdef Py_ssize_t k = mu.shape[0]
    cdef Py_ssize_t G = offsets.shape[0] - 1
    cdef double[::1] alpha = np.empty(k)
    cdef double[::1] scratch = np.empty(k)
    cdef double[::1] lf = np.empty(k)
    cdef double total = 0.0
    cdef double m, w, cv, d_prev
    cdef Py_ssize_t g, t, b, i, j
    cdef int64_t lo, hi
    cdef bint failed = False
    with nogil:
        for g in range(G):
            lo = offsets[g]
            hi = offsets[g + 1]
            d_prev = d0s[g]
            for b in range(k):
                alpha[b] = delta[b]
            for t in range(lo, hi):
                if t > lo:
                    for j in range(k):
                        w = 0.0
                        for i in range(k):
                            w += alpha[i] * A[i, j]
                        scratch[j] = w
                    for j in range(k):
                        alpha[j] = scratch[j]
                m = -INFINITY
                for b in range(k):
                    lf[b] = _emis(family, d[t], d_prev, theta[t],
                                  mu[b], phi[b], sigma[b], c[b], rho[b])
                    if lf[b] > m:
                        m = lf[b]
                cv = 0.0
                for b in range(k):
                    w = alpha[b] * exp(lf[b] - m)
                    scratch[b] = w
                    cv += w
                if not cv > 0.0:
                    failed = True
                    break
                for b in range(k):
                    alpha[b] = scratch[b] / cv
                total += log(cv) + m
                d_prev = d[t]
            if failed:
                break
    if failed:
        return -INFINITY
    return total


def loglik_grad(int family, double[::1] mu, double[::1] phi, double[::1] sigma,
                double[::1] c, double[::1] rho, double[:, ::1] A, double[::1] delta,
                double[::1] d0s, double[::1] d, double[::1] theta, int64_t[::1] offsets):
    cdef Py_ssize_t k = mu.shape[0]
    cdef Py_ssize_t G = offsets.shape[0] - 1
    cdef Py_ssize_t N = d.shape[0]

    demis_arr = np.zeros((k, 5))
    dA_arr = np.zeros((k, k))
    gamma1_arr = np.zeros(k)
    logf_arr = np.empty((N, k))
    alphas_arr = np.empty((N, k))
    cvals_arr = np.empty(N)
    shifts_arr = np.empty(N)

    cdef double[:, ::1] demis = demis_arr
    cdef double[:, ::1] dA = dA_arr
    cdef double[::1] gamma1_sum = gamma1_arr
    cdef double[:, ::1] logf = logf_arr
    cdef double[:, ::1] alphas = alphas_arr
    cdef double[::1] cvals = cvals_arr
    cdef double[::1] shifts = shifts_arr

    cdef double[::1] alpha = np.empty(k)
    cdef double[::1] scratch = np.empty(k)
    cdef double[::1] beta = np.empty(k)
    cdef double[::1] beta_prev = np.empty(k)
    cdef double[::1] wb = np.empty(k)

    cdef double total = 0.0
    cdef double m, w, cv, d_prev, gm, s
    cdef double pbuf[5]
    cdef Py_ssize_t g, t, b, i, j, q
    cdef int64_t lo, hi
    cdef bint failed = False

    with nogil:
        for g in range(G):
            lo = offsets[g]
            hi = offsets[g + 1]
            # forward pass, storing the filter for the backward sweep
            d_prev = d0s[g]
            for b in range(k):
                alpha[b] = delta[b]
            for t in range(lo, hi):
                if t > lo:
                    for j in range(k):
                        w = 0.0
                        for i in range(k):
                            w += alpha[i] * A[i, j]
                        scratch[j] = w
                    for j in range(k):
                        alpha[j] = scratch[j]
                m = -INFINITY
                for b in range(k):
                    logf[t, b] = _emis(family, d[t], d_prev, theta[t],
                                       mu[b], phi[b], sigma[b], c[b], rho[b])
                    if logf[t, b] > m:
                        m = logf[t, b]
                cv = 0.0
                for b in range(k):
                    w = alpha[b] * exp(logf[t, b] - m)
                    scratch[b] = w
                    cv += w
                if not cv > 0.0:
                    failed = True
                    break
                for b in range(k):
                    alpha[b] = scratch[b] / cv
                    alphas[t, b] = alpha[b]
                cvals[t] = cv
                shifts[t] = m
                total += log(cv) + m
                d_prev = d[t]
            if failed:
                break

            # backward sweep with gradient accumulation
            for b in range(k):
                beta[b] = 1.0
            t = hi - 1
            d_prev = d0s[g] if t == lo else d[t - 1]
            for b in range(k):
                gm = alphas[t, b] * beta[b]
                if logf[t, b] > LOG_FLOOR:
                    _emis_partials(family, d[t], d_prev, theta[t],
                                   mu[b], phi[b], sigma[b], c[b], rho[b], pbuf)
                    for j in range(5):
                        demis[b, j] += gm * pbuf[j]
            for t in range(hi - 1, lo, -1):
                for j in range(k):
                    wb[j] = exp(logf[t, j] - shifts[t]) * beta[j] / cvals[t]
                for i in range(k):
                    for j in range(k):
                        dA[i, j] += alphas[t - 1, i] * wb[j]
                for i in range(k):
                    s = 0.0
                    for j in range(k):
                        s += A[i, j] * wb[j]
                    beta_prev[i] = s
                for i in range(k):
                    beta[i] = beta_prev[i]
                # emission partials at t-1 with the fresh beta
                d_prev = d0s[g] if t - 1 == lo else d[t - 2]
                for b in range(k):
                    gm = alphas[t - 1, b] * beta[b]
                    if logf[t - 1, b] > LOG_FLOOR:
                        _emis_partials(family, d[t - 1], d_prev, theta[t - 1],
                                       mu[b], phi[b], sigma[b], c[b], rho[b], pbuf)
                        for j in range(5):
                            demis[b, j] += gm * pbuf[j]
            for b in range(k):
                gamma1_sum[b] += alphas[lo, b] * beta[b]
    if failed:
        return -INFINITY, demis_arr, dA_arr, gamma1_arr
    return total, demis_arr, dA_arr, gamma1_arr
