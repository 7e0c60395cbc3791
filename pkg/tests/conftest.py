"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's own likelihood path:
emission densities come from scipy.stats / explicit formulas, likelihoods
from exhaustive path enumeration or extended-precision matrix products,
so agreement with the forward recursion is a real cross-check.
"""

import itertools
import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import logsumexp

from carhmm.markov import stationary
from carhmm.model import CarHmmModel

# reference three-state estimates for a grey-seal track (used as a
# realistic golden model throughout the tests)
SEAL3 = dict(
    k=3,
    family="gamma",
    mu_rl=[0.398, 1.291, 2.074],
    phi=[0.277, 0.781, 0.961],
    sigma=[0.279, 0.318, 0.164],
    c=[-0.129, -0.050, 0.002],
    rho=[0.402, 0.780, 0.906],
    A=[[0.713, 0.287, 0.000], [0.149, 0.797, 0.054], [0.000, 0.120, 0.880]],
)

# two-state elk parameters (HMM: phi = 0); the Low/Med/High autocorrelation
# variants override phi with 0.1 / 0.4 / 0.85
ELK2 = dict(
    k=2,
    family="gamma",
    mu_rl=[3.364, 0.355],
    phi=[0.0, 0.0],
    sigma=[4.329, 0.378],
    c=[0.0, 0.0],
    rho=[0.228, 0.6],
    A=[[0.75, 0.25], [0.15, 0.85]],
)


def seal3_model() -> CarHmmModel:
    return CarHmmModel(**SEAL3)


def elk2_model(phi=(0.0, 0.0), phi_fixed_zero=False) -> CarHmmModel:
    doc = dict(ELK2)
    doc["phi"] = list(phi)
    return CarHmmModel(**doc, phi_fixed_zero=phi_fixed_zero)


@pytest.fixture
def seal3():
    return seal3_model()


@pytest.fixture
def elk2():
    return elk2_model()


def random_model(rng: np.random.Generator, k: int, family: str = "gamma") -> CarHmmModel:
    a = rng.uniform(0.2, 1.0, size=(k, k)) + np.eye(k) * rng.uniform(0.5, 3.0)
    a = a / a.sum(axis=1, keepdims=True)
    if family == "gamma":
        mu = rng.uniform(0.3, 3.0, size=k)
        phi = rng.uniform(0.0, 0.9, size=k)
    else:
        mu = rng.uniform(-1.0, 1.0, size=k)
        phi = rng.uniform(-0.8, 0.8, size=k)
    return CarHmmModel(
        k=k,
        family=family,
        mu_rl=mu,
        phi=phi,
        sigma=rng.uniform(0.15, 1.0, size=k),
        c=rng.uniform(-2.5, 2.5, size=k),
        rho=rng.uniform(0.05, 0.92, size=k),
        A=a,
    )


def random_series(rng: np.random.Generator, n: int):
    d0 = float(rng.uniform(0.2, 2.0))
    d = rng.uniform(0.1, 3.0, size=n)
    theta = rng.uniform(-math.pi, math.pi, size=n)
    return d0, d, theta


def oracle_emission_logdens(model: CarHmmModel, d0: float, d, theta) -> np.ndarray:
    """(n, k) emission log densities via scipy.stats + the WC formula."""
    n = len(d)
    d_prev = np.concatenate(([d0], d[:-1]))
    out = np.empty((n, model.k))
    for b in range(model.k):
        if model.family == "gamma":
            mean = (1 - model.phi[b]) * model.mu_rl[b] + model.phi[b] * d_prev
            shape = (mean / model.sigma[b]) ** 2
            scale = model.sigma[b] ** 2 / mean
            step = stats.gamma.logpdf(d, a=shape, scale=scale)
        else:
            mean = (1 - model.phi[b]) * model.mu_rl[b] + model.phi[b] * np.log(d_prev)
            step = stats.norm.logpdf(np.log(d), loc=mean, scale=model.sigma[b]) - np.log(d)
        rho, c = model.rho[b], model.c[b]
        ang = np.log(
            (1 - rho**2) / (2 * math.pi * (1 + rho**2 - 2 * rho * np.cos(theta - c)))
        )
        out[:, b] = step + ang
    return out


def enumeration_loglik(model: CarHmmModel, d0: float, d, theta) -> float:
    """Exhaustive sum over all k^n state paths (log-sum-exp)."""
    logf = oracle_emission_logdens(model, d0, d, theta)
    n, k = logf.shape
    with np.errstate(divide="ignore"):
        log_delta = np.log(stationary(model.A))
        log_a = np.log(model.A)
    scores = []
    for path in itertools.product(range(k), repeat=n):
        s = log_delta[path[0]] + logf[0, path[0]]
        for t in range(1, n):
            s += log_a[path[t - 1], path[t]] + logf[t, path[t]]
        scores.append(s)
    return float(logsumexp(scores))


def _all_path_scores(model: CarHmmModel, d0: float, d, theta):
    """Log scores of every state path, in lexicographic path order."""
    logf = oracle_emission_logdens(model, d0, d, theta)
    n, k = logf.shape
    with np.errstate(divide="ignore"):
        log_delta = np.log(stationary(model.A))
        log_a = np.log(model.A)
    paths = np.array(list(itertools.product(range(k), repeat=n)), dtype=np.int64)
    scores = log_delta[paths[:, 0]] + logf[0, paths[:, 0]]
    for t in range(1, n):
        scores = scores + log_a[paths[:, t - 1], paths[:, t]] + logf[t, paths[:, t]]
    return paths, scores


def enumeration_loglik_fast(model: CarHmmModel, d0: float, d, theta) -> float:
    _, scores = _all_path_scores(model, d0, d, theta)
    return float(logsumexp(scores))


def enumeration_viterbi_fast(model: CarHmmModel, d0: float, d, theta) -> np.ndarray:
    paths, scores = _all_path_scores(model, d0, d, theta)
    return paths[int(np.argmax(scores))] + 1


def enumeration_viterbi(model: CarHmmModel, d0: float, d, theta) -> np.ndarray:
    """Brute-force most likely path, first (lexicographically smallest) argmax."""
    logf = oracle_emission_logdens(model, d0, d, theta)
    n, k = logf.shape
    with np.errstate(divide="ignore"):
        log_delta = np.log(stationary(model.A))
        log_a = np.log(model.A)
    best_path, best_score = None, -np.inf
    for path in itertools.product(range(k), repeat=n):
        s = log_delta[path[0]] + logf[0, path[0]]
        for t in range(1, n):
            s += log_a[path[t - 1], path[t]] + logf[t, path[t]]
        if s > best_score:
            best_path, best_score = path, s
    return np.array(best_path) + 1


def enumeration_filtered_predictive(model: CarHmmModel, d0: float, d, theta) -> np.ndarray:
    """P(B_t = b | observations before t) by path enumeration."""
    logf = oracle_emission_logdens(model, d0, d, theta)
    n, k = logf.shape
    delta = stationary(model.A)
    out = np.empty((n, k))
    out[0] = delta
    for t in range(1, n):
        # joint weight of (b_1..b_t) using only the first t-1 observations
        weights = np.zeros(k)
        for path in itertools.product(range(k), repeat=t + 1):
            w = delta[path[0]] * math.exp(logf[0, path[0]])
            for s in range(1, t):
                w *= model.A[path[s - 1], path[s]] * math.exp(logf[s, path[s]])
            w *= model.A[path[t - 1], path[t]]
            weights[path[t]] += w
        out[t] = weights / weights.sum()
    return out


def independent_hmm_loglik(mu, sigma, c, rho, A, d, theta) -> float:
    """Standard HMM log-likelihood, coded independently of the package.

    Log-space forward pass with logsumexp; emissions are state-stationary
    (no dependence on the previous step).
    """
    k = len(mu)
    n = len(d)
    logf = np.empty((n, k))
    for b in range(k):
        shape = (mu[b] / sigma[b]) ** 2
        scale = sigma[b] ** 2 / mu[b]
        step = stats.gamma.logpdf(d, a=shape, scale=scale)
        ang = np.log(
            (1 - rho[b] ** 2) / (2 * math.pi * (1 + rho[b] ** 2 - 2 * rho[b] * np.cos(theta - c[b])))
        )
        logf[:, b] = step + ang
    A = np.asarray(A, dtype=float)
    evals, evecs = np.linalg.eig(A.T)
    idx = int(np.argmin(np.abs(evals - 1.0)))
    delta = np.real(evecs[:, idx])
    delta = delta / delta.sum()
    with np.errstate(divide="ignore"):
        log_alpha = np.log(delta) + logf[0]
        log_a = np.log(A)
    for t in range(1, n):
        log_alpha = logsumexp(log_alpha[:, None] + log_a, axis=0) + logf[t]
    return float(logsumexp(log_alpha))


def mpmath_matrix_loglik(model: CarHmmModel, d0: float, d, theta, dps: int = 50) -> float:
    """Unscaled matrix-product likelihood in extended precision."""
    import mpmath as mp

    with mp.workdps(dps):
        k = model.k
        delta = stationary(model.A)
        logf = oracle_emission_logdens(model, d0, d, theta)
        vec = [mp.mpf(float(delta[b])) for b in range(k)]
        for t in range(len(d)):
            f = [mp.e ** mp.mpf(float(logf[t, b])) for b in range(k)]
            vec = [vec[b] * f[b] for b in range(k)]
            if t < len(d) - 1:
                vec = [
                    mp.fsum(vec[i] * mp.mpf(float(model.A[i, j])) for i in range(k))
                    for j in range(k)
                ]
        total = mp.fsum(vec)
        return float(mp.log(total))
