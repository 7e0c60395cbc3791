"""State decoding: Viterbi paths and one-step-ahead filtered probabilities.

State labels in decoded paths are 1-based, matching the CSV interfaces.
Ties in the Viterbi maximization break toward the lower state index so
decoding is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericUnderflow
from .likelihood import emission_logdens_matrix, forward_from_logdens
from .markov import stationary
from .model import CarHmmModel
from .series import ObservationSeries, SeriesGroup


@dataclass
class StatePath:
    """Per-group most-likely state sequences, labels in 1..k."""

    paths: list[np.ndarray]

    def concatenated(self) -> np.ndarray:
        return np.concatenate(self.paths)


def _viterbi_group(model: CarHmmModel, group: SeriesGroup, delta: np.ndarray) -> np.ndarray:
    logf = emission_logdens_matrix(model, group)
    n, k = logf.shape
    with np.errstate(divide="ignore"):
        log_a = np.log(model.A)
        score = np.log(delta) + logf[0]
    back = np.zeros((n, k), dtype=np.int64)
    for t in range(1, n):
        cand = score[:, None] + log_a
        back[t] = np.argmax(cand, axis=0)
        score = cand[back[t], np.arange(k)] + logf[t]
    if not np.isfinite(score.max()):
        raise NumericUnderflow("all state paths have zero probability")
    path = np.empty(n, dtype=np.int64)
    path[-1] = int(np.argmax(score))
    for t in range(n - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path + 1


def viterbi(model: CarHmmModel, series: ObservationSeries) -> StatePath:
    """Most likely state sequence per group, in log space."""
    delta = stationary(model.A)
    return StatePath([_viterbi_group(model, g, delta) for g in series.groups])


def path_logscore(model: CarHmmModel, group: SeriesGroup, labels: np.ndarray) -> float:
    """Log of delta_{b1} f1(b1) prod a_{b(t-1)b(t)} f_t(b_t) for a given path."""
    logf = emission_logdens_matrix(model, group)
    delta = stationary(model.A)
    idx = np.asarray(labels, dtype=np.int64) - 1
    with np.errstate(divide="ignore"):
        score = np.log(delta[idx[0]]) + logf[0, idx[0]]
        for t in range(1, len(idx)):
            score += np.log(model.A[idx[t - 1], idx[t]]) + logf[t, idx[t]]
    return float(score)


def filtered_predictive(model: CarHmmModel, series: ObservationSeries) -> list[np.ndarray]:
    """P(B_t | observations before t) per group, shape (n, k).

    The first row is the stationary distribution; afterwards the scaled
    forward filter is pushed through the transition matrix.
    """
    delta = stationary(model.A)
    out = []
    for g in series.groups:
        logf = emission_logdens_matrix(model, g)
        _, alphas = forward_from_logdens(logf, model.A, delta)
        pred = np.empty_like(alphas)
        pred[0] = delta
        if len(alphas) > 1:
            prop = alphas[:-1] @ model.A
            pred[1:] = prop / prop.sum(axis=1, keepdims=True)
        out.append(pred)
    return out
