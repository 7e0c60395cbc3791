"""Model container: per-state emission parameters plus the transition matrix.

A k-state model has, per state, a step reversion level mu_rl, a step
autocorrelation phi, a step standard deviation sigma (sd of the log step
for the log-normal family), an angle center c, and an angle concentration
rho, together with a k x k row-stochastic transition matrix.  That is
k^2 + 4k parameters when everything is free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModel

GAMMA = "gamma"
LOGNORMAL = "lognormal"

ROW_SUM_TOL = 1e-9


def validate_transition_matrix(a: np.ndarray) -> None:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidModel(f"transition matrix must be square, got shape {a.shape}")
    if np.any(a < 0.0):
        raise InvalidModel("transition matrix entries must be nonnegative")
    bad = np.abs(a.sum(axis=1) - 1.0) > ROW_SUM_TOL
    if np.any(bad):
        rows = np.nonzero(bad)[0].tolist()
        raise InvalidModel(f"transition matrix rows {rows} do not sum to 1")


def strictly_positive(a: np.ndarray) -> bool:
    """Consistency condition for ML estimation: every entry above zero."""
    return bool(np.all(np.asarray(a) > 0.0))


@dataclass
class CarHmmModel:
    k: int
    family: str
    mu_rl: np.ndarray
    phi: np.ndarray
    sigma: np.ndarray
    c: np.ndarray
    rho: np.ndarray
    A: np.ndarray
    # free-parameter mask support: phi may be pinned to zero (plain HMM)
    phi_fixed_zero: bool = field(default=False)

    def __post_init__(self):
        if self.k < 1:
            raise InvalidModel(f"state count must be >= 1, got {self.k}")
        if self.family not in (GAMMA, LOGNORMAL):
            raise InvalidModel(f"unknown emission family {self.family!r}")
        for name in ("mu_rl", "phi", "sigma", "c", "rho"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.k,):
                raise InvalidModel(f"{name} must have length k={self.k}, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise InvalidModel(f"{name} contains non-finite values")
            setattr(self, name, arr)
        if self.family == GAMMA:
            if np.any(self.mu_rl <= 0.0):
                raise InvalidModel("gamma family requires mu_rl > 0")
            if np.any((self.phi < 0.0) | (self.phi >= 1.0)):
                raise InvalidModel("gamma family requires 0 <= phi < 1")
        if np.any(self.sigma <= 0.0):
            raise InvalidModel("sigma must be positive")
        if np.any((self.rho <= 0.0) | (self.rho >= 1.0)):
            raise InvalidModel("rho must lie in (0, 1)")
        if np.any(np.abs(self.c) > math.pi):
            raise InvalidModel("c must lie in [-pi, pi]")
        self.A = np.asarray(self.A, dtype=float)
        if self.A.shape != (self.k, self.k):
            raise InvalidModel(f"A must be {self.k}x{self.k}, got {self.A.shape}")
        validate_transition_matrix(self.A)

    @property
    def n_params(self) -> int:
        """Number of free parameters."""
        per_state = 4 if self.phi_fixed_zero else 5
        return self.k * per_state + self.k * (self.k - 1)

    def permuted(self, order: np.ndarray) -> "CarHmmModel":
        """Relabel states so new state i is old state order[i]."""
        order = np.asarray(order)
        return CarHmmModel(
            k=self.k,
            family=self.family,
            mu_rl=self.mu_rl[order].copy(),
            phi=self.phi[order].copy(),
            sigma=self.sigma[order].copy(),
            c=self.c[order].copy(),
            rho=self.rho[order].copy(),
            A=self.A[np.ix_(order, order)].copy(),
            phi_fixed_zero=self.phi_fixed_zero,
        )

    def close_to(self, other: "CarHmmModel", tol: float = 0.0) -> bool:
        if self.k != other.k or self.family != other.family:
            return False
        for name in ("mu_rl", "phi", "sigma", "c", "rho", "A"):
            if not np.allclose(getattr(self, name), getattr(other, name), rtol=0, atol=tol):
                return False
        return True
