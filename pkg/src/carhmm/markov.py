"""Transition-matrix utilities and the biological interpretation layer.

The stationary distribution of the state chain is the activity budget: its
i-th entry is the long-run fraction of time spent in state i.  Expected
residency in state i is geometric, 1 / (1 - a_ii) time steps, convertible
to real time through the grid step.  Reversion levels un-standardize back
to kilometres via the stored mean step length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AbsorbingState, ReducibleChain
from .model import CarHmmModel, strictly_positive, validate_transition_matrix


def _irreducible(a: np.ndarray) -> bool:
    """Reachability check: every state reaches every other along positive entries."""
    k = a.shape[0]
    reach = a > 0.0
    closure = reach | np.eye(k, dtype=bool)
    for _ in range(k):
        closure = closure | (closure @ closure)
    return bool(closure.all())


def stationary(a: np.ndarray) -> np.ndarray:
    """Solve delta A = delta with sum(delta) = 1 by direct linear solve."""
    a = np.asarray(a, dtype=float)
    validate_transition_matrix(a)
    if not _irreducible(a):
        raise ReducibleChain("transition matrix is not irreducible")
    k = a.shape[0]
    # Augmented system: (A^T - I) delta = 0 with one row replaced by sum-to-one.
    m = a.T - np.eye(k)
    m[-1, :] = 1.0
    rhs = np.zeros(k)
    rhs[-1] = 1.0
    delta = np.linalg.solve(m, rhs)
    delta = np.clip(delta, 0.0, None)
    return delta / delta.sum()


def residency_steps(a: np.ndarray) -> np.ndarray:
    """Expected consecutive steps spent in each state, 1 / (1 - a_ii)."""
    a = np.asarray(a, dtype=float)
    diag = np.diag(a)
    if np.any(diag >= 1.0):
        raise AbsorbingState("a diagonal entry of 1 gives infinite residency")
    return 1.0 / (1.0 - diag)


def format_duration(minutes: float) -> str:
    """Render a duration like '3 hr 50 min' from real-valued minutes."""
    total = int(round(minutes))
    hours, mins = divmod(total, 60)
    if hours == 0:
        return f"{mins} min"
    return f"{hours} hr {mins} min"


def unstandardize_reversion(mu_rl: float, mean_step_km: float, time_step_min: float):
    """Convert a standardized reversion level to km per step and km per hour."""
    if mean_step_km <= 0.0 or time_step_min <= 0.0:
        raise ValueError("mean step and time step must be positive")
    km_per_step = mu_rl * mean_step_km
    km_per_hr = km_per_step * 60.0 / time_step_min
    return km_per_step, km_per_hr


@dataclass
class Interpretation:
    delta: np.ndarray
    residency_steps: np.ndarray
    residency_minutes: np.ndarray | None
    residency_human: list[str] | None
    reversion_km_per_step: np.ndarray | None
    reversion_km_per_hr: np.ndarray | None
    strictly_positive_A: bool

    def to_dict(self) -> dict:
        out = {
            "activity_budget": self.delta.tolist(),
            "residency_steps": self.residency_steps.tolist(),
            "strictly_positive_A": self.strictly_positive_A,
        }
        if self.residency_minutes is not None:
            out["residency_minutes"] = self.residency_minutes.tolist()
            out["residency_human"] = self.residency_human
        if self.reversion_km_per_step is not None:
            out["reversion_km_per_step"] = self.reversion_km_per_step.tolist()
            out["reversion_km_per_hr"] = self.reversion_km_per_hr.tolist()
        return out


def interpret(
    model: CarHmmModel,
    time_step_min: float | None = None,
    mean_step_km: float | None = None,
) -> Interpretation:
    """Derive activity budget, residency, and reversion levels from a model.

    Rounded transition matrices may contain exact zeros; they are accepted
    here but flagged against the strict-positivity consistency condition.
    """
    delta = stationary(model.A)
    steps = residency_steps(model.A)
    minutes = human = None
    if time_step_min is not None:
        minutes = steps * time_step_min
        human = [format_duration(m) for m in minutes]
    per_step = per_hr = None
    if mean_step_km is not None and time_step_min is not None:
        pairs = [unstandardize_reversion(m, mean_step_km, time_step_min) for m in model.mu_rl]
        per_step = np.array([p[0] for p in pairs])
        per_hr = np.array([p[1] for p in pairs])
    return Interpretation(
        delta=delta,
        residency_steps=steps,
        residency_minutes=minutes,
        residency_human=human,
        reversion_km_per_step=per_step,
        reversion_km_per_hr=per_hr,
        strictly_positive_A=strictly_positive(model.A),
    )
