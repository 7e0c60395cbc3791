"""Conditionally autoregressive hidden Markov models for movement data.

Track preprocessing, maximum-likelihood fitting, behavioural-state
decoding, residual diagnostics, parameter interpretation, and a seeded
simulation-study harness, exposed both as a library and through the
``carhmm`` command-line tool.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .fit import FitConfig, FitResult, degeneracy_check, fit_multistart, fit_once, order_states
from .likelihood import emission_logdensity, group_loglik, total_loglik
from .markov import interpret, residency_steps, stationary, unstandardize_reversion
from .model import GAMMA, LOGNORMAL, CarHmmModel
from .preprocess import GridSpec, choose_grid, derive_series, grid_metrics, preprocess_track, split_groups
from .decode import filtered_predictive, viterbi
from .series import ObservationSeries, SeriesGroup
from .simulate import Scenario, reconstruct_planar, run_study, simulate_series, state_error
from .track_io import RawTrack, parse_track_csv, read_params, write_params

__version__ = "0.1.0"

__all__ = [
    "CarHmmModel",
    "FitConfig",
    "FitResult",
    "GAMMA",
    "LOGNORMAL",
    "GridSpec",
    "KERNEL_BACKEND",
    "ObservationSeries",
    "RawTrack",
    "Scenario",
    "SeriesGroup",
    "choose_grid",
    "degeneracy_check",
    "derive_series",
    "emission_logdensity",
    "filtered_predictive",
    "fit_multistart",
    "fit_once",
    "grid_metrics",
    "group_loglik",
    "interpret",
    "order_states",
    "parse_track_csv",
    "preprocess_track",
    "read_params",
    "reconstruct_planar",
    "residency_steps",
    "run_study",
    "simulate_series",
    "split_groups",
    "state_error",
    "stationary",
    "total_loglik",
    "unstandardize_reversion",
    "viterbi",
    "write_params",
    "__version__",
]
