"""Kernel backend selection.

The scaled forward recursion and its gradient dominate fitting time, so
they live in a compiled Cython extension with a pure-NumPy fallback that
implements the identical contract.  The compiled backend is used when the
extension built; set CARHMM_KERNEL=python or CARHMM_KERNEL=compiled to
force a choice (the latter raises if the extension is missing).

Both backends expose:

    loglik(family, mu, phi, sigma, c, rho, A, delta,
           d0s, d, theta, offsets) -> float
    loglik_grad(...) -> (loglik, demis (k,5), dA (k,k), gamma1_sum (k,))

where the observation arrays are the concatenated groups and offsets is
the (n_groups + 1) int64 prefix of group boundaries.  demis columns are
the accumulated posterior-weighted partials with respect to
(mu_rl, phi, sigma, c, rho); dA is the direct transition gradient and
gamma1_sum the summed first-pair state posteriors, both of which the
caller combines with the stationary-distribution term.
"""

import os

from . import _numpy

GAMMA_CODE = 0
LOGNORMAL_CODE = 1

_choice = os.environ.get("CARHMM_KERNEL", "").lower()

if _choice == "python":
    _impl = _numpy
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _choice == "compiled":
            raise
        _impl = _numpy

BACKEND = "compiled" if _impl is not _numpy else "python"

loglik = _impl.loglik
loglik_grad = _impl.loglik_grad


def get_backend(name: str):
    """Fetch a specific backend module (for tests and benchmarks)."""
    if name == "python":
        return _numpy
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _core  # noqa: F401

        names.append("compiled")
    except ImportError:
        pass
    return names
