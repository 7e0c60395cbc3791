"""Benchmark the compiled kernel against the pure-NumPy fallback.

Times the likelihood and likelihood+gradient evaluations that dominate
fitting, plus one complete multistart fit per backend.

Usage: python benchmarks/bench_kernels.py [n_pairs] [k]
"""

import sys
import time

import numpy as np

from carhmm._kernels import available_backends, get_backend
from carhmm.fit import FitConfig, fit_multistart
from carhmm.likelihood import PackedSeries
from carhmm.markov import stationary
from carhmm.model import CarHmmModel
from carhmm.simulate import simulate_series


def _model(k: int) -> CarHmmModel:
    rng = np.random.default_rng(0)
    a = rng.uniform(0.2, 1.0, size=(k, k)) + 2.0 * np.eye(k)
    a /= a.sum(axis=1, keepdims=True)
    return CarHmmModel(
        k=k,
        family="gamma",
        mu_rl=np.linspace(0.4, 2.2, k),
        phi=np.linspace(0.2, 0.9, k),
        sigma=np.full(k, 0.3),
        c=np.zeros(k),
        rho=np.linspace(0.3, 0.9, k),
        A=a,
    )


def _time(fn, min_seconds=0.5):
    fn()  # warm up
    n, t0 = 0, time.perf_counter()
    while time.perf_counter() - t0 < min_seconds:
        fn()
        n += 1
    return (time.perf_counter() - t0) / n


def main() -> None:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
    k = int(sys.argv[2]) if len(sys.argv) > 2 else 3
    model = _model(k)
    sim = simulate_series(model, n, seed=1)
    series = sim.to_series()
    packed = PackedSeries.from_series(series)
    delta = stationary(model.A)
    args = packed.kernel_args(model, delta)

    backends = available_backends()
    print(f"k={k}, n={n} observation pairs; backends: {', '.join(backends)}\n")
    rows = []
    for name in backends:
        impl = get_backend(name)
        t_ll = _time(lambda: impl.loglik(*args))
        t_gr = _time(lambda: impl.loglik_grad(*args))
        rows.append((name, t_ll, t_gr))
    base = rows[0]
    print(f"{'backend':<10} {'loglik':>12} {'loglik+grad':>12} {'speedup':>9}")
    for name, t_ll, t_gr in rows:
        speed = base[2] / t_gr if name != base[0] else 1.0
        print(f"{name:<10} {t_ll * 1e3:>10.3f}ms {t_gr * 1e3:>10.3f}ms {speed:>8.1f}x")

    print("\nfull multistart fit (seed 5):")
    import carhmm._kernels as kernels

    saved = (kernels.loglik, kernels.loglik_grad)
    try:
        for name in backends:
            impl = get_backend(name)
            kernels.loglik, kernels.loglik_grad = impl.loglik, impl.loglik_grad
            t0 = time.perf_counter()
            res = fit_multistart(series, k, "gamma", FitConfig(seed=5))
            dt = time.perf_counter() - t0
            print(f"{name:<10} {dt:>10.2f}s   loglik {res.loglik:.3f}  restarts {res.restarts_used}")
    finally:
        kernels.loglik, kernels.loglik_grad = saved


if __name__ == "__main__":
    main()
