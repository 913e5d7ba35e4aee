"""Benchmark the jitted kernels against the pure-numpy fallback path.

The kernel module picks its implementation at import time from the
``DIMER_OTOC_NO_NUMBA`` environment variable, so this script re-executes
itself in a subprocess for each path and prints a comparison table.

Usage: python benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time

import numpy as np

BENCHES = ("integrate_tangent", "twa_moments", "chebyshev_apply")


def run_benchmarks():
    from dimer_otoc import _kernels

    cos_t, sin_t = np.cos(1.35), np.sin(1.35)
    results = {}

    # Warm-up triggers jit compilation so it is not timed.
    t_eval = np.linspace(0.0, 6.0, 50)
    _kernels.integrate_tangent(cos_t, sin_t, 1e-3, -1e-3, t_eval, 1e-10)
    start = time.perf_counter()
    for k in range(50):
        _kernels.integrate_tangent(cos_t, sin_t, 1e-3 * (k + 1) / 50, -1e-3,
                                   t_eval, 1e-10)
    results["integrate_tangent"] = (time.perf_counter() - start) / 50

    rng = np.random.default_rng(0)
    z0 = rng.normal(0.0, 0.03, size=200)
    phi0 = rng.normal(0.0, 0.03, size=200)
    _kernels.twa_moments(cos_t, sin_t, z0[:2], phi0[:2], 500.0, t_eval, 1e-8)
    start = time.perf_counter()
    _kernels.twa_moments(cos_t, sin_t, z0, phi0, 500.0, t_eval, 1e-8)
    results["twa_moments"] = time.perf_counter() - start

    dim = 2001
    diag = rng.uniform(-0.5, 0.5, size=dim)
    off = rng.uniform(-0.1, 0.1, size=dim - 1)
    coeffs = (rng.normal(size=400) + 1j * rng.normal(size=400)) / 400
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    _kernels.chebyshev_apply(diag, off, coeffs[:3], psi)
    start = time.perf_counter()
    for _ in range(5):
        _kernels.chebyshev_apply(diag, off, coeffs, psi)
    results["chebyshev_apply"] = (time.perf_counter() - start) / 5

    results["jitted"] = _kernels.USE_NUMBA
    return results


def main():
    rows = {}
    for flag in ("0", "1"):
        env = dict(os.environ, DIMER_OTOC_NO_NUMBA=flag)
        out = subprocess.run([sys.executable, __file__, "--worker"],
                             env=env, capture_output=True, text=True,
                             check=True)
        rows[flag] = json.loads(out.stdout)

    numba_used = rows["0"]["jitted"]
    left = "numba" if numba_used else "numpy (numba unavailable)"
    print(f"{'kernel':<20} {left:>12} {'numpy':>12} {'speedup':>9}")
    for name in BENCHES:
        a, b = rows["0"][name], rows["1"][name]
        print(f"{name:<20} {a * 1e3:>10.2f}ms {b * 1e3:>10.2f}ms {b / a:>8.1f}x")


if __name__ == "__main__":
    if "--worker" in sys.argv:
        print(json.dumps(run_benchmarks()))
    else:
        main()
