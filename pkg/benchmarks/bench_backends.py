"""Benchmark the compiled reconstruction kernels against the NumPy fallback.

Run from the repository root:

    python3 benchmarks/bench_backends.py
"""

import time

import numpy as np

from ionbell import _kernels_py
from ionbell.states import werner_state
from ionbell.tomo import all_settings, measurement_effects, outcome_probabilities

try:
    from ionbell import _kernels_cy
except ImportError:
    _kernels_cy = None


def make_frequency_sets(count: int, shots: int = 10_000, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    state = werner_state(0.85, 0.4)
    rows = np.array([outcome_probabilities(state, s) for s in all_settings()])
    sets = np.empty((count, 36))
    for b in range(count):
        counts = np.array([rng.multinomial(shots, row) for row in rows], dtype=float)
        sets[b] = counts.flatten() / counts.sum()
    return sets


def time_call(fn, *args, repeat: int = 3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> None:
    effects = measurement_effects()
    rho0 = np.eye(4, dtype=complex) / 4
    single = make_frequency_sets(1)[0]
    batch = make_frequency_sets(200)

    backends = [("python", _kernels_py)]
    if _kernels_cy is not None:
        backends.append(("cython", _kernels_cy))
    else:
        print("compiled backend not built; showing the fallback only")

    print(f"{'kernel':<28}{'backend':<10}{'best time':>12}")
    timings = {}
    for label, mod in backends:
        t_single, (rho, iters, *_ ) = time_call(mod.mle_fixed_point, effects, single, rho0)
        print(f"{'mle_fixed_point':<28}{label:<10}{t_single * 1e3:>10.2f} ms   ({iters} iterations)")
        timings[("single", label)] = t_single
        t_batch, _ = time_call(mod.mle_fixed_point_batch, effects, batch, rho0, 1e-10, 10_000)
        print(f"{'mle_fixed_point_batch[200]':<28}{label:<10}{t_batch * 1e3:>10.2f} ms")
        timings[("batch", label)] = t_batch

    if _kernels_cy is not None:
        for kind in ("single", "batch"):
            speedup = timings[(kind, "python")] / timings[(kind, "cython")]
            print(f"speedup ({kind}): {speedup:.1f}x")


if __name__ == "__main__":
    main()
