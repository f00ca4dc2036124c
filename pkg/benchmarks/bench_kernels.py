"""Compare the numba-compiled kernels with their pure-numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is called once
to trigger compilation, then timed over repeated calls; the two outputs are
also compared so a speedup never hides a disagreement.
"""

import sys
import time

import numpy as np

from slitfano import _kernels as K


def _cases():
    rng = np.random.default_rng(7)
    J = rng.standard_normal((2 * 4096 + 1, 48))
    w = rng.standard_normal(J.shape[0]) + 1j * rng.standard_normal(J.shape[0])
    return {
        "kummer_pair_sum": (2.83, 0.1, 1.0, 0.4, 1e-12, 1_000_000, 4),
        "green_offplane": (2.83, 0.1, 1.0, 0.13, 0.02, 1e-12, 1_000_000),
        "interior_tail": (2.83, 0.05, 0.1, -0.3, False, 1e-12, 1_000_000),
        "interior_coeffs": (2.83, 0.05, 2048, False),
        "weighted_gram": (w, J),
        "zeta_coeffs": (2.83, 0.1, 1.0, 4096),
    }


def _time(fn, args, repeat):
    fn(*args)
    t0 = time.perf_counter()
    for _ in range(repeat):
        out = fn(*args)
    return (time.perf_counter() - t0) / repeat, out


def _diff(a, b):
    a = np.asarray(a[0] if isinstance(a, tuple) else a)
    b = np.asarray(b[0] if isinstance(b, tuple) else b)
    return float(np.max(np.abs(a - b)))


def main(repeat=20):
    if not K.HAVE_NUMBA:
        print("numba not installed; only the numpy fallback is available")
        return 1
    print(f"{'kernel':<18}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'max |diff|':>14}")
    for name, args in _cases().items():
        tn, on = _time(K.NUMBA_IMPL[name], args, repeat)
        tp, op = _time(K.NUMPY_IMPL[name], args, repeat)
        print(f"{name:<18}{1e3 * tn:>12.3f}{1e3 * tp:>12.3f}{tp / tn:>10.2f}{_diff(on, op):>14.2e}")
    print(f"active backend: {K.backend()} (weighted_gram always uses BLAS)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
