"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--steps 20000] [--repeat 3]

Times one RK4 simulation of the bistable loop and one winding-number sum
over a 10^5-vertex polygon with each backend, checks that both give the
same numbers and prints the speed-up.
"""

import argparse
import time

import numpy as np

from domargin import _purepy, bistable_msd

try:
    from domargin import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument('--steps', type=int, default=20_000)
    parser.add_argument('--vertices', type=int, default=100_000)
    parser.add_argument('--repeat', type=int, default=3)
    args = parser.parse_args()
    if _kernels is None:
        raise SystemExit("compiled extension not built; run "
                         "'pip install -e . --no-build-isolation' first")

    sys_ = bistable_msd()
    S, nl = sys_.linear, sys_.nonlinearity
    rk_args = (np.ascontiguousarray(S.A), np.ascontiguousarray(S.B[:, 0]),
               np.ascontiguousarray(S.C[0]), nl.code, nl.gain, nl.limit,
               np.array([0.1, 0.0]), 1e-3, args.steps, 1e6)
    t = np.linspace(0, 2 * np.pi, args.vertices, endpoint=False)
    re, im = np.cos(t) * (1 + 0.2 * np.cos(5 * t)), np.sin(t)

    rows = []
    for name, cy, py in (
            (f"rk4_lure ({args.steps} steps)",
             lambda: _kernels.rk4_lure(*rk_args),
             lambda: _purepy.rk4_lure(*rk_args)),
            (f"polygon_winding ({args.vertices} vertices)",
             lambda: _kernels.polygon_winding(re, im, 0.1, 0.05),
             lambda: _purepy.polygon_winding(re, im, 0.1, 0.05))):
        t_cy, out_cy = best_of(cy, args.repeat)
        t_py, out_py = best_of(py, args.repeat)
        a, b = np.asarray(out_cy[0]), np.asarray(out_py[0])
        diff = float(np.max(np.abs(a - b)))
        rows.append((name, t_cy, t_py, diff))

    print(f"{'kernel':<36}{'cython [s]':>12}{'python [s]':>12}"
          f"{'speed-up':>10}{'max diff':>11}")
    for name, t_cy, t_py, diff in rows:
        print(f"{name:<36}{t_cy:>12.4f}{t_py:>12.4f}{t_py / t_cy:>10.1f}"
              f"{diff:>11.1e}")


if __name__ == '__main__':
    main()
