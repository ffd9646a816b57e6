"""Compare the compiled core against the numpy fallback.

Usage::

    python3 benchmarks/bench_core.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from fracdyn import _pycore

try:
    from fracdyn import _core
except ImportError:  # pragma: no cover
    _core = None

PARAMS = (0.6, 0.05, 0.0, 1.0)


def cases(rng):
    s = np.linspace(0.0, 1.0, 2**16 + 1)[:-1]
    small = np.linspace(0.0, 1.0, 2049)
    incr = rng.normal(size=2048) * np.sqrt(1 / 2048)
    n = 100_000
    h = rng.normal(size=n)
    dW = rng.normal(size=n) * 0.003
    dL = np.full(n, 1e-4)
    return {
        "kernel_weights (N=65536)": lambda m: m.kernel_weights(1, PARAMS, 0.2, 1.0, s, 1e-8, False),
        "h_values (N=65536)": lambda m: m.h_values(1, PARAMS, 0.2, 1.0, s, 1e-8, False, False),
        "fractional_sums (N=2048)": lambda m: m.fractional_sums(1, PARAMS, 0.2, small, incr, 1e-8, False),
        "pendulum_euler (N=100000)": lambda m: m.pendulum_euler(1.0, 0.0, 1e-5, h, 0.1, 0.3, dW, dL, False),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _core is None:
        print("compiled core is not built; only the fallback can be timed")
    backends = [("python", _pycore)] + ([("cython", _core)] if _core is not None else [])
    print(f"{'case':<28}" + "".join(f"{name:>14}" for name, _ in backends) + f"{'speedup':>10}")
    for label, fn in cases(np.random.default_rng(0)).items():
        times = [min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for _, m in backends]
        speed = f"{times[0] / times[1]:>9.1f}x" if len(times) == 2 else ""
        print(f"{label:<28}" + "".join(f"{t * 1e3:>12.2f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
