"""Compare the compiled elimination kernels with the numpy fallback.

Kernel timings call both backends directly on the same random matrices.
The end-to-end timing runs one entropy computation in two subprocesses,
with and without ``QENT_PURE_PYTHON=1``.

    python3 benchmarks/bench_kernels.py [--sizes 50 100 200] [--repeat 3]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from qent import _kernels_py, kernels

P = 1000003
END_TO_END = (
    "from qent import complexes as cx, entropy as en, functors as fn\n"
    "from qent.algebra import kronecker\n"
    "alg = kronecker()\n"
    "en.entropy_curve(fn.Serre(), cx.free_module(alg), [0.0, 0.5], n_max=25)\n"
)


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_kernels(sizes, repeat: int) -> list[tuple[str, int, float, float]]:
    from qent import _kernels

    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        # rank-deficient input so elimination does real pivot searching
        a = (rng.integers(0, P, size=(n, n // 2)) @ rng.integers(0, 7, size=(n // 2, n))) % P
        b = rng.integers(0, P, size=(n, n))
        for name, call in (
            ("rref", lambda m, mod: m.rref_modp(a, P)),
            ("rank", lambda m, mod: m.rank_modp(a, P)),
            ("matmul", lambda m, mod: m.matmul_modp(a, b, P)),
        ):
            tc = best_of(lambda: call(_kernels, P), repeat)
            tp = best_of(lambda: call(_kernels_py, P), repeat)
            rows.append((name, n, tc, tp))
    return rows


def bench_end_to_end() -> tuple[float, float]:
    out = []
    for pure in ("0", "1"):
        env = {**os.environ, "QENT_PURE_PYTHON": pure}
        start = time.perf_counter()
        subprocess.run([sys.executable, "-c", END_TO_END], env=env, check=True)
        out.append(time.perf_counter() - start)
    return out[0], out[1]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args(argv)
    if not kernels.compiled_available():
        print("compiled extension not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    print(f"{'kernel':<8}{'n':>6}{'cython [s]':>14}{'python [s]':>14}{'speedup':>10}")
    for name, n, tc, tp in bench_kernels(args.sizes, args.repeat):
        print(f"{name:<8}{n:>6}{tc:>14.5f}{tp:>14.5f}{tp / tc:>10.1f}")
    if not args.skip_end_to_end:
        tc, tp = bench_end_to_end()
        print(f"\nend to end (Kronecker nu, N=25, 4 channels x 2 t): cython {tc:.2f}s, python {tp:.2f}s, speedup {tp / tc:.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
