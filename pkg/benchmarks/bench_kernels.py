"""Time the numba and numpy kernel backends side by side.

    python3 benchmarks/bench_kernels.py              # kernels only
    python3 benchmarks/bench_kernels.py --pipeline   # plus one end-to-end run per backend

numba compile time is excluded: every kernel is called once before timing.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from sigverify import _kernels as K
from sigverify.classifier import SvmParams, kernel_matrix
from sigverify.transforms import make_db4


def cases():
    fb = make_db4()
    rng = np.random.default_rng(0)

    for n in (100, 1000):
        x = np.pad(rng.standard_normal(n), 7, mode="symmetric")
        m = (n + 7) // 2
        yield f"dwt analysis n={n}", lambda f, x=x, m=m: f(x, fb.lo_d, fb.hi_d, m), "analysis"
        a, d = rng.standard_normal(m), rng.standard_normal(m)
        yield f"dwt synthesis n={n}", lambda f, a=a, d=d, n=n: f(a, d, fb.lo_r, fb.hi_r, n), "synthesis"

    for dim in (20, 60):
        A = rng.standard_normal((dim, dim))
        A = A @ A.T
        yield f"jacobi d={dim}", lambda f, A=A: f(A, 1e-12, 100), "jacobi"

    for n in (20, 100):
        X = np.vstack([rng.normal(0.5, 1.0, (n // 2, 10)), rng.normal(-0.5, 1.0, (n // 2, 10))])
        y = np.r_[np.ones(n // 2), -np.ones(n // 2)]
        Km = np.ascontiguousarray(kernel_matrix(SvmParams(gamma=0.1), X, X))
        yield f"smo n={n}", lambda f, Km=Km, y=y: f(Km, y, 1.0, 1e-3, 100, 20000, 0), "smo"


def best_of(fn, repeat):
    fn()
    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


PIPELINE = """
import time
from sigverify.datasets import SynthParams, generate_synthetic
from sigverify.pipeline import PipelineConfig, evaluate_dataset
ds = generate_synthetic(SynthParams(seed=42, n_signers=10, n_genuine=20, n_forgery=20, distortion=0.3))
evaluate_dataset(ds, PipelineConfig())
t = time.perf_counter()
r, _ = evaluate_dataset(ds, PipelineConfig())
print(time.perf_counter() - t, r.mean_eer)
"""


def pipeline_time(disable):
    env = dict(os.environ, SIGVERIFY_DISABLE_NUMBA="1" if disable else "")
    out = subprocess.run([sys.executable, "-c", PIPELINE], env=env, capture_output=True, text=True, check=True)
    secs, eer = out.stdout.split()
    return float(secs), float(eer)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pipeline", action="store_true", help="also time a full synthetic evaluation per backend")
    args = ap.parse_args(argv)

    if not K.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    print(f"{'kernel':<24}{'numba (ms)':>12}{'numpy (ms)':>12}{'numpy/numba':>13}")
    for name, call, kernel in cases():
        t_jit = best_of(lambda: call(getattr(K, kernel + "_numba")), args.repeat)
        t_np = best_of(lambda: call(getattr(K, kernel + "_numpy")), args.repeat)
        print(f"{name:<24}{t_jit * 1e3:>12.4f}{t_np * 1e3:>12.4f}{t_np / t_jit:>12.1f}x")

    if args.pipeline:
        print()
        for label, disable in (("numba", False), ("numpy", True)):
            secs, eer = pipeline_time(disable)
            print(f"pipeline [{label}]: {secs:.2f}s for 10 signers, mean EER {eer:.2f}%")


if __name__ == "__main__":
    main()
