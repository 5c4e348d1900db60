"""Compare the compiled jet-activation kernels against the numpy fallback.

Runs both backends on identical bundles, checks agreement, and reports
per-call timings plus a whole-training-epoch comparison.

Usage: python benchmarks/bench_kernels.py [--reps 200]
"""

from __future__ import annotations

import argparse
import importlib
import os
import statistics
import subprocess
import sys
import time

import numpy as np


def time_fn(fn, reps):
    fn()  # warm up
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e6)
    return statistics.median(times)


def bench_kernels(reps):
    from alpinn import _kernels, _kernels_py
    from alpinn.kernels import BACKEND

    if BACKEND != "compiled":
        print("compiled backend unavailable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    print(f"{'kernel':<14} {'shape':<14} {'compiled us':>12} {'numpy us':>10} {'speedup':>8}")
    for d, n in ((2, 400), (2, 2500), (3, 1000)):
        x = rng.normal(size=(1 + 2 * d, 64 * n)).reshape(1 + 2 * d, -1)
        x = np.ascontiguousarray(x)
        for name in ("tanh_jet", "sin_jet"):
            fwd_c = getattr(_kernels, f"{name}_fwd")
            fwd_p = getattr(_kernels_py, f"{name}_fwd")
            y = fwd_c(x, d)
            assert np.allclose(y, fwd_p(x, d), atol=1e-14), name
            bar = rng.normal(size=x.shape)
            bwd_c = getattr(_kernels, f"{name}_bwd")
            bwd_p = getattr(_kernels_py, f"{name}_bwd")
            assert np.allclose(bwd_c(x, y, bar, d), bwd_p(x, y, bar, d), atol=1e-13), name
            tc = time_fn(lambda: fwd_c(x, d), reps)
            tp = time_fn(lambda: fwd_p(x, d), reps)
            print(f"{name + '_fwd':<14} {str(x.shape):<14} {tc:>12.1f} {tp:>10.1f} {tp / tc:>7.2f}x")
            tc = time_fn(lambda: bwd_c(x, y, bar, d), reps)
            tp = time_fn(lambda: bwd_p(x, y, bar, d), reps)
            print(f"{name + '_bwd':<14} {str(x.shape):<14} {tc:>12.1f} {tp:>10.1f} {tp / tc:>7.2f}x")


EPOCH_SNIPPET = r"""
import time
import numpy as np
from alpinn import problems as P, balancers as bal
from alpinn.kernels import BACKEND
from alpinn.network import Architecture
from alpinn.optim import TrainOptions, train

problem = P.helmholtz()
arch = Architecture.from_tag("M2", 2)
grid = P.GridSpec(n_r=625, n_b=200)
sp = P.sample(problem, grid)
sizes = [g[0].shape[1] for g in sp.groups]
state = bal.make_state("augmented_lagrangian", sizes, n_residual=625,
                       beta=500.0, eta_lambda=1.0)
rec = train(problem, arch, state, grid,
            TrainOptions(epochs=30, lr=1e-4, seed=0, eval_n=25, eval_every=30))
ms = sorted(rec.epoch_ms[5:])
print(f"{BACKEND}: median epoch {ms[len(ms) // 2]:.2f} ms")
"""


def bench_epoch():
    print("\nfull epoch (Helmholtz M2, 625 interior points, AL strategy):")
    for pure in ("0", "1"):
        env = dict(os.environ, ALPINN_PURE_PYTHON=pure)
        out = subprocess.run(
            [sys.executable, "-c", EPOCH_SNIPPET], env=env, capture_output=True, text=True
        )
        print(out.stdout.strip() or out.stderr.strip())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--no-epoch", action="store_true", help="skip the end-to-end run")
    args = ap.parse_args()
    bench_kernels(args.reps)
    if not args.no_epoch:
        bench_epoch()


if __name__ == "__main__":
    main()
