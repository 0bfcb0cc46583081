"""Throughput of the three execution paths on one workload.

Compares the njit-compiled kernel, the identical kernel interpreted
(EHCSIM_NUMBA=0, measured in a subprocess since the flag is read at import),
and the reference engine. Run: python3 benchmarks/bench_backends.py
"""

import json
import os
import subprocess
import sys
import time

from ehcsim import CacheGeometry, GeneratorSpec, gen_synthetic
from ehcsim.runner import run_policy

GEOM = CacheGeometry(256, 8)
POLICIES = ("lru", "drrip", "ehc")
KERNEL_LEN = 2_000_000
SLOW_LEN = 100_000


def make(length):
    return gen_synthetic(GeneratorSpec("mixed", block_count=8192,
                                       length=length, seed=42))


def best_of(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


_CHILD = """
import json, sys, time
from ehcsim import CacheGeometry, GeneratorSpec, gen_synthetic
from ehcsim import _kernels
from ehcsim.runner import run_policy

assert not _kernels.JIT_ENABLED
length = int(sys.argv[1])
trace = gen_synthetic(GeneratorSpec("mixed", block_count=8192, length=length, seed=42))
out = {}
for name in %r:
    t0 = time.perf_counter()
    run_policy(trace, name, CacheGeometry(256, 8), backend="kernel")
    out[name] = time.perf_counter() - t0
json.dump(out, sys.stdout)
""" % (POLICIES,)


def main():
    rows = []

    trace = make(KERNEL_LEN)
    for name in POLICIES:
        run_policy(trace, name, GEOM, backend="kernel")  # JIT warmup
        secs = best_of(lambda: run_policy(trace, name, GEOM, backend="kernel"))
        rows.append((name, "kernel (njit)", KERNEL_LEN, secs))

    proc = subprocess.run(
        [sys.executable, "-c", _CHILD, str(SLOW_LEN)],
        env=dict(os.environ, EHCSIM_NUMBA="0"),
        capture_output=True, text=True, check=True,
    )
    for name, secs in json.loads(proc.stdout).items():
        rows.append((name, "kernel (interpreted)", SLOW_LEN, secs))

    trace = make(SLOW_LEN)
    for name in POLICIES:
        secs = best_of(
            lambda: run_policy(trace, name, GEOM, backend="reference"), repeat=1
        )
        rows.append((name, "reference engine", SLOW_LEN, secs))

    print(f"{'policy':<8} {'backend':<22} {'accesses':>10} {'seconds':>9} {'acc/s':>12}")
    for name, backend, n, secs in rows:
        print(f"{name:<8} {backend:<22} {n:>10,} {secs:>9.3f} {n / secs:>12,.0f}")


if __name__ == "__main__":
    main()
