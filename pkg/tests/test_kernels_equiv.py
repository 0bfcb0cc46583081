"""The fused kernels must reproduce the reference engine bit for bit."""

import json
import os
import subprocess
import sys

import pytest

from ehcsim import CacheGeometry, GeneratorSpec, gen_synthetic, simulate
from ehcsim import _kernels
from ehcsim.runner import POLICY_NAMES, make_policy, run_policy

from conftest import make_trace, random_trace

TRACES = {
    "zipf": GeneratorSpec("zipf", block_count=400, length=2500, seed=3),
    "region": GeneratorSpec("region", block_count=1024, length=2500, seed=4),
    "mixed": GeneratorSpec("mixed", block_count=512, length=2500, seed=2),
}


def _assert_same_run(trace, name, geom, **kw):
    k_stats, _, k_flags = run_policy(
        trace, name, geom, backend="kernel", record_hits=True, **kw
    )
    policy = make_policy(name, geom, seed=kw.get("seed", 42),
                         ehc_fixed_init=kw.get("ehc_fixed_init"),
                         aging=kw.get("aging", True))
    r_stats, _, r_flags = simulate(trace, policy, geom, record_hits=True, check=True)
    assert k_stats == r_stats
    assert k_flags.tolist() == r_flags.tolist()


@pytest.mark.parametrize("policy", POLICY_NAMES)
@pytest.mark.parametrize("workload", sorted(TRACES))
def test_kernel_matches_reference(policy, workload):
    trace = gen_synthetic(TRACES[workload])
    _assert_same_run(trace, policy, CacheGeometry(64, 4))


@pytest.mark.parametrize("policy", ["drrip", "ship", "ehc"])
def test_kernel_matches_reference_wide(policy):
    trace = gen_synthetic(TRACES["mixed"])
    _assert_same_run(trace, policy, CacheGeometry(256, 8))


def test_kernel_random_traces(rng):
    geom = CacheGeometry(4, 2)
    for _ in range(10):
        trace = random_trace(rng, length=int(rng.integers(50, 300)),
                             num_blocks=int(rng.integers(2, 30)))
        for policy in POLICY_NAMES:
            _assert_same_run(trace, policy, geom)


def test_kernel_honors_ehc_options():
    trace = gen_synthetic(TRACES["region"])
    geom = CacheGeometry(64, 4)
    _assert_same_run(trace, "ehc", geom, ehc_fixed_init=3)
    _assert_same_run(trace, "ehc", geom, aging=False)
    _assert_same_run(trace, "hawkeye", geom, aging=False)


def test_kernel_seed_changes_brrip():
    trace = gen_synthetic(TRACES["zipf"])
    geom = CacheGeometry(64, 4)
    a, _, _ = run_policy(trace, "brrip", geom, seed=1, backend="kernel")
    b, _, _ = run_policy(trace, "brrip", geom, seed=2, backend="kernel")
    assert a.per_policy["long_inserts"] != b.per_policy["long_inserts"]


def test_supports_rejects_unknown_and_huge_addresses():
    trace = make_trace([0x40, 0x80])
    assert _kernels.supports(trace, "lru")
    assert not _kernels.supports(trace, "belady")
    huge = make_trace([1 << 63])
    assert not _kernels.supports(huge, "lru")
    # auto silently falls back to the reference engine
    stats, _, _ = run_policy(huge, "lru", CacheGeometry(2, 2))
    assert stats.misses == 1


def test_empty_trace():
    trace = make_trace([])
    stats, _, _ = run_policy(trace, "ehc", CacheGeometry(2, 2), backend="kernel")
    assert stats.accesses == 0


_CHILD = """
import json, sys
from ehcsim import CacheGeometry, GeneratorSpec, gen_synthetic
from ehcsim import _kernels
from ehcsim.runner import run_policy

assert not _kernels.JIT_ENABLED
trace = gen_synthetic(GeneratorSpec("mixed", block_count=512, length=1500, seed=2))
out = {}
for name in ("lru", "drrip", "ehc"):
    stats, _, flags = run_policy(
        trace, name, CacheGeometry(64, 4), backend="kernel", record_hits=True
    )
    out[name] = [stats.hits, stats.misses, stats.replacements_no_averse,
                 sorted(stats.per_policy.items()), int(flags.sum())]
json.dump(out, sys.stdout)
"""


def test_interpreted_kernel_equivalence():
    env = dict(os.environ, EHCSIM_NUMBA="0")
    proc = subprocess.run(
        [sys.executable, "-c", _CHILD], env=env, capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    interpreted = json.loads(proc.stdout)

    trace = gen_synthetic(GeneratorSpec("mixed", block_count=512, length=1500, seed=2))
    geom = CacheGeometry(64, 4)
    for name, (hits, misses, no_averse, per_policy, flagsum) in interpreted.items():
        stats, _, flags = run_policy(trace, name, geom, backend="kernel",
                                     record_hits=True)
        assert [stats.hits, stats.misses, stats.replacements_no_averse] == [
            hits, misses, no_averse
        ]
        assert [[k, v] for k, v in sorted(stats.per_policy.items())] == per_policy
        assert int(flags.sum()) == flagsum
