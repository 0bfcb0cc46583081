"""Shared trace builders and the independent oracles the tests check against."""

import functools

import numpy as np
import pytest

from ehcsim import CacheGeometry, Trace


def make_trace(accesses, pc=0x400000):
    """Trace from a list of byte addresses or (pc, addr) pairs."""
    pcs, addrs = [], []
    for item in accesses:
        if isinstance(item, tuple):
            pcs.append(item[0])
            addrs.append(item[1])
        else:
            pcs.append(pc)
            addrs.append(item)
    n = len(addrs)
    return Trace(
        seq=np.arange(n, dtype=np.uint64),
        pc=np.array(pcs, dtype=np.uint64),
        addr=np.array(addrs, dtype=np.uint64),
        core=np.zeros(n, dtype=np.uint8),
        kind=np.zeros(n, dtype=np.uint8),
    )


def random_trace(rng, length, num_blocks, num_pcs=4):
    """Random accesses over blocks 0..num_blocks-1 (64-byte blocks)."""
    blocks = rng.integers(0, num_blocks, size=length)
    pcs = rng.integers(0, num_pcs, size=length) * 4 + 0x400000
    return make_trace([(int(p), int(b) * 64) for p, b in zip(pcs, blocks)])


def single_set_trace(rng, length, num_tags, geom, num_pcs=4):
    """Random accesses confined to set 0 (for per-set oracles)."""
    tags = rng.integers(0, num_tags, size=length)
    pcs = rng.integers(0, num_pcs, size=length) * 4 + 0x400000
    return make_trace(
        [(int(p), geom.block_addr(0, int(t))) for p, t in zip(pcs, tags)]
    )


# ---------------------------------------------------------------------------
# Oracle 1: brute-force LRU via an explicit recency list.
# ---------------------------------------------------------------------------


def lru_oracle_hits(trace, geom):
    """Per-access hit flags from a move-to-front list per set."""
    lists = {}
    flags = np.zeros(len(trace), dtype=np.uint8)
    for i in range(len(trace)):
        addr = int(trace.addr[i])
        si = geom.set_index(addr)
        tag = geom.tag(addr)
        blocks = lists.setdefault(si, [])
        if tag in blocks:
            flags[i] = 1
            blocks.remove(tag)
        elif len(blocks) == geom.associativity:
            blocks.pop()
        blocks.insert(0, tag)
    return flags


# ---------------------------------------------------------------------------
# Oracle 2: exhaustive search over all eviction (and bypass) schedules.
# ---------------------------------------------------------------------------


def max_hits_exhaustive(tags, associativity, bypass):
    """Best achievable hit count for one set's access stream, by trying
    every victim choice (and, optionally, bypassing) at every full miss."""
    tags = tuple(tags)

    @functools.lru_cache(maxsize=None)
    def best(i, resident):
        if i == len(tags):
            return 0
        t = tags[i]
        if t in resident:
            return 1 + best(i + 1, resident)
        if len(resident) < associativity:
            return best(i + 1, resident | frozenset((t,)))
        score = 0
        if bypass:
            score = best(i + 1, resident)
        for victim in resident:
            score = max(score, best(i + 1, (resident - {victim}) | {t}))
        return score

    return best(0, frozenset())


@pytest.fixture
def rng():
    return np.random.default_rng(1405)


@pytest.fixture
def small_geom():
    return CacheGeometry(num_sets=4, associativity=2)
