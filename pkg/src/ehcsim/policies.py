"""Baseline replacement policies: LRU, SRRIP, BRRIP, DRRIP, SHiP.

The RRIP family shares one victim-selection procedure (evict the first block
at the maximum RRPV, incrementing every block until one gets there) and
differs only in insertion behavior.
"""

from __future__ import annotations

import numpy as np

from .engine import CacheGeometry, ReplacementPolicy, RRPV_MAX
from .hashing import xor_fold

_M64 = (1 << 64) - 1
_SM_GAMMA = 0x9E3779B97F4A7C15
_SM_MIX1 = 0xBF58476D1CE4E5B9
_SM_MIX2 = 0x94D049BB133111EB

BRRIP_LONG_ODDS = 32  # long (max-1) insertion with probability 1/32

PSEL_BITS = 10
PSEL_MAX = (1 << PSEL_BITS) - 1
PSEL_INIT = 1 << (PSEL_BITS - 1)
LEADER_PERIOD = 64
SRRIP_LEADER_OFFSET = 0
BRRIP_LEADER_OFFSET = 33

SHCT_BITS = 14
SHCT_SIZE = 1 << SHCT_BITS
SHCT_MAX = 7


def brrip_long_insert(seed: int, n: int) -> bool:
    """Whether the n-th bimodal insertion uses the long (max-1) RRPV.

    Counter-mode splitmix64 keyed by (seed, n): stateless, so the reference
    engine and the fused kernels consume identical decision streams.
    """
    z = (seed + (n + 1) * _SM_GAMMA) & _M64
    z = ((z ^ (z >> 30)) * _SM_MIX1) & _M64
    z = ((z ^ (z >> 27)) * _SM_MIX2) & _M64
    z ^= z >> 31
    return (z & (BRRIP_LONG_ODDS - 1)) == 0


def brrip_draws(seed: int, n: int) -> np.ndarray:
    """Vectorized ``brrip_long_insert`` for insertions 0..n-1 (uint8 array)."""
    idx = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(seed & _M64) + idx * np.uint64(_SM_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_SM_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_SM_MIX2)
    z ^= z >> np.uint64(31)
    return ((z & np.uint64(BRRIP_LONG_ODDS - 1)) == 0).astype(np.uint8)


def lru_choose_victim(ways) -> int:
    """Way holding the least recently touched block (smallest stamp)."""
    victim = 0
    for w in range(1, len(ways)):
        if ways[w].recency_stamp < ways[victim].recency_stamp:
            victim = w
    return victim


def rrip_choose_victim(ways) -> int:
    """First way at the maximum RRPV, aging every block until one reaches it.

    Mutates the RRPVs, matching the hardware procedure.
    """
    while True:
        for w in range(len(ways)):
            if ways[w].rrpv == RRPV_MAX:
                return w
        for blk in ways:
            blk.rrpv += 1


class LruPolicy(ReplacementPolicy):
    name = "lru"

    def __init__(self, geom: CacheGeometry, seed: int = 0):
        pass

    def choose_victim(self, set_index, ways, record):
        return lru_choose_victim(ways), False


class SrripPolicy(ReplacementPolicy):
    name = "srrip"

    def __init__(self, geom: CacheGeometry, seed: int = 0):
        pass

    def on_hit(self, set_index, ways, way, record):
        ways[way].rrpv = 0

    def choose_victim(self, set_index, ways, record):
        return rrip_choose_victim(ways), False

    def on_insert(self, set_index, ways, way, record):
        ways[way].rrpv = RRPV_MAX - 1


class BrripPolicy(ReplacementPolicy):
    name = "brrip"

    def __init__(self, geom: CacheGeometry, seed: int = 0):
        self.seed = seed
        self.insertions = 0
        self.long_inserts = 0

    def bimodal_rrpv(self) -> int:
        long = brrip_long_insert(self.seed, self.insertions)
        self.insertions += 1
        if long:
            self.long_inserts += 1
            return RRPV_MAX - 1
        return RRPV_MAX

    def on_hit(self, set_index, ways, way, record):
        ways[way].rrpv = 0

    def choose_victim(self, set_index, ways, record):
        return rrip_choose_victim(ways), False

    def on_insert(self, set_index, ways, way, record):
        ways[way].rrpv = self.bimodal_rrpv()

    def extra_stats(self):
        return {"long_inserts": self.long_inserts}


class DrripPolicy(ReplacementPolicy):
    """Set-dueling between SRRIP and BRRIP insertion.

    Leader sets are fixed, not random, for reproducibility: sets at
    ``index % 64 == 0`` always insert SRRIP-style, sets at
    ``index % 64 == 33`` BRRIP-style (32 + 32 leaders at 2048 sets).
    Followers use SRRIP while PSEL sits below the midpoint.
    """

    name = "drrip"

    def __init__(self, geom: CacheGeometry, seed: int = 0):
        self.seed = seed
        self.psel = PSEL_INIT
        self.insertions = 0  # bimodal insertions only
        self.srrip_leader = np.arange(geom.num_sets) % LEADER_PERIOD == SRRIP_LEADER_OFFSET
        self.brrip_leader = np.arange(geom.num_sets) % LEADER_PERIOD == BRRIP_LEADER_OFFSET

    def uses_brrip(self, set_index: int) -> bool:
        if self.srrip_leader[set_index]:
            return False
        if self.brrip_leader[set_index]:
            return True
        return self.psel >= PSEL_INIT

    def on_hit(self, set_index, ways, way, record):
        ways[way].rrpv = 0

    def choose_victim(self, set_index, ways, record):
        return rrip_choose_victim(ways), False

    def on_insert(self, set_index, ways, way, record):
        if self.srrip_leader[set_index]:
            self.psel = min(self.psel + 1, PSEL_MAX)
        elif self.brrip_leader[set_index]:
            self.psel = max(self.psel - 1, 0)
        if self.uses_brrip(set_index):
            long = brrip_long_insert(self.seed, self.insertions)
            self.insertions += 1
            ways[way].rrpv = RRPV_MAX - 1 if long else RRPV_MAX
        else:
            ways[way].rrpv = RRPV_MAX - 1

    def extra_stats(self):
        return {"psel": self.psel}


class ShipPolicy(ReplacementPolicy):
    """Signature-based hit prediction: PCs whose blocks die unused insert at
    the maximum RRPV, everything else at max-1."""

    name = "ship"

    def __init__(self, geom: CacheGeometry, seed: int = 0):
        self.shct = np.zeros(SHCT_SIZE, dtype=np.uint8)
        self.signature = np.zeros((geom.num_sets, geom.associativity), dtype=np.int64)
        self.outcome = np.zeros((geom.num_sets, geom.associativity), dtype=np.uint8)

    def on_hit(self, set_index, ways, way, record):
        ways[way].rrpv = 0
        self.outcome[set_index, way] = 1

    def choose_victim(self, set_index, ways, record):
        way = rrip_choose_victim(ways)
        sig = self.signature[set_index, way]
        if self.outcome[set_index, way]:
            if self.shct[sig] < SHCT_MAX:
                self.shct[sig] += 1
        elif self.shct[sig] > 0:
            self.shct[sig] -= 1
        return way, False

    def on_insert(self, set_index, ways, way, record):
        sig = xor_fold(record.pc, SHCT_BITS)
        self.signature[set_index, way] = sig
        self.outcome[set_index, way] = 0
        ways[way].rrpv = RRPV_MAX if self.shct[sig] == 0 else RRPV_MAX - 1
