"""Belady-inspired online policies: Hawkeye and its EHC extension.

Both learn from the sampled-set MIN emulation (:mod:`ehcsim.sampler`):
Hawkeye classifies load PCs as cache-friendly or cache-averse and evicts
averse blocks first; EHC layers an expected-further-hits countdown on top so
that, when no averse block is available, the victim is the block with the
least predicted remaining value instead of merely the oldest one.
"""

from __future__ import annotations

from .engine import RRPV_MAX, CacheGeometry, ReplacementPolicy
from .sampler import MinSampler


class HawkeyePolicy(ReplacementPolicy):
    """PC-classification policy driven by emulated optimal replacement.

    Blocks touched by averse PCs sit at the maximum RRPV and are evicted
    first; friendly blocks enter at RRPV 0 and age by one (capped below the
    averse value) whenever another friendly block is inserted, so "oldest"
    is well-defined when every block is friendly. Evicting in that fallback
    case detrains the PC that last touched the victim.
    """

    name = "hawkeye"

    def __init__(self, geom: CacheGeometry, seed: int = 0,
                 aging: bool = True, sampler: MinSampler | None = None):
        self.geom = geom
        self.aging = aging
        self.sampler = sampler if sampler is not None else MinSampler(geom)
        self.pc_table = self.sampler.pc_table

    def on_observe(self, record):
        self.sampler.observe(
            self.geom.set_index(record.addr),
            self.geom.tag(record.addr),
            record.addr,
            record.pc,
        )

    def _classify(self, ways, way, record, inserted: bool) -> None:
        if self.pc_table.is_friendly(record.pc):
            if inserted and self.aging:
                for w, blk in enumerate(ways):
                    if w != way and blk.valid and blk.rrpv < RRPV_MAX - 1:
                        blk.rrpv += 1
            ways[way].rrpv = 0
        else:
            ways[way].rrpv = RRPV_MAX

    def on_hit(self, set_index, ways, way, record):
        self._classify(ways, way, record, inserted=False)

    def on_insert(self, set_index, ways, way, record):
        self._classify(ways, way, record, inserted=True)

    def _detrain(self, ways, way) -> None:
        self.pc_table.train(ways[way].last_pc, -1)

    def choose_victim(self, set_index, ways, record):
        best = 0
        for w, blk in enumerate(ways):
            if blk.rrpv == RRPV_MAX:
                return w, False
            if blk.rrpv > ways[best].rrpv:
                best = w
        self._detrain(ways, best)
        return best, True

    def extra_stats(self):
        return {
            "optgen_cold": self.sampler.cold,
            "optgen_hit": self.sampler.hit,
            "optgen_miss": self.sampler.miss,
        }


class EhcPolicy(HawkeyePolicy):
    """Hawkeye plus a per-block expected-further-hits (EFH) countdown.

    On insertion a block's EFH is seeded from its region's recent residency
    hit counts (or a fixed constant when ``fixed_init`` is given); each hit
    decrements it toward zero. When a set holds an averse block the victim
    choice is exactly Hawkeye's; otherwise the block minimizing
    ``efh - rrpv`` (first index on ties) is evicted — low expected value and
    old age both push a block toward eviction.
    """

    name = "ehc"

    def __init__(self, geom: CacheGeometry, seed: int = 0, aging: bool = True,
                 fixed_init: int | None = None, sampler: MinSampler | None = None):
        super().__init__(geom, seed=seed, aging=aging, sampler=sampler)
        self.region_table = self.sampler.region_table
        self.fixed_init = fixed_init

    def on_hit(self, set_index, ways, way, record):
        blk = ways[way]
        if blk.efh > 0:
            blk.efh -= 1
        super().on_hit(set_index, ways, way, record)

    def on_insert(self, set_index, ways, way, record):
        super().on_insert(set_index, ways, way, record)
        if self.fixed_init is not None:
            ways[way].efh = self.fixed_init
        else:
            ways[way].efh = self.region_table.expected_hits(record.addr)

    def choose_victim(self, set_index, ways, record):
        best = 0
        best_score = ways[0].efh - ways[0].rrpv
        for w, blk in enumerate(ways):
            if blk.rrpv == RRPV_MAX:
                return w, False
            score = blk.efh - blk.rrpv
            if score < best_score:
                best = w
                best_score = score
        self._detrain(ways, best)
        return best, True
