"""Offline Belady MIN oracles and ground-truth analyses.

Everything here may look at the whole trace at once: next-use indices from a
backward scan, MIN simulation with and without bypass, per-residency hit
counts, hit-count prediction-error histograms, and reuse-distance ranking of
a policy's evicted victims.
"""

from __future__ import annotations

import collections
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .engine import BYPASS, CacheGeometry, DEFAULT_GEOMETRY, ReplacementEvent, SimStats
from .errors import MissingEventLog
from .sampler import MinDecision
from .trace import REGION_SHIFT, Trace

#: Sentinel next-use position for blocks never referenced again ("infinity").
NO_NEXT_USE = 1 << 62

PREDICTION_HISTORY = 4  # residencies averaged per block/region prediction
ERROR_BUCKETS = 5       # |actual - predicted| of 0, 1, 2, 3, >=4


@dataclass(frozen=True)
class ResidencyRecord:
    """One stay of a block in the cache under MIN."""

    addr: int   # block-aligned byte address
    fill: int   # trace position that inserted the block
    end: int    # eviction position, or len(trace) if still resident
    hits: int


def compute_next_use(trace: Trace, geom: CacheGeometry = DEFAULT_GEOMETRY) -> np.ndarray:
    """For each access, the position of the next access to the same block
    (:data:`NO_NEXT_USE` when there is none)."""
    n = len(trace)
    blocks = trace.addr >> np.uint64(geom.block_offset_bits)
    next_use = np.full(n, NO_NEXT_USE, dtype=np.int64)
    last: dict[int, int] = {}
    for i in range(n - 1, -1, -1):
        b = int(blocks[i])
        p = last.get(b)
        if p is not None:
            next_use[i] = p
        last[b] = i
    return next_use


def simulate_min(
    trace: Trace,
    geom: CacheGeometry = DEFAULT_GEOMETRY,
    bypass: bool = True,
    record_events: bool = False,
):
    """Belady's MIN: evict whatever is referenced farthest in the future.

    With ``bypass`` the incoming block competes with the residents and is not
    inserted when its own next use is strictly farthest (ties go to keeping
    the residents). Returns ``(stats, decisions, residencies, events)``:
    ``decisions`` holds one :class:`MinDecision` code per access,
    ``residencies`` covers every fill including blocks still resident at the
    end of the trace, ``events`` is None unless requested.
    """
    n = len(trace)
    next_use = compute_next_use(trace, geom)
    assoc = geom.associativity

    tags = collections.defaultdict(dict)   # set -> {tag: way}
    way_tag = collections.defaultdict(dict)  # set -> {way: (next_pos, fill, hits)}
    stats = SimStats()
    decisions = np.empty(n, dtype=np.uint8)
    residencies: list[ResidencyRecord] = []
    events: list[ReplacementEvent] | None = [] if record_events else None
    seen: set[int] = set()
    bypasses = 0

    block_mask = ~((1 << geom.block_offset_bits) - 1)
    for i in range(n):
        addr = int(trace.addr[i])
        block = addr & block_mask
        si = geom.set_index(addr)
        tag = geom.tag(addr)
        resident = tags[si]
        ways = way_tag[si]

        stats.accesses += 1
        way = resident.get(tag)
        if way is not None:
            stats.hits += 1
            decisions[i] = MinDecision.HIT
            nxt, fill, hits = ways[way]
            ways[way] = (int(next_use[i]), fill, hits + 1)
            continue

        stats.misses += 1
        decisions[i] = MinDecision.MISS if block in seen else MinDecision.COLD_MISS
        seen.add(block)

        if len(resident) < assoc:
            way = len(resident)
        else:
            victim = 0
            victim_next = -1
            for w in range(assoc):
                if ways[w][0] > victim_next:
                    victim = w
                    victim_next = ways[w][0]
            if record_events:
                by_way = {w: t for t, w in resident.items()}
                events.append(ReplacementEvent(
                    index=i,
                    set_index=si,
                    victim_way=BYPASS if bypass and int(next_use[i]) > victim_next else victim,
                    no_averse=False,
                    incoming_addr=block,
                    resident_addrs=tuple(
                        geom.block_addr(si, by_way[w]) for w in range(assoc)
                    ),
                ))
            if bypass and int(next_use[i]) > victim_next:
                bypasses += 1
                continue
            _, fill, hits = ways[victim]
            victim_tag = next(t for t, w in resident.items() if w == victim)
            residencies.append(ResidencyRecord(
                addr=geom.block_addr(si, victim_tag), fill=fill, end=i, hits=hits,
            ))
            del resident[victim_tag]
            stats.evictions += 1
            stats.replacements_total += 1
            way = victim

        resident[tag] = way
        ways[way] = (int(next_use[i]), i, 0)

    for si, resident in tags.items():
        for tag, way in resident.items():
            _, fill, hits = way_tag[si][way]
            residencies.append(ResidencyRecord(
                addr=geom.block_addr(si, tag), fill=fill, end=n, hits=hits,
            ))

    stats.per_policy["bypasses"] = bypasses
    return stats, decisions, residencies, events


def _round_half_up_mean(values) -> int:
    total = sum(values)
    n = len(values)
    return (2 * total + n) // (2 * n)


def _error_histogram(keyed_residencies) -> np.ndarray:
    """Walk residencies in completion order, predict each hit count as the
    round-half-up mean of the key's last four known counts, and bucket
    |actual - predicted| (first sighting excluded)."""
    hist = np.zeros(ERROR_BUCKETS, dtype=np.int64)
    history: dict[int, collections.deque] = collections.defaultdict(
        lambda: collections.deque(maxlen=PREDICTION_HISTORY)
    )
    for key, rec in keyed_residencies:
        past = history[key]
        if past:
            diff = abs(rec.hits - _round_half_up_mean(past))
            hist[min(diff, ERROR_BUCKETS - 1)] += 1
        past.append(rec.hits)
    return hist


def _completion_order(residencies):
    return sorted(residencies, key=lambda r: (r.end, r.fill))


def per_block_prediction_error(residencies) -> np.ndarray:
    """Histogram of |actual - predicted| hits, predicting each residency from
    the same block's previous (up to four) residencies."""
    return _error_histogram(
        (r.addr, r) for r in _completion_order(residencies)
    )


def per_region_prediction_error(residencies) -> np.ndarray:
    """Same histogram but predicting from the last four completed residencies
    anywhere in the block's 128 KB region."""
    return _error_histogram(
        (r.addr >> REGION_SHIFT, r) for r in _completion_order(residencies)
    )


def victim_quality(events, trace: Trace, geom: CacheGeometry = DEFAULT_GEOMETRY) -> np.ndarray:
    """Rank each evicted victim among the replacement's candidates by next use.

    Candidates are the set's residents plus the incoming block; a victim's
    rank is how many candidates would be referenced strictly farther in the
    future (so rank 0 is the MIN-optimal choice and the worst possible rank
    equals the associativity). Bypass decisions score the incoming block.
    Returns a histogram over ranks ``0..associativity``.
    """
    if events is None:
        raise MissingEventLog("victim quality requires a recorded event log")
    block_mask = ~((1 << geom.block_offset_bits) - 1)
    positions: dict[int, list[int]] = collections.defaultdict(list)
    for i in range(len(trace)):
        positions[int(trace.addr[i]) & block_mask].append(i)

    def next_use_after(block: int, i: int) -> int:
        pos = positions.get(block)
        if pos:
            k = bisect_right(pos, i)
            if k < len(pos):
                return pos[k]
        return NO_NEXT_USE

    hist = np.zeros(geom.associativity + 1, dtype=np.int64)
    for ev in events:
        uses = [next_use_after(a, ev.index) for a in ev.resident_addrs]
        uses.append(next_use_after(ev.incoming_addr, ev.index))
        victim_use = uses[-1] if ev.victim_way == BYPASS else uses[ev.victim_way]
        rank = sum(1 for u in uses if u > victim_use)
        hist[rank] += 1
    return hist


def mean_rank(hist: np.ndarray) -> float:
    total = int(hist.sum())
    if total == 0:
        return 0.0
    return float((hist * np.arange(len(hist))).sum() / total)
