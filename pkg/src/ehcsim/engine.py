"""Set-associative cache engine driven by a replacement-policy interface.

This is the reference execution path: a plain Python loop over the trace that
calls back into a policy object for every decision. It favors clarity and
extensibility (any PolicyInterface subclass plugs in, and it can record full
replacement events for victim-quality analysis). The fused numba kernels in
:mod:`ehcsim._kernels` reproduce the built-in policies bit-for-bit for bulk
runs; equivalence between the two paths is enforced by tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InternalInvariantError, VictimOutOfRange
from .trace import Trace

RRPV_MAX = 7  # 3-bit re-reference prediction value
EFH_MAX = 7   # 3-bit expected-further-hits counter

#: Distinguished choose_victim outcome: skip insertion entirely.
BYPASS = -1


@dataclass(frozen=True)
class CacheGeometry:
    """Cache shape: number of sets, ways per set, and block size.

    Defaults give the 2 MB, 16-way, 64 B-block configuration.
    """

    num_sets: int = 2048
    associativity: int = 16
    block_offset_bits: int = 6

    def __post_init__(self):
        if self.num_sets < 1 or self.num_sets & (self.num_sets - 1):
            raise ValueError("num_sets must be a positive power of two")
        if self.associativity < 1:
            raise ValueError("associativity must be positive")
        if self.block_offset_bits < 1:
            raise ValueError("block_offset_bits must be positive")

    @property
    def set_bits(self) -> int:
        return self.num_sets.bit_length() - 1

    def set_index(self, addr: int) -> int:
        return (addr >> self.block_offset_bits) & (self.num_sets - 1)

    def tag(self, addr: int) -> int:
        return addr >> (self.block_offset_bits + self.set_bits)

    def block_addr(self, set_index: int, tag: int) -> int:
        """Reconstruct the byte address of a block's first byte."""
        return (tag << (self.block_offset_bits + self.set_bits)) | (
            set_index << self.block_offset_bits
        )


DEFAULT_GEOMETRY = CacheGeometry()


def set_index(addr: int, geom: CacheGeometry) -> int:
    return geom.set_index(addr)


class BlockState:
    """Per-way metadata. ``rrpv`` and ``efh`` are 3-bit fields."""

    __slots__ = (
        "valid", "tag", "rrpv", "efh", "recency_stamp", "insert_seq",
        "residency_hits", "last_pc",
    )

    def __init__(self):
        self.valid = False
        self.tag = 0
        self.rrpv = 0
        self.efh = 0
        self.recency_stamp = 0
        self.insert_seq = 0
        self.residency_hits = 0
        self.last_pc = 0


@dataclass
class SimStats:
    """Counters produced by one simulation run."""

    accesses: int = 0
    hits: int = 0
    misses: int = 0
    evictions: int = 0
    replacements_total: int = 0
    replacements_no_averse: int = 0
    per_policy: dict = field(default_factory=dict)

    def check(self) -> None:
        if self.accesses != self.hits + self.misses:
            raise InternalInvariantError("accesses != hits + misses")
        if not (self.replacements_no_averse <= self.replacements_total <= self.misses):
            raise InternalInvariantError("replacement counters out of order")


class ReplacementPolicy:
    """Behavioral contract the engine drives.

    ``choose_victim`` returns ``(way, no_averse)`` where ``way`` may be
    :data:`BYPASS`; ``no_averse`` reports that no cache-averse candidate
    existed at decision time (meaningful for the Belady-inspired policies,
    always False elsewhere).
    """

    name = "abstract"

    def on_observe(self, record) -> None:
        """Called for every access before lookup; samplers train here."""

    def on_hit(self, set_index: int, ways, way: int, record) -> None:
        pass

    def choose_victim(self, set_index: int, ways, record):
        raise NotImplementedError

    def on_insert(self, set_index: int, ways, way: int, record) -> None:
        pass

    def extra_stats(self) -> dict:
        """Policy-specific counters merged into ``SimStats.per_policy``."""
        return {}


@dataclass(frozen=True)
class ReplacementEvent:
    """One replacement decision, for victim-quality scoring."""

    index: int            # trace position of the missing access
    set_index: int
    victim_way: int       # BYPASS when the incoming block was not inserted
    no_averse: bool
    incoming_addr: int    # block-aligned byte address
    resident_addrs: tuple  # block-aligned byte address per way


def simulate(
    trace: Trace,
    policy: ReplacementPolicy,
    geom: CacheGeometry = DEFAULT_GEOMETRY,
    record_events: bool = False,
    record_hits: bool = False,
    check: bool = False,
):
    """Run ``trace`` through the cache with ``policy`` deciding replacements.

    Returns ``(stats, events, hit_flags)``; ``events`` is None unless
    ``record_events``, ``hit_flags`` is None unless ``record_hits``.
    ``check=True`` validates stats and counter-range invariants after every
    access (slow; meant for tests).
    """
    assoc = geom.associativity
    sets = [[BlockState() for _ in range(assoc)] for _ in range(geom.num_sets)]
    stats = SimStats()
    events = [] if record_events else None
    hit_flags = np.zeros(len(trace), dtype=np.uint8) if record_hits else None

    block_mask = ~((1 << geom.block_offset_bits) - 1)
    for i in range(len(trace)):
        record = trace.record(i)
        policy.on_observe(record)

        si = geom.set_index(record.addr)
        tag = geom.tag(record.addr)
        ways = sets[si]

        way = -1
        for w in range(assoc):
            if ways[w].valid and ways[w].tag == tag:
                way = w
                break

        stats.accesses += 1
        if way >= 0:
            stats.hits += 1
            blk = ways[way]
            blk.residency_hits += 1
            blk.recency_stamp = i
            blk.last_pc = record.pc
            policy.on_hit(si, ways, way, record)
            if hit_flags is not None:
                hit_flags[i] = 1
        else:
            stats.misses += 1
            way = -1
            for w in range(assoc):
                if not ways[w].valid:
                    way = w
                    break
            if way < 0:
                way, no_averse = policy.choose_victim(si, ways, record)
                if way == BYPASS:
                    if check:
                        stats.check()
                    continue
                if not 0 <= way < assoc:
                    raise VictimOutOfRange(f"policy returned way {way} of {assoc}")
                if record_events:
                    events.append(ReplacementEvent(
                        index=i,
                        set_index=si,
                        victim_way=way,
                        no_averse=no_averse,
                        incoming_addr=record.addr & block_mask,
                        resident_addrs=tuple(
                            geom.block_addr(si, ways[w].tag) for w in range(assoc)
                        ),
                    ))
                stats.evictions += 1
                stats.replacements_total += 1
                if no_averse:
                    stats.replacements_no_averse += 1
            blk = ways[way]
            blk.valid = True
            blk.tag = tag
            blk.residency_hits = 0
            blk.insert_seq = i
            blk.recency_stamp = i
            blk.last_pc = record.pc
            policy.on_insert(si, ways, way, record)

        if check:
            stats.check()
            for w in range(assoc):
                b = ways[w]
                if not (0 <= b.rrpv <= RRPV_MAX and 0 <= b.efh <= EFH_MAX):
                    raise InternalInvariantError(
                        f"counter out of range in set {si} way {w}"
                    )

    stats.per_policy.update(policy.extra_stats())
    return stats, events, hit_flags
