"""Access traces: data model, binary file format, synthetic generators.

A trace is a column-oriented sequence of LLC accesses. Each access carries an
instruction sequence number (``seq``), the core id, the program counter of the
load/store, the byte address, and a read/write kind. ``seq`` doubles as the
instruction counter: MPKI is computed against ``instruction_count``, which is
the maximum ``seq`` in the trace.

File format (little-endian): magic ``EHCT``, version byte ``0x01``, u64 record
count, u64 instruction count, then packed 26-byte records
(seq u64, pc u64, addr u64, core u8, kind u8). No padding, no footer.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import BadMagic, InvalidSpec, TooManyCores, Truncated, UnsupportedVersion

MAGIC = b"EHCT"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sBQQ")

RECORD_DTYPE = np.dtype(
    [("seq", "<u8"), ("pc", "<u8"), ("addr", "<u8"), ("core", "u1"), ("kind", "u1")]
)
assert RECORD_DTYPE.itemsize == 26

KIND_READ = 0
KIND_WRITE = 1

BLOCK_BYTES = 64
REGION_SHIFT = 17  # 128 KB regions

# Synthetic PCs: each generator phase cycles through a small pool so PC-indexed
# predictors get trainable signal without modeling real code.
PC_POOL_SIZE = 8
_PC_BASE = 0x400000


@dataclass(frozen=True)
class AccessRecord:
    """One LLC access."""

    seq: int
    core: int
    pc: int
    addr: int
    kind: int = KIND_READ


class Trace:
    """Column-oriented access trace.

    Arrays are immutable by convention: generators and readers return fresh
    traces and nothing in the simulator writes to them.
    """

    __slots__ = ("seq", "pc", "addr", "core", "kind", "instruction_count")

    def __init__(self, seq, pc, addr, core, kind, instruction_count=None):
        self.seq = np.ascontiguousarray(seq, dtype=np.uint64)
        self.pc = np.ascontiguousarray(pc, dtype=np.uint64)
        self.addr = np.ascontiguousarray(addr, dtype=np.uint64)
        self.core = np.ascontiguousarray(core, dtype=np.uint8)
        self.kind = np.ascontiguousarray(kind, dtype=np.uint8)
        n = len(self.seq)
        if not (len(self.pc) == len(self.addr) == len(self.core) == len(self.kind) == n):
            raise ValueError("trace columns must have equal length")
        if instruction_count is None:
            instruction_count = int(self.seq.max()) if n else 0
        self.instruction_count = int(instruction_count)

    @classmethod
    def from_records(cls, records, instruction_count=None) -> "Trace":
        records = list(records)
        cols = np.empty(len(records), dtype=RECORD_DTYPE)
        for i, r in enumerate(records):
            cols[i] = (r.seq, r.pc, r.addr, r.core, r.kind)
        return cls(
            cols["seq"], cols["pc"], cols["addr"], cols["core"], cols["kind"],
            instruction_count=instruction_count,
        )

    def __len__(self) -> int:
        return len(self.seq)

    def record(self, i: int) -> AccessRecord:
        return AccessRecord(
            seq=int(self.seq[i]),
            core=int(self.core[i]),
            pc=int(self.pc[i]),
            addr=int(self.addr[i]),
            kind=int(self.kind[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self.record(i)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.instruction_count == other.instruction_count
            and np.array_equal(self.seq, other.seq)
            and np.array_equal(self.pc, other.pc)
            and np.array_equal(self.addr, other.addr)
            and np.array_equal(self.core, other.core)
            and np.array_equal(self.kind, other.kind)
        )

    def validate(self) -> None:
        """Check trace invariants; raises ValueError on the first violation."""
        if len(self) == 0:
            return
        if int(self.seq.max()) > self.instruction_count:
            raise ValueError("instruction_count below the largest seq")
        if not np.all((self.kind == KIND_READ) | (self.kind == KIND_WRITE)):
            raise ValueError("kind must be Read or Write")
        for core in np.unique(self.core):
            seqs = self.seq[self.core == core]
            if np.any(np.diff(seqs.astype(np.int64)) < 0):
                raise ValueError(f"seq not non-decreasing for core {core}")


def write_trace(trace: Trace) -> bytes:
    """Serialize a trace to the bit-exact binary format."""
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, len(trace), trace.instruction_count)
    cols = np.empty(len(trace), dtype=RECORD_DTYPE)
    cols["seq"] = trace.seq
    cols["pc"] = trace.pc
    cols["addr"] = trace.addr
    cols["core"] = trace.core
    cols["kind"] = trace.kind
    return header + cols.tobytes()


def read_trace(data: bytes) -> Trace:
    """Parse trace bytes; the exact inverse of :func:`write_trace`."""
    if len(data) < 5 or data[:4] != MAGIC:
        raise BadMagic("not a trace file (bad magic)")
    if data[4] != FORMAT_VERSION:
        raise UnsupportedVersion(f"trace format version {data[4]} not supported")
    if len(data) < _HEADER.size:
        raise Truncated("trace header incomplete")
    _, _, count, instruction_count = _HEADER.unpack_from(data)
    payload = data[_HEADER.size:]
    need = count * RECORD_DTYPE.itemsize
    if len(payload) < need:
        raise Truncated(f"header declares {count} records, payload holds fewer")
    cols = np.frombuffer(payload[:need], dtype=RECORD_DTYPE)
    return Trace(
        cols["seq"], cols["pc"], cols["addr"], cols["core"], cols["kind"],
        instruction_count=instruction_count,
    )


def load_trace(path) -> Trace:
    with open(path, "rb") as fh:
        return read_trace(fh.read())


def save_trace(trace: Trace, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_trace(trace))


# ---------------------------------------------------------------------------
# Synthetic generators
# ---------------------------------------------------------------------------

GENERATOR_KINDS = ("stream", "loop", "zipf", "region", "mixed")


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of a synthetic trace.

    ``alpha`` is the Zipf skew and only matters for the zipf/mixed kinds.
    """

    kind: str
    block_count: int
    length: int
    alpha: float = 1.0
    seed: int = 42

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise InvalidSpec(f"unknown generator kind {self.kind!r}")
        if self.block_count < 1:
            raise InvalidSpec("block_count must be >= 1")
        if self.length < 1:
            raise InvalidSpec("length must be >= 1")
        if self.alpha < 0:
            raise InvalidSpec("alpha must be >= 0")


def _pc_pool(phase: int) -> np.ndarray:
    base = _PC_BASE + phase * 0x1000
    return np.arange(base, base + 4 * PC_POOL_SIZE, 4, dtype=np.uint64)


def _cycled_pcs(length: int, phase: int) -> np.ndarray:
    return _pc_pool(phase)[np.arange(length) % PC_POOL_SIZE]


def _gen_stream(spec: GeneratorSpec, phase: int) -> np.ndarray:
    # Strictly increasing block addresses, never repeated.
    return np.arange(spec.length, dtype=np.uint64) * BLOCK_BYTES


def _gen_loop(spec: GeneratorSpec, phase: int) -> np.ndarray:
    blocks = np.arange(spec.length, dtype=np.uint64) % spec.block_count
    return blocks * BLOCK_BYTES


def _gen_zipf(spec: GeneratorSpec, rng: np.random.Generator, phase: int) -> np.ndarray:
    ranks = np.arange(1, spec.block_count + 1, dtype=np.float64)
    weights = ranks ** -spec.alpha
    cdf = np.cumsum(weights / weights.sum())
    blocks = np.searchsorted(cdf, rng.random(spec.length), side="right")
    blocks = np.minimum(blocks, spec.block_count - 1).astype(np.uint64)
    return blocks * BLOCK_BYTES


# Region-correlated generator: blocks are placed in 128 KB regions and every
# region belongs to one reuse class, so the hit counts of blocks in a region
# correlate. Slots are strided so one region's blocks land in many cache sets.
REGION_BLOCK_SLOTS = 1 << (REGION_SHIFT - 6)  # 2048 block slots per region
BLOCKS_PER_REGION = 64
REGION_SLOT_STRIDE = 32
SHORT_HOT_BLOCKS = 8
_CLASS_SHORT, _CLASS_MEDIUM, _CLASS_NEVER = 0, 1, 2
# Region class by position: 1/4 short-reuse, 1/4 medium, 1/2 streaming.
_REGION_CLASS_CYCLE = (_CLASS_SHORT, _CLASS_NEVER, _CLASS_MEDIUM, _CLASS_NEVER)
# Traffic share multipliers per class: hot regions see most of the accesses.
_CLASS_TRAFFIC = {_CLASS_SHORT: 6.0, _CLASS_MEDIUM: 2.0, _CLASS_NEVER: 1.5}


def _gen_region(spec: GeneratorSpec, rng: np.random.Generator, phase: int) -> np.ndarray:
    n_regions = max(4, spec.block_count // BLOCKS_PER_REGION)
    classes = np.array(
        [_REGION_CLASS_CYCLE[r % len(_REGION_CLASS_CYCLE)] for r in range(n_regions)]
    )
    weights = np.array([_CLASS_TRAFFIC[c] for c in classes])
    cdf = np.cumsum(weights / weights.sum())
    chosen = np.searchsorted(cdf, rng.random(spec.length), side="right")
    chosen = np.minimum(chosen, n_regions - 1)

    addr = np.zeros(spec.length, dtype=np.uint64)
    for r in range(n_regions):
        pos = np.nonzero(chosen == r)[0]
        if len(pos) == 0:
            continue
        k = np.arange(len(pos), dtype=np.uint64)
        cls = classes[r]
        if cls == _CLASS_SHORT:
            slot = k % SHORT_HOT_BLOCKS
            region_id = np.full(len(pos), r, dtype=np.uint64)
        elif cls == _CLASS_MEDIUM:
            slot = k % BLOCKS_PER_REGION
            region_id = np.full(len(pos), r, dtype=np.uint64)
        else:
            # Streaming: every visit touches a fresh block; once a region's 64
            # slots are consumed, spill into a new region id (disjoint from the
            # base regions and from other spills).
            slot = k % BLOCKS_PER_REGION
            region_id = np.uint64(n_regions) * (k // BLOCKS_PER_REGION + np.uint64(1))
            region_id += np.uint64(r)
        addr[pos] = (region_id << np.uint64(REGION_SHIFT)) | (
            slot * np.uint64(REGION_SLOT_STRIDE * BLOCK_BYTES)
        )
    return addr


def gen_synthetic(spec: GeneratorSpec) -> Trace:
    """Generate a deterministic synthetic trace from ``spec``.

    Every record is a read on core 0 with ``seq`` equal to its index.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "mixed":
        quarter = spec.length // 4
        lengths = [quarter, quarter, quarter, spec.length - 3 * quarter]
        sub_kinds = ["loop", "zipf", "stream", "region"]
        addr_parts, pc_parts = [], []
        for phase, (kind, length) in enumerate(zip(sub_kinds, lengths)):
            if length == 0:
                continue
            sub = GeneratorSpec(kind, spec.block_count, length, spec.alpha, spec.seed)
            addr_parts.append(_dispatch_addrs(sub, rng, phase))
            pc_parts.append(_cycled_pcs(length, phase))
        addr = np.concatenate(addr_parts)
        pcs = np.concatenate(pc_parts)
    else:
        addr = _dispatch_addrs(spec, rng, phase=0)
        pcs = _cycled_pcs(spec.length, phase=0)

    seq = np.arange(spec.length, dtype=np.uint64)
    core = np.zeros(spec.length, dtype=np.uint8)
    kind = np.full(spec.length, KIND_READ, dtype=np.uint8)
    return Trace(seq, pcs, addr, core, kind)


def _dispatch_addrs(spec: GeneratorSpec, rng: np.random.Generator, phase: int) -> np.ndarray:
    if spec.kind == "stream":
        return _gen_stream(spec, phase)
    if spec.kind == "loop":
        return _gen_loop(spec, phase)
    if spec.kind == "zipf":
        return _gen_zipf(spec, rng, phase)
    if spec.kind == "region":
        return _gen_region(spec, rng, phase)
    raise InvalidSpec(f"unknown generator kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# Multi-core interleaving
# ---------------------------------------------------------------------------

CORE_WINDOW_BYTES = 1 << 32  # each input program gets a disjoint 4 GB window


def interleave(traces) -> Trace:
    """Merge per-program traces into one shared-LLC trace.

    Records merge in global ``seq`` order (stable: ties keep input order);
    ``core`` is overwritten with the input index and addresses move into
    disjoint 4 GB windows so programs never alias.
    """
    traces = list(traces)
    if not traces:
        raise InvalidSpec("interleave needs at least one input trace")
    if len(traces) > 255:
        raise TooManyCores(f"{len(traces)} inputs exceed the 8-bit core id")

    seq = np.concatenate([t.seq for t in traces])
    pc = np.concatenate([t.pc for t in traces])
    addr = np.concatenate(
        [t.addr + np.uint64(i * CORE_WINDOW_BYTES) for i, t in enumerate(traces)]
    )
    core = np.concatenate(
        [np.full(len(t), i, dtype=np.uint8) for i, t in enumerate(traces)]
    )
    kind = np.concatenate([t.kind for t in traces])

    order = np.argsort(seq, kind="stable")
    instruction_count = max(t.instruction_count for t in traces)
    return Trace(
        seq[order], pc[order], addr[order], core[order], kind[order],
        instruction_count=instruction_count,
    )
