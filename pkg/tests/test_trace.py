"""Trace data model: binary format, generators, interleaving."""

import numpy as np
import pytest

from ehcsim import (
    AccessRecord,
    BadMagic,
    GeneratorSpec,
    InvalidSpec,
    TooManyCores,
    Trace,
    Truncated,
    UnsupportedVersion,
    gen_synthetic,
    interleave,
    read_trace,
    write_trace,
)
from ehcsim.trace import FORMAT_VERSION, MAGIC, RECORD_DTYPE

from conftest import make_trace


def test_record_layout_is_26_bytes():
    assert RECORD_DTYPE.itemsize == 26


def test_empty_trace_is_21_bytes():
    t = Trace([], [], [], [], [])
    data = write_trace(t)
    assert len(data) == 21
    assert read_trace(data) == t


def test_one_record_is_47_bytes():
    t = make_trace([0x40])
    assert len(write_trace(t)) == 21 + 26


def test_round_trip_three_records():
    t = Trace(
        seq=[0, 1, 2],
        pc=[0x400100, 0x400104, 0x400100],
        addr=[0x1000, 0x2000, 0x1000],
        core=[0, 0, 0],
        kind=[0, 1, 0],
    )
    assert read_trace(write_trace(t)) == t


def test_round_trip_preserves_instruction_count():
    t = Trace([0, 5], [1, 1], [0x40, 0x80], [0, 0], [0, 0], instruction_count=99)
    assert read_trace(write_trace(t)).instruction_count == 99


def test_bad_magic():
    with pytest.raises(BadMagic):
        read_trace(b"NOPE" + bytes(17))


def test_unsupported_version():
    data = bytearray(write_trace(make_trace([0x40])))
    data[4] = FORMAT_VERSION + 1
    with pytest.raises(UnsupportedVersion):
        read_trace(bytes(data))


def test_truncated_header():
    with pytest.raises(Truncated):
        read_trace(MAGIC + bytes([FORMAT_VERSION]))


def test_truncated_records():
    # Header declares one more record than is actually encoded.
    t = make_trace([0x40 * i for i in range(10)])
    data = write_trace(t)
    with pytest.raises(Truncated):
        read_trace(data[:-26])


def test_records_iteration():
    t = make_trace([(0x500, 0x40), (0x504, 0x80)])
    recs = list(t)
    assert recs[0] == AccessRecord(seq=0, core=0, pc=0x500, addr=0x40, kind=0)
    assert recs[1].addr == 0x80


def test_validate_rejects_bad_kind():
    t = make_trace([0x40])
    t.kind[0] = 9
    with pytest.raises(ValueError):
        t.validate()


def test_validate_rejects_decreasing_seq():
    t = make_trace([0x40, 0x80])
    t.seq[0] = 5
    t.instruction_count = 5
    with pytest.raises(ValueError):
        t.validate()


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def test_invalid_spec():
    with pytest.raises(InvalidSpec):
        GeneratorSpec("loop", 0, 10)
    with pytest.raises(InvalidSpec):
        GeneratorSpec("loop", 10, 0)
    with pytest.raises(InvalidSpec):
        GeneratorSpec("nosuch", 10, 10)


def test_loop_generator_cycles():
    t = gen_synthetic(GeneratorSpec("loop", 3, 6, seed=7))
    blocks = (t.addr // 64).tolist()
    b0, b1, b2 = blocks[:3]
    assert blocks == [b0, b1, b2, b0, b1, b2]
    assert len({b0, b1, b2}) == 3


def test_stream_generator_never_repeats():
    t = gen_synthetic(GeneratorSpec("stream", 500, 500, seed=1))
    assert len(set(t.addr.tolist())) == 500


def test_zipf_top_two_frequency_ratio():
    t = gen_synthetic(GeneratorSpec("zipf", 1000, 100000, alpha=1.0, seed=1))
    _, counts = np.unique(t.addr, return_counts=True)
    top = np.sort(counts)[::-1]
    ratio = top[0] / top[1]
    assert 1.6 <= ratio <= 2.4  # ideal Zipf(1.0) ratio is 2.0


def test_region_generator_groups_blocks_into_regions():
    t = gen_synthetic(GeneratorSpec("region", 4096, 20000, seed=3))
    regions = np.unique(t.addr >> np.uint64(17))
    # Several regions in play, each holding many accesses.
    assert len(regions) > 4
    # Streaming spill regions never collide with the base hot regions.
    assert len(set(regions.tolist())) == len(regions)


def test_mixed_generator_has_phases():
    t = gen_synthetic(GeneratorSpec("mixed", 256, 4000, seed=5))
    assert len(t) == 4000
    # Four phases, each with its own PC pool.
    assert len(np.unique(t.pc)) == 32


def test_generator_determinism():
    spec = GeneratorSpec("mixed", 512, 5000, alpha=1.2, seed=11)
    assert gen_synthetic(spec) == gen_synthetic(spec)
    assert write_trace(gen_synthetic(spec)) == write_trace(gen_synthetic(spec))


def test_generated_traces_validate():
    for kind in ("stream", "loop", "zipf", "region", "mixed"):
        gen_synthetic(GeneratorSpec(kind, 128, 1000, seed=2)).validate()


# ---------------------------------------------------------------------------
# Interleaving
# ---------------------------------------------------------------------------


def test_interleave_single_input_is_identity_with_core0():
    t = make_trace([0x40, 0x80, 0x40])
    out = interleave([t])
    assert np.array_equal(out.addr, t.addr)
    assert np.array_equal(out.seq, t.seq)
    assert (out.core == 0).all()


def test_interleave_merges_by_seq():
    a = Trace([0, 2], [1, 1], [0x40, 0x40], [0, 0], [0, 0])
    b = Trace([1, 3], [2, 2], [0x80, 0x80], [0, 0], [0, 0])
    out = interleave([a, b])
    assert out.seq.tolist() == [0, 1, 2, 3]
    assert out.core.tolist() == [0, 1, 0, 1]


def test_interleave_ties_stable_by_input_position():
    a = Trace([5], [1], [0x40], [0], [0])
    b = Trace([5], [2], [0x80], [0], [0])
    out = interleave([a, b])
    assert out.core.tolist() == [0, 1]


def test_interleave_disjoint_windows():
    a = make_trace([0x40])
    b = make_trace([0x40])
    out = interleave([a, b])
    assert sorted(out.addr.tolist()) == [0x40, 0x1_0000_0040]


def test_interleave_preserves_per_core_order_and_count():
    rng = np.random.default_rng(8)
    parts = [
        Trace(
            seq=np.sort(rng.integers(0, 1000, size=50)),
            pc=np.full(50, c),
            addr=rng.integers(0, 1 << 20, size=50) * 64,
            core=np.zeros(50),
            kind=np.zeros(50),
        )
        for c in range(3)
    ]
    out = interleave(parts)
    assert len(out) == 150
    for c, part in enumerate(parts):
        mask = out.core == c
        assert np.array_equal(out.seq[mask], part.seq)
        assert np.array_equal(out.addr[mask], part.addr + c * (1 << 32))
    out.validate()


def test_interleave_too_many_cores():
    tiny = [make_trace([0x40]) for _ in range(256)]
    with pytest.raises(TooManyCores):
        interleave(tiny)
