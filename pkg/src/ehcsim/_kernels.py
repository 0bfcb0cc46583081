"""Fused simulation kernels: the fast path behind :func:`ehcsim.runner.run_policy`.

One flat loop per trace covers all built-in policies (dispatched on a policy
id), with cache state held in preallocated numpy arrays. The loop is
decorated with ``numba.njit`` unless the ``EHCSIM_NUMBA`` environment
variable disables it (``0``/``false``/``no``/``off``) or numba is missing,
in which case the very same function runs as interpreted Python over the
same arrays — bit-identical results either way, which the test suite
enforces against the reference engine.

The kernels trade generality for speed: no event logging, no invariant
checking, and addresses/PCs must fit in signed 64-bit space. Anything else
runs on the reference engine.
"""

from __future__ import annotations

import os

import numpy as np

from .engine import CacheGeometry, SimStats
from .policies import brrip_draws
from .sampler import SAMPLE_PERIOD, WINDOW_SLOTS_PER_WAY
from .trace import Trace

_env = os.environ.get("EHCSIM_NUMBA", "1").strip().lower()
_want_jit = _env not in ("0", "false", "no", "off")

JIT_ENABLED = False
if _want_jit:
    try:
        from numba import njit as _njit

        JIT_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass


def _jit(fn):
    if JIT_ENABLED:
        return _njit(cache=True)(fn)
    return fn


_POLICY_IDS = {
    "lru": 0,
    "srrip": 1,
    "brrip": 2,
    "drrip": 3,
    "ship": 4,
    "hawkeye": 5,
    "ehc": 6,
}

#: Addresses/PCs at or above this cannot safely be viewed as int64.
_INT64_LIMIT = 1 << 62


@_jit
def _xor_fold(value, bits):
    mask = (1 << bits) - 1
    out = 0
    while value != 0:
        out ^= value & mask
        value >>= bits
    return out


@_jit
def _region_push(region_tag, region_ring, region_count, region_head, addr, hits):
    rid = addr >> 17
    idx = _xor_fold(rid, 10)
    if region_tag[idx] != rid:
        region_tag[idx] = rid
        region_count[idx] = 0
        region_head[idx] = 0
    h = region_head[idx]
    region_ring[idx, h] = hits
    region_head[idx] = (h + 1) % 4
    if region_count[idx] < 4:
        region_count[idx] += 1


@_jit
def _region_expected(region_tag, region_ring, region_count, addr):
    rid = addr >> 17
    idx = _xor_fold(rid, 10)
    cnt = region_count[idx]
    if region_tag[idx] != rid or cnt == 0:
        return 1
    total = 0
    for k in range(cnt):
        total += region_ring[idx, k]
    avg = (2 * total + cnt) // (2 * cnt)
    if avg > 7:
        avg = 7
    return avg


@_jit
def _simulate(
    addr, pc,
    num_sets, assoc, block_bits, set_bits,
    policy_id, draws, aging, fixed_init, sample_period,
    valid, tagv, rrpv, efh, stamp, lastpc,
    sig, outcome, shct,
    psel_box, ins_box, pc_tbl,
    region_tag, region_ring, region_count, region_head,
    occ, occ_base, occ_len,
    slot_live, slot_tag, slot_pc, slot_addr, slot_pos, slot_hits,
    hit_flags, out,
):
    n = addr.shape[0]
    cap = occ.shape[1]
    set_mask = num_sets - 1
    for i in range(n):
        a = addr[i]
        p = pc[i]
        block = a >> block_bits
        si = block & set_mask

        # Sampled-set MIN emulation feeding the hawkeye/ehc predictors.
        if policy_id >= 5 and si % sample_period == 0:
            s = si // sample_period
            t = block >> set_bits
            hit_slot = -1
            for k in range(cap):
                if slot_live[s, k] == 1 and slot_tag[s, k] == t:
                    hit_slot = k
                    break
            carried_hits = 0
            ent_addr = a
            if hit_slot < 0:
                out[8] += 1
            else:
                pos0 = slot_pos[s, hit_slot]
                end = occ_base[s] + occ_len[s]
                ok = True
                for j in range(pos0, end):
                    if occ[s, j % cap] >= assoc:
                        ok = False
                        break
                fi = _xor_fold(slot_pc[s, hit_slot], 13)
                if ok:
                    out[9] += 1
                    for j in range(pos0, end):
                        occ[s, j % cap] += 1
                    carried_hits = slot_hits[s, hit_slot] + 1
                    if pc_tbl[fi] < 7:
                        pc_tbl[fi] += 1
                else:
                    out[10] += 1
                    if pc_tbl[fi] > 0:
                        pc_tbl[fi] -= 1
                    _region_push(region_tag, region_ring, region_count,
                                 region_head, slot_addr[s, hit_slot],
                                 slot_hits[s, hit_slot])
                ent_addr = slot_addr[s, hit_slot]
                slot_live[s, hit_slot] = 0
            new_pos = occ_base[s] + occ_len[s]
            k2 = new_pos % cap
            if occ_len[s] == cap:
                if slot_live[s, k2] == 1:
                    _region_push(region_tag, region_ring, region_count,
                                 region_head, slot_addr[s, k2], slot_hits[s, k2])
                    slot_live[s, k2] = 0
                occ_base[s] += 1
            else:
                occ_len[s] += 1
            occ[s, k2] = 0
            slot_live[s, k2] = 1
            slot_tag[s, k2] = t
            slot_pc[s, k2] = p
            slot_addr[s, k2] = ent_addr
            slot_pos[s, k2] = new_pos
            slot_hits[s, k2] = carried_hits

        out[0] += 1
        way = -1
        for w in range(assoc):
            if valid[si, w] == 1 and tagv[si, w] == block:
                way = w
                break

        if way >= 0:
            out[1] += 1
            hit_flags[i] = 1
            stamp[si, way] = i
            lastpc[si, way] = p
            if 1 <= policy_id <= 3:
                rrpv[si, way] = 0
            elif policy_id == 4:
                rrpv[si, way] = 0
                outcome[si, way] = 1
            elif policy_id >= 5:
                if policy_id == 6 and efh[si, way] > 0:
                    efh[si, way] -= 1
                fi = _xor_fold(p, 13)
                rrpv[si, way] = 0 if pc_tbl[fi] >= 4 else 7
            continue

        out[2] += 1
        way = -1
        for w in range(assoc):
            if valid[si, w] == 0:
                way = w
                break
        if way < 0:
            no_averse = False
            if policy_id == 0:
                way = 0
                for w in range(1, assoc):
                    if stamp[si, w] < stamp[si, way]:
                        way = w
            elif policy_id <= 4:
                while way < 0:
                    for w in range(assoc):
                        if rrpv[si, w] == 7:
                            way = w
                            break
                    if way < 0:
                        for w in range(assoc):
                            rrpv[si, w] += 1
                if policy_id == 4:
                    sgv = sig[si, way]
                    if outcome[si, way] == 1:
                        if shct[sgv] < 7:
                            shct[sgv] += 1
                    elif shct[sgv] > 0:
                        shct[sgv] -= 1
            else:
                found = -1
                best = 0
                for w in range(assoc):
                    if rrpv[si, w] == 7:
                        found = w
                        break
                    if policy_id == 5:
                        if rrpv[si, w] > rrpv[si, best]:
                            best = w
                    elif efh[si, w] - rrpv[si, w] < efh[si, best] - rrpv[si, best]:
                        best = w
                if found >= 0:
                    way = found
                else:
                    way = best
                    no_averse = True
                    fi = _xor_fold(lastpc[si, way], 13)
                    if pc_tbl[fi] > 0:
                        pc_tbl[fi] -= 1
            out[3] += 1
            out[4] += 1
            if no_averse:
                out[5] += 1

        valid[si, way] = 1
        tagv[si, way] = block
        stamp[si, way] = i
        lastpc[si, way] = p
        if policy_id == 1:
            rrpv[si, way] = 6
        elif policy_id == 2:
            d = draws[ins_box[0]]
            ins_box[0] += 1
            if d == 1:
                out[6] += 1
                rrpv[si, way] = 6
            else:
                rrpv[si, way] = 7
        elif policy_id == 3:
            off = si % 64
            if off == 0:
                if psel_box[0] < 1023:
                    psel_box[0] += 1
            elif off == 33:
                if psel_box[0] > 0:
                    psel_box[0] -= 1
            if off == 33 or (off != 0 and psel_box[0] >= 512):
                d = draws[ins_box[0]]
                ins_box[0] += 1
                rrpv[si, way] = 6 if d == 1 else 7
            else:
                rrpv[si, way] = 6
        elif policy_id == 4:
            sgv = _xor_fold(p, 14)
            sig[si, way] = sgv
            outcome[si, way] = 0
            rrpv[si, way] = 7 if shct[sgv] == 0 else 6
        elif policy_id >= 5:
            fi = _xor_fold(p, 13)
            if pc_tbl[fi] >= 4:
                if aging == 1:
                    for w2 in range(assoc):
                        if w2 != way and valid[si, w2] == 1 and rrpv[si, w2] < 6:
                            rrpv[si, w2] += 1
                rrpv[si, way] = 0
            else:
                rrpv[si, way] = 7
            if policy_id == 6:
                if fixed_init >= 0:
                    efh[si, way] = fixed_init
                else:
                    efh[si, way] = _region_expected(
                        region_tag, region_ring, region_count, a
                    )

    out[7] = psel_box[0]
    return 0


def supports(trace: Trace, name: str) -> bool:
    """Whether the kernel path can reproduce this run exactly."""
    if name not in _POLICY_IDS:
        return False
    if len(trace) == 0:
        return True
    return (
        int(trace.addr.max()) < _INT64_LIMIT and int(trace.pc.max()) < _INT64_LIMIT
    )


def run(
    trace: Trace,
    name: str,
    geom: CacheGeometry,
    seed: int,
    record_hits: bool = False,
    ehc_fixed_init: int | None = None,
    aging: bool = True,
):
    """Kernel-path counterpart of :func:`ehcsim.engine.simulate`."""
    policy_id = _POLICY_IDS[name]
    n = len(trace)
    num_sets, assoc = geom.num_sets, geom.associativity

    addr = trace.addr.astype(np.int64)
    pc = trace.pc.astype(np.int64)
    if name in ("brrip", "drrip"):
        draws = brrip_draws(seed, n)
    else:
        draws = np.zeros(1, dtype=np.uint8)

    valid = np.zeros((num_sets, assoc), dtype=np.int64)
    tagv = np.zeros((num_sets, assoc), dtype=np.int64)
    rrpv = np.zeros((num_sets, assoc), dtype=np.int64)
    efh = np.zeros((num_sets, assoc), dtype=np.int64)
    stamp = np.zeros((num_sets, assoc), dtype=np.int64)
    lastpc = np.zeros((num_sets, assoc), dtype=np.int64)
    sig = np.zeros((num_sets, assoc), dtype=np.int64)
    outcome = np.zeros((num_sets, assoc), dtype=np.int64)
    shct = np.zeros(1 << 14, dtype=np.int64)
    psel_box = np.array([512], dtype=np.int64)
    ins_box = np.zeros(1, dtype=np.int64)
    pc_tbl = np.full(1 << 13, 4, dtype=np.int64)
    region_tag = np.full(1 << 10, -1, dtype=np.int64)
    region_ring = np.zeros((1 << 10, 4), dtype=np.int64)
    region_count = np.zeros(1 << 10, dtype=np.int64)
    region_head = np.zeros(1 << 10, dtype=np.int64)

    nsamp = (num_sets + SAMPLE_PERIOD - 1) // SAMPLE_PERIOD
    cap = WINDOW_SLOTS_PER_WAY * assoc
    occ = np.zeros((nsamp, cap), dtype=np.int64)
    occ_base = np.zeros(nsamp, dtype=np.int64)
    occ_len = np.zeros(nsamp, dtype=np.int64)
    slot_live = np.zeros((nsamp, cap), dtype=np.int64)
    slot_tag = np.zeros((nsamp, cap), dtype=np.int64)
    slot_pc = np.zeros((nsamp, cap), dtype=np.int64)
    slot_addr = np.zeros((nsamp, cap), dtype=np.int64)
    slot_pos = np.zeros((nsamp, cap), dtype=np.int64)
    slot_hits = np.zeros((nsamp, cap), dtype=np.int64)

    hit_flags = np.zeros(n, dtype=np.uint8)
    out = np.zeros(12, dtype=np.int64)

    _simulate(
        addr, pc,
        num_sets, assoc, geom.block_offset_bits, geom.set_bits,
        policy_id, draws, 1 if aging else 0,
        -1 if ehc_fixed_init is None else int(ehc_fixed_init),
        SAMPLE_PERIOD,
        valid, tagv, rrpv, efh, stamp, lastpc,
        sig, outcome, shct,
        psel_box, ins_box, pc_tbl,
        region_tag, region_ring, region_count, region_head,
        occ, occ_base, occ_len,
        slot_live, slot_tag, slot_pc, slot_addr, slot_pos, slot_hits,
        hit_flags, out,
    )

    stats = SimStats(
        accesses=int(out[0]),
        hits=int(out[1]),
        misses=int(out[2]),
        evictions=int(out[3]),
        replacements_total=int(out[4]),
        replacements_no_averse=int(out[5]),
    )
    if name == "brrip":
        stats.per_policy["long_inserts"] = int(out[6])
    elif name == "drrip":
        stats.per_policy["psel"] = int(out[7])
    elif name in ("hawkeye", "ehc"):
        stats.per_policy["optgen_cold"] = int(out[8])
        stats.per_policy["optgen_hit"] = int(out[9])
        stats.per_policy["optgen_miss"] = int(out[10])
    return stats, None, (hit_flags if record_hits else None)
