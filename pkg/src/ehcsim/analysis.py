"""Metrics, CSV reports, and the experiment drivers behind the CLI."""

from __future__ import annotations

import io

import numpy as np

from . import minoracle
from .engine import CacheGeometry, DEFAULT_GEOMETRY, SimStats
from .errors import DataError, UsageError, ZeroInstructions
from .runner import DEFAULT_SEED, POLICY_NAMES, run_policy
from .trace import Trace


def mpki(stats: SimStats, instruction_count: int) -> float:
    """Misses per thousand instructions."""
    if instruction_count <= 0:
        raise ZeroInstructions("instruction count must be positive")
    return stats.misses * 1000.0 / instruction_count


def mpki_reduction(policy_mpki: float, lru_mpki: float) -> float:
    """Fractional MPKI reduction relative to LRU (0 when LRU never misses)."""
    if lru_mpki == 0.0:
        return 0.0
    return 1.0 - policy_mpki / lru_mpki


def no_averse_fraction(stats: SimStats) -> float:
    """Share of replacements made while no cache-averse block was present."""
    if stats.replacements_total == 0:
        return 0.0
    return stats.replacements_no_averse / stats.replacements_total


def _fmt(x) -> str:
    return "%.6g" % float(x)


class Report:
    """Named tables of (label, numeric columns) with CSV in/out.

    The CSV layout is line-oriented: ``# key=value`` provenance comments,
    then per table one ``# table=<name>`` marker, a header row, and data
    rows whose first field is a label and the rest numbers formatted to six
    significant digits. Emission is deterministic (insertion order).
    """

    def __init__(self, meta: dict | None = None):
        self.meta: dict[str, str] = {k: str(v) for k, v in (meta or {}).items()}
        self.tables: dict[str, tuple[list[str], list[tuple]]] = {}

    def add_table(self, name: str, columns: list[str], rows: list[tuple]) -> None:
        for row in rows:
            if len(row) != len(columns) + 1:
                raise ValueError(f"table {name!r}: row width != column count + 1")
        self.tables[name] = (list(columns), [tuple(r) for r in rows])

    def to_csv(self) -> str:
        out = io.StringIO()
        for k, v in self.meta.items():
            out.write(f"# {k}={v}\n")
        for name, (columns, rows) in self.tables.items():
            out.write(f"# table={name}\n")
            out.write(",".join(["label"] + columns) + "\n")
            for row in rows:
                out.write(",".join([str(row[0])] + [_fmt(x) for x in row[1:]]) + "\n")
        return out.getvalue()

    def write(self, path) -> None:
        with open(path, "w") as f:
            f.write(self.to_csv())

    @classmethod
    def parse(cls, text: str) -> "Report":
        report = cls()
        name, columns, rows = None, None, None

        def close():
            if name is not None:
                report.add_table(name, columns, rows)

        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("# table="):
                close()
                name, columns, rows = line[len("# table="):], None, []
            elif line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                report.meta[key] = value
            elif name is not None and columns is None:
                columns = line.split(",")[1:]
            elif name is not None:
                fields = line.split(",")
                rows.append(tuple([fields[0]] + [float(x) for x in fields[1:]]))
            else:
                raise DataError("report CSV: data before any table header")
        close()
        return report


def _base_meta(geom: CacheGeometry, seed: int) -> dict:
    return {
        "seed": seed,
        "sets": geom.num_sets,
        "ways": geom.associativity,
        "block_bits": geom.block_offset_bits,
    }


def run_report(
    trace: Trace,
    policy: str,
    geom: CacheGeometry = DEFAULT_GEOMETRY,
    seed: int = DEFAULT_SEED,
    **kwargs,
) -> tuple[Report, SimStats, list | None]:
    """Single-policy run: stats table plus any per-policy counters."""
    stats, events, _ = run_policy(trace, policy, geom, seed=seed, **kwargs)
    report = Report(_base_meta(geom, seed) | {"policy": policy})
    report.add_table(
        "run",
        ["accesses", "hits", "misses", "mpki", "no_averse_fraction"],
        [(
            policy,
            stats.accesses,
            stats.hits,
            stats.misses,
            mpki(stats, trace.instruction_count),
            no_averse_fraction(stats),
        )],
    )
    if stats.per_policy:
        report.add_table(
            "counters",
            ["value"],
            [(k, v) for k, v in sorted(stats.per_policy.items())],
        )
    return report, stats, events


def compare(
    trace: Trace,
    policies,
    geom: CacheGeometry = DEFAULT_GEOMETRY,
    seed: int = DEFAULT_SEED,
    events: bool = False,
    backend: str = "auto",
) -> Report:
    """Side-by-side policy table with MPKI reduction against LRU.

    LRU is simulated (and reported) even when absent from ``policies`` so
    the reduction column always has its baseline. With ``events`` the
    victim-quality mean rank column is populated (reference engine).
    """
    names = list(policies)
    if "lru" not in names:
        names.insert(0, "lru")

    columns = ["hits", "misses", "mpki", "mpki_reduction_vs_lru", "no_averse_fraction"]
    if events:
        columns.append("mean_victim_rank")

    results = {}
    for name in names:
        stats, evs, _ = run_policy(
            trace, name, geom, seed=seed, record_events=events, backend=backend
        )
        results[name] = (stats, evs)

    lru_mpki = mpki(results["lru"][0], trace.instruction_count)
    report = Report(_base_meta(geom, seed) | {"policies": " ".join(names)})
    rows = []
    for name in names:
        stats, evs = results[name]
        m = mpki(stats, trace.instruction_count)
        row = [
            name,
            stats.hits,
            stats.misses,
            m,
            mpki_reduction(m, lru_mpki),
            no_averse_fraction(stats),
        ]
        if events:
            row.append(minoracle.mean_rank(minoracle.victim_quality(evs, trace, geom)))
        rows.append(tuple(row))
    report.add_table("compare", columns, rows)
    return report


REPORT_KINDS = ("no-averse", "hitcount-block", "hitcount-region", "victim-quality", "min-gap")

_BUCKET_LABELS = ("0", "1", "2", "3", "4+")


def _histogram_table(report: Report, name: str, labels, hist) -> None:
    total = int(np.sum(hist))
    rows = [
        (label, int(count), (int(count) / total if total else 0.0))
        for label, count in zip(labels, hist)
    ]
    report.add_table(name, ["count", "fraction"], rows)


def analyze(
    trace: Trace,
    kind: str,
    policy: str = "ehc",
    geom: CacheGeometry = DEFAULT_GEOMETRY,
    seed: int = DEFAULT_SEED,
) -> Report:
    """Replacement-quality instruments, one report kind at a time.

    ``no-averse``: how often the policy replaced with no averse candidate.
    ``hitcount-block``/``hitcount-region``: prediction-error histograms of
    per-residency hit counts under offline MIN. ``victim-quality``: rank of
    the policy's victims by next use. ``min-gap``: the policy's miss counts
    next to both MIN variants.
    """
    report = Report(_base_meta(geom, seed) | {"report": kind, "policy": policy})
    if kind == "no-averse":
        stats, _, _ = run_policy(trace, policy, geom, seed=seed)
        report.add_table(
            "no_averse",
            ["replacements", "no_averse", "fraction"],
            [(
                policy,
                stats.replacements_total,
                stats.replacements_no_averse,
                no_averse_fraction(stats),
            )],
        )
    elif kind in ("hitcount-block", "hitcount-region"):
        _, _, residencies, _ = minoracle.simulate_min(trace, geom, bypass=True)
        if kind == "hitcount-block":
            hist = minoracle.per_block_prediction_error(residencies)
        else:
            hist = minoracle.per_region_prediction_error(residencies)
        _histogram_table(report, "prediction_error", _BUCKET_LABELS, hist)
    elif kind == "victim-quality":
        _, events, _ = run_policy(trace, policy, geom, seed=seed, record_events=True)
        hist = minoracle.victim_quality(events, trace, geom)
        _histogram_table(report, "victim_rank", [str(r) for r in range(len(hist))], hist)
        report.add_table(
            "summary", ["mean_rank"], [(policy, minoracle.mean_rank(hist))]
        )
    elif kind == "min-gap":
        stats, _, _ = run_policy(trace, policy, geom, seed=seed)
        nobyp, _, _, _ = minoracle.simulate_min(trace, geom, bypass=False)
        byp, _, _, _ = minoracle.simulate_min(trace, geom, bypass=True)
        rows = [
            (label, s.hits, s.misses, mpki(s, trace.instruction_count))
            for label, s in ((policy, stats), ("min-nobypass", nobyp), ("min-bypass", byp))
        ]
        report.add_table("min_gap", ["hits", "misses", "mpki"], rows)
    else:
        raise UsageError(f"unknown report kind {kind!r}")
    return report
