"""Policy registry and the single entry point for running a simulation.

``run_policy`` picks between the two execution paths: the fused numba
kernels (fast, stats/hit-flags only) and the reference engine (slower, but
supports event logging and arbitrary policy objects). ``backend="auto"``
uses the kernels whenever they can express the request.
"""

from __future__ import annotations

from . import _kernels
from .belady import EhcPolicy, HawkeyePolicy
from .engine import CacheGeometry, DEFAULT_GEOMETRY, simulate
from .errors import UnknownPolicy
from .policies import BrripPolicy, DrripPolicy, LruPolicy, ShipPolicy, SrripPolicy
from .trace import Trace

POLICY_CLASSES = {
    "lru": LruPolicy,
    "srrip": SrripPolicy,
    "brrip": BrripPolicy,
    "drrip": DrripPolicy,
    "ship": ShipPolicy,
    "hawkeye": HawkeyePolicy,
    "ehc": EhcPolicy,
}

POLICY_NAMES = tuple(POLICY_CLASSES)

DEFAULT_SEED = 42


def make_policy(
    name: str,
    geom: CacheGeometry = DEFAULT_GEOMETRY,
    seed: int = DEFAULT_SEED,
    ehc_fixed_init: int | None = None,
    aging: bool = True,
):
    try:
        cls = POLICY_CLASSES[name]
    except KeyError:
        raise UnknownPolicy(
            f"unknown policy {name!r} (choose from {', '.join(POLICY_NAMES)})"
        ) from None
    if cls is EhcPolicy:
        return cls(geom, seed=seed, aging=aging, fixed_init=ehc_fixed_init)
    if cls is HawkeyePolicy:
        return cls(geom, seed=seed, aging=aging)
    return cls(geom, seed=seed)


def run_policy(
    trace: Trace,
    name: str,
    geom: CacheGeometry = DEFAULT_GEOMETRY,
    seed: int = DEFAULT_SEED,
    record_events: bool = False,
    record_hits: bool = False,
    backend: str = "auto",
    check: bool = False,
    ehc_fixed_init: int | None = None,
    aging: bool = True,
):
    """Simulate ``trace`` under the named policy; returns (stats, events, hit_flags)."""
    if name not in POLICY_CLASSES:
        raise UnknownPolicy(
            f"unknown policy {name!r} (choose from {', '.join(POLICY_NAMES)})"
        )
    want_kernel = backend == "kernel" or (
        backend == "auto" and not record_events and not check
    )
    if want_kernel and _kernels.supports(trace, name):
        return _kernels.run(
            trace, name, geom, seed,
            record_hits=record_hits,
            ehc_fixed_init=ehc_fixed_init,
            aging=aging,
        )
    if backend == "kernel":
        raise UnknownPolicy(f"kernel backend cannot run policy {name!r} on this trace")
    policy = make_policy(name, geom, seed=seed, ehc_fixed_init=ehc_fixed_init, aging=aging)
    return simulate(
        trace, policy, geom,
        record_events=record_events,
        record_hits=record_hits,
        check=check,
    )
