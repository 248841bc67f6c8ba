"""Search for schedules where a register variant departs from the oracle.

Two phases, per the library contract: a seeded random screen over short
write/send schedules, and an exhaustive breadth-first enumeration of every
schedule within small bounds. The exhaustive engine has a compiled twin
(built from `_search.pyx`); the pure-Python engine is the fallback, selected
at import time. Set MVREG_PURE_PYTHON=1 to force the fallback.

Witnesses found by either phase are re-run through the real library
(`run_schedule`), shrunk by greedy step deletion while the divergence
persists, and returned as re-runnable schedules ending in one read step.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from . import _search_py
from .orders import OrderKind, ValueOrder
from .sim import (
    LwwStamp,
    ReadStep,
    Schedule,
    SendStep,
    Step,
    WriteStep,
    run_schedule,
)


def _load_engine():
    if os.environ.get("MVREG_PURE_PYTHON"):
        return _search_py
    try:
        from . import _search  # compiled extension, absent on pure installs

        return _search
    except ImportError:
        return _search_py


_engine = _load_engine()


def engine_name() -> str:
    """Which exhaustive-search engine is active: "compiled" or "python"."""
    return _engine.ENGINE


@dataclass(frozen=True)
class Witness:
    """A re-runnable divergence: the schedule's last step reads both answers."""

    schedule: Schedule
    step_index: int
    replica: str
    impl_read: frozenset
    oracle_read: frozenset
    variant: str


@dataclass(frozen=True)
class SearchOutcome:
    witness: Optional[Witness]
    states: int
    complete: bool
    engine: str


def find_divergence_witness(
    order: ValueOrder,
    domain: Sequence,
    replicas: int = 3,
    max_steps: int = 8,
    seeds: Optional[Iterable[int]] = range(200),
    variant: str = "eager",
) -> Optional[Witness]:
    """Random screen first, exhaustive enumeration after; minimal witness or None."""
    if seeds is not None:
        found = random_divergence_search(
            order, domain, seeds, replicas=replicas, max_steps=max_steps, variant=variant
        )
        if found is not None:
            return found
    return exhaustive_divergence_search(
        order, domain, replicas=replicas, max_steps=max_steps, variant=variant
    ).witness


def exhaustive_divergence_search(
    order: ValueOrder,
    domain: Sequence,
    replicas: int = 3,
    max_steps: int = 8,
    variant: str = "eager",
    symmetry: bool = True,
    gc_events: bool = True,
    engine=None,
    progress: Optional[Callable[[int, int, int], None]] = None,
) -> SearchOutcome:
    """Enumerate every write/send schedule within the bounds, checking every state."""
    engine = engine or _engine
    names = _replica_names(replicas)
    dom_masks = _domination_masks(order, domain)
    raw, states, complete = engine.explore(
        replicas,
        dom_masks,
        max_steps,
        lazy_variant=(variant == "lazy"),
        symmetry=symmetry,
        gc_events=gc_events,
        progress=progress,
    )
    witness = None
    if raw is not None:
        actions, replica_ix, _, _, _ = raw
        steps = _actions_to_steps(actions, names, domain)
        witness = _witness_from_steps(steps, names, order, variant, shrink=True)
        if witness is None:
            raise AssertionError("search engine reported a divergence the library does not show")
    return SearchOutcome(witness, states, complete, getattr(engine, "ENGINE", "unknown"))


def random_divergence_search(
    order: ValueOrder,
    domain: Sequence,
    seeds: Iterable[int],
    replicas: int = 3,
    max_steps: int = 8,
    variant: str = "eager",
) -> Optional[Witness]:
    """Run seeded random write/send schedules, probing every step for divergence."""
    names = _replica_names(replicas)
    for seed in seeds:
        rng = random.Random(f"witness-{seed}")
        steps: List[Step] = []
        for _ in range(max_steps):
            if len(names) > 1 and rng.random() < 0.4:
                src, dst = rng.sample(names, 2)
                steps.append(SendStep(src, dst))
            else:
                steps.append(WriteStep(rng.choice(names), rng.choice(list(domain))))
        witness = _witness_from_steps(tuple(steps), names, order, variant, shrink=True)
        if witness is not None:
            return witness
    return None


def shrink_steps(
    steps: Sequence[Step], names: Tuple[str, ...], order: ValueOrder, variant: str
) -> Tuple[Step, ...]:
    """Greedy step deletion while the final-state divergence persists."""
    steps = list(steps)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(steps):
            candidate = steps[:i] + steps[i + 1:]
            if _diverges(candidate, names, order, variant) is not None:
                steps = candidate
                changed = True
            else:
                i += 1
    return tuple(steps)


def _witness_from_steps(
    steps: Sequence[Step],
    names: Tuple[str, ...],
    order: ValueOrder,
    variant: str,
    shrink: bool,
) -> Optional[Witness]:
    body = tuple(s for s in steps if not isinstance(s, ReadStep))
    if _diverges(body, names, order, variant) is None:
        return None
    if shrink:
        body = shrink_steps(body, names, order, variant)
    replica = _diverges(body, names, order, variant)
    schedule = Schedule(names, body + (ReadStep(replica),))
    report = run_schedule(schedule, order)
    last = report.step_reads[-1]
    return Witness(
        schedule=schedule,
        step_index=len(body),
        replica=replica,
        impl_read=last.reads[variant],
        oracle_read=last.reads["oracle"],
        variant=variant,
    )


def _diverges(
    steps: Sequence[Step], names: Tuple[str, ...], order: ValueOrder, variant: str
) -> Optional[str]:
    """Replica whose final read differs from the oracle, or None."""
    report = run_schedule(Schedule(names, tuple(steps)), order)
    for replica in names:
        if report.final_reads[variant][replica] != report.final_reads["oracle"][replica]:
            return replica
    return None


def _replica_names(count: int) -> Tuple[str, ...]:
    return tuple(chr(ord("A") + i) if i < 26 else f"R{i}" for i in range(count))


def _domination_masks(order: ValueOrder, domain: Sequence) -> List[int]:
    """Per-value bitmask of dominating domain values.

    The exhaustive engine identifies values by domain index, so the order must
    be a function of the written value alone. LWW stamps qualify only when
    their timestamps are pairwise distinct (ties would fall back to writer and
    sequence, which vary per write event).
    """
    domain = list(domain)
    if not domain:
        raise ValueError("exhaustive search needs a nonempty value domain")
    if len(domain) > 16:
        raise ValueError("exhaustive search supports at most 16 domain values")
    if order.kind is OrderKind.LWW_TIMESTAMPED:
        if not all(isinstance(v, LwwStamp) for v in domain):
            raise ValueError("lww search domains hold LwwStamp values")
        stamps = [v.timestamp for v in domain]
        if len(set(stamps)) != len(stamps):
            raise ValueError("lww search domains need pairwise distinct timestamps")
        precedes = lambda a, b: a.timestamp < b.timestamp
    else:
        precedes = order.precedes
    masks = []
    for v in domain:
        mask = 0
        for j, w in enumerate(domain):
            if precedes(v, w):
                mask |= 1 << j
        masks.append(mask)
    return masks


def _actions_to_steps(actions, names: Tuple[str, ...], domain: Sequence) -> Tuple[Step, ...]:
    domain = list(domain)
    steps: List[Step] = []
    for kind, x, y in actions:
        if kind == "w":
            steps.append(WriteStep(names[x], domain[y]))
        else:
            steps.append(SendStep(names[x], names[y]))
    return tuple(steps)
