"""Deterministic multi-replica simulation of the register implementations.

A Schedule is a totally ordered list of writes, state exchanges and reads.
run_schedule drives four models in lockstep — the eager register, the lazy
register, the classic per-value-vector register, and the event-graph oracle —
and reports every read, convergence per variant, and conformance against the
oracle. Sends deliver a snapshot of the sender's state at that step.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from . import register as reg
from .oracle import EventGraph, WriteEvent, observed_subgraph, resolved_values
from .orders import (
    ExplicitRelation,
    LwwValue,
    OrderKind,
    ValueOrder,
    empty_order,
    explicit_relation_order,
    lww_order,
    total_comparator_order,
)

VARIANTS = ("eager", "lazy", "classic")
MODELS = VARIANTS + ("oracle",)


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class WriteStep:
    replica: str
    value: Any


@dataclass(frozen=True)
class SendStep:
    src: str
    dst: str


@dataclass(frozen=True)
class ReadStep:
    replica: str
    expect: Optional[FrozenSet] = None


Step = Union[WriteStep, SendStep, ReadStep]


@dataclass(frozen=True)
class LwwStamp:
    """A scenario-level LWW write: payload plus the client-chosen timestamp.

    Writer and sequence are attached when the write is issued.
    """

    payload: str
    timestamp: int

    def __str__(self) -> str:
        return f"{self.payload}@{self.timestamp}"


@dataclass(frozen=True)
class Schedule:
    replicas: Tuple[str, ...]
    steps: Tuple[Step, ...]

    def validate(self, order: Optional[ValueOrder] = None) -> None:
        if not self.replicas:
            raise ScheduleError("schedule declares no replicas")
        if len(set(self.replicas)) != len(self.replicas):
            raise ScheduleError("duplicate replica ids")
        known = set(self.replicas)
        for i, step in enumerate(self.steps):
            if isinstance(step, WriteStep):
                if step.replica not in known:
                    raise ScheduleError(f"step {i}: unknown replica {step.replica!r}")
                if order is not None:
                    _check_write_value(i, step.value, order)
            elif isinstance(step, SendStep):
                if step.src not in known or step.dst not in known:
                    raise ScheduleError(f"step {i}: unknown replica in send")
                if step.src == step.dst:
                    raise ScheduleError(f"step {i}: send to self")
            elif isinstance(step, ReadStep):
                if step.replica not in known:
                    raise ScheduleError(f"step {i}: unknown replica {step.replica!r}")
            else:
                raise ScheduleError(f"step {i}: unknown step type {type(step).__name__}")


@dataclass(frozen=True)
class StepRead:
    index: int
    replica: str
    reads: Dict[str, frozenset]
    expected: Optional[frozenset] = None
    expect_ok: Optional[bool] = None


@dataclass(frozen=True)
class Conformance:
    ok: bool
    first_divergence: Optional[Tuple[int, str]] = None  # (step index, replica)


@dataclass(frozen=True)
class RunReport:
    schedule: Schedule
    step_reads: Tuple[StepRead, ...]
    final_reads: Dict[str, Dict[str, frozenset]]  # model -> replica -> values
    final_states: Dict[str, Dict[str, Any]]  # variant -> replica -> state
    converged: Dict[str, bool]
    fully_exchanged: bool
    conformance: Dict[str, Conformance]
    state_log: Tuple = ()

    @property
    def expect_failures(self) -> Tuple[StepRead, ...]:
        return tuple(sr for sr in self.step_reads if sr.expect_ok is False)


@dataclass(frozen=True)
class ConvergenceVerdict:
    converged: Dict[str, bool]
    fully_exchanged: bool

    @property
    def all_converged(self) -> bool:
        return all(self.converged.values())


@dataclass
class _OracleTrack:
    """Replays the run as an explicit event graph (ids are dots)."""

    events: List[WriteEvent] = field(default_factory=list)
    hb: set = field(default_factory=set)
    observed: Dict[str, frozenset] = field(default_factory=dict)
    write_count: Dict[str, int] = field(default_factory=dict)

    def record_write(self, replica: str, value: Any) -> None:
        n = self.write_count.get(replica, 0) + 1
        self.write_count[replica] = n
        event_id = (replica, n)
        for prior in self.observed[replica]:
            self.hb.add((prior, event_id))
        self.events.append(WriteEvent(event_id, replica, value))
        self.observed[replica] = self.observed[replica] | {event_id}

    def record_send(self, src: str, dst: str) -> None:
        self.observed[dst] = self.observed[dst] | self.observed[src]

    def read(self, replica: str, order: ValueOrder) -> frozenset:
        graph = EventGraph(self.events, self.hb)
        local = observed_subgraph(graph, self.observed[replica])
        return frozenset(resolved_values(local, order))


def run_schedule(schedule: Schedule, order: ValueOrder, collect_states: bool = False) -> RunReport:
    """Execute the schedule against all four models and report every read."""
    schedule.validate(order)
    eager = {r: reg.initial(order) for r in schedule.replicas}
    lazy = {r: reg.initial(order) for r in schedule.replicas}
    classic = {r: reg.classic_initial() for r in schedule.replicas}
    oracle = _OracleTrack(observed={r: frozenset() for r in schedule.replicas})

    step_reads: List[StepRead] = []
    state_log: List[tuple] = []
    divergence: Dict[str, Optional[Tuple[int, str]]] = {v: None for v in VARIANTS}

    def reads_at(replica: str) -> Dict[str, frozenset]:
        return {
            "eager": frozenset(reg.read(eager[replica])),
            "lazy": frozenset(reg.lazy_read(lazy[replica])),
            "classic": frozenset(reg.classic_read(classic[replica], order)),
            "oracle": oracle.read(replica, order),
        }

    def note_divergence(index: int, replica: str, reads: Dict[str, frozenset]) -> None:
        for variant in VARIANTS:
            if divergence[variant] is None and reads[variant] != reads["oracle"]:
                divergence[variant] = (index, replica)

    for i, step in enumerate(schedule.steps):
        if isinstance(step, WriteStep):
            value = _materialize(step, order, oracle.write_count)
            eager[step.replica] = reg.write(eager[step.replica], step.replica, value)
            lazy[step.replica] = reg.write(lazy[step.replica], step.replica, value)
            classic[step.replica] = reg.classic_write(classic[step.replica], step.replica, value)
            oracle.record_write(step.replica, value)
        elif isinstance(step, SendStep):
            eager[step.dst] = reg.merge(eager[step.dst], eager[step.src])
            lazy[step.dst] = reg.lazy_merge(lazy[step.dst], lazy[step.src])
            classic[step.dst] = reg.classic_merge(classic[step.dst], classic[step.src])
            oracle.record_send(step.src, step.dst)
        else:
            reads = reads_at(step.replica)
            note_divergence(i, step.replica, reads)
            expected = step.expect
            ok = None
            if expected is not None:
                ok = all(_readout(reads[v], order) == set(expected) for v in MODELS)
            step_reads.append(StepRead(i, step.replica, reads, expected, ok))
        if collect_states:
            for r in schedule.replicas:
                state_log.append((i, r, eager[r], lazy[r], classic[r]))

    final_reads: Dict[str, Dict[str, frozenset]] = {m: {} for m in MODELS}
    n_steps = len(schedule.steps)
    for r in schedule.replicas:
        reads = reads_at(r)
        note_divergence(n_steps, r, reads)
        for m in MODELS:
            final_reads[m][r] = reads[m]

    converged = {
        m: len({final_reads[m][r] for r in schedule.replicas}) == 1 for m in MODELS
    }
    conformance = {
        v: Conformance(divergence[v] is None, divergence[v]) for v in VARIANTS
    }
    return RunReport(
        schedule=schedule,
        step_reads=tuple(step_reads),
        final_reads=final_reads,
        final_states={
            "eager": dict(eager), "lazy": dict(lazy), "classic": dict(classic)
        },
        converged=converged,
        fully_exchanged=_fully_exchanged(schedule),
        conformance=conformance,
        state_log=tuple(state_log),
    )


def check_convergence(report: RunReport) -> ConvergenceVerdict:
    """Per-variant convergence of the final reads, plus the exchange flag."""
    return ConvergenceVerdict(dict(report.converged), report.fully_exchanged)


def random_schedule(
    seed: int,
    replica_count: int,
    step_count: int,
    value_domain: Sequence,
    read_fraction: float = 0.2,
) -> Schedule:
    """Seed-deterministic mix of writes, sends and reads.

    Always ends with two full exchange rounds (every replica sends to every
    other) followed by one read per replica, so convergence is checkable.
    """
    if replica_count < 1:
        raise ScheduleError("replica_count must be at least 1")
    if step_count < 0:
        raise ScheduleError("step_count must be non-negative")
    if not value_domain:
        raise ScheduleError("value domain is empty")
    rng = random.Random(seed)
    replicas = tuple(_replica_name(i) for i in range(replica_count))
    steps: List[Step] = []
    for _ in range(step_count):
        roll = rng.random()
        if roll < read_fraction:
            steps.append(ReadStep(rng.choice(replicas)))
        elif roll < read_fraction + 0.3 and replica_count > 1:
            src, dst = rng.sample(replicas, 2)
            steps.append(SendStep(src, dst))
        else:
            steps.append(WriteStep(rng.choice(replicas), rng.choice(list(value_domain))))
    for _ in range(2):
        for src in replicas:
            for dst in replicas:
                if src != dst:
                    steps.append(SendStep(src, dst))
    steps.extend(ReadStep(r) for r in replicas)
    return Schedule(replicas, tuple(steps))


@dataclass(frozen=True)
class FuzzCase:
    seed: int
    order: ValueOrder
    schedule: Schedule
    label: str


def fuzz_case(seed: int, replica_count: Optional[int] = None, step_count: Optional[int] = None) -> FuzzCase:
    """Derive one randomized run: an order of one of the four kinds plus a schedule."""
    rng = random.Random(f"case-{seed}")
    replica_count = replica_count or rng.randint(2, 5)
    step_count = step_count if step_count is not None else rng.randint(5, 25)
    domain_size = rng.randint(3, 6)
    kind = rng.choice(tuple(OrderKind))
    tokens = tuple(f"v{i}" for i in range(domain_size))
    if kind is OrderKind.EMPTY:
        order, domain = empty_order(), tokens
    elif kind is OrderKind.EXPLICIT_RELATION:
        ranked = list(tokens)
        rng.shuffle(ranked)
        edges = [
            (ranked[i], ranked[j])
            for i in range(domain_size)
            for j in range(i + 1, domain_size)
            if rng.random() < 0.4
        ]
        order, domain = explicit_relation_order(ExplicitRelation.of(tokens, edges)), tokens
    elif kind is OrderKind.TOTAL_COMPARATOR:
        ranks = {tok: i for i, tok in enumerate(rng.sample(tokens, len(tokens)))}
        order, domain = total_comparator_order(ranks.__getitem__, tokens), tokens
    else:
        order = lww_order()
        domain = tuple(
            LwwStamp(f"p{i % domain_size}", rng.randint(0, 9))
            for i in range(domain_size * 2)
        )
    schedule = random_schedule(seed, replica_count, step_count, domain)
    return FuzzCase(seed, order, schedule, kind.value)


def _replica_name(i: int) -> str:
    # A..Z, then R26, R27, ...
    return chr(ord("A") + i) if i < 26 else f"R{i}"


def _materialize(step: WriteStep, order: ValueOrder, write_count: Dict[str, int]) -> Any:
    if isinstance(step.value, LwwStamp):
        seq = write_count.get(step.replica, 0) + 1
        return LwwValue(step.value.payload, step.value.timestamp, step.replica, seq)
    return step.value


def _readout(values: frozenset, order: ValueOrder) -> set:
    """Project reads for expectation checks; LWW values compare as payload@ts."""
    if order.kind is OrderKind.LWW_TIMESTAMPED:
        return {LwwStamp(v.payload, v.timestamp) for v in values}
    return set(values)


def _check_write_value(index: int, value: Any, order: ValueOrder) -> None:
    if order.kind is OrderKind.LWW_TIMESTAMPED:
        if not isinstance(value, LwwStamp):
            raise ScheduleError(f"step {index}: lww runs write LwwStamp values, got {value!r}")
        return
    if isinstance(value, LwwStamp):
        raise ScheduleError(f"step {index}: stamped value {value} under a non-lww order")
    if order.domain is not None and value not in order.domain:
        raise ScheduleError(f"step {index}: value {value!r} outside the order's domain")


def _fully_exchanged(schedule: Schedule) -> bool:
    if len(schedule.replicas) < 2:
        return True
    last_write = max(
        (i for i, s in enumerate(schedule.steps) if isinstance(s, WriteStep)), default=-1
    )
    needed = {
        (a, b): 2 for a in schedule.replicas for b in schedule.replicas if a != b
    }
    for i, s in enumerate(schedule.steps):
        if i > last_write and isinstance(s, SendStep) and needed.get((s.src, s.dst), 0) > 0:
            needed[s.src, s.dst] -= 1
    return all(v == 0 for v in needed.values())
