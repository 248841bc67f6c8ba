"""Ground-truth register semantics over an explicit event graph.

Write events plus a happens-before relation determine what a read must
return: the values of causally maximal writes, optionally reduced by a value
order. Everything here is deliberately naive (quadratic scans over closed
relations); it exists to be obviously correct, not fast.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Set, Tuple

from .orders import ValueOrder, resolve_under


class EventGraphError(ValueError):
    pass


class CausalClosureError(EventGraphError):
    """An observation set is missing a happens-before predecessor."""

    def __init__(self, observed_id, missing_id):
        self.observed_id = observed_id
        self.missing_id = missing_id
        super().__init__(
            f"observed set contains {observed_id!r} but not its predecessor {missing_id!r}"
        )


@dataclass(frozen=True)
class WriteEvent:
    id: Hashable
    replica: str
    value: Any


class EventGraph:
    """An immutable set of write events with a strict causality order.

    `hb` may be given as any generating relation; it is closed transitively
    and validated (irreflexive and acyclic, ids distinct and known).
    """

    __slots__ = ("events", "hb", "_by_id")

    def __init__(self, events: Iterable[WriteEvent], hb: Iterable[Tuple[Hashable, Hashable]] = ()):
        events = tuple(events)
        by_id = {}
        for ev in events:
            if ev.id in by_id:
                raise EventGraphError(f"duplicate event id {ev.id!r}")
            by_id[ev.id] = ev
        pairs = set(hb)
        for a, b in pairs:
            if a not in by_id or b not in by_id:
                raise EventGraphError(f"hb pair ({a!r}, {b!r}) references unknown events")
        closed = _close(pairs)
        for a, b in closed:
            if a == b:
                raise EventGraphError(f"hb contains a cycle through {a!r}")
        self.events = events
        self.hb = frozenset(closed)
        self._by_id = by_id

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventGraph):
            return NotImplemented
        return set(self.events) == set(other.events) and self.hb == other.hb

    def __hash__(self) -> int:
        return hash((frozenset(self.events), self.hb))

    def __repr__(self) -> str:
        return f"EventGraph(events={len(self.events)}, hb={len(self.hb)})"

    def event(self, event_id) -> WriteEvent:
        return self._by_id[event_id]

    def ids(self) -> Set[Hashable]:
        return set(self._by_id)


def maximal_values(graph: EventGraph) -> set:
    """Values of writes with no causal successor; one member per distinct value."""
    dominated = {a for a, _ in graph.hb}
    return {ev.value for ev in graph.events if ev.id not in dominated}


def resolved_values(graph: EventGraph, order: ValueOrder) -> set:
    """Maximal values further reduced by the value order."""
    return resolve_under(order, maximal_values(graph))


def observed_subgraph(graph: EventGraph, observed: Iterable[Hashable]) -> EventGraph:
    """Restrict the graph to a causally closed observation set."""
    observed = set(observed)
    unknown = observed - graph.ids()
    if unknown:
        raise EventGraphError(f"observed ids not in graph: {sorted(map(repr, unknown))}")
    for a, b in graph.hb:
        if b in observed and a not in observed:
            raise CausalClosureError(b, a)
    events = [ev for ev in graph.events if ev.id in observed]
    hb = {(a, b) for a, b in graph.hb if a in observed and b in observed}
    return EventGraph(events, hb)


def _close(pairs: Set[tuple]) -> Set[tuple]:
    succ = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    closed = set()
    for start in succ:
        stack = list(succ[start])
        seen = set()
        while stack:
            nxt = stack.pop()
            if nxt in seen:
                continue
            seen.add(nxt)
            closed.add((start, nxt))
            stack.extend(succ.get(nxt, ()))
    return closed
