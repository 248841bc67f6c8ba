"""Strict partial orders on register values and the resolve reducer.

A ValueOrder decides which concurrently written values dominate which
others; resolving a conflict set keeps only its maximal values. Orders are
immutable and their predicates must be pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Hashable, Iterable, Optional, Sequence


class OrderKind(Enum):
    EMPTY = "empty"
    EXPLICIT_RELATION = "partial"
    TOTAL_COMPARATOR = "total"
    LWW_TIMESTAMPED = "lww"


class CycleError(ValueError):
    """An explicit relation contains a cycle and cannot induce a strict order."""

    def __init__(self, cycle: Sequence[Hashable]):
        self.cycle = list(cycle)
        super().__init__("relation contains a cycle: " + " < ".join(map(str, self.cycle)))


@dataclass(frozen=True)
class ExplicitRelation:
    """Application-supplied cover edges (lesser, greater) over a finite domain."""

    domain: tuple
    edges: frozenset

    def __post_init__(self):
        if len(set(self.domain)) != len(self.domain):
            raise ValueError("relation domain contains duplicates")
        members = set(self.domain)
        for lo, hi in self.edges:
            if lo not in members or hi not in members:
                raise ValueError(f"edge ({lo!r}, {hi!r}) leaves the domain")

    @classmethod
    def of(cls, domain: Iterable, edges: Iterable) -> "ExplicitRelation":
        return cls(tuple(domain), frozenset((lo, hi) for lo, hi in edges))


@dataclass(frozen=True)
class LwwValue:
    """A written value stamped with arbitration metadata.

    The (timestamp, writer, sequence) triple is unique per run: writer is the
    issuing replica and sequence its write counter.
    """

    payload: Any
    timestamp: int
    writer: str = ""
    sequence: int = 0

    def arbitration_key(self) -> tuple:
        return (self.timestamp, self.writer, self.sequence)

    def __str__(self) -> str:
        return f"{self.payload}@{self.timestamp}"


@dataclass(frozen=True)
class ValueOrder:
    """A strict partial order `precedes(v, w)` meaning v is dominated by w."""

    kind: OrderKind
    precedes: Callable[[Any, Any], bool] = field(compare=False)
    # Identity payload: closure pairs for explicit relations, the rank key for
    # total comparators. Used for equality so states can insist on one policy.
    spec: Any = None
    domain: Optional[tuple] = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, ValueOrder):
            return NotImplemented
        return (self.kind, self.spec, self.domain) == (other.kind, other.spec, other.domain)

    def __hash__(self) -> int:
        return hash((self.kind, self.spec, self.domain))


@dataclass(frozen=True)
class OrderViolation:
    law: str  # irreflexivity | asymmetry | transitivity | totality
    witness: tuple

    def __str__(self) -> str:
        return f"{self.law} violated at {self.witness}"


@dataclass(frozen=True)
class OrderValidation:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def empty_order() -> ValueOrder:
    """No value dominates any other; resolving is the identity."""
    return ValueOrder(OrderKind.EMPTY, lambda a, b: False)


def explicit_relation_order(rel: ExplicitRelation, validate: bool = True) -> ValueOrder:
    """Order induced by the transitive closure of the relation's cover edges.

    Values outside the domain are incomparable to everything. Raises
    CycleError when the closure would relate a value to itself; pass
    validate=False to build the raw predicate anyway so validate_order can
    report the broken laws as data.
    """
    succ = {v: set() for v in rel.domain}
    for lo, hi in rel.edges:
        succ[lo].add(hi)
    closure = _transitive_closure(rel.domain, succ)
    if validate:
        for v in rel.domain:
            if (v, v) in closure:
                raise CycleError(_find_cycle(rel.domain, succ))
    return ValueOrder(
        OrderKind.EXPLICIT_RELATION,
        lambda a, b: (a, b) in closure,
        spec=frozenset(closure),
        domain=tuple(rel.domain),
    )


def total_comparator_order(key: Callable[[Any], Any], domain: Optional[Iterable] = None) -> ValueOrder:
    """Order by a rank key: precedes(v, w) iff key(v) < key(w).

    The key must rank every pair of used values; distinct values mapping to
    equal ranks break totality, which validate_order reports.
    """
    dom = tuple(domain) if domain is not None else None
    return ValueOrder(
        OrderKind.TOTAL_COMPARATOR,
        lambda a, b: key(a) < key(b),
        spec=key,
        domain=dom,
    )


def lww_order() -> ValueOrder:
    """Total order on LwwValue by (timestamp, writer, sequence)."""
    return ValueOrder(
        OrderKind.LWW_TIMESTAMPED,
        lambda a, b: a.arbitration_key() < b.arbitration_key(),
    )


def bug_status_order() -> ValueOrder:
    """The bug-tracker status order: open < assigned < both closed variants."""
    return explicit_relation_order(
        ExplicitRelation.of(
            ("open", "assigned", "closed-fixed", "closed-irreproducible"),
            [
                ("open", "assigned"),
                ("assigned", "closed-fixed"),
                ("assigned", "closed-irreproducible"),
            ],
        )
    )


def resolve_under(order: ValueOrder, values: Iterable) -> set:
    """Keep exactly the values not dominated by another member of the set."""
    vals = set(values)
    return {v for v in vals if not any(order.precedes(v, w) for w in vals)}


def validate_order(order: ValueOrder, sample: Optional[Sequence] = None) -> OrderValidation:
    """Check the strict-order laws on a finite sample; violations are data.

    For explicit relations the sample defaults to the declared domain. Orders
    of a total kind are additionally checked for totality (every distinct pair
    comparable one way).
    """
    if sample is None:
        if order.domain is None:
            raise ValueError("order declares no domain; pass a sample")
        sample = order.domain
    sample = list(sample)
    if not sample:
        raise ValueError("sample must be nonempty")
    pre = order.precedes
    found = []
    for v in sample:
        if pre(v, v):
            found.append(OrderViolation("irreflexivity", (v,)))
    for i, v in enumerate(sample):
        for w in sample[i + 1:]:
            if pre(v, w) and pre(w, v):
                found.append(OrderViolation("asymmetry", (v, w)))
    for v in sample:
        for w in sample:
            if not pre(v, w):
                continue
            for x in sample:
                if pre(w, x) and not pre(v, x):
                    found.append(OrderViolation("transitivity", (v, w, x)))
    if order.kind in (OrderKind.TOTAL_COMPARATOR, OrderKind.LWW_TIMESTAMPED):
        for i, v in enumerate(sample):
            for w in sample[i + 1:]:
                if v != w and not pre(v, w) and not pre(w, v):
                    found.append(OrderViolation("totality", (v, w)))
    return OrderValidation(tuple(found))


def _transitive_closure(domain: Sequence, succ: dict) -> set:
    closure = set()
    for start in domain:
        stack = list(succ[start])
        seen = set()
        while stack:
            nxt = stack.pop()
            if nxt in seen:
                continue
            seen.add(nxt)
            closure.add((start, nxt))
            stack.extend(succ[nxt])
    return closure


def _find_cycle(domain: Sequence, succ: dict) -> list:
    # DFS with an explicit path; returns the first cycle encountered.
    state = {v: 0 for v in domain}  # 0 unvisited, 1 on path, 2 done
    path = []

    def visit(v):
        state[v] = 1
        path.append(v)
        for w in succ[v]:
            if state[w] == 1:
                return path[path.index(w):] + [w]
            if state[w] == 0:
                cyc = visit(w)
                if cyc:
                    return cyc
        path.pop()
        state[v] = 2
        return None

    for v in domain:
        if state[v] == 0:
            cyc = visit(v)
            if cyc:
                return cyc
    raise AssertionError("no cycle present")
