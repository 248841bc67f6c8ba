"""State-based multi-value register with order-driven conflict resolution.

Three interchangeable constructions over the same write alphabet:

* eager: each entry is a (dot, value) pair and one causal-context version
  vector covers everything ever observed; merge discards overwritten entries
  and applies the value order immediately, so dominated values are removed
  for good (their dots stay in the context).
* lazy: identical state shape, but merge keeps every concurrent entry and the
  order is applied at read time only.
* classic: the baseline multi-value register carrying one full version vector
  per value, with the order applied at read time.

States are immutable; every operation returns a new state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, Mapping, NamedTuple, Tuple

from .orders import OrderKind, ValueOrder, resolve_under


class PolicyMismatchError(ValueError):
    """Merging states governed by different value orders is undefined."""


class Dot(NamedTuple):
    """One write event: the issuing replica and its write counter."""

    replica: str
    counter: int


class VersionVector:
    """Map replica -> highest counter observed; absent means zero."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[str, int] = ()):
        clean = {r: c for r, c in dict(entries).items() if c != 0}
        for r, c in clean.items():
            if c < 0:
                raise ValueError(f"negative counter for {r!r}")
        self._entries = clean

    def get(self, replica: str) -> int:
        return self._entries.get(replica, 0)

    def covers(self, dot: Dot) -> bool:
        return dot.counter <= self.get(dot.replica)

    def join(self, other: "VersionVector") -> "VersionVector":
        merged = dict(self._entries)
        for r, c in other._entries.items():
            if c > merged.get(r, 0):
                merged[r] = c
        return VersionVector(merged)

    def advanced(self, replica: str) -> Tuple["VersionVector", int]:
        """Counter for the next write at replica, plus the advanced vector."""
        n = self.get(replica) + 1
        bumped = dict(self._entries)
        bumped[replica] = n
        return VersionVector(bumped), n

    def items(self) -> Tuple[Tuple[str, int], ...]:
        return tuple(sorted(self._entries.items()))

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VersionVector):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self.items())

    def __repr__(self) -> str:
        inner = ", ".join(f"{r}:{c}" for r, c in self.items())
        return "{" + inner + "}"


def vv_join(a: VersionVector, b: VersionVector) -> VersionVector:
    """Pointwise maximum of two version vectors."""
    return a.join(b)


@dataclass(frozen=True)
class RegisterState:
    """Dot-tagged values plus the causal-context vector and the value order."""

    entries: FrozenSet[Tuple[Dot, Any]]
    context: VersionVector
    policy: ValueOrder

    def __repr__(self) -> str:
        parts = ", ".join(
            f"({d.replica},{d.counter})={v!r}" for d, v in sorted(self.entries, key=lambda e: e[0])
        )
        return f"RegisterState([{parts}], ctx={self.context!r})"


@dataclass(frozen=True)
class ClassicMvrState:
    """Baseline multi-value register: one version vector per retained value."""

    entries: FrozenSet[Tuple[Any, VersionVector]]


def initial(policy: ValueOrder) -> RegisterState:
    return RegisterState(frozenset(), VersionVector(), policy)


def write(state: RegisterState, replica: str, value: Any) -> RegisterState:
    """Overwrite everything observed: a fresh singleton entry, context bumped."""
    context, n = state.context.advanced(replica)
    return RegisterState(frozenset({(Dot(replica, n), value)}), context, state.policy)


def read(state: RegisterState) -> set:
    return {v for _, v in state.entries}


def merge(left: RegisterState, right: RegisterState) -> RegisterState:
    """Join two replica states, resolving dominated values immediately."""
    kept = _kept_entries(left, right)
    resolved = _resolve_entries(left.policy, kept)
    return RegisterState(frozenset(resolved), left.context.join(right.context), left.policy)


def lazy_merge(left: RegisterState, right: RegisterState) -> RegisterState:
    """Join keeping every concurrent entry; the order applies at read time."""
    kept = _kept_entries(left, right)
    return RegisterState(frozenset(kept), left.context.join(right.context), left.policy)


def lazy_read(state: RegisterState) -> set:
    return resolve_under(state.policy, read(state))


def classic_initial() -> ClassicMvrState:
    return ClassicMvrState(frozenset())


def classic_write(state: ClassicMvrState, replica: str, value: Any) -> ClassicMvrState:
    observed = VersionVector()
    for _, vv in state.entries:
        observed = observed.join(vv)
    advanced, _ = observed.advanced(replica)
    return ClassicMvrState(frozenset({(value, advanced)}))


def classic_read(state: ClassicMvrState, order: ValueOrder) -> set:
    return resolve_under(order, {v for v, _ in state.entries})


def classic_merge(left: ClassicMvrState, right: ClassicMvrState) -> ClassicMvrState:
    kept = set()
    for side, other in ((left, right), (right, left)):
        for value, vv in side.entries:
            if not any(_strictly_dominates(ovv, vv) for _, ovv in other.entries):
                kept.add((value, vv))
    return ClassicMvrState(frozenset(kept))


def check_state_invariants(state: RegisterState, resolved: bool = True) -> None:
    """Raise AssertionError when a register invariant is broken (test aid)."""
    dots = [d for d, _ in state.entries]
    assert len(dots) == len(set(dots)), "duplicate dots"
    for d, _ in state.entries:
        assert d.counter >= 1, "counter below one"
        assert state.context.covers(d), f"context does not cover {d}"
    if resolved:
        values = [v for _, v in state.entries]
        pre = state.policy.precedes
        for v in values:
            assert not any(pre(v, w) for w in values), f"dominated value {v!r} retained"


def check_classic_invariants(state: ClassicMvrState) -> None:
    for _, vv in state.entries:
        others = [o for _, o in state.entries if o is not vv]
        assert not any(_strictly_dominates(o, vv) for o in others), "dominated entry retained"


def _kept_entries(left: RegisterState, right: RegisterState) -> set:
    if left.policy != right.policy:
        raise PolicyMismatchError("cannot merge registers with different value orders")
    both = left.entries & right.entries
    fresh_left = {e for e in left.entries if e[0].counter > right.context.get(e[0].replica)}
    fresh_right = {e for e in right.entries if e[0].counter > left.context.get(e[0].replica)}
    return both | fresh_left | fresh_right


def _resolve_entries(policy: ValueOrder, entries: Iterable[Tuple[Dot, Any]]) -> set:
    entries = set(entries)
    if policy.kind is OrderKind.EMPTY:
        return entries
    values = [v for _, v in entries]
    pre = policy.precedes
    return {(d, v) for d, v in entries if not any(pre(v, w) for w in values)}


def _strictly_dominates(a: VersionVector, b: VersionVector) -> bool:
    """a > b pointwise: covers every entry of b and exceeds it somewhere."""
    if a == b:
        return False
    return all(a.get(r) >= c for r, c in b.items())
