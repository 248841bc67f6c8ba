"""Text format for scenarios and order declarations.

A scenario file is UTF-8 text with `#` comments:

    replicas A B C
    order partial
    edge open assigned
    edge assigned closed-fixed
    write A open
    send A B
    read B expect open

Order declarations: `order empty`, `order lww`,
`order total low < medium < high`, or `order partial` followed by
`edge <lesser> <greater>` lines. Under an lww order, written and expected
values are spelled `payload@timestamp`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .orders import (
    ExplicitRelation,
    OrderKind,
    ValueOrder,
    empty_order,
    explicit_relation_order,
    lww_order,
    total_comparator_order,
)
from .sim import LwwStamp, ReadStep, Schedule, SendStep, Step, WriteStep


class ScenarioParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


@dataclass(frozen=True)
class Scenario:
    schedule: Schedule
    order: ValueOrder
    order_lines: Tuple[str, ...]  # the declaration, for faithful re-rendering


def parse_scenario(text: str) -> Scenario:
    lines = _significant_lines(text)
    replicas: Optional[Tuple[str, ...]] = None
    order: Optional[ValueOrder] = None
    order_lines: List[str] = []
    steps: List[Step] = []
    pending_edges: List[Tuple[str, str]] = []
    edge_line = 0

    def finish_order(line_no: int) -> None:
        nonlocal order
        if order_lines and order_lines[0].split() == ["order", "partial"] and order is None:
            order = _build_partial(pending_edges, line_no)

    for line_no, tokens, raw in lines:
        head = tokens[0]
        if head == "replicas":
            if replicas is not None:
                raise ScenarioParseError(line_no, "duplicate replicas line")
            if len(tokens) < 2:
                raise ScenarioParseError(line_no, "replicas line lists no replicas")
            replicas = tuple(tokens[1:])
        elif head == "order":
            if order is not None or order_lines:
                raise ScenarioParseError(line_no, "duplicate order declaration")
            order_lines.append(raw)
            if tokens[1:] == ["partial"]:
                pass  # edges follow
            else:
                order = _parse_order_head(tokens, line_no)
        elif head == "edge":
            if not order_lines or order_lines[0].split() != ["order", "partial"]:
                raise ScenarioParseError(line_no, "edge outside an `order partial` block")
            if len(tokens) != 3:
                raise ScenarioParseError(line_no, "edge takes exactly two values")
            order_lines.append(raw)
            pending_edges.append((tokens[1], tokens[2]))
            edge_line = line_no
        elif head in ("write", "send", "read"):
            finish_order(edge_line or line_no)
            if order is None:
                raise ScenarioParseError(line_no, "steps before an order declaration")
            steps.append(_parse_step(tokens, line_no, order))
        else:
            raise ScenarioParseError(line_no, f"unknown directive {head!r}")

    if replicas is None:
        raise ScenarioParseError(0, "missing replicas line")
    finish_order(edge_line or 0)
    if order is None:
        raise ScenarioParseError(0, "missing order declaration")
    schedule = Schedule(replicas, tuple(steps))
    try:
        schedule.validate(order)
    except Exception as exc:
        raise ScenarioParseError(0, str(exc)) from exc
    return Scenario(schedule, order, tuple(order_lines))


def parse_order_text(text: str, strict: bool = True) -> Tuple[ValueOrder, Tuple[str, ...]]:
    """Extract the order from a bare order block or a full scenario file.

    With strict=False a cyclic partial declaration still yields an order
    (whose broken laws validate_order will report) instead of a parse error.
    """
    lines = _significant_lines(text)
    order_lines = [
        (line_no, tokens, raw)
        for line_no, tokens, raw in lines
        if tokens[0] in ("order", "edge")
    ]
    if not order_lines:
        raise ScenarioParseError(0, "no order declaration found")
    first_no, first_tokens, first_raw = order_lines[0]
    if first_tokens[0] != "order":
        raise ScenarioParseError(first_no, "edge before an `order partial` line")
    if first_tokens[1:] == ["partial"]:
        edges = []
        for line_no, tokens, _ in order_lines[1:]:
            if tokens[0] != "edge" or len(tokens) != 3:
                raise ScenarioParseError(line_no, "expected `edge <lesser> <greater>`")
            edges.append((tokens[1], tokens[2]))
        order = _build_partial(edges, first_no, validate=strict)
        return order, tuple(raw for _, _, raw in order_lines)
    if len(order_lines) > 1:
        raise ScenarioParseError(order_lines[1][0], "edge lines after a non-partial order")
    return _parse_order_head(first_tokens, first_no), (first_raw,)


def format_scenario(scenario: Scenario, comments: Tuple[str, ...] = ()) -> str:
    """Render a scenario back to text that parses to an equal scenario."""
    out = [f"# {c}" for c in comments]
    out.append("replicas " + " ".join(scenario.schedule.replicas))
    out.extend(scenario.order_lines)
    lww = scenario.order.kind is OrderKind.LWW_TIMESTAMPED
    for step in scenario.schedule.steps:
        if isinstance(step, WriteStep):
            out.append(f"write {step.replica} {_format_value(step.value)}")
        elif isinstance(step, SendStep):
            out.append(f"send {step.src} {step.dst}")
        else:
            line = f"read {step.replica}"
            if step.expect is not None:
                rendered = sorted(_format_value(v) for v in step.expect)
                line += " expect" + ("" if not rendered else " " + " ".join(rendered))
            out.append(line)
    return "\n".join(out) + "\n"


def order_declaration(order: ValueOrder) -> Tuple[str, ...]:
    """Render a declaration block for orders built by this package."""
    if order.kind is OrderKind.EMPTY:
        return ("order empty",)
    if order.kind is OrderKind.LWW_TIMESTAMPED:
        return ("order lww",)
    if order.kind is OrderKind.EXPLICIT_RELATION:
        lines = ["order partial"]
        pairs = sorted(order.spec)
        covers = _cover_edges(set(pairs))
        lines.extend(f"edge {lo} {hi}" for lo, hi in sorted(covers))
        return tuple(lines)
    if order.domain is None:
        raise ValueError("total order lacks a domain; cannot render a declaration")
    key = order.spec
    chain = sorted(order.domain, key=key)
    return ("order total " + " < ".join(chain),)


def _cover_edges(closure: set) -> set:
    # Drop edges implied by transitivity, keeping the minimal declaration.
    return {
        (lo, hi)
        for lo, hi in closure
        if not any((lo, mid) in closure and (mid, hi) in closure for mid, _ in closure)
    }


def _significant_lines(text: str) -> List[Tuple[int, List[str], str]]:
    lines = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append((line_no, stripped.split(), stripped))
    return lines


def _parse_order_head(tokens: List[str], line_no: int) -> ValueOrder:
    if len(tokens) < 2:
        raise ScenarioParseError(line_no, "order line names no kind")
    kind = tokens[1]
    if kind == "empty":
        if len(tokens) != 2:
            raise ScenarioParseError(line_no, "order empty takes no arguments")
        return empty_order()
    if kind == "lww":
        if len(tokens) != 2:
            raise ScenarioParseError(line_no, "order lww takes no arguments")
        return lww_order()
    if kind == "total":
        rest = tokens[2:]
        if not rest or len(rest) % 2 == 0:
            raise ScenarioParseError(line_no, "order total expects `v1 < v2 < ... < vn`")
        values, seps = rest[0::2], rest[1::2]
        if any(s != "<" for s in seps):
            raise ScenarioParseError(line_no, "order total separates values with `<`")
        if len(set(values)) != len(values):
            raise ScenarioParseError(line_no, "order total lists a value twice")
        ranks = {v: i for i, v in enumerate(values)}
        return total_comparator_order(ranks.__getitem__, tuple(values))
    if kind == "partial":
        raise ScenarioParseError(line_no, "order partial is a block; internal error")
    raise ScenarioParseError(line_no, f"unknown order kind {kind!r}")


def _build_partial(edges: List[Tuple[str, str]], line_no: int, validate: bool = True) -> ValueOrder:
    domain = []
    seen = set()
    for pair in edges:
        for v in pair:
            if v not in seen:
                seen.add(v)
                domain.append(v)
    try:
        return explicit_relation_order(ExplicitRelation.of(domain, edges), validate=validate)
    except ValueError as exc:
        raise ScenarioParseError(line_no, str(exc)) from exc


def _parse_step(tokens: List[str], line_no: int, order: ValueOrder) -> Step:
    head = tokens[0]
    if head == "write":
        if len(tokens) != 3:
            raise ScenarioParseError(line_no, "write takes `write <replica> <value>`")
        return WriteStep(tokens[1], _parse_value(tokens[2], line_no, order))
    if head == "send":
        if len(tokens) != 3:
            raise ScenarioParseError(line_no, "send takes `send <from> <to>`")
        return SendStep(tokens[1], tokens[2])
    if len(tokens) < 2:
        raise ScenarioParseError(line_no, "read takes `read <replica> [expect ...]`")
    if len(tokens) == 2:
        return ReadStep(tokens[1])
    if tokens[2] != "expect":
        raise ScenarioParseError(line_no, "read only supports an `expect` clause")
    expected = frozenset(_parse_value(tok, line_no, order) for tok in tokens[3:])
    return ReadStep(tokens[1], expected)


def _parse_value(token: str, line_no: int, order: ValueOrder):
    if order.kind is OrderKind.LWW_TIMESTAMPED:
        payload, sep, stamp = token.rpartition("@")
        if not sep or not payload:
            raise ScenarioParseError(line_no, f"lww value {token!r} is not payload@timestamp")
        try:
            return LwwStamp(payload, int(stamp))
        except ValueError:
            raise ScenarioParseError(line_no, f"timestamp in {token!r} is not an integer") from None
    return token


def _format_value(value) -> str:
    if isinstance(value, LwwStamp):
        return f"{value.payload}@{value.timestamp}"
    return str(value)
