"""Value orders: resolve semantics, validation, and the built-in families."""

import pytest
from hypothesis import given, settings, strategies as st

from conftest import BUILTIN_ORDERS, brute_force_maxima, brute_force_order_laws
from mvreg.orders import (
    CycleError,
    ExplicitRelation,
    LwwValue,
    OrderKind,
    bug_status_order,
    empty_order,
    explicit_relation_order,
    lww_order,
    resolve_under,
    total_comparator_order,
    validate_order,
)


def test_resolve_keeps_dominant_status(bug_status):
    assert resolve_under(bug_status, {"assigned", "closed-irreproducible"}) == {
        "closed-irreproducible"
    }


def test_resolve_empty_order_is_identity():
    assert resolve_under(empty_order(), {"x", "y", "z"}) == {"x", "y", "z"}


def test_resolve_keeps_incomparable_closed_variants(bug_status):
    both = {"closed-fixed", "closed-irreproducible"}
    assert resolve_under(bug_status, both) == both


def test_resolve_empty_set(bug_status):
    assert resolve_under(bug_status, set()) == set()


def test_validate_bug_status_is_valid(bug_status):
    report = validate_order(bug_status)
    assert report.ok
    assert brute_force_order_laws(bug_status.precedes, bug_status.domain) == set()


def test_validate_reports_two_cycle():
    rel = ExplicitRelation.of("ab", [("a", "b"), ("b", "a")])
    order = explicit_relation_order(rel, validate=False)
    report = validate_order(order, ["a", "b"])
    assert not report.ok
    assert any(v.law == "asymmetry" and set(v.witness) == {"a", "b"} for v in report.violations)
    # the closure of a 2-cycle also breaks irreflexivity; both laws and only
    # those must be flagged, matching the brute-force oracle
    assert {v.law for v in report.violations} == brute_force_order_laws(
        order.precedes, ["a", "b"]
    ) == {"irreflexivity", "asymmetry"}


def test_validate_empty_order_any_sample():
    assert validate_order(empty_order(), ["a", "b", "c"]).ok


def test_validate_needs_sample_without_domain():
    with pytest.raises(ValueError):
        validate_order(empty_order())


def test_explicit_relation_closure(bug_status):
    assert bug_status.precedes("open", "closed-fixed")
    assert bug_status.precedes("open", "assigned")
    assert not bug_status.precedes("closed-fixed", "closed-irreproducible")
    assert not bug_status.precedes("closed-irreproducible", "closed-fixed")


def test_explicit_relation_no_edges_behaves_like_empty():
    order = explicit_relation_order(ExplicitRelation.of("abc", []))
    assert resolve_under(order, {"a", "b", "c"}) == {"a", "b", "c"}
    assert validate_order(order).ok


def test_explicit_relation_three_cycle_rejected():
    rel = ExplicitRelation.of("abc", [("a", "b"), ("b", "c"), ("c", "a")])
    with pytest.raises(CycleError) as err:
        explicit_relation_order(rel)
    assert set(err.value.cycle) >= {"a", "b", "c"}


def test_explicit_relation_edge_outside_domain():
    with pytest.raises(ValueError):
        ExplicitRelation.of("ab", [("a", "z")])


def test_outside_values_are_incomparable(bug_status):
    assert not bug_status.precedes("mystery", "closed-fixed")
    assert not bug_status.precedes("open", "mystery")
    assert resolve_under(bug_status, {"mystery", "open", "assigned"}) == {"mystery", "assigned"}


def test_total_comparator_priority(priority_order):
    assert resolve_under(priority_order, {"low", "high"}) == {"high"}
    assert resolve_under(priority_order, {"medium"}) == {"medium"}


def test_total_comparator_integers_match_brute_force():
    order = total_comparator_order(lambda v: v)
    values = {3, 7, 5}
    expected = brute_force_maxima(order.precedes, values)
    assert expected == {7}
    assert resolve_under(order, values) == expected


def test_total_comparator_equal_ranks_flagged():
    order = total_comparator_order(lambda v: len(v), ("aa", "bb", "c"))
    report = validate_order(order)
    assert not report.ok
    assert any(v.law == "totality" and set(v.witness) == {"aa", "bb"} for v in report.violations)
    # both equal-ranked values are retained by resolve
    assert resolve_under(order, {"aa", "bb"}) == {"aa", "bb"}


def test_lww_higher_timestamp_wins():
    a = LwwValue("v1", 5, "a", 1)
    b = LwwValue("v2", 9, "b", 1)
    assert resolve_under(lww_order(), {a, b}) == {b}


def test_lww_equal_timestamps_break_ties_lexicographically():
    a = LwwValue("v1", 5, "a", 1)
    b = LwwValue("v2", 5, "b", 1)
    winner = max((a, b), key=lambda v: v.arbitration_key())
    assert winner is b
    assert resolve_under(lww_order(), {a, b}) == {winner}


def test_lww_singleton():
    v = LwwValue("v", 1, "a", 1)
    assert resolve_under(lww_order(), {v}) == {v}


def test_lww_validates_as_total_order():
    sample = [LwwValue("x", t, w, q) for t, w, q in [(1, "a", 1), (1, "b", 1), (2, "a", 2)]]
    assert validate_order(lww_order(), sample).ok


def test_order_equality_is_structural():
    assert bug_status_order() == bug_status_order()
    assert empty_order() == empty_order()
    assert lww_order() == lww_order()
    assert bug_status_order() != empty_order()


@pytest.mark.parametrize("name", sorted(BUILTIN_ORDERS))
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_resolve_properties(name, data):
    order, domain = BUILTIN_ORDERS[name]
    values = set(data.draw(st.lists(st.sampled_from(list(domain)), max_size=8)))
    result = resolve_under(order, values)
    assert result <= values
    assert resolve_under(order, result) == result
    if values:
        assert result
    # no kept value is dominated by anything in the input
    assert not any(order.precedes(v, w) for v in result for w in values)
    # every removed value is dominated by some kept value
    for removed in values - result:
        assert any(order.precedes(removed, kept) for kept in result)
    if order.kind is OrderKind.EMPTY:
        assert result == values
    if order.kind is OrderKind.TOTAL_COMPARATOR and values:
        assert len(result) == 1


@pytest.mark.parametrize("name", sorted(BUILTIN_ORDERS))
def test_builtin_orders_validate_exhaustively(name):
    order, domain = BUILTIN_ORDERS[name]
    assert len(domain) <= 6
    assert validate_order(order, domain).ok
    assert brute_force_order_laws(order.precedes, domain) == set()


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(0, 50), st.sampled_from("abc"), st.integers(1, 5)),
        min_size=1,
        max_size=8,
        unique=True,
    )
)
def test_lww_resolve_is_singleton(raw):
    values = {LwwValue(f"p{i}", t, w, q) for i, (t, w, q) in enumerate(raw)}
    result = resolve_under(lww_order(), values)
    assert len(result) == 1
    assert result == {max(values, key=lambda v: v.arbitration_key())}
