"""Event-graph oracle: maximal values, resolution, observation subgraphs."""

import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_force_maxima
from mvreg.oracle import (
    CausalClosureError,
    EventGraph,
    EventGraphError,
    WriteEvent,
    maximal_values,
    observed_subgraph,
    resolved_values,
)
from mvreg.orders import bug_status_order, empty_order, total_comparator_order


def graph(events, hb=()):
    return EventGraph([WriteEvent(i, r, v) for i, r, v in events], hb)


def test_concurrent_writes_all_returned():
    g = graph([(1, "a", "x"), (2, "b", "y")])
    assert maximal_values(g) == {"x", "y"}


def test_overwritten_value_excluded():
    g = graph([(1, "a", "x"), (2, "b", "y")], [(1, 2)])
    assert maximal_values(g) == {"y"}


def test_empty_graph():
    assert maximal_values(EventGraph([])) == set()


def test_resolved_concurrent_statuses(bug_status):
    g = graph([(1, "A", "assigned"), (2, "B", "closed-irreproducible")])
    assert resolved_values(g, bug_status) == {"closed-irreproducible"}


def test_resolved_with_empty_order_is_maximal():
    g = graph([(1, "a", "x"), (2, "b", "y"), (3, "c", "z")], [(1, 3)])
    assert resolved_values(g, empty_order()) == maximal_values(g)


def test_resolved_three_concurrent_integers():
    g = graph([(1, "a", 3), (2, "b", 7), (3, "c", 5)])
    order = total_comparator_order(lambda v: v)
    expected = brute_force_maxima(order.precedes, {3, 7, 5})
    assert resolved_values(g, order) == expected == {7}


def test_duplicate_maximal_values_collapse():
    g = graph([(1, "a", "x"), (2, "b", "x")])
    assert maximal_values(g) == {"x"}


def test_observed_subgraph_full_and_empty():
    g = graph([(1, "a", "x"), (2, "b", "y")], [(1, 2)])
    assert observed_subgraph(g, {1, 2}) == g
    assert observed_subgraph(g, set()).events == ()


def test_observed_subgraph_requires_causal_closure():
    g = graph([(1, "a", "x"), (2, "b", "y")], [(1, 2)])
    with pytest.raises(CausalClosureError) as err:
        observed_subgraph(g, {2})
    assert err.value.missing_id == 1


def test_observed_subgraph_rejects_unknown_ids():
    g = graph([(1, "a", "x")])
    with pytest.raises(EventGraphError):
        observed_subgraph(g, {1, 99})


def test_graph_rejects_duplicate_ids():
    with pytest.raises(EventGraphError):
        graph([(1, "a", "x"), (1, "b", "y")])


def test_graph_rejects_unknown_hb_endpoints():
    with pytest.raises(EventGraphError):
        graph([(1, "a", "x")], [(1, 2)])


def test_graph_rejects_cycles():
    with pytest.raises(EventGraphError):
        graph([(1, "a", "x"), (2, "b", "y")], [(1, 2), (2, 1)])


def test_hb_is_stored_transitively_closed():
    g = graph([(1, "a", "x"), (2, "a", "y"), (3, "a", "z")], [(1, 2), (2, 3)])
    assert (1, 3) in g.hb
    assert maximal_values(g) == {"z"}


def test_nonempty_graph_has_nonempty_maximal_set():
    g = graph([(1, "a", "x"), (2, "b", "y"), (3, "c", "x")], [(1, 2)])
    assert maximal_values(g)


def test_dominating_write_overwrites_everything():
    events = [(1, "a", "x"), (2, "b", "y"), (3, "c", "z")]
    g = graph(events + [(4, "a", "w")], [(1, 4), (2, 4), (3, 4)])
    assert maximal_values(g) == {"w"}


def _random_graph(draw):
    """Small random event graph; returns the generating pairs for oracles."""
    n = draw(st.integers(1, 6))
    values = [draw(st.sampled_from("pqrs")) for _ in range(n)]
    pairs = set()
    for i in range(n):
        for j in range(i + 1, n):
            if draw(st.booleans()):
                pairs.add((i, j))
    events = [WriteEvent(i, f"r{i % 3}", values[i]) for i in range(n)]
    return EventGraph(events, pairs), pairs, values


@settings(max_examples=80, deadline=None)
@given(data=st.data())
def test_maximality_matches_brute_force(data):
    # an event is maximal iff it has no outgoing generating edge (closure only
    # extends existing paths), which is computable without the graph type
    g, pairs, values = _random_graph(data.draw)
    expected = {values[i] for i in range(len(values)) if not any(a == i for a, _ in pairs)}
    assert maximal_values(g) == expected


@settings(max_examples=80, deadline=None)
@given(data=st.data())
def test_monotone_observation(data):
    """Growing the observation keeps every old value visible or overwritten."""
    g, _, _ = _random_graph(data.draw)
    ids = sorted(g.ids())

    def close(seed):
        out = set(seed)
        changed = True
        while changed:
            changed = False
            for a, b in g.hb:
                if b in out and a not in out:
                    out.add(a)
                    changed = True
        return out

    small = close({i for i in ids if data.draw(st.booleans())})
    large = close(small | {i for i in ids if data.draw(st.booleans())})
    sub_small = observed_subgraph(g, small)
    seen_small = maximal_values(sub_small)
    seen_large = maximal_values(observed_subgraph(g, large))
    top_small = {e.id for e in sub_small.events if not any(a == e.id for a, _ in sub_small.hb)}
    for value in seen_small:
        if value in seen_large:
            continue
        # every maximal carrier of the vanished value must now be dominated
        carriers = [e for e in sub_small.events if e.id in top_small and e.value == value]
        assert carriers
        for carrier in carriers:
            assert any((carrier.id, b) in g.hb and b in large for b in large)
