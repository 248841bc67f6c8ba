"""Shared fixtures and independent brute-force oracles for the test suite."""

import pytest

from mvreg.orders import (
    ExplicitRelation,
    bug_status_order,
    empty_order,
    explicit_relation_order,
    lww_order,
    total_comparator_order,
)


@pytest.fixture
def bug_status():
    return bug_status_order()


@pytest.fixture
def priority_order():
    ranks = {"low": 0, "medium": 1, "high": 2}
    return total_comparator_order(ranks.__getitem__, ("low", "medium", "high"))


def brute_force_maxima(precedes, values):
    """Independent oracle: maxima by exhaustive pairwise comparison."""
    values = set(values)
    return {v for v in values if not any(precedes(v, w) for w in values if w != v)}


def brute_force_order_laws(precedes, sample):
    """Independent oracle: the set of strict-order laws violated on a sample."""
    violated = set()
    for v in sample:
        if precedes(v, v):
            violated.add("irreflexivity")
    for v in sample:
        for w in sample:
            if v != w and precedes(v, w) and precedes(w, v):
                violated.add("asymmetry")
            for x in sample:
                if precedes(v, w) and precedes(w, x) and not precedes(v, x):
                    violated.add("transitivity")
    return violated


BUILTIN_ORDERS = {
    "empty": (empty_order(), ("x", "y", "z")),
    "bug-status": (bug_status_order(), bug_status_order().domain),
    "chain": (
        explicit_relation_order(ExplicitRelation.of("abcd", [("a", "b"), ("b", "c"), ("c", "d")])),
        ("a", "b", "c", "d"),
    ),
    "priority": (
        total_comparator_order({"low": 0, "medium": 1, "high": 2}.__getitem__, ("low", "medium", "high")),
        ("low", "medium", "high"),
    ),
}
