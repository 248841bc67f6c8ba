"""Convergent multi-value register with order-driven conflict resolution.

The package bundles the register implementations (eager, lazy, classic), a
pure event-graph oracle that defines what reads must return, a deterministic
replication simulator, and an exhaustive search for schedules on which the
eager register departs from the oracle.
"""

from .orders import (
    CycleError,
    ExplicitRelation,
    LwwValue,
    OrderKind,
    OrderValidation,
    OrderViolation,
    ValueOrder,
    bug_status_order,
    empty_order,
    explicit_relation_order,
    lww_order,
    resolve_under,
    total_comparator_order,
    validate_order,
)
from .oracle import (
    CausalClosureError,
    EventGraph,
    EventGraphError,
    WriteEvent,
    maximal_values,
    observed_subgraph,
    resolved_values,
)
from .register import (
    ClassicMvrState,
    Dot,
    PolicyMismatchError,
    RegisterState,
    VersionVector,
    classic_initial,
    classic_merge,
    classic_read,
    classic_write,
    initial,
    lazy_merge,
    lazy_read,
    merge,
    read,
    vv_join,
    write,
)
from .codec import MalformedStateError, StateVersionError, decode_state, encode_state
from .sim import (
    ConvergenceVerdict,
    FuzzCase,
    LwwStamp,
    ReadStep,
    RunReport,
    Schedule,
    ScheduleError,
    SendStep,
    WriteStep,
    check_convergence,
    fuzz_case,
    random_schedule,
    run_schedule,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
