"""Consensus algorithm: iteration planning and execution.

``plan`` derives everything an iteration needs from topology alone (suspect
sets, split orientation, seed-set choice, routes, round schedule); ``execution``
runs those plans against an adversary.  Both layers are deterministic: the
same (graph, f) always yields the same plans, and the same plans plus the
same strategy and seed always yield the same transcript.
"""

from .execution import (
    FoldWire,
    NodeState,
    bc_consensus,
    f0_consensus,
    multivalued_consensus,
    run_catchup,
    run_equality,
    run_inner_iteration,
    run_propagate,
    state_bits,
)
from .plan import (
    CatchupPhase,
    EqualityPhase,
    IterationPlan,
    Planner,
    PropagatePhase,
    choose_S_case1,
    choose_S_case2,
    inner_splits,
    orient_partition,
    plan_outer,
    suspect_sets,
    verify_plan,
)

__all__ = [
    "CatchupPhase",
    "EqualityPhase",
    "FoldWire",
    "IterationPlan",
    "NodeState",
    "Planner",
    "PropagatePhase",
    "bc_consensus",
    "choose_S_case1",
    "choose_S_case2",
    "f0_consensus",
    "inner_splits",
    "multivalued_consensus",
    "orient_partition",
    "plan_outer",
    "run_catchup",
    "run_equality",
    "run_inner_iteration",
    "run_propagate",
    "state_bits",
    "suspect_sets",
    "verify_plan",
]
