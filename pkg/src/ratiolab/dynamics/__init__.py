from .hopf import HopfSystem, hopf_system
from .provider import HeisenbergProvider, ProviderExhausted, ProviderResult, heisenberg_provider, verify_conditions
from .tower import (
    IntervalCollision,
    Piece,
    PlanRejected,
    StageTransitionPlan,
    TowerStage,
    apply_transition,
    build_tower,
    check_compatibility,
    check_plan,
    eval_R,
    eval_S,
    plan_transition,
    shuffle_stage,
    stage_init,
    verify_alternation,
)
