"""Shared desk-scale plan/schedule builders used across the test modules.

The toy plan repeats rawR=(2,3), rawS=(3,5) through the repetition rule
with beta=(0.4, 0.3): phi = (1,1,1,2,2,2,...), so the output bases are
(2,2,2,3,3,...) and the carriers (3,3,3,5,5,...); base 3 becomes active at
step 4 (m0(3) = 4).  The toy symbol table gives candidate windows of width
4-5 and satisfies the nested-interval growth conditions at every step.
"""

from __future__ import annotations

from fractions import Fraction

from absnorm.plan import SequencePlan, apply_phi, toy_beta_log
from absnorm.schmidt import KIND_TOY, ConstructionState, Schedule

TOY_SYMBOLS = (8, 15, 22, 30, 41, 52, 63)


def toy_plan(horizon: int = 6) -> SequencePlan:
    return apply_phi(
        [2, 3], [3, 5], toy_beta_log([0.4, 0.3]), horizon=horizon, certified=False
    )


def toy_schedule() -> Schedule:
    return Schedule(kind=KIND_TOY, table=TOY_SYMBOLS)


def toy_state(horizon: int = 6) -> ConstructionState:
    return ConstructionState(plan=toy_plan(horizon), schedule=toy_schedule())


def power_state(horizon: int = 10, c=Fraction(1, 2)) -> ConstructionState:
    from absnorm.schmidt import KIND_POWER

    return ConstructionState(
        plan=toy_plan(horizon), schedule=Schedule(kind=KIND_POWER, c=Fraction(c))
    )
