import math

import pytest

from absnorm.plan import (
    HorizonTooShort,
    SequencePlan,
    apply_phi,
    beta_log_table,
    build_default_plan,
    compute_m0,
    default_s_sequence,
    gamma_table,
    toy_beta_log,
)
from toys import toy_plan


def test_default_s_sequence():
    assert default_s_sequence(5) == [3, 5, 6, 7, 10]
    assert default_s_sequence(1) == [3]
    # 4, 8, 9, 16, 25, 27, 32 all excluded
    seq = default_s_sequence(30)
    for banned in (4, 8, 9, 16, 25, 27, 32):
        assert banned not in seq


def test_apply_phi_spec_example():
    raw_r = [2, 3, 4]
    raw_s = [3, 5, 6]
    plan = apply_phi(raw_r, raw_s, toy_beta_log([0.4, 0.3, 0.1]), [3, 4, 5], horizon=4)
    assert plan.phi == (1, 1, 1, 2)


def test_apply_phi_constant_beta_gives_identity():
    raw_r = [2, 3, 4, 5, 6]
    raw_s = [3, 5, 6, 7, 10]
    beta = toy_beta_log([0.4] * 5)
    plan = apply_phi(raw_r, raw_s, beta, horizon=5)
    assert plan.phi == (1, 2, 3, 4, 5)


def test_apply_phi_stuck_at_one():
    raw_r = [2, 3, 4, 5]
    raw_s = [3, 5, 6, 7]
    # beta_2 far below beta_1/k^(1/4) for every k <= horizon
    beta = toy_beta_log([0.4, 1e-9, 1e-9, 1e-9])
    plan = apply_phi(raw_r, raw_s, beta, horizon=4)
    assert plan.phi == (1, 1, 1, 1)


def test_apply_phi_validates_tables():
    with pytest.raises(ValueError):
        apply_phi([2], [3], toy_beta_log([0.6]), horizon=1)  # beta >= 1/2
    with pytest.raises(ValueError):
        apply_phi([2, 3], [3, 5], toy_beta_log([0.3, 0.4]), horizon=2)  # increasing
    with pytest.raises(ValueError):
        apply_phi([2, 3], [2, 5], toy_beta_log([0.4, 0.3]), horizon=2)  # s must be > 2


def test_plan_invariants_toy():
    plan = toy_plan(6)
    assert plan.r_seq == (2, 2, 2, 3, 3, 3)
    assert plan.s_seq == (3, 3, 3, 5, 5, 5)
    s1 = plan.s_seq[0]
    for m, s in enumerate(plan.s_seq, start=1):
        assert s <= m * s1
    for a, b in zip(plan.beta_log, plan.beta_log[1:]):
        assert b <= a
    for a, b in zip(plan.gamma, plan.gamma[1:]):
        assert b >= a
    # phi-repetition preserves membership
    assert set(plan.r_seq) <= set(plan.raw_r)
    assert set(plan.s_seq) <= set(plan.raw_s)
    # phi steps by at most one
    assert plan.phi[0] == 1
    for a, b in zip(plan.phi, plan.phi[1:]):
        assert a <= b <= a + 1


def test_compute_m0():
    plan = toy_plan(6)
    assert compute_m0(2, plan) == 1
    assert compute_m0(3, plan) == 4  # 3 ~ 3 occupies indices 1..3
    assert compute_m0(9, plan) == 4  # 9 ~ 3 as well
    assert compute_m0(8, plan) == 1  # powers of 2 never hit S
    assert plan.m0(3) == 4 and plan.m0(2) == 1
    # carrier (3, 3, 5): the dependent run for 9 ends at index 2
    short = apply_phi([2, 3, 4], [3, 3, 5], toy_beta_log([0.4] * 3), horizon=3)
    assert compute_m0(9, short) == 3


def test_compute_m0_horizon_too_short():
    # S' ends in 5s, so 5 stays dependent through the horizon
    plan = toy_plan(6)
    with pytest.raises(HorizonTooShort):
        compute_m0(5, plan)
    assert plan.m0(5) is None


def test_default_plan_certified_betas():
    plan = build_default_plan(6)
    assert plan.certified
    assert plan.r_seq == (2, 3, 4, 5, 6, 7)
    assert plan.s_seq == (3, 5, 6, 7, 10, 11)
    # all-N betas are finite in log space (every independent pair contributes)
    for b in plan.beta_log:
        assert math.isfinite(b)
        assert b < math.log(0.5)
    # floor makes the certified table flat at desk scale
    assert plan.beta_log[0] == math.log(1e-300)
    # each r goes independent right after its own appearance in S (if any)
    assert [plan.m0(r) for r in plan.r_seq] == [1, 2, 1, 3, 4, 5]


def test_beta_table_skips_dependent_pairs():
    # r=3 against s=3 contributes nothing; table still finite via floor
    table = beta_log_table([3, 2], [3, 5])
    assert len(table) == 2
    assert all(math.isfinite(v) for v in table)


def test_gamma_table():
    assert gamma_table([2, 3, 4], [3, 5, 6]) == [3, 5, 6]


def test_plan_round_trip():
    plan = toy_plan(6)
    again = SequencePlan.from_dict(plan.as_dict())
    assert again == plan
