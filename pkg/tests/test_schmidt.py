import copy
import math
from fractions import Fraction

import pytest
from mpmath import mp

from absnorm.plan import build_default_plan
from absnorm.schmidt import (
    KIND_PAPER,
    KIND_POWER,
    KIND_TOY,
    CandidateSet,
    ConstructionState,
    Schedule,
    WidthExceedsCap,
    active_bases,
    emit_digits,
    eta,
    run,
    step,
    step_objective,
    verify_state,
    _objective_hiprec,
    _step_terms,
)
from absnorm.exact import digits_of_rational
from absnorm.serialize import canonical_dumps
from toys import TOY_SYMBOLS, power_state, toy_plan, toy_schedule, toy_state


def test_schedule_paper_symbols():
    sch = Schedule(kind=KIND_PAPER, s1=3)
    assert sch.symbol(1) == 8
    assert sch.symbol(2) == 52
    assert sch.symbol_for_base(1, 2) == 11
    assert sch.symbol_for_base(2, 2) == 75
    assert sch.a(1, 3) == 7
    assert sch.b(1, 3) == 47


def test_schedule_power_symbols():
    sch = Schedule(kind=KIND_POWER, c=Fraction(1, 2))
    got = [sch.symbol(m) for m in range(1, 11)]
    assert got == [2, 4, 5, 7, 9, 11, 14, 16, 20, 23]
    with mp.workdps(60):
        for m in range(1, 13):
            assert sch.symbol(m) == int(mp.floor(mp.exp(mp.sqrt(m))))


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule(kind=KIND_POWER, c=Fraction(3, 2))
    with pytest.raises(ValueError):
        Schedule(kind=KIND_TOY, table=(5, 5, 6))
    with pytest.raises(ValueError):
        Schedule(kind=KIND_PAPER, s1=2)
    with pytest.raises(ValueError):
        Schedule(kind="weird")


def test_schedule_round_trip():
    for sch in (
        Schedule(kind=KIND_PAPER, s1=3),
        Schedule(kind=KIND_POWER, c=Fraction(2, 5)),
        toy_schedule(),
    ):
        assert Schedule.from_dict(sch.as_dict()) == sch


def test_eta_examples():
    assert eta(Fraction(0), 3, 2) == 0
    assert eta(Fraction(7, 20), 3, 2) == Fraction(4, 9)
    assert eta(Fraction(4, 9), 3, 2) == Fraction(4, 9)  # already on the grid


def test_objective_at_zero_closed_form():
    # all phases vanish at x = 0, so each inner sum has modulus = its length
    plan = build_default_plan(2)
    sch = Schedule(kind=KIND_PAPER, s1=3)
    val = step_objective(Fraction(0), 1, plan, sch)
    assert val == pytest.approx(2 * (75 - 11) ** 2, rel=1e-12)  # 8192


def test_objective_toy_zero_matches_lengths():
    plan = toy_plan(6)
    sch = toy_schedule()
    for m in (1, 4):
        terms = _step_terms(plan, sch, m)
        expect = 2 * m * sum(w * (hi - lo) ** 2 for _, w, lo, hi in terms)
        assert step_objective(Fraction(0), m, plan, sch) == pytest.approx(expect, rel=1e-12)


def test_active_bases_weights():
    plan = toy_plan(6)
    assert active_bases(plan, 1) == [(2, 1)]
    assert active_bases(plan, 3) == [(2, 3)]
    # base 3 activates at m = 4 = m0(3)
    assert active_bases(plan, 4) == [(2, 3), (3, 1)]
    assert active_bases(plan, 6) == [(2, 3), (3, 3)]


def test_candidate_set_ordering_and_values():
    cand = CandidateSet(eta=Fraction(4, 9), s=3, a=2, b=7)
    assert cand.width == 3
    assert cand.count == 8
    values = [cand.value(c) for c in range(8)]
    assert values == sorted(values)
    assert values[0] == Fraction(4, 9)
    # bit i contributes s^-(b-2-i)
    assert values[1] == Fraction(4, 9) + Fraction(1, 3**5)
    assert values[4] == Fraction(4, 9) + Fraction(1, 3**3)


def test_toy_run_monotone_and_bounded():
    st = run(toy_state(), 6)
    assert st.m == 6
    xi_prev = Fraction(0)
    for log in st.steps:
        assert xi_prev <= log.xi < 1
        assert log.eta >= xi_prev
        assert log.xi >= log.eta
        assert log.xi < log.eta + Fraction(1, log.s**log.a)
        xi_prev = log.xi
    assert st.steps[0].width == 4
    assert all(log.width == 5 for log in st.steps[1:])


def test_toy_run_nested_intervals_hold():
    st = run(toy_state(), 6)
    for log in st.steps[1:]:
        assert log.nested_ok is True


def test_determinism_and_thread_invariance():
    a = run(toy_state(), 4)
    b = run(toy_state(), 4)
    c = run(toy_state(), 4, threads=3)
    da, db, dc = (canonical_dumps(s.as_dict()) for s in (a, b, c))
    assert da == db == dc


def test_resume_invariance():
    direct = run(toy_state(), 6)
    part = run(toy_state(), 3)
    revived = ConstructionState.from_dict(part.as_dict())
    resumed = run(revived, 3)
    assert canonical_dumps(resumed.as_dict()) == canonical_dumps(direct.as_dict())


def test_verify_state_passes_and_detects_tampering():
    st = run(toy_state(), 4)
    report = verify_state(st)
    assert [r["m"] for r in report] == [1, 2, 3, 4]
    bad = ConstructionState.from_dict(st.as_dict())
    tampered = bad.steps[2]
    object.__setattr__(tampered, "chosen", tampered.chosen ^ 1)
    with pytest.raises(Exception):
        verify_state(bad)


def test_objective_float_matches_high_precision():
    plan = toy_plan(6)
    sch = toy_schedule()
    st = run(toy_state(), 3)
    for log in st.steps:
        terms = _step_terms(plan, sch, log.m)
        if not terms:
            continue
        hi = _objective_hiprec(log.xi.numerator, log.xi.denominator, terms, log.m)
        assert abs(log.objective - float(hi)) <= 1e-9 * max(float(hi), 1.0)


def test_xi_denominator_divides_carrier_power():
    st = run(toy_state(), 6)
    for log in st.steps:
        assert log.s ** (log.b - 2) % log.xi.denominator == 0


def test_width_cap_paper_schedule():
    state = ConstructionState(plan=build_default_plan(3), schedule=Schedule(kind=KIND_PAPER, s1=3))
    with pytest.raises(WidthExceedsCap):
        step(state)  # width 38 at step 1


def test_degenerate_width_takes_eta():
    st = power_state(10)
    run(st, 2)
    # width <= 0 at both steps: xi = eta throughout
    for log in st.steps:
        assert log.width <= 0
        assert log.xi == log.eta
        assert log.candidates == 1


def test_power_run_invariants_and_symbols():
    st = power_state(10)
    run(st, 10)
    assert st.schedule.symbol(4) == 7
    xi_prev = Fraction(0)
    for log in st.steps:
        assert xi_prev <= log.xi < 1
        xi_prev = log.xi
    for log in st.steps[1:]:
        assert log.nested_ok is True
    # at least one non-degenerate window got enumerated
    assert any(log.width >= 1 for log in st.steps)


def test_emit_digits_cross_base():
    st = run(toy_state(), 6)
    last = st.steps[-1]
    # carrier-base digits: exactly the first b-2 digits of xi
    native = emit_digits(st, last.s)
    assert len(native) == last.b - 2
    assert native.digits == digits_of_rational(st.xi, last.s, last.b - 2).digits
    for base in (2, 10, 7):
        got = emit_digits(st, base)
        assert len(got) > 0
        assert got.digits == digits_of_rational(st.xi, base, len(got)).digits


def test_emit_digits_step_zero_empty():
    st = toy_state()
    assert len(emit_digits(st, 10)) == 0


def test_state_round_trip():
    st = run(toy_state(), 3)
    again = ConstructionState.from_dict(st.as_dict())
    assert canonical_dumps(again.as_dict()) == canonical_dumps(st.as_dict())


def test_second_best_certificate_recorded():
    st = run(toy_state(), 2)
    for log in st.steps:
        assert log.second is not None
        assert log.second >= log.objective
