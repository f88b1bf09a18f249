"""Digit-by-digit construction by exact enumeration and argmin of a
trigonometric objective.

Each step m fixes a window of base-s_m digits: the candidate set is the
grid point eta (the smallest multiple of s_m^-a_m at or above the previous
value) plus every 0/1 pattern in positions a_m+1 .. b_m-2.  The step
objective sums squared moduli of short Weyl sums over all active output
bases and frequencies |t| <= m; the smallest candidate attaining the
minimum wins.

Phases are exact rationals (residue arithmetic over the common denominator
s_m^(b_m-2)); they enter floating point only inside cos/sin.  Candidates
within relative 1e-12 of the float minimum are re-evaluated at 212-bit
precision before the tie-break, so the selection is deterministic and
independent of chunking or thread count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from mpmath import mp

from .exact import (
    DigitString,
    certain_digits,
    certified_floor,
    exp_rational_power,
    exp_sqrt_plus_cubic,
    int_over_log,
)
from .plan import SequencePlan
from .serialize import STATE_VERSION, frac_str, parse_frac

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

DEFAULT_WIDTH_CAP = 24
TIE_RTOL = 1e-12
TIE_ATOL = 1e-18
HIPREC_BITS = 212  # 4x the 53-bit double significand
BOUND_DELTA1 = 36.0  # admissible constant in the step-objective bound
CHUNK = 1024

KIND_PAPER = "paper"
KIND_POWER = "power"
KIND_TOY = "toy"


class WidthExceedsCap(RuntimeError):
    """The candidate window is too wide to enumerate exactly.

    The default schedule becomes computationally infeasible after very few
    steps; switch to a toy or power schedule for desk-scale runs.
    """


class VerificationError(RuntimeError):
    """Independent re-enumeration disagreed with the recorded construction."""


@dataclass(frozen=True)
class Schedule:
    """Step-size symbols <m>, <m;x> and the digit window bounds a_m, b_m.

    Kinds: ``paper`` uses floor(e^sqrt(m) + 2*s1*m^3); ``power`` uses
    floor(e^(m^c)) for a fixed rational 0 < c < 1; ``toy`` takes an explicit
    strictly increasing symbol table.  In every kind
    <m;x> = floor(<m>/log x) through certified interval evaluation.
    """

    kind: str
    s1: int | None = None
    c: Fraction | None = None
    table: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind == KIND_PAPER:
            if self.s1 is None or self.s1 < 3:
                raise ValueError("paper schedule needs s1 >= 3")
        elif self.kind == KIND_POWER:
            if self.c is None or not 0 < self.c < 1:
                raise ValueError("power schedule needs 0 < c < 1")
        elif self.kind == KIND_TOY:
            if not self.table:
                raise ValueError("toy schedule needs a symbol table")
            if any(b <= a for a, b in zip(self.table, self.table[1:])):
                raise ValueError("toy symbol table must be strictly increasing")
            if self.table[0] < 1:
                raise ValueError("toy symbols must be positive")
        else:
            raise ValueError(f"unknown schedule kind {self.kind!r}")

    def symbol(self, m: int) -> int:
        """<m>: the step-m window size symbol."""
        return _symbol(self, m)

    def symbol_for_base(self, m: int, x: int) -> int:
        """<m;x> = floor(<m>/log x) for integer x > 1."""
        return _symbol_for_base(self, m, x)

    def a(self, m: int, s_m: int) -> int:
        return self.symbol_for_base(m, s_m)

    def b(self, m: int, s_m: int) -> int:
        return self.symbol_for_base(m + 1, s_m)

    def as_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == KIND_PAPER:
            d["s1"] = self.s1
        elif self.kind == KIND_POWER:
            d["c"] = frac_str(self.c)
        else:
            d["symbols"] = list(self.table)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        kind = d["kind"]
        if kind == KIND_PAPER:
            return cls(kind=kind, s1=d["s1"])
        if kind == KIND_POWER:
            return cls(kind=kind, c=parse_frac(d["c"]))
        return cls(kind=kind, table=tuple(d["symbols"]))


@lru_cache(maxsize=None)
def _symbol(schedule: Schedule, m: int) -> int:
    if m < 1:
        raise ValueError("m must be >= 1")
    if schedule.kind == KIND_PAPER:
        return certified_floor(exp_sqrt_plus_cubic(m, schedule.s1))
    if schedule.kind == KIND_POWER:
        return certified_floor(exp_rational_power(m, schedule.c))
    if m > len(schedule.table):
        raise ValueError(f"toy symbol table too short for m = {m}")
    return schedule.table[m - 1]


@lru_cache(maxsize=None)
def _symbol_for_base(schedule: Schedule, m: int, x: int) -> int:
    return certified_floor(int_over_log(_symbol(schedule, m), x))


@dataclass(frozen=True)
class CandidateSet:
    """Step-m candidates: eta plus 0/1 digits in positions a+1 .. b-2."""

    eta: Fraction
    s: int
    a: int
    b: int

    @property
    def width(self) -> int:
        return self.b - self.a - 2

    @property
    def count(self) -> int:
        return 1 if self.width <= 0 else 2**self.width

    def value(self, c: int) -> Fraction:
        """Candidate for bit pattern c (bit i drives position b-2-i)."""
        if self.width <= 0:
            if c != 0:
                raise ValueError("degenerate candidate set has only c = 0")
            return self.eta
        if not 0 <= c < self.count:
            raise ValueError(f"candidate index {c} out of range")
        scale = self.s ** (self.b - 2)
        num = self.eta.numerator * (scale // self.eta.denominator)
        return Fraction(num + _bit_offset(c, self.s), scale)


def _bit_offset(c: int, s: int) -> int:
    """sum of s^i over set bits i of c (candidate value order = c order)."""
    total = 0
    i = 0
    while c:
        if c & 1:
            total += s**i
        c >>= 1
        i += 1
    return total


def eta(xi_prev: Fraction, s: int, a: int) -> Fraction:
    """Smallest grid point g * s^-a at or above xi_prev."""
    if not 0 <= xi_prev < 1:
        raise ValueError(f"xi_prev must lie in [0, 1), got {xi_prev}")
    scale = s**a
    g = -((-xi_prev.numerator * scale) // xi_prev.denominator)  # ceil
    return Fraction(g, scale)


def active_bases(plan: SequencePlan, m: int) -> list[tuple[int, int]]:
    """(base, multiplicity) pairs entering the step-m objective.

    Index i <= m contributes its base when the independence index m0 of that
    base is known within the horizon and at most m; repeated bases are
    weighted rather than recomputed.
    """
    weights: dict[int, int] = {}
    for i in range(1, m + 1):
        r = plan.r_seq[i - 1]
        m0 = plan.m0(r)
        if m0 is not None and m0 <= m:
            weights[r] = weights.get(r, 0) + 1
    return sorted(weights.items())


def _step_terms(plan: SequencePlan, schedule: Schedule, m: int):
    """(r, weight, j_lo, j_hi) with inner Weyl sums over j in (j_lo, j_hi]."""
    terms = []
    for r, weight in active_bases(plan, m):
        j_lo = schedule.symbol_for_base(m, r)
        j_hi = schedule.symbol_for_base(m + 1, r)
        if j_hi > j_lo:
            terms.append((r, weight, j_lo, j_hi))
    return terms


def _objective_eval(p: int, q: int, terms, tmax: int) -> tuple[float, int]:
    """Float objective at x = p/q (need not be canonical) plus e() count.

    The (r, t, j) iteration order and fsum grouping here are the single
    source of truth: every other evaluation path must reproduce them so
    that re-checks reproduce floats bit-for-bit.
    """
    parts: list[float] = []
    evals = 0
    cos, sin, fsum = math.cos, math.sin, math.fsum
    for r, weight, j_lo, j_hi in terms:
        count = j_hi - j_lo
        residues = []
        cur = pow(r, j_lo + 1, q)
        step_mul = r % q
        for _ in range(count):
            residues.append((cur * p) % q)
            cur = (cur * step_mul) % q
        acc = [0] * count
        w = float(weight)
        for _t in range(tmax):
            re_parts = []
            im_parts = []
            for idx in range(count):
                a_val = acc[idx] + residues[idx]
                if a_val >= q:
                    a_val -= q
                acc[idx] = a_val
                theta = TWO_PI * (a_val / q)
                re_parts.append(cos(theta))
                im_parts.append(sin(theta))
            re = fsum(re_parts)
            im = fsum(im_parts)
            parts.append(w * (re * re + im * im))
            evals += count
    return 2.0 * fsum(parts), evals


def _objective_hiprec(p: int, q: int, terms, tmax: int, prec: int = HIPREC_BITS):
    """Same objective at ``prec`` working bits (near-tie discrimination)."""
    with mp.workprec(prec):
        two_pi = 2 * mp.pi
        parts = []
        for r, weight, j_lo, j_hi in terms:
            count = j_hi - j_lo
            residues = []
            cur = pow(r, j_lo + 1, q)
            step_mul = r % q
            for _ in range(count):
                residues.append((cur * p) % q)
                cur = (cur * step_mul) % q
            acc = [0] * count
            for _t in range(tmax):
                re_parts = []
                im_parts = []
                for idx in range(count):
                    a_val = acc[idx] + residues[idx]
                    if a_val >= q:
                        a_val -= q
                    acc[idx] = a_val
                    theta = two_pi * mp.mpf(a_val) / q
                    re_parts.append(mp.cos(theta))
                    im_parts.append(mp.sin(theta))
                re = mp.fsum(re_parts)
                im = mp.fsum(im_parts)
                parts.append(weight * (re * re + im * im))
        return 2 * mp.fsum(parts)


def step_objective(x: Fraction, m: int, plan: SequencePlan, schedule: Schedule) -> float:
    """The step-m objective at x: doubled sum over t in 1..m and active bases
    of |sum_j e(r^j t x)|^2, with exact phases."""
    if not 0 <= x < 1:
        raise ValueError("x must lie in [0, 1)")
    terms = _step_terms(plan, schedule, m)
    value, _ = _objective_eval(x.numerator, x.denominator, terms, m)
    return value


@dataclass(frozen=True)
class StepLog:
    """Audit record of one executed step."""

    m: int
    s: int
    a: int
    b: int
    width: int
    eta: Fraction
    xi: Fraction
    chosen: int  # winning bit pattern (0 when degenerate)
    candidates: int
    objective: float
    second: float | None  # runner-up objective (exhaustive-minimum certificate)
    phase_evals: int
    requad: int  # near-ties re-evaluated at high precision
    beta: float
    bound_ratio: float | None
    bound_ok: bool | None
    nested_ok: bool | None

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "s": self.s,
            "a": self.a,
            "b": self.b,
            "width": self.width,
            "eta": frac_str(self.eta),
            "xi": frac_str(self.xi),
            "chosen": self.chosen,
            "candidates": self.candidates,
            "objective": self.objective,
            "second": self.second,
            "phase_evals": self.phase_evals,
            "requad": self.requad,
            "beta": self.beta,
            "bound_ratio": self.bound_ratio,
            "bound_ok": self.bound_ok,
            "nested_ok": self.nested_ok,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StepLog":
        return cls(
            m=d["m"],
            s=d["s"],
            a=d["a"],
            b=d["b"],
            width=d["width"],
            eta=parse_frac(d["eta"]),
            xi=parse_frac(d["xi"]),
            chosen=d["chosen"],
            candidates=d["candidates"],
            objective=d["objective"],
            second=d["second"],
            phase_evals=d["phase_evals"],
            requad=d["requad"],
            beta=d["beta"],
            bound_ratio=d["bound_ratio"],
            bound_ok=d["bound_ok"],
            nested_ok=d["nested_ok"],
        )


@dataclass
class ConstructionState:
    """Resumable construction state; serializes to canonical JSON."""

    plan: SequencePlan
    schedule: Schedule
    m: int = 0
    xi: Fraction = Fraction(0)
    steps: list[StepLog] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.plan.certified and self.schedule.kind != KIND_TOY

    def as_dict(self) -> dict:
        return {
            "version": STATE_VERSION,
            "certified": self.certified,
            "plan": self.plan.as_dict(),
            "schedule": self.schedule.as_dict(),
            "m": self.m,
            "xi": frac_str(self.xi),
            "steps": [s.as_dict() for s in self.steps],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConstructionState":
        if d.get("version") != STATE_VERSION:
            raise ValueError(f"unsupported state version {d.get('version')!r}")
        return cls(
            plan=SequencePlan.from_dict(d["plan"]),
            schedule=Schedule.from_dict(d["schedule"]),
            m=d["m"],
            xi=parse_frac(d["xi"]),
            steps=[StepLog.from_dict(s) for s in d["steps"]],
        )


@dataclass
class _ChunkResult:
    best: float
    best_c: int
    runner: float
    ties: list[tuple[float, int]]
    evals: int


def _near_tie(value: float, best: float) -> bool:
    return value <= best + abs(best) * TIE_RTOL + TIE_ATOL


def _scan_chunk(c_lo, c_hi, s, q, p0, deltas, terms, tmax) -> _ChunkResult:
    best = math.inf
    best_c = -1
    runner = math.inf
    ties: list[tuple[float, int]] = []
    evals = 0
    offset = _bit_offset(c_lo, s)
    for c in range(c_lo, c_hi):
        if c != c_lo:
            z = (c & -c).bit_length() - 1
            offset += deltas[z]
        value, ev = _objective_eval(p0 + offset, q, terms, tmax)
        evals += ev
        if value < best:
            runner = min(runner, best)
            best = value
            best_c = c
            ties = [(v, cc) for v, cc in ties if _near_tie(v, best)]
            ties.append((value, c))
        else:
            runner = min(runner, value)
            if _near_tie(value, best):
                ties.append((value, c))
    return _ChunkResult(best=best, best_c=best_c, runner=runner, ties=ties, evals=evals)


def step(
    state: ConstructionState,
    *,
    width_cap: int = DEFAULT_WIDTH_CAP,
    threads: int = 1,
) -> ConstructionState:
    """Execute step m = state.m + 1 in place and return the state.

    Raises :class:`WidthExceedsCap` when the candidate window exceeds
    ``width_cap`` bits (exact enumeration is the contract; no heuristics).
    A window of negative or zero width degenerates to the single candidate
    eta.  The result is independent of ``threads``.
    """
    plan, schedule = state.plan, state.schedule
    m = state.m + 1
    if m > plan.horizon:
        raise ValueError(f"plan horizon {plan.horizon} exhausted at step {m}")
    s_m = plan.s_seq[m - 1]
    if schedule.symbol(m + 1) <= schedule.symbol(m):
        raise ValueError(f"schedule symbols must strictly increase at m = {m}")
    a_m = schedule.a(m, s_m)
    b_m = schedule.b(m, s_m)
    width = b_m - a_m - 2
    if width > width_cap:
        raise WidthExceedsCap(
            f"step {m} window width {width} exceeds cap {width_cap} "
            f"(2^{width} candidates); use a toy or power schedule"
        )
    eta_m = eta(state.xi, s_m, a_m)
    terms = _step_terms(plan, schedule, m)

    requad = 0
    evals = 0
    second: float | None = None
    if width <= 0 or not terms:
        chosen = 0
        count = 1 if width <= 0 else 2**width
        xi_m = eta_m
        if terms:
            objective, evals = _objective_eval(
                xi_m.numerator, xi_m.denominator, terms, m
            )
        else:
            objective = 0.0
            if count > 1:
                second = 0.0
    else:
        count = 2**width
        q = s_m ** (b_m - 2)
        p0 = eta_m.numerator * (q // eta_m.denominator)
        powers = [s_m**i for i in range(width)]
        deltas = [powers[z] - (powers[z] - 1) // (s_m - 1) for z in range(width)]
        bounds = list(range(0, count, CHUNK)) + [count]
        ranges = list(zip(bounds[:-1], bounds[1:]))
        if threads > 1 and len(ranges) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                chunks = list(
                    pool.map(
                        lambda rg: _scan_chunk(rg[0], rg[1], s_m, q, p0, deltas, terms, m),
                        ranges,
                    )
                )
        else:
            chunks = [_scan_chunk(lo, hi, s_m, q, p0, deltas, terms, m) for lo, hi in ranges]

        best = min(ch.best for ch in chunks)
        evals = sum(ch.evals for ch in chunks)
        ties = sorted(
            {(v, c) for ch in chunks for v, c in ch.ties if _near_tie(v, best)},
            key=lambda vc: vc[1],
        )
        ordered = sorted(v for ch in chunks for v in (ch.best, ch.runner))
        second = ordered[1] if count > 1 and len(ordered) > 1 and ordered[1] < math.inf else None
        if len(ties) > 1:
            requad = len(ties)
            refined = []
            for _v, c in ties:
                hv = _objective_hiprec(p0 + _bit_offset(c, s_m), q, terms, m)
                refined.append((hv, c))
            refined.sort(key=lambda hc: (hc[0], hc[1]))
            chosen = refined[0][1]
        else:
            chosen = ties[0][1]
        objective = next(v for v, c in ties if c == chosen)
        xi_m = Fraction(p0 + _bit_offset(chosen, s_m), q)

    beta_m = math.exp(plan.beta_log[m - 1])
    growth = schedule.symbol(m + 1) - schedule.symbol(m)
    denom = m * m * growth ** (2.0 - beta_m)
    bound_ratio = objective / denom if denom > 0 else None
    bound_ok = bound_ratio <= BOUND_DELTA1 if bound_ratio is not None else None

    nested_ok: bool | None = None
    if state.steps:
        prev = state.steps[-1]
        lo_ok = xi_m >= prev.xi
        hi_ok = xi_m + Fraction(1, s_m ** (b_m - 2)) <= prev.xi + Fraction(
            1, prev.s ** (prev.b - 2)
        )
        nested_ok = lo_ok and hi_ok
        if not nested_ok:
            logger.warning(
                "nested-interval invariant violated at step %d "
                "(toy schedules may not satisfy the growth conditions)",
                m,
            )

    state.steps.append(
        StepLog(
            m=m,
            s=s_m,
            a=a_m,
            b=b_m,
            width=width,
            eta=eta_m,
            xi=xi_m,
            chosen=chosen,
            candidates=count,
            objective=objective,
            second=second,
            phase_evals=evals,
            requad=requad,
            beta=beta_m,
            bound_ratio=bound_ratio,
            bound_ok=bound_ok,
            nested_ok=nested_ok,
        )
    )
    state.m = m
    state.xi = xi_m
    return state


def run(
    state: ConstructionState,
    steps: int,
    *,
    width_cap: int = DEFAULT_WIDTH_CAP,
    threads: int = 1,
) -> ConstructionState:
    """Execute ``steps`` further steps."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    for _ in range(steps):
        step(state, width_cap=width_cap, threads=threads)
    return state


def emit_digits(state: ConstructionState, out_base: int) -> DigitString:
    """Digits of the limit value certain after the executed steps.

    After step M every real in [xi_M, xi_M + s_M^(2-b_M)) is a possible
    limit; only the digits shared by that whole interval are emitted, in any
    requested base.
    """
    if out_base < 2:
        raise ValueError("out_base must be >= 2")
    if state.m == 0:
        return DigitString(out_base, ())
    last = state.steps[-1]
    lo = state.xi
    hi = min(lo + Fraction(1, last.s ** (last.b - 2)), Fraction(1))
    return certain_digits(lo, hi, out_base)


def verify_state(state: ConstructionState) -> list[dict]:
    """Single-threaded independent re-enumeration of every recorded step.

    Recomputes the window, eta, and the full candidate scan through the
    public objective on canonical fractions (a different code path from the
    incremental scanner), replays the near-tie protocol, and compares the
    recorded choice.  Raises :class:`VerificationError` on any mismatch.
    """
    plan, schedule = state.plan, state.schedule
    xi_prev = Fraction(0)
    report = []
    for log in state.steps:
        m = log.m
        s_m = plan.s_seq[m - 1]
        a_m = schedule.a(m, s_m)
        b_m = schedule.b(m, s_m)
        cand = CandidateSet(eta=eta(xi_prev, s_m, a_m), s=s_m, a=a_m, b=b_m)
        if (s_m, a_m, b_m) != (log.s, log.a, log.b) or cand.eta != log.eta:
            raise VerificationError(f"step {m}: window mismatch")
        terms = _step_terms(plan, schedule, m)
        if cand.width <= 0 or not terms:
            xi_check = cand.eta
            best_obj = step_objective(xi_check, m, plan, schedule) if terms else 0.0
            chosen = 0
        else:
            values = []
            for c in range(cand.count):
                x = cand.value(c)
                values.append((step_objective(x, m, plan, schedule), c))
            best_obj = min(v for v, _ in values)
            ties = [(v, c) for v, c in values if _near_tie(v, best_obj)]
            if len(ties) > 1:
                refined = []
                for _v, c in ties:
                    x = cand.value(c)
                    hv = _objective_hiprec(x.numerator, x.denominator, terms, m)
                    refined.append((hv, c))
                refined.sort(key=lambda hc: (hc[0], hc[1]))
                chosen = refined[0][1]
            else:
                chosen = ties[0][1]
            xi_check = cand.value(chosen)
            strictly_smaller = [c for v, c in values if v < log.objective]
            if strictly_smaller:
                raise VerificationError(
                    f"step {m}: candidates {strictly_smaller} beat the recorded objective"
                )
        if xi_check != log.xi or chosen != log.chosen:
            raise VerificationError(
                f"step {m}: argmin mismatch (got c={chosen}, recorded c={log.chosen})"
            )
        report.append({"m": m, "candidates": cand.count, "objective": best_obj, "ok": True})
        xi_prev = log.xi
    if xi_prev != state.xi:
        raise VerificationError("final value does not match the step log")
    return report
