"""Effective Sierpinski construction: bad-frequency interval families,
truncated measures (exact and certified bound), and greedy digit selection.

The full construction is doubly exponential (its smallest index n_lower is
already 194), so everything here runs in one of two modes:

* exact mode enumerates the q^n strings of a family and produces the exact
  union of intervals, subject to an enumeration cap;
* bound mode never enumerates: it counts bad strings in the integer window
  that can touch a cell by digit-DP and charges 3/q^n per string, a
  subadditive upper bound on the clipped measure.

Toy overrides shrink the family ranges to desk scale for exercising the
machinery; any state produced with them is flagged non-certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .exact import DigitString

ENUM_CAP = 4_000_000


class ScaleExceedsCap(RuntimeError):
    """Exact enumeration would exceed the configured string cap."""


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of disjoint, sorted, half-open rational intervals."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[Fraction, Fraction]]) -> "IntervalSet":
        """Normalize: drop empties, sort, merge overlapping or adjacent runs."""
        live = sorted((lo, hi) for lo, hi in pairs if lo < hi)
        merged: list[tuple[Fraction, Fraction]] = []
        for lo, hi in live:
            if merged and lo <= merged[-1][1]:
                if hi > merged[-1][1]:
                    merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        return cls(tuple(merged))

    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), Fraction(0))

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet.from_pairs(self.intervals + other.intervals)

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        a, b = list(self.intervals), list(other.intervals)
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] <= b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(tuple(out))

    def clip(self, lo: Fraction, hi: Fraction) -> "IntervalSet":
        return self.intersection(IntervalSet.from_pairs([(lo, hi)]))

    def __contains__(self, x: Fraction) -> bool:
        return any(lo <= x < hi for lo, hi in self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)


EMPTY_SET = IntervalSet(())


def n_lower(m: int, q: int, eps: Fraction) -> int:
    """Smallest string length in the (m, q) family: floor(24 m^6 q^2/eps) + 2."""
    if m < 1 or q < 2:
        raise ValueError("need m >= 1 and q >= 2")
    eps = Fraction(eps)
    if not 0 < eps <= Fraction(1, 2):
        raise ValueError(f"eps must lie in (0, 1/2], got {eps}")
    return math.floor(Fraction(24 * m**6 * q**2) / eps) + 2


def bad_digit_counts(q: int, m: int, n: int) -> list[int]:
    """Occurrence counts j whose frequency deviates from 1/q by at least 1/m.

    Exact integer form of |j/n - 1/q| >= 1/m:  m*|q*j - n| >= n*q.
    """
    return [j for j in range(n + 1) if m * abs(q * j - n) >= n * q]


def delta_family(
    q: int, m: int, n: int, p: int, *, cap: int = ENUM_CAP
) -> IntervalSet:
    """Exact union of the intervals around bad strings, clipped to [0, 1).

    A string b_1..b_n with digit-p frequency off by >= 1/m contributes
    [(B-1)/q^n, (B+2)/q^n) where B is its integer value; runs of nearby bad
    strings merge exactly.  Intervals may spill outside the string's own
    cell; they are clipped to the unit interval only.
    """
    if not 0 <= p < q:
        raise ValueError(f"digit p={p} out of range for base {q}")
    total = q**n
    if total > cap:
        raise ScaleExceedsCap(f"{q}^{n} strings exceed the enumeration cap {cap}")
    bad = bad_digit_counts(q, m, n)
    if not bad:
        return EMPTY_SET

    rem = np.arange(total, dtype=np.int64)
    counts = np.zeros(total, dtype=np.int32)
    for _ in range(n):
        counts += rem % q == p
        rem = rem // q
    mask = np.isin(counts, np.asarray(bad, dtype=np.int32))
    hits = np.nonzero(mask)[0]
    if hits.size == 0:
        return EMPTY_SET

    scale = total
    pairs = []
    run_start = prev = int(hits[0])
    for b in hits[1:]:
        b = int(b)
        if b - prev > 3:  # gap too wide for [B-1, B+2) windows to touch
            pairs.append((Fraction(run_start - 1, scale), Fraction(prev + 2, scale)))
            run_start = b
        prev = b
    pairs.append((Fraction(run_start - 1, scale), Fraction(prev + 2, scale)))
    clipped = [(max(lo, Fraction(0)), min(hi, Fraction(1))) for lo, hi in pairs]
    return IntervalSet.from_pairs(clipped)


def delta_measure_bound(q: int, m: int, n: int, p: int) -> Fraction:
    """Subadditive measure bound 3 * sum_j C(n,j)(q-1)^(n-j) / q^n.

    Counts bad strings by their digit-p occurrence count alone (the bound is
    the same for every p) and charges each the full window length 3/q^n, so
    it dominates the exact clipped measure without any enumeration.
    """
    if not 0 <= p < q:
        raise ValueError(f"digit p={p} out of range for base {q}")
    bad = bad_digit_counts(q, m, n)
    count = sum(math.comb(n, j) * (q - 1) ** (n - j) for j in bad)
    return Fraction(3 * count, q**n)


def _count_bad_below(q: int, n: int, p: int, bad: frozenset[int], x: int) -> int:
    """#{0 <= B < x} whose n-digit base-q string has digit-p count in ``bad``."""
    if x <= 0:
        return 0
    total = q**n
    if x >= total:
        return sum(math.comb(n, j) * (q - 1) ** (n - j) for j in bad)
    digits = []
    v = x
    for _ in range(n):
        v, d = divmod(v, q)
        digits.append(d)
    digits.reverse()

    def ways(free: int, need: int) -> int:
        if need < 0 or need > free:
            return 0
        return math.comb(free, need) * (q - 1) ** (free - need)

    count = 0
    seen_p = 0
    for pos, dx in enumerate(digits):
        free = n - pos - 1
        for d in range(dx):
            c = seen_p + (1 if d == p else 0)
            count += sum(ways(free, j - c) for j in bad)
        if dx == p:
            seen_p += 1
    return count


def window_string_count(
    q: int, m: int, n: int, p: int, cell_lo: Fraction, cell_hi: Fraction
) -> int:
    """Bad strings whose interval [(B-1)/q^n, (B+2)/q^n) can meet the cell.

    The window condition is B > cell_lo*q^n - 2 and B < cell_hi*q^n + 1,
    resolved exactly over the integers.
    """
    bad = frozenset(bad_digit_counts(q, m, n))
    if not bad:
        return 0
    scale = q**n
    b_lo = math.floor(cell_lo * scale - 2) + 1
    b_hi = math.ceil(cell_hi * scale + 1)  # exclusive
    b_lo = max(b_lo, 0)
    b_hi = min(b_hi, scale)
    if b_lo >= b_hi:
        return 0
    return _count_bad_below(q, n, p, bad, b_hi) - _count_bad_below(q, n, p, bad, b_lo)


@dataclass(frozen=True)
class ToyCaps:
    """Desk-scale overrides for the family ranges (outputs non-certified)."""

    q_max: int = 3
    m_max: int = 3
    n_lo: int = 2  # replaces n_lower(m, q)
    n_hi: int = 6  # replaces the upper end k * n_lower(m, q)
    k_cap: int | None = None  # caps the truncation index p_n

    def as_dict(self) -> dict:
        return {
            "q_max": self.q_max,
            "m_max": self.m_max,
            "n_lo": self.n_lo,
            "n_hi": self.n_hi,
            "k_cap": self.k_cap,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ToyCaps":
        return cls(
            q_max=d["q_max"],
            m_max=d["m_max"],
            n_lo=d["n_lo"],
            n_hi=d["n_hi"],
            k_cap=d.get("k_cap"),
        )


@dataclass(frozen=True)
class SierpinskiParams:
    """Fixed inputs of one construction run."""

    eps: Fraction
    base: int
    toy: ToyCaps | None = None
    mode: str = "auto"  # exact | bound | auto (exact when under the cap)
    enum_cap: int = ENUM_CAP

    def __post_init__(self) -> None:
        eps = Fraction(self.eps)
        if not 0 < eps <= Fraction(1, 2):
            raise ValueError(f"eps must lie in (0, 1/2], got {self.eps}")
        if self.base < 2:
            raise ValueError("output base must be >= 2")
        if self.mode not in ("exact", "bound", "auto"):
            raise ValueError(f"unknown mode {self.mode!r}")


def truncation_index(step: int, base: int) -> int:
    """Truncation index for the step-``step`` digit: 5*(base-1)*2^(2*step-2)."""
    if step < 1:
        raise ValueError("step must be >= 1")
    return 5 * (base - 1) * 4 ** (step - 1)


def truncation_families(
    k: int, eps: Fraction, toy: ToyCaps | None = None
) -> Iterator[tuple[int, int, int, int]]:
    """(q, m, n, p) members of the depth-k truncation, toy caps applied."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if toy is not None and toy.k_cap is not None:
        k = min(k, toy.k_cap)
    q_top = k + 1 if toy is None else min(k + 1, toy.q_max)
    m_top = k if toy is None else min(k, toy.m_max)
    for q in range(2, q_top + 1):
        for m in range(1, m_top + 1):
            if toy is None:
                lo = n_lower(m, q, eps)
                hi = k * lo
            else:
                lo, hi = toy.n_lo, toy.n_hi
            for n in range(lo, hi + 1):
                for p in range(q):
                    yield (q, m, n, p)


def _truncated_delta(
    k: int, params: SierpinskiParams, cache: dict | None = None
) -> IntervalSet:
    """Exact truncated union at depth k (may raise ScaleExceedsCap)."""
    if cache is not None and k in cache:
        return cache[k]
    acc = EMPTY_SET
    for q, m, n, p in truncation_families(k, params.eps, params.toy):
        acc = acc.union(delta_family(q, m, n, p, cap=params.enum_cap))
    if cache is not None:
        cache[k] = acc
    return acc


def _resolve_mode(k: int, params: SierpinskiParams) -> str:
    if params.mode != "auto":
        return params.mode
    worst = max(
        (q**n for q, m, n, p in truncation_families(k, params.eps, params.toy)),
        default=0,
    )
    return "exact" if worst <= params.enum_cap else "bound"


@dataclass(frozen=True)
class DigitChoice:
    """Outcome of one greedy digit selection."""

    step: int
    digit: int
    mode: str
    k: int
    measures: tuple[Fraction, ...]  # per candidate digit: measure or bound
    cell_width: Fraction
    surviving: bool | None  # exact mode: chosen cell keeps positive complement


def digit_selection(
    prefix: DigitString, step: int, params: SierpinskiParams, *, cache: dict | None = None
) -> DigitChoice:
    """Greedy choice of the step-``step`` digit given the current prefix.

    Splits the prefix cell into ``base`` subcells and takes the smallest
    digit whose truncated-union measure (exact mode) or certified bound
    (bound mode) is minimal.
    """
    if len(prefix) != step - 1:
        raise ValueError(f"prefix length {len(prefix)} does not match step {step}")
    b = params.base
    k = truncation_index(step, b)
    if params.toy is not None and params.toy.k_cap is not None:
        k = min(k, params.toy.k_cap)
    mode = _resolve_mode(k, params)

    prefix_val = prefix.value() if len(prefix) else Fraction(0)
    width = Fraction(1, b**step)

    measures: list[Fraction] = []
    if mode == "exact":
        delta = _truncated_delta(k, params, cache)
        for d in range(b):
            lo = prefix_val + d * width
            measures.append(delta.clip(lo, lo + width).measure())
    else:
        for d in range(b):
            lo = prefix_val + d * width
            hi = lo + width
            parts = []
            for q, m, n, p in truncation_families(k, params.eps, params.toy):
                cnt = window_string_count(q, m, n, p, lo, hi)
                if cnt:
                    parts.append(Fraction(3 * cnt, q**n))
            measures.append(sum(parts, Fraction(0)))

    best = min(range(b), key=lambda d: (measures[d], d))
    surviving = measures[best] < width if mode == "exact" else None
    return DigitChoice(
        step=step,
        digit=best,
        mode=mode,
        k=k,
        measures=tuple(measures),
        cell_width=width,
        surviving=surviving,
    )


def select_digit(prefix: DigitString, step: int, params: SierpinskiParams) -> int:
    """The chosen digit alone (see :func:`digit_selection` for the record)."""
    return digit_selection(prefix, step, params).digit


@dataclass
class SierpinskiState:
    """Mutable run record: chosen digits plus one DigitChoice per step."""

    params: SierpinskiParams
    digits: DigitString
    choices: list[DigitChoice]

    @classmethod
    def fresh(cls, params: SierpinskiParams) -> "SierpinskiState":
        return cls(params=params, digits=DigitString(params.base, ()), choices=[])


def run(
    params: SierpinskiParams,
    digit_count: int,
    state: SierpinskiState | None = None,
) -> SierpinskiState:
    """Select digits greedily until ``digit_count`` digits are fixed."""
    st = state if state is not None else SierpinskiState.fresh(params)
    cache: dict = {}
    while len(st.digits) < digit_count:
        step = len(st.digits) + 1
        choice = digit_selection(st.digits, step, params, cache=cache)
        st.digits = DigitString(params.base, st.digits.digits + (choice.digit,))
        st.choices.append(choice)
    return st


class SelectionMismatch(RuntimeError):
    """Independent re-selection disagreed with the recorded run."""


def verify_choices(state: SierpinskiState) -> list[dict]:
    """Re-derive every recorded digit choice and cross-check the two modes.

    Each step is recomputed from the prefix; on top of that, whenever the
    exact truncation is enumerable the certified bound is checked to
    dominate the exact measure cell by cell, and the two modes must agree
    on the digit whenever the bound slack is smaller than the measure gap.
    Raises :class:`SelectionMismatch` on any disagreement.
    """
    from dataclasses import replace

    params = state.params
    prefix = DigitString(params.base, ())
    cache: dict = {}
    report = []
    for recorded in state.choices:
        redo = digit_selection(prefix, recorded.step, params, cache=cache)
        if redo != recorded:
            raise SelectionMismatch(f"step {recorded.step}: selection mismatch")
        cross = None
        if redo.mode == "exact":
            bound = digit_selection(
                prefix, recorded.step, replace(params, mode="bound")
            )
            slack = max(b - e for b, e in zip(bound.measures, redo.measures))
            if slack < 0:
                raise SelectionMismatch(
                    f"step {recorded.step}: bound fell below the exact measure"
                )
            gaps = sorted(redo.measures)
            decisive = len(gaps) > 1 and slack < gaps[1] - gaps[0]
            if decisive and bound.digit != redo.digit:
                raise SelectionMismatch(
                    f"step {recorded.step}: modes disagree despite a decisive gap"
                )
            cross = {"slack": str(slack), "decisive": decisive}
        report.append({"step": recorded.step, "digit": recorded.digit, "cross": cross})
        prefix = DigitString(params.base, prefix.digits + (recorded.digit,))
    return report
