"""Equidistribution toolkit: exact discrepancies, Weyl sums, bound machinery.

Point sets live on exact rationals, so both discrepancy flavours come out
as exact fractions from the sorted-points closed forms.  Weyl-sum phases are
reduced exactly to residues first (never through floats), then fed to
cos/sin and accumulated with exactly-rounded summation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .constants import mult_dependent
from .exact import DigitString, frac_mod1

try:
    import gmpy2
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    gmpy2 = None

TWO_PI = 2.0 * math.pi

#: Per-factor absolute error budget for the truncated cosine product:
#: kernel truncation (2*s**-60), convolution rounding (~60 ulp), and one
#: cos/log/exp rounding each, with ~2.5x headroom.
_HS5_FACTOR_ERR = 1.2e-13
_HS5_KERNEL_LEN = 60


class EmptyPointSet(ValueError):
    """Discrepancy of an empty point set is undefined."""


@dataclass(frozen=True)
class PointSet:
    """Finite multiset of rationals in [0, 1)."""

    points: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        for p in self.points:
            if not 0 <= p < 1:
                raise ValueError(f"point {p} outside [0, 1)")

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class OrbitSpec:
    """The orbit {base^n * t * x mod 1 : n = 1..count}."""

    x: Fraction
    base: int
    count: int
    t: int = 1

    def __post_init__(self) -> None:
        if self.base < 2:
            raise ValueError("base must be >= 2")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.t == 0:
            raise ValueError("t must be nonzero")


def orbit_points(spec: OrbitSpec) -> PointSet:
    """Exact orbit points via residue iteration (no full powers built)."""
    p, q = spec.x.numerator, spec.x.denominator
    b = spec.base % q
    acc = (p * spec.t) % q
    pts = []
    for _ in range(spec.count):
        acc = (acc * b) % q
        pts.append(Fraction(acc, q))
    return PointSet(tuple(pts))


def _as_points(ps) -> list[Fraction]:
    pts = list(ps.points) if isinstance(ps, PointSet) else [Fraction(p) for p in ps]
    if not pts:
        raise EmptyPointSet("need at least one point")
    for p in pts:
        if not 0 <= p < 1:
            raise ValueError(f"point {p} outside [0, 1)")
    return pts


def discrepancy_extreme(ps: PointSet | Sequence[Fraction]) -> Fraction:
    """Exact extreme discrepancy (sup over all subintervals).

    Sorted-points closed form: max_i(i/N - x_(i)) + max_i(x_(i) - (i-1)/N).
    """
    pts = sorted(_as_points(ps))
    n = len(pts)
    up = max(Fraction(i + 1, n) - x for i, x in enumerate(pts))
    down = max(x - Fraction(i, n) for i, x in enumerate(pts))
    return up + down


def discrepancy_star(ps: PointSet | Sequence[Fraction]) -> Fraction:
    """Exact star discrepancy (sup over intervals anchored at 0)."""
    pts = sorted(_as_points(ps))
    n = len(pts)
    return max(
        max(Fraction(i + 1, n) - x, x - Fraction(i, n)) for i, x in enumerate(pts)
    )


_WEYL_CHUNK = 4096


def _weyl_chunk(p: int, q: int, b: int, t: int, n_lo: int, n_hi: int) -> tuple[float, float]:
    """Exactly-rounded partial sums over n in (n_lo, n_hi]."""
    acc = (((p * t) % q) * pow(b, n_lo + 1, q)) % q
    re: list[float] = []
    im: list[float] = []
    cos, sin = math.cos, math.sin
    for _ in range(n_hi - n_lo):
        theta = TWO_PI * (acc / q)
        re.append(cos(theta))
        im.append(sin(theta))
        acc = (acc * b) % q
    return math.fsum(re), math.fsum(im)


def weyl_sum(spec: OrbitSpec, threads: int = 1) -> complex:
    """Sum of e(base^n * t * x) for n = 1..count, phases reduced exactly.

    Residues are carried by modular arithmetic; each term's phase enters
    floating point only at the final division.  Accumulation is an
    exactly-rounded fsum over fixed-size chunks followed by an fsum of the
    partials, so the result is identical for every ``threads`` setting.
    """
    p, q = spec.x.numerator, spec.x.denominator
    b = spec.base % q
    ranges = [
        (lo, min(lo + _WEYL_CHUNK, spec.count))
        for lo in range(0, spec.count, _WEYL_CHUNK)
    ]
    if threads > 1 and len(ranges) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda rg: _weyl_chunk(p, q, b, spec.t, *rg), ranges))
    else:
        parts = [_weyl_chunk(p, q, b, spec.t, lo, hi) for lo, hi in ranges]
    return complex(math.fsum(pt[0] for pt in parts), math.fsum(pt[1] for pt in parts))


def _et_from_normalized(norm_sums: Sequence[float], h: int, c1: float, c2: float) -> float:
    tail = math.fsum(norm_sums[t - 1] / t for t in range(1, h + 1))
    return c1 / h + c2 * tail


def erdos_turan_bound(
    spec: OrbitSpec, h: int, c1: float = 1.0, c2: float = 3.0, threads: int = 1
) -> float:
    """Discrepancy upper bound c1/H + c2 * sum_{t<=H} |S_t|/(t*N).

    The classical inequality carries an unnamed absolute constant; (1, 3)
    are configurable defaults, checked for empirical dominance in the test
    corpus rather than asserted as a theorem.
    """
    if h < 1:
        raise ValueError("H must be >= 1")
    norms = []
    for t in range(1, h + 1):
        s = weyl_sum(
            OrbitSpec(x=spec.x, base=spec.base, count=spec.count, t=t), threads=threads
        )
        norms.append(abs(s) / spec.count)
    return _et_from_normalized(norms, h, c1, c2)


def nice_digit_pairs(
    digits: DigitString,
    from_index: int = 0,
    *,
    overlapping: bool = True,
    nice=None,
) -> int:
    """Count digit pairs (c[i+1], c[i]), i >= from_index, passing ``nice``.

    The default predicate rejects exactly the constant pairs (0,0) and
    (s-1,s-1).  A stricter reading -- rejecting any pair drawn entirely from
    {0, s-1} -- can be had by passing a custom predicate.  Non-overlapping
    mode steps by two, counting disjoint pairs only.
    """
    if from_index < 0:
        raise ValueError("from_index must be >= 0")
    base = digits.base
    if nice is None:
        top = base - 1

        def nice(hi: int, lo: int) -> bool:
            return not ((hi == 0 and lo == 0) or (hi == top and lo == top))

    step = 1 if overlapping else 2
    count = 0
    for i in range(from_index, len(digits) - 1, step):
        if nice(digits[i + 1], digits[i]):
            count += 1
    return count


@dataclass(frozen=True)
class HS5Result:
    """Truncated cosine-product sum with a certified truncation error."""

    value: float
    certified_error: float
    hypothesis_ok: bool  # l >= s**K as the cancellation lemma assumes
    terms: int


def _digits_lsb(n: int, base: int) -> np.ndarray:
    """Base-``base`` digits of n, least significant first, as float64."""
    if gmpy2 is not None:
        text = gmpy2.digits(gmpy2.mpz(n), base)
    else:  # pragma: no cover
        text = _digits_str_fallback(n, base)
    raw = np.frombuffer(text.encode("ascii"), dtype=np.uint8)[::-1].astype(np.int64)
    vals = np.where(raw >= 97, raw - 87, raw - 48)  # 0-9 then a-z
    return vals.astype(np.float64)


def _digits_str_fallback(n: int, base: int) -> str:  # pragma: no cover
    out = []
    while n:
        n, d = divmod(n, base)
        out.append("0123456789abcdefghijklmnopqrstuvwxyz"[d])
    return "".join(reversed(out)) or "0"


def hs5_sum(
    r: int, s: int, l: int, K: int, N: int, tol: float = 1e-12
) -> HS5Result:
    """Sum over n < N of the cosine product prod_{k>K} |cos(pi r^n l / s^k)|.

    Each factor's argument is reduced exactly: |cos(pi y)| has period 1 in y,
    so y = (r^n l mod s^k)/s^k, read off the base-s digits of r^n l.  The
    infinite product is truncated at the first k with r^n l / s^k below
    ``tol``; the discarded tail is bounded through |cos(pi y)| >= 1-(pi y)^2/2
    and charged to ``certified_error`` together with a per-factor float
    budget.

    The l >= s**K hypothesis of the cancellation lemma is not required to
    evaluate the sum; violations are flagged on the result, not raised.
    """
    if r < 2 or s < 2:
        raise ValueError("bases must be >= 2")
    if mult_dependent(r, s):
        raise ValueError(f"{r} and {s} are multiplicatively dependent")
    if l < 1 or K < 1 or N < 1:
        raise ValueError("l, K, N must be positive")
    if not 0 < tol < 1e-3:
        raise ValueError("tol must lie in (0, 1e-3)")

    hypothesis_ok = l >= s**K
    log_s = math.log(s)
    # past k_star = digits(R) + extra, every y = R/s^k is below tol/s
    extra = math.ceil((math.log(s) + math.log(1.0 / tol)) / log_s)
    # tail: sum of (pi y)^2/2 over the geometric tail starting below tol
    tail_bound = (math.pi**2 / 2) * tol * tol * (s * s) / (s * s - 1.0)

    kernel = np.power(float(s), -np.arange(1, _HS5_KERNEL_LEN + 1, dtype=np.float64))

    values: list[float] = []
    err_parts: list[float] = []
    big = l
    for _ in range(N):
        digits = _digits_lsb(big, s)
        d = len(digits)
        k_star = d + extra
        # y_k = (R mod s^k)/s^k for k = 1..d+extra, via the digit window below k
        padded = np.concatenate([digits, np.zeros(extra, dtype=np.float64)])
        win = np.convolve(padded, kernel)[: k_star]  # win[k-1] = y_k
        ys = win[K:k_star]  # factors for k = K+1 .. k_star
        factor_count = ys.size
        if factor_count > 0:
            with np.errstate(divide="ignore"):
                logs = np.log(np.abs(np.cos(np.pi * ys)))
            total = float(np.sum(logs))
            term = math.exp(total) if total > -745.0 else 0.0
        else:
            term = 1.0
        values.append(term)
        err_parts.append(tail_bound * term + factor_count * _HS5_FACTOR_ERR)
        big *= r

    return HS5Result(
        value=math.fsum(values),
        certified_error=math.fsum(err_parts),
        hypothesis_ok=hypothesis_ok,
        terms=N,
    )


def hs5_bound_log(N: int, log_a20: float) -> float:
    """log of the target bound 2*N^(1-a20), a20 given in log space.

    Uses a safe upper bound for a20*log N so the returned value never
    exceeds the true log bound (the all-N a20 underflows floats).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if N == 1:
        return math.log(2.0)
    x = log_a20 + math.log(math.log(N))
    sub = math.exp(x) if x > -690 else 1e-300  # 1e-300 > e^-690 >= e^x
    return math.log(2.0) + math.log(N) - sub


def cell_deviation_discrepancy_bound(q: int, level, dev):
    """Bound 2*q^-level + q^level * dev on |count/N - |I|| for arbitrary I.

    Covering an arbitrary interval by cells of size q^-level costs 2*q^-level
    in approximation; each of at most q^level cells contributes its frequency
    deviation ``dev``.  Integer level with exact dev returns an exact
    Fraction (dev = 0 gives exactly 2*q^-level); float inputs return float.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    if dev < 0:
        raise ValueError("dev must be >= 0")
    if isinstance(level, int) and isinstance(dev, (int, Fraction)):
        if level < 1:
            raise ValueError("level must be >= 1")
        cells = q**level
        return Fraction(2, cells) + cells * Fraction(dev)
    lv = float(level)
    if lv <= 0:
        raise ValueError("level must be positive")
    cells = math.exp(lv * math.log(q))
    return 2.0 / cells + cells * float(dev)


def turing_word_length(N: int) -> float:
    """Word length sqrt(log N)/4 used by the double-exponential construction."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return math.sqrt(math.log(N)) / 4.0


def turing_discrepancy_bound(N: int, base: int) -> float:
    """Bridge bound at word length L = sqrt(log N)/4 and deviation e^-L^2."""
    L = turing_word_length(N)
    return cell_deviation_discrepancy_bound(base, L, math.exp(-L * L))


def sierpinski_cell_deviation(N: int, cells: int, eps) -> float:
    """Per-cell frequency deviation (24/eps)^(1/6) * cells^(1/3) / N^(1/6)."""
    if N < 1 or cells < 2:
        raise ValueError("need N >= 1 and cells >= 2")
    e = float(eps)
    if not 0 < e <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    return (24.0 / e) ** (1.0 / 6) * cells ** (1.0 / 3) / N ** (1.0 / 6)
