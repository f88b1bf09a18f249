"""Exact arithmetic kernel: rationals, base-b digits, certified floors.

Every quantity that decides a digit or an argmin elsewhere in the package
flows through this module on exact big-integer arithmetic.  Floating point
is only permitted downstream of an exact fractional part (when a phase is
fed to cos/sin) and in reports.

Rationals are stdlib ``fractions.Fraction`` throughout: canonical form
(gcd-reduced, positive denominator) is guaranteed by the type, and all
field operations are exact.
"""

from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Union

from mpmath import iv
from mpmath.libmp import to_rational

Rational = Fraction

#: ``scale`` argument of :func:`frac_mod1`: a plain positive integer, or a
#: ``(base, exponent)`` pair that is reduced by modular exponentiation so the
#: full power is never materialized.
Scale = Union[int, tuple[int, int]]

DEFAULT_START_PREC = 128
DEFAULT_PREC_CAP = 4096
PREC_CAP_ENV = "ABSNORM_PREC_CAP"

# mpmath's interval context keeps its precision in module-global state, so
# interval evaluations are serialized behind this lock to stay thread-safe.
_IV_LOCK = threading.Lock()


class PrecisionExhausted(ArithmeticError):
    """Interval refinement hit the precision cap without deciding the floor.

    Signals an expression sitting pathologically close to an integer.
    """


def precision_cap() -> int:
    """Bit ceiling for certified evaluation; overridable via ABSNORM_PREC_CAP."""
    raw = os.environ.get(PREC_CAP_ENV)
    if raw:
        try:
            return max(int(raw), DEFAULT_START_PREC)
        except ValueError:
            pass
    return DEFAULT_PREC_CAP


@dataclass(frozen=True)
class DigitString:
    """An ordered run of base-``base`` digits, most significant first."""

    base: int
    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.base < 2:
            raise ValueError(f"base must be >= 2, got {self.base}")
        for d in self.digits:
            if not 0 <= d < self.base:
                raise ValueError(f"digit {d} out of range for base {self.base}")

    def __len__(self) -> int:
        return len(self.digits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.digits)

    def __getitem__(self, i):
        return self.digits[i]

    def __str__(self) -> str:
        if self.base <= 10:
            return "".join(str(d) for d in self.digits)
        return ".".join(str(d) for d in self.digits)

    def startswith(self, prefix: "DigitString") -> bool:
        return (
            self.base == prefix.base
            and self.digits[: len(prefix.digits)] == prefix.digits
        )

    def value(self) -> Fraction:
        """The rational 0.d1 d2 ... dn in this base."""
        acc = 0
        for d in self.digits:
            acc = acc * self.base + d
        return Fraction(acc, self.base ** len(self.digits))


def frac_mod1(x: Fraction, scale: Scale, t: int = 1) -> Fraction:
    """Exact fractional part {scale * t * x} in [0, 1).

    ``scale`` may be given as ``(base, exponent)``, in which case the power is
    reduced modulo the denominator of ``x`` by modular exponentiation; the
    full integer ``base**exponent`` is never built.
    """
    p, q = x.numerator, x.denominator
    if isinstance(scale, tuple):
        base, exponent = scale
        if base < 1 or exponent < 0:
            raise ValueError(f"invalid power scale ({base}, {exponent})")
        residue = pow(base, exponent, q)
    else:
        if scale < 1:
            raise ValueError(f"scale must be >= 1, got {scale}")
        residue = scale % q
    return Fraction((residue * t * p) % q, q)


@dataclass(frozen=True)
class CertifiedReal:
    """A real known only through certified interval enclosures.

    ``evaluate`` must return an ``iv.mpf`` enclosing the exact value under the
    ambient interval precision; enclosures tighten as precision grows.
    """

    description: str
    evaluate: Callable[[], object]

    def bounds(self, prec: int) -> tuple[Fraction, Fraction]:
        """Exact rational lower/upper bounds at ``prec`` working bits."""
        with _IV_LOCK:
            old = iv.prec
            try:
                iv.prec = prec
                val = self.evaluate()
            finally:
                iv.prec = old
        lo = Fraction(*to_rational(val._mpi_[0]))
        hi = Fraction(*to_rational(val._mpi_[1]))
        return lo, hi

    def __str__(self) -> str:
        return self.description


def exp_sqrt_plus_cubic(m: int, s1: int) -> CertifiedReal:
    """e**sqrt(m) + 2*s1*m**3 as a certified real."""
    if m < 1 or s1 < 1:
        raise ValueError("m and s1 must be positive")
    shift = 2 * s1 * m**3

    def evaluate():
        return iv.exp(iv.sqrt(iv.mpf(m))) + iv.mpf(shift)

    return CertifiedReal(f"e^sqrt({m}) + {shift}", evaluate)


def exp_rational_power(m: int, c: Fraction) -> CertifiedReal:
    """e**(m**c) as a certified real, for rational exponent 0 < c < 1."""
    c = Fraction(c)
    if m < 1:
        raise ValueError("m must be positive")
    if not 0 < c < 1:
        raise ValueError(f"exponent must satisfy 0 < c < 1, got {c}")

    def evaluate():
        power = iv.mpf(m) ** (iv.mpf(c.numerator) / iv.mpf(c.denominator))
        return iv.exp(power)

    return CertifiedReal(f"e^({m}^{c})", evaluate)


def int_over_log(n: int, x: int) -> CertifiedReal:
    """n / log(x) as a certified real, for integer x > 1."""
    if x <= 1:
        raise ValueError(f"x must exceed 1, got {x}")

    def evaluate():
        return iv.mpf(n) / iv.log(iv.mpf(x))

    return CertifiedReal(f"{n}/log({x})", evaluate)


def certified_floor(
    value: CertifiedReal,
    *,
    start_prec: int = DEFAULT_START_PREC,
    max_prec: int | None = None,
) -> int:
    """Floor of a certified real, widening precision until it is unambiguous.

    Precision doubles from ``start_prec`` up to the cap; raises
    :class:`PrecisionExhausted` if the enclosure still straddles an integer at
    the cap.
    """
    cap = max_prec if max_prec is not None else precision_cap()
    prec = min(start_prec, cap)
    while True:
        lo, hi = value.bounds(prec)
        flo = math.floor(lo)
        if flo == math.floor(hi):
            return int(flo)  # mpmath's gmpy backend would leak mpz here
        if prec >= cap:
            raise PrecisionExhausted(
                f"floor of {value.description} undecided at {cap} bits "
                f"(enclosure [{float(lo)}, {float(hi)}])"
            )
        prec = min(prec * 2, cap)


def certain_digits(lo: Fraction, hi: Fraction, base: int) -> DigitString:
    """Longest digit prefix shared by every real in [lo, hi).

    A prefix of length j is certain exactly when floor(lo*base^j) equals
    ceil(hi*base^j) - 1, i.e. the whole interval sits inside one base^-j
    cell.  Returns the empty string if even the first digit is uncertain.
    """
    if base < 2:
        raise ValueError(f"base must be >= 2, got {base}")
    if not (0 <= lo < hi <= 1):
        raise ValueError(f"need 0 <= lo < hi <= 1, got [{lo}, {hi})")
    digits: list[int] = []
    ln, ld = lo.numerator, lo.denominator
    hn, hd = hi.numerator, hi.denominator
    # Loop ends once base^j * (hi - lo) > 1: the cell is then too small.
    while True:
        ln *= base
        hn *= base
        d_lo = ln // ld
        d_hi = -((-hn) // hd) - 1  # ceil(hi * base^j) - 1
        if d_lo != d_hi:
            return DigitString(base, tuple(digits))
        digits.append(d_lo % base)


def digits_of_rational(x: Fraction, base: int, count: int) -> DigitString:
    """First ``count`` base-``base`` digits of x in [0, 1).

    Uses the floor expansion, which never ends in an infinite run of
    (base-1)s; this matches half-open interval semantics everywhere else.
    """
    if base < 2:
        raise ValueError(f"base must be >= 2, got {base}")
    if not 0 <= x < 1:
        raise ValueError(f"need 0 <= x < 1, got {x}")
    if count < 0:
        raise ValueError("count must be >= 0")
    num, den = x.numerator, x.denominator
    out = []
    for _ in range(count):
        num *= base
        d, num = divmod(num, den)
        out.append(d)
    return DigitString(base, tuple(out))
