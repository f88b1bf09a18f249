"""Multiplicative structure of a base pair and its explicit constant ladder.

Given multiplicatively independent bases r and s, this module computes the
per-prime ladder (t_i, u_i, v_i, f_i, g_i, q_i) from the merged factorization
and, from it, every explicit constant controlling the cancellation exponent
a20 of the truncated cosine-product sum, in two flavours:

* ``large-n``  -- valid once N exceeds exp(log_n0_hs4); the constants keep
  ordinary float magnitudes.
* ``all-n``    -- valid for every N; a14 and a20 collapse to 1/(N0 log N0),
  which underflows any machine float, so they are carried in natural-log
  space and never exponentiated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

FACTORIZE_CAP = 2**64

VARIANT_LARGE_N = "large-n"
VARIANT_ALL_N = "all-n"


class MultiplicativelyDependent(ValueError):
    """The two bases are rational powers of each other."""


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division, smallest prime first."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if n > FACTORIZE_CAP:
        raise ValueError(f"n exceeds the trial-division cap 2**64: {n}")
    out: list[tuple[int, int]] = []

    def strip(m: int, p: int) -> int:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            out.append((p, e))
        return m

    n = strip(n, 2)
    n = strip(n, 3)
    f = 5
    while f * f <= n:
        n = strip(n, f)
        n = strip(n, f + 2)
        f += 6
    if n > 1:
        out.append((n, 1))
    return out


def mult_dependent(r: int, s: int) -> bool:
    """True iff r and s are rational powers of each other.

    Equivalent to: same prime support and proportional exponent vectors.
    """
    if r < 2 or s < 2:
        raise ValueError("bases must be >= 2")
    fr = dict(factorize(r))
    fs = dict(factorize(s))
    if set(fr) != set(fs):
        return False
    primes = sorted(fr)
    d0, e0 = fr[primes[0]], fs[primes[0]]
    return all(fr[p] * e0 == fs[p] * d0 for p in primes)


def _valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero is undefined")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class PrimeTerm:
    """Per-prime record of the ladder for one base pair."""

    p: int
    d: int  # exponent of p in r
    e: int  # exponent of p in s
    t: Fraction  # r**e / s**d, p cancelled
    u: int  # numerator part of t over primes ordered before p (inclusive)
    v: int  # denominator part over primes ordered after p
    f: int  # 2 if p == 2 else p - 1
    g: int  # 1 + v_p(t**f - 1)
    q: int  # witness: t**f = 1 + q * p**(g-1)  (mod p**g), p does not divide q


@dataclass(frozen=True)
class BasePairAnalysis:
    r: int
    s: int
    terms: tuple[PrimeTerm, ...]  # ordered by d/e descending, d/0 = +inf
    h: int  # number of distinct primes in r*s
    b: int  # max(d_i) * max(e_i)


def analyze_pair(r: int, s: int) -> BasePairAnalysis:
    """Exact per-prime ladder for a multiplicatively independent pair."""
    if mult_dependent(r, s):
        raise MultiplicativelyDependent(f"{r} and {s} are rational powers of each other")
    fr = dict(factorize(r))
    fs = dict(factorize(s))
    primes = sorted(set(fr) | set(fs))
    recs = [(p, fr.get(p, 0), fs.get(p, 0)) for p in primes]

    def key(rec):
        p, d, e = rec
        if e == 0:  # d/0 = +inf sorts first
            return (0, Fraction(0), p)
        return (1, Fraction(-d, e), p)

    recs.sort(key=key)

    h = len(recs)
    b = max(d for _, d, _ in recs) * max(e for _, _, e in recs)

    terms = []
    for i, (p, d, e) in enumerate(recs):
        u = 1
        for pk, dk, ek in recs[: i + 1]:
            u *= pk ** (dk * e - ek * d)
        v = 1
        for pk, dk, ek in recs[i + 1 :]:
            v *= pk ** (ek * d - dk * e)
        # u/v must equal r**e / s**d exactly
        assert u * s**d == v * r**e, (r, s, p)
        t = Fraction(u, v)
        f = 2 if p == 2 else p - 1
        diff = u**f - v**f
        g = _valuation(diff, p) + 1
        pg = p**g
        residue = (pow(u, f, pg) * pow(v, -f, pg)) % pg
        dist = (residue - 1) % pg
        q, rem = divmod(dist, p ** (g - 1))
        assert rem == 0 and q % p != 0, (r, s, p, g)
        terms.append(PrimeTerm(p=p, d=d, e=e, t=t, u=u, v=v, f=f, g=g, q=q))

    return BasePairAnalysis(r=r, s=s, terms=tuple(terms), h=h, b=b)


@dataclass(frozen=True)
class ConstantSet:
    """Every explicit constant for one base pair, in one variant.

    ``log_*`` fields are natural logarithms.  In the all-n variant a14 and
    a20 exist only in log space (their linear values underflow); the linear
    fields are then None.
    """

    r: int
    s: int
    variant: str
    a1: int
    a2: int
    a3: float
    a4: float
    a5: float
    a6: float
    a8: float
    a9: float
    a14: float | None
    a15: float
    a20: float | None
    a21: float
    a22: float
    alpha5: float
    log_a14: float
    log_a20: float
    log_n0_hs2: float
    log_n0_hs3: float
    log_n0_hs4: float

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "s": self.s,
            "variant": self.variant,
            "a1": self.a1,
            "a2": self.a2,
            "a3": self.a3,
            "a4": self.a4,
            "a5": self.a5,
            "a6": self.a6,
            "a8": self.a8,
            "a9": self.a9,
            "a14": self.a14,
            "a15": self.a15,
            "a20": self.a20,
            "a21": self.a21,
            "a22": self.a22,
            "alpha5": self.alpha5,
            "log_a14": self.log_a14,
            "log_a20": self.log_a20,
            "log_n0_hs2": self.log_n0_hs2,
            "log_n0_hs3": self.log_n0_hs3,
            "log_n0_hs4": self.log_n0_hs4,
        }


#: Human-readable defining formulas, keyed like ConstantSet fields (for reports).
CONSTANT_FORMULAS = {
    "a1": "max(g_1..g_h)",
    "a2": "max over primes p dividing s of p^(2b+g)",
    "a3": "120*sqrt(log s)",
    "a4": "0.028/log(s^2-2)",
    "a5": "log(2)/(16*log s)",
    "a6": "(0.014/log s)*(1/log s - 1/s)",
    "a8": "a5 - (log 7 + 3*log log m)/(288*m),  m = max(r,s)",
    "a9": "a6/2",
    "a14": "a8/6  [large-n]  |  1/(N0*log N0)  [all-n]",
    "a15": "a9/6  [large-n]  |  1/(2*log N0)   [all-n]",
    "a20": "min(a14, a22)",
    "a21": "cos(pi/s^2)",
    "a22": "-a15*log(a21)",
    "alpha5": "e/(4*pi*sqrt(a4*(1-2*a4)))",
    "log_n0_hs2": "288*m*(log m)^4 + 192*(log m)^3 + 24*(log m)^2",
    "log_n0_hs3": "2 * log_n0_hs2",
    "log_n0_hs4": "12 * log_n0_hs2 = 288*(12*m*(log m)^4 + 8*(log m)^3 + (log m)^2)",
}


def compute_constants(analysis: BasePairAnalysis, variant: str = VARIANT_LARGE_N) -> ConstantSet:
    """Populate the full constant set for one base pair.

    N0 thresholds stay in natural-log space; the all-n a14/a20 are returned
    only as logs since 1/(N0 log N0) underflows every machine float.
    """
    if variant not in (VARIANT_LARGE_N, VARIANT_ALL_N):
        raise ValueError(f"unknown variant {variant!r}")
    r, s = analysis.r, analysis.s
    m = max(r, s)
    logm = math.log(m)
    logs = math.log(s)

    a1 = max(term.g for term in analysis.terms)
    a2 = max(term.p ** (2 * analysis.b + term.g) for term in analysis.terms if term.e > 0)

    log_n0_hs2 = 288 * m * logm**4 + 192 * logm**3 + 24 * logm**2
    log_n0_hs3 = 2 * log_n0_hs2
    log_n0_hs4 = 6 * log_n0_hs3

    a3 = 120.0 * math.sqrt(logs)
    a4 = 0.028 / math.log(s * s - 2)
    alpha5 = math.e / (4 * math.pi * math.sqrt(a4 * (1 - 2 * a4)))
    a5 = math.log(2) / (16 * logs)
    a6 = (0.014 / logs) * (1 / logs - 1 / s)
    a8 = a5 - (math.log(7) + 3 * math.log(logm)) / (288 * m)
    a9 = a6 / 2
    assert a8 > 0, f"a8 non-positive for ({r},{s}); pair outside supported range"

    a21 = math.cos(math.pi / s**2)

    if variant == VARIANT_LARGE_N:
        a14: float | None = a8 / 6
        a15 = a9 / 6
        a22 = a15 * (-math.log(a21))
        a20: float | None = min(a14, a22)
        log_a14 = math.log(a14)
        log_a20 = math.log(a20)
    else:
        big = log_n0_hs4  # log N0
        log_a14 = -(big + math.log(big))  # log of 1/(N0 log N0)
        a15 = 1 / (2 * big)
        a22 = (-math.log(a21)) / (2 * big)
        log_a20 = min(log_a14, math.log(a22))
        a14 = None
        a20 = None

    return ConstantSet(
        r=r,
        s=s,
        variant=variant,
        a1=a1,
        a2=a2,
        a3=a3,
        a4=a4,
        a5=a5,
        a6=a6,
        a8=a8,
        a9=a9,
        a14=a14,
        a15=a15,
        a20=a20,
        a21=a21,
        a22=a22,
        alpha5=alpha5,
        log_a14=log_a14,
        log_a20=log_a20,
        log_n0_hs2=log_n0_hs2,
        log_n0_hs3=log_n0_hs3,
        log_n0_hs4=log_n0_hs4,
    )


def constants_for_pair(r: int, s: int, variant: str = VARIANT_LARGE_N) -> ConstantSet:
    """Convenience: analyze_pair + compute_constants."""
    return compute_constants(analyze_pair(r, s), variant)


def log_a20_all_n(r: int, s: int) -> float:
    """log of the all-n cancellation exponent for one independent pair."""
    return constants_for_pair(r, s, VARIANT_ALL_N).log_a20


def solve_exact_a4(s: int, rel_tol: float = 1e-6) -> float:
    """Supremum of admissible a4 in (0, 1/16] for the digit-pair inequality.

    Bisects on (s^2-2)^a < 2^(1/4+2a) * a^a * (1-2a)^(1/2-a).  The closed
    form 0.028/log(s^2-2) used by compute_constants is a lower bound of the
    value returned here; this routine is a diagnostic, not the default.
    """
    if s < 2:
        raise ValueError("s must be >= 2")

    def admissible(a: float) -> bool:
        lhs = a * math.log(s * s - 2)
        rhs = (
            (0.25 + 2 * a) * math.log(2)
            + a * math.log(a)
            + (0.5 - a) * math.log(1 - 2 * a)
        )
        return lhs < rhs

    hi = 1.0 / 16
    if admissible(hi):
        return hi
    lo = 1e-12
    assert admissible(lo)
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
    return lo
