"""Base-sequence planning: decay tables, the repetition function, m0 indices.

A plan fixes, up to a finite horizon, the two base sequences the digit
construction consumes: R' (output bases) and S' (carrier bases), obtained
from raw sequences by the repetition rule phi.  phi(k) is the largest index
allowed by three constraints: it may grow by at most one per step, the decay
table beta must stay above beta_1/k^(1/4), and the magnitude table gamma
must stay below gamma_1*k.

beta entries are carried in natural-log space.  The certified table feeds
the all-N cancellation exponents, whose logs sit near -20000 and below; a
configurable floor (default 1e-300, as a log) keeps the table in a range
where the decay condition can actually bind at desk scale.  User-supplied
toy tables are first-class but flagged non-certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .constants import log_a20_all_n, mult_dependent

BETA_FLOOR = 1e-300
LOG_HALF = math.log(0.5)


class PlanInfeasible(ValueError):
    """No repetition index satisfies the constraints at some step."""


class HorizonTooShort(ValueError):
    """A base stays multiplicatively dependent on S through the horizon."""


def _is_perfect_power(n: int) -> bool:
    if n < 4:
        return False
    for k in range(2, n.bit_length() + 1):
        root = round(n ** (1.0 / k))
        for cand in (root - 1, root, root + 1):
            if cand >= 2 and cand**k == n:
                return True
    return False


def default_s_sequence(count: int) -> list[int]:
    """First ``count`` integers bigger than 2 that are not perfect powers."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out: list[int] = []
    n = 3
    while len(out) < count:
        if not _is_perfect_power(n):
            out.append(n)
        n += 1
    return out


def default_r_sequence(count: int) -> list[int]:
    """All integers >= 2 in increasing order (the output-base sequence)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return list(range(2, count + 2))


@lru_cache(maxsize=None)
def _pair_log_beta(r: int, s: int) -> float | None:
    if mult_dependent(r, s):
        return None
    return log_a20_all_n(r, s)


def beta_log_table(
    raw_r: list[int],
    raw_s: list[int],
    *,
    floor: float = BETA_FLOOR,
) -> list[float]:
    """Log-space decay table from the certified all-N exponents.

    Entry k is min over all independent pairs (r_i, s_j), i,j <= k, of
    log a20(r_i, s_j), floored at log(floor).  Dependent pairs do not
    contribute (the cancellation exponent only exists for independent ones).
    """
    kmax = min(len(raw_r), len(raw_s))
    log_floor = math.log(floor)
    best = math.inf
    out: list[float] = []
    for k in range(1, kmax + 1):
        for j in range(1, k + 1):
            for a, b in ((raw_r[k - 1], raw_s[j - 1]), (raw_r[j - 1], raw_s[k - 1])):
                v = _pair_log_beta(a, b)
                if v is not None and v < best:
                    best = v
        out.append(max(best, log_floor) if best < math.inf else log_floor)
    return out


def toy_beta_log(values: list[float]) -> list[float]:
    """Convert a plain toy beta table (values in (0, 1/2)) to log space."""
    out = []
    for v in values:
        if not 0 < v < 0.5:
            raise ValueError(f"toy beta entries must lie in (0, 1/2), got {v}")
        out.append(math.log(v))
    return out


def gamma_table(raw_r: list[int], raw_s: list[int]) -> list[int]:
    """gamma_k = max of the first k entries of both raw sequences."""
    kmax = min(len(raw_r), len(raw_s))
    out = []
    cur = 0
    for k in range(kmax):
        cur = max(cur, raw_r[k], raw_s[k])
        out.append(cur)
    return out


@dataclass(frozen=True)
class SequencePlan:
    """Immutable plan: post-repetition sequences plus their provenance."""

    raw_r: tuple[int, ...]
    raw_s: tuple[int, ...]
    raw_beta_log: tuple[float, ...]
    raw_gamma: tuple[int, ...]
    phi: tuple[int, ...]
    r_seq: tuple[int, ...]
    s_seq: tuple[int, ...]
    beta_log: tuple[float, ...]  # per step, = raw_beta_log[phi(k)-1]
    gamma: tuple[int, ...]
    m0_entries: tuple[tuple[int, int], ...]
    horizon: int
    certified: bool

    def m0(self, r: int) -> int | None:
        """First index from which r is independent of every later s, if known."""
        for base, idx in self.m0_entries:
            if base == r:
                return idx
        return None

    def as_dict(self) -> dict:
        return {
            "raw_r": list(self.raw_r),
            "raw_s": list(self.raw_s),
            "raw_beta_log": list(self.raw_beta_log),
            "raw_gamma": list(self.raw_gamma),
            "phi": list(self.phi),
            "r_seq": list(self.r_seq),
            "s_seq": list(self.s_seq),
            "beta_log": list(self.beta_log),
            "gamma": list(self.gamma),
            "m0": {str(r): idx for r, idx in self.m0_entries},
            "horizon": self.horizon,
            "certified": self.certified,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SequencePlan":
        return cls(
            raw_r=tuple(d["raw_r"]),
            raw_s=tuple(d["raw_s"]),
            raw_beta_log=tuple(d["raw_beta_log"]),
            raw_gamma=tuple(d["raw_gamma"]),
            phi=tuple(d["phi"]),
            r_seq=tuple(d["r_seq"]),
            s_seq=tuple(d["s_seq"]),
            beta_log=tuple(d["beta_log"]),
            gamma=tuple(d["gamma"]),
            m0_entries=tuple(sorted((int(r), idx) for r, idx in d["m0"].items())),
            horizon=d["horizon"],
            certified=d["certified"],
        )


def apply_phi(
    raw_r: list[int],
    raw_s: list[int],
    beta_log: list[float],
    gamma: list[int] | None = None,
    horizon: int | None = None,
    *,
    certified: bool = False,
) -> SequencePlan:
    """Build the post-repetition plan from raw sequences and decay tables.

    ``beta_log`` is in natural-log space and must be non-increasing with all
    entries below log(1/2); ``gamma`` defaults to the running max of the raw
    sequences.  Raises :class:`PlanInfeasible` if the constraints fail even
    at index 1 (possible only for malformed toy tables) or if the resulting
    carrier sequence violates s_m <= m*s_1.
    """
    n_raw = min(len(raw_r), len(raw_s))
    if n_raw < 1:
        raise ValueError("raw sequences must be non-empty")
    if any(r < 2 for r in raw_r):
        raise ValueError("entries of R must be >= 2")
    if any(s <= 2 for s in raw_s):
        raise ValueError("entries of S must be > 2")
    if gamma is None:
        gamma = gamma_table(raw_r, raw_s)
    if horizon is None:
        horizon = n_raw
    if horizon < 1:
        raise ValueError("horizon must be >= 1")

    n_table = min(n_raw, len(beta_log), len(gamma))
    if n_table < 1:
        raise ValueError("decay tables must be non-empty")
    for k in range(1, n_table):
        if beta_log[k] > beta_log[k - 1]:
            raise ValueError("beta table must be non-increasing")
        if gamma[k] < gamma[k - 1]:
            raise ValueError("gamma table must be non-decreasing")
    if any(b >= LOG_HALF for b in beta_log[:n_table]):
        raise ValueError("beta entries must be < 1/2")

    beta1 = beta_log[0]
    gamma1 = gamma[0]

    phi: list[int] = [1]
    for k in range(2, horizon + 1):
        chosen = None
        for cand in range(min(phi[-1] + 1, n_table), 0, -1):
            if beta_log[cand - 1] >= beta1 - 0.25 * math.log(k) and gamma[cand - 1] <= gamma1 * k:
                chosen = cand
                break
        if chosen is None:
            raise PlanInfeasible(f"no feasible repetition index at step {k}")
        phi.append(chosen)

    r_seq = tuple(raw_r[i - 1] for i in phi)
    s_seq = tuple(raw_s[i - 1] for i in phi)
    s1 = s_seq[0]
    for m, s in enumerate(s_seq, start=1):
        if s > m * s1:
            raise PlanInfeasible(f"s_{m} = {s} exceeds m*s_1 = {m * s1}")

    m0_entries = []
    for r in sorted(set(r_seq)):
        idx = _scan_m0(r, s_seq)
        if idx is not None:
            m0_entries.append((r, idx))

    return SequencePlan(
        raw_r=tuple(raw_r),
        raw_s=tuple(raw_s),
        raw_beta_log=tuple(beta_log),
        raw_gamma=tuple(gamma),
        phi=tuple(phi),
        r_seq=r_seq,
        s_seq=s_seq,
        beta_log=tuple(beta_log[i - 1] for i in phi),
        gamma=tuple(gamma[i - 1] for i in phi),
        m0_entries=tuple(m0_entries),
        horizon=horizon,
        certified=certified,
    )


def _scan_m0(r: int, s_seq: tuple[int, ...]) -> int | None:
    """Smallest index m0 with r independent of s_m for all m0 <= m <= end."""
    last_dep = 0
    for m, s in enumerate(s_seq, start=1):
        if mult_dependent(r, s):
            last_dep = m
    if last_dep == len(s_seq):
        return None
    return last_dep + 1


def compute_m0(r: int, plan: SequencePlan) -> int:
    """First index from which r is independent of the plan's carrier tail.

    Raises :class:`HorizonTooShort` when r is still dependent at the horizon
    (the index, if it exists, lies beyond what this plan can certify).
    """
    if r < 2:
        raise ValueError("r must be >= 2")
    idx = _scan_m0(r, plan.s_seq)
    if idx is None:
        raise HorizonTooShort(
            f"{r} is still dependent on s_{plan.horizon} = {plan.s_seq[-1]}"
        )
    return idx


def build_default_plan(horizon: int, *, beta_floor: float = BETA_FLOOR) -> SequencePlan:
    """Certified plan: R = 2,3,4,..., S = non-perfect-powers > 2, all-N betas."""
    raw_r = default_r_sequence(horizon)
    raw_s = default_s_sequence(horizon)
    beta = beta_log_table(raw_r, raw_s, floor=beta_floor)
    return apply_phi(raw_r, raw_s, beta, horizon=horizon, certified=True)
