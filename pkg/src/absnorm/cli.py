"""Unified command-line front end.

Exit codes: 0 success, 2 validation/usage errors, 3 enumeration or
precision caps hit.  State files are canonical JSON (sorted keys, rationals
as "p/q" strings) so identical runs produce identical bytes and every
report is reproducible from the state file alone.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .constants import (
    CONSTANT_FORMULAS,
    MultiplicativelyDependent,
    VARIANT_ALL_N,
    VARIANT_LARGE_N,
    constants_for_pair,
)
from .equidist import (
    OrbitSpec,
    discrepancy_extreme,
    discrepancy_star,
    erdos_turan_bound,
    hs5_bound_log,
    hs5_sum,
    orbit_points,
    weyl_sum,
)
from .exact import PrecisionExhausted
from .plan import (
    HorizonTooShort,
    PlanInfeasible,
    SequencePlan,
    apply_phi,
    build_default_plan,
    default_r_sequence,
    default_s_sequence,
    gamma_table,
    toy_beta_log,
)
from .schmidt import (
    KIND_PAPER,
    KIND_POWER,
    KIND_TOY,
    ConstructionState,
    Schedule,
    VerificationError,
    WidthExceedsCap,
    emit_digits,
    run as run_steps,
    verify_state,
)
from .serialize import canonical_dumps, frac_str, read_json, write_json
from .sierpinski import (
    ScaleExceedsCap,
    SelectionMismatch,
    SierpinskiParams,
    ToyCaps,
    run as sierpinski_run,
    verify_choices,
)

CAP_ERRORS = (WidthExceedsCap, PrecisionExhausted, ScaleExceedsCap)
USAGE_ERRORS = (
    ValueError,
    MultiplicativelyDependent,
    PlanInfeasible,
    HorizonTooShort,
    FileNotFoundError,
)


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse rational {text!r}: {exc}") from None


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


# ---------------------------------------------------------------- constants

def _cmd_constants(args) -> int:
    variant = VARIANT_ALL_N if args.variant == "all-n" else VARIANT_LARGE_N
    cs = constants_for_pair(args.r, args.s, variant)
    if args.json:
        payload = {"constants": cs.as_dict(), "formulas": CONSTANT_FORMULAS}
        sys.stdout.write(canonical_dumps(payload))
        return 0
    print(f"base pair ({cs.r}, {cs.s}), variant {cs.variant}")
    for name, value in cs.as_dict().items():
        if name in ("r", "s", "variant"):
            continue
        formula = CONSTANT_FORMULAS.get(name.removeprefix("log_"), "")
        shown = "(log-space only)" if value is None else value
        print(f"  {name:12} = {shown!s:<24} {formula}")
    return 0


# --------------------------------------------------------------------- plan

def _load_toy_tables(path: str) -> tuple[list[float], list[int] | None]:
    betas: list[float] = []
    gammas: list[int] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() in ("beta", "#"):
                continue
            betas.append(float(row[0]))
            if len(row) > 1 and row[1].strip():
                gammas.append(int(row[1]))
    if gammas and len(gammas) != len(betas):
        raise ValueError("toy table must give gamma for every row or none")
    return betas, (gammas or None)


def _cmd_plan(args) -> int:
    if args.toy:
        raw_r = _int_list(args.raw_r) if args.raw_r else default_r_sequence(args.horizon)
        raw_s = _int_list(args.raw_s) if args.raw_s else default_s_sequence(args.horizon)
        betas, gammas = _load_toy_tables(args.toy)
        plan = apply_phi(
            raw_r,
            raw_s,
            toy_beta_log(betas),
            gammas if gammas else gamma_table(raw_r, raw_s),
            horizon=args.horizon,
            certified=False,
        )
    else:
        plan = build_default_plan(args.horizon)
    text = canonical_dumps(plan.as_dict())
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"plan written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _load_plan(path: str) -> SequencePlan:
    return SequencePlan.from_dict(read_json(path))


# ------------------------------------------------------------------ schmidt

def _parse_schedule(text: str, plan: SequencePlan) -> Schedule:
    if text == "paper":
        return Schedule(kind=KIND_PAPER, s1=plan.s_seq[0])
    if text.startswith("power:"):
        return Schedule(kind=KIND_POWER, c=_parse_fraction(text.split(":", 1)[1]))
    if text.startswith("toy:"):
        spec = read_json(text.split(":", 1)[1])
        symbols = spec["symbols"] if isinstance(spec, dict) else spec
        return Schedule(kind=KIND_TOY, table=tuple(int(v) for v in symbols))
    raise ValueError(f"unknown schedule {text!r} (expected paper | power:C | toy:FILE)")


def _cmd_schmidt_run(args) -> int:
    state_path = Path(args.state)
    if args.resume:
        if not state_path.exists():
            raise ValueError(f"cannot resume: {state_path} does not exist")
        state = ConstructionState.from_dict(read_json(state_path))
    else:
        if args.plan:
            plan = _load_plan(args.plan)
        else:
            plan = build_default_plan(max(args.horizon, args.steps + 1))
        schedule = _parse_schedule(args.schedule, plan)
        state = ConstructionState(plan=plan, schedule=schedule)
    run_steps(state, args.steps, width_cap=args.width_cap, threads=args.threads)
    write_json(state_path, state.as_dict())
    flag = "certified" if state.certified else "toy (non-certified)"
    print(f"state at step {state.m}: xi = {frac_str(state.xi)} [{flag}] -> {state_path}")
    if args.verify:
        verify_state(state)
        print(f"verified: argmin re-check passed for all {state.m} steps")
    return 0


def _cmd_schmidt_digits(args) -> int:
    state = ConstructionState.from_dict(read_json(args.state))
    digits = emit_digits(state, args.base)
    out = digits.digits[: args.max] if args.max else digits.digits
    print(f"base {args.base}: {len(out)} certain digits")
    print("".join(str(d) for d in out) if args.base <= 10 else ".".join(str(d) for d in out))
    return 0


# --------------------------------------------------------------- sierpinski

def _cmd_sierpinski_run(args) -> int:
    toy = None
    if args.toy:
        toy = ToyCaps.from_dict(read_json(args.toy))
    params = SierpinskiParams(
        eps=_parse_fraction(args.eps), base=args.base, toy=toy, mode=args.mode
    )
    state = sierpinski_run(params, args.digits)
    payload = {
        "version": 1,
        "certified": toy is None,
        "params": {
            "eps": frac_str(Fraction(params.eps)),
            "base": params.base,
            "mode": params.mode,
            "toy": toy.as_dict() if toy else None,
        },
        "digits": list(state.digits.digits),
        "choices": [
            {
                "step": ch.step,
                "digit": ch.digit,
                "mode": ch.mode,
                "k": ch.k,
                "measures": [frac_str(v) for v in ch.measures],
                "cell_width": frac_str(ch.cell_width),
                "surviving": ch.surviving,
            }
            for ch in state.choices
        ],
    }
    write_json(args.state, payload)
    print(f"digits: {state.digits} -> {args.state}")
    return 0


# --------------------------------------------------------------------- disc

def _read_points(path: str) -> list[Fraction]:
    pts = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            for tok in row:
                tok = tok.strip()
                if tok:
                    pts.append(_parse_fraction(tok))
    return pts


def _cmd_disc(args) -> int:
    if args.disc_cmd == "exact":
        pts = _read_points(args.points)
        print(frac_str(discrepancy_extreme(pts)))
        if args.star:
            print(frac_str(discrepancy_star(pts)))
        return 0
    # orbit
    spec = OrbitSpec(x=_parse_fraction(args.x), base=args.base, count=args.n, t=args.t)
    pts = orbit_points(spec)
    if args.report:
        rows = _orbit_report_rows(spec.x, spec.base, spec.count)
        _emit_table(rows, args.report, sys.stdout)
    else:
        print(f"D_N  = {frac_str(discrepancy_extreme(pts))}")
        print(f"D*_N = {frac_str(discrepancy_star(pts))}")
    return 0


# ------------------------------------------------------- weyl / et / hs5

def _cmd_weyl(args) -> int:
    spec = OrbitSpec(x=_parse_fraction(args.x), base=args.base, count=args.n, t=args.t)
    s = weyl_sum(spec)
    print(f"re = {s.real!r}")
    print(f"im = {s.imag!r}")
    print(f"|S|/N = {abs(s) / spec.count!r}")
    return 0


def _cmd_et(args) -> int:
    spec = OrbitSpec(x=_parse_fraction(args.x), base=args.base, count=args.n)
    h = args.H if args.H else max(1, math.floor(math.log(args.n)))
    bound = erdos_turan_bound(spec, h, args.c1, args.c2)
    print(f"H = {h}")
    print(f"bound = {bound!r}")
    if args.exact:
        d = discrepancy_extreme(orbit_points(spec))
        print(f"D_N  = {frac_str(d)} ({float(d)!r})")
    return 0


def _cmd_hs5(args) -> int:
    res = hs5_sum(args.r, args.s, args.l, args.K, args.n, tol=args.tol)
    print(f"value = {res.value!r}")
    print(f"certified_error = {res.certified_error!r}")
    if not res.hypothesis_ok:
        print(f"warning: l = {args.l} < s^K = {args.s ** args.K} (lemma hypothesis violated)")
    cs = constants_for_pair(args.r, args.s, VARIANT_ALL_N)
    log_bound = hs5_bound_log(args.n, cs.log_a20)
    log_value = math.log(res.value) if res.value > 0 else -math.inf
    print(f"log value = {log_value!r}, log bound 2N^(1-a20) = {log_bound!r}")
    print(f"within bound: {log_value <= log_bound}")
    return 0


# ------------------------------------------------------------------- report

def _orbit_report_rows(x: Fraction, base: int, n_max: int, points: int = 12) -> list[dict]:
    checkpoints = sorted(
        {max(2, round(n_max ** (i / (points - 1)))) for i in range(points)}
        if points > 1
        else {n_max}
    )
    spec_all = OrbitSpec(x=x, base=base, count=n_max)
    pts_all = orbit_points(spec_all).points
    rows = []
    for n in checkpoints:
        prefix = pts_all[:n]
        spec = OrbitSpec(x=x, base=base, count=n)
        h = max(1, math.floor(math.log(n)))
        s1 = weyl_sum(spec)
        rows.append(
            {
                "N": n,
                "H": h,
                "d_exact": frac_str(discrepancy_extreme(prefix)),
                "dstar_exact": frac_str(discrepancy_star(prefix)),
                "et_bound_float": erdos_turan_bound(spec, h),
                "weyl1_norm_float": abs(s1) / n,
            }
        )
    return rows


def _emit_table(rows: list[dict], fmt: str, stream) -> None:
    if fmt == "json":
        stream.write(canonical_dumps(rows))
        return
    writer = csv.DictWriter(stream, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)


def _cmd_report(args) -> int:
    if args.report_cmd == "orbit":
        rows = _orbit_report_rows(
            _parse_fraction(args.x), args.base, args.n, points=args.points
        )
        meta = {
            "tool_version": __version__,
            "command": "report orbit",
            "x": args.x,
            "base": args.base,
            "cell_tags": {"*_exact": "rational string", "*_float": "float64"},
        }
    else:
        state = ConstructionState.from_dict(read_json(args.state))
        rows = [
            {
                "m": log.m,
                "s": log.s,
                "a": log.a,
                "b": log.b,
                "width": log.width,
                "candidates": log.candidates,
                "xi_exact": frac_str(log.xi),
                "objective_float": log.objective,
                "second_float": log.second,
                "phase_evals": log.phase_evals,
                "bound_ratio_float": log.bound_ratio,
                "bound_ok": log.bound_ok,
                "nested_ok": log.nested_ok,
            }
            for log in state.steps
        ]
        meta = {
            "tool_version": __version__,
            "command": "report schmidt",
            "certified": state.certified,
            "schedule": state.schedule.as_dict(),
            "cell_tags": {"*_exact": "rational string", "*_float": "float64"},
        }
        if not rows:
            print("state holds no executed steps")
            return 0
    out = io.StringIO()
    _emit_table(rows, args.format, out)
    text = out.getvalue()
    if args.format == "json":
        text = canonical_dumps({"meta": meta, "rows": rows})
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"report written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# --------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="absnorm",
        description="Digit-by-digit construction of absolutely normal numbers "
        "with exact equidistribution diagnostics.",
        epilog="Environment: ABSNORM_PREC_CAP overrides the certified-evaluation "
        "precision cap (bits, default 4096).",
    )
    ap.add_argument("--version", action="version", version=f"absnorm {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("constants", help="explicit constants for a base pair")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--variant", choices=["large-n", "all-n"], default="large-n")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_constants)

    p = sub.add_parser("plan", help="build a base-sequence plan")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--toy", help="CSV with beta[,gamma] rows (non-certified plan)")
    p.add_argument("--raw-r", help="comma list overriding the raw R sequence")
    p.add_argument("--raw-s", help="comma list overriding the raw S sequence")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_plan)

    p = sub.add_parser("schmidt", help="window-minimization construction")
    ssub = p.add_subparsers(dest="schmidt_cmd", required=True)
    pr = ssub.add_parser("run", help="execute construction steps")
    pr.add_argument("--schedule", default="paper", help="paper | power:C | toy:FILE")
    pr.add_argument("--steps", type=int, required=True)
    pr.add_argument("--plan", help="plan JSON from the `plan` command")
    pr.add_argument("--horizon", type=int, default=0, help="default-plan horizon")
    pr.add_argument("--state", required=True)
    pr.add_argument("--resume", action="store_true")
    pr.add_argument("--threads", type=int, default=1)
    pr.add_argument("--width-cap", type=int, default=24)
    pr.add_argument("--verify", action="store_true", help="re-check every argmin")
    pr.set_defaults(fn=_cmd_schmidt_run)
    pd = ssub.add_parser("digits", help="certain digits of the limit value")
    pd.add_argument("--state", required=True)
    pd.add_argument("--base", type=int, required=True)
    pd.add_argument("--max", type=int, default=0)
    pd.set_defaults(fn=_cmd_schmidt_digits)

    p = sub.add_parser("sierpinski", help="greedy bad-frequency-avoidance construction")
    ssub = p.add_subparsers(dest="sierpinski_cmd", required=True)
    pr = ssub.add_parser("run")
    pr.add_argument("--base", type=int, required=True)
    pr.add_argument("--eps", required=True, help="rational in (0, 1/2], e.g. 1/2")
    pr.add_argument("--digits", type=int, required=True)
    pr.add_argument("--toy", help="JSON file with toy caps (non-certified run)")
    pr.add_argument("--mode", choices=["auto", "exact", "bound"], default="auto")
    pr.add_argument("--state", required=True)
    pr.set_defaults(fn=_cmd_sierpinski_run)

    p = sub.add_parser("disc", help="exact discrepancy")
    dsub = p.add_subparsers(dest="disc_cmd", required=True)
    pe = dsub.add_parser("exact")
    pe.add_argument("--points", required=True, help="CSV of rationals in [0,1)")
    pe.add_argument("--star", action="store_true", help="also print star discrepancy")
    pe.set_defaults(fn=_cmd_disc)
    po = dsub.add_parser("orbit")
    po.add_argument("--x", required=True)
    po.add_argument("--base", type=int, required=True)
    po.add_argument("--N", dest="n", type=int, required=True)
    po.add_argument("--t", type=int, default=1)
    po.add_argument("--report", choices=["csv", "json"])
    po.set_defaults(fn=_cmd_disc)

    p = sub.add_parser("weyl", help="exponential sum over one orbit")
    p.add_argument("--x", required=True)
    p.add_argument("--base", type=int, required=True)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--N", dest="n", type=int, required=True)
    p.set_defaults(fn=_cmd_weyl)

    p = sub.add_parser("et", help="Erdos-Turan discrepancy bound")
    p.add_argument("--x", required=True)
    p.add_argument("--base", type=int, required=True)
    p.add_argument("--N", dest="n", type=int, required=True)
    p.add_argument("--H", type=int, default=0, help="default floor(log N)")
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=3.0)
    p.add_argument("--exact", action="store_true", help="also print exact D_N")
    p.set_defaults(fn=_cmd_et)

    p = sub.add_parser("hs5", help="truncated cosine-product sum with certified error")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--N", dest="n", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(fn=_cmd_hs5)

    p = sub.add_parser("report", help="tabular experiment reports")
    rsub = p.add_subparsers(dest="report_cmd", required=True)
    po = rsub.add_parser("orbit")
    po.add_argument("--x", required=True)
    po.add_argument("--base", type=int, required=True)
    po.add_argument("--N", dest="n", type=int, required=True)
    po.add_argument("--points", type=int, default=12)
    po.add_argument("--format", choices=["csv", "json"], default="csv")
    po.add_argument("--out")
    po.set_defaults(fn=_cmd_report)
    ps = rsub.add_parser("schmidt")
    ps.add_argument("--state", required=True)
    ps.add_argument("--format", choices=["csv", "json"], default="csv")
    ps.add_argument("--out")
    ps.set_defaults(fn=_cmd_report)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except CAP_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
