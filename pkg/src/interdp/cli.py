"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 computation error (for example an
unbounded epsilon), 3 invariant violation (bad input data).
Data goes to stdout (or ``--output``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction

from . import bounds
from .adversary import worst_adversary
from .composition import concomp, ordered_concomp
from .errors import ComputationError, InvariantViolation
from .experiments import (
    DEFAULT_DELTA,
    DEFAULT_TRIALS,
    FULL_TRIALS,
    half_step,
    run_bound_comparison,
    run_rr_feasibility,
    trials_to_csv,
)
from .lp import build_system, check_certificate, check_witness, solve_feasibility
from .mechanism import dumps_mechanism, load_mechanism, save_mechanism
from .prob import format_rational
from .rr_sim import build_simulator, verify_simulation

DENOMINATOR_CAP = 10**6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class Context:
    def __init__(self, args):
        self.args = args
        self.notes: list[str] = []

    def exact(self, text: str, name: str) -> Fraction:
        """Exact rational from "n/d" or a decimal; decimals are rounded to denominator <= 10^6."""
        try:
            raw = Fraction(text.strip())
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"{name}: not a number: {text!r}") from None
        if "/" in text:
            return raw
        x = raw.limit_denominator(DENOMINATOR_CAP)
        if x != raw or "." in text or "e" in text.lower():
            note = f"{name}: {text} -> {format_rational(x)}"
            self.notes.append(note)
            print(f"note: {note}", file=sys.stderr)
        return x


def _floats(text: str, name: str) -> list[float]:
    try:
        out = [float(Fraction(t.strip())) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if not out:
        raise UsageError(f"{name}: empty list")
    return out


def _mechanism(path: str):
    if path == "-":
        return load_mechanism(sys.stdin)
    return load_mechanism(path)


# -- subcommands -----------------------------------------------------------


def cmd_bound_basic(ctx, a):
    return bounds.basic_pure(_floats(a.eps, "--eps")).to_json()


def cmd_bound_hybrid(ctx, a):
    eps, deltas = [], []
    for item in a.params.split(","):
        e, sep, d = item.partition(":")
        if not sep:
            raise UsageError(f"--params: expected eps:delta pairs, got {item!r}")
        eps += _floats(e, "--params")
        deltas += _floats(d, "--params")
    return bounds.hybrid_delta(eps, deltas).to_json()


def cmd_bound_optimal(ctx, a):
    eps = _floats(a.eps, "--eps")
    if a.noninteractive_delta:
        deltas = _floats(a.noninteractive_delta, "--noninteractive-delta")
        return bounds.optimal_eps_approx_noninteractive(eps, deltas, a.delta_g).to_json()
    return bounds.optimal_eps_pure(eps, a.delta_g).to_json()


def _curves(ctx, eps, k_max, delta_g, delta):
    text = run_bound_comparison(eps, k_max, delta_g, delta)
    if ctx.args.format == "csv":
        return text
    return {"rows": bounds.compare_curves(eps, k_max, delta_g, delta)}


def cmd_bound_compare(ctx, a):
    return _curves(ctx, a.eps, a.k_max, a.delta_g, a.delta)


def cmd_privloss(ctx, a):
    m = _mechanism(a.mechanism)
    delta = ctx.exact(a.delta, "--delta")
    u, adv = worst_adversary(m, delta)
    return {
        "u": format_rational(u),
        "eps": math.log(u),
        "delta": format_rational(delta),
        "adversary": adv.to_json(),
    }


def cmd_concomp(ctx, a):
    ms = [_mechanism(p) for p in a.mechanisms.split(",")]
    comp = ordered_concomp(ms) if a.ordered else concomp(ms)
    save_mechanism(comp, a.out)
    return {"out": a.out, "rounds": comp.rounds, "components": len(ms), "ordered": a.ordered}


def cmd_simulate_rr(ctx, a):
    m = _mechanism(a.mechanism)
    u = ctx.exact(a.scale, "--scale") if a.scale else worst_adversary(m, 0)[0]
    t = build_simulator(m, u)
    if a.out:
        save_mechanism(t, a.out)
    if not a.verify:
        return json.loads(dumps_mechanism(t))
    report = verify_simulation(m, t, u).to_json()
    report["scale"] = format_rational(u)
    return report


def cmd_lp_check(ctx, a):
    m = _mechanism(a.mechanism)
    delta = ctx.exact(a.delta, "--delta")
    u = ctx.exact(a.scale, "--scale") if a.scale else worst_adversary(m, delta)[0]
    system = build_system(m, u, delta)
    if a.dump:
        with open(a.dump, "w", encoding="utf-8") as fh:
            fh.write(system.dump())
    res = solve_feasibility(system)
    out = res.to_json()
    out["verified"] = check_witness(system, res.witness) if res.feasible else check_certificate(system, res.certificate)
    out.update({"u": format_rational(u), "eps": math.log(u), "delta": format_rational(delta)})
    return out


def cmd_exp_rr(ctx, a):
    delta = ctx.exact(a.delta, "--delta")
    trials = FULL_TRIALS if a.full_scale else a.trials
    records, summary = run_rr_feasibility(
        trials, delta, ctx.args.seed, half_step if a.control else None, a.workers
    )
    if a.csv_out:
        with open(a.csv_out, "w", encoding="utf-8") as fh:
            fh.write(trials_to_csv(records, a.timing))
    if ctx.args.format == "csv":
        return trials_to_csv(records, a.timing)
    return summary.to_json()


def cmd_exp_bounds(ctx, a):
    if ctx.args.format == "csv" or len(a.delta_g) == 1:
        if len(a.delta_g) != 1:
            raise UsageError("csv output takes a single --delta-g")
        return _curves(ctx, a.eps, a.k_max, a.delta_g[0], a.delta)
    return {
        "curves": [
            {"delta_g": dg, "rows": bounds.compare_curves(a.eps, a.k_max, dg, a.delta)}
            for dg in a.delta_g
        ]
    }


# -- parser ----------------------------------------------------------------


def _globals(parser, default):
    keep = default is argparse.SUPPRESS
    parser.add_argument("--seed", type=int, default=default if keep else 1, help="RNG seed (default 1)")
    parser.add_argument("--output", default=default, help="write data here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default=default if keep else "json")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="interdp", description="Exact privacy accounting for interactive mechanisms.")
    _globals(p, None)
    # global flags may also follow the subcommand; SUPPRESS keeps the top-level value
    common = _Parser(add_help=False)
    _globals(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bound", help="closed-form composition bounds", parents=[common])
    bsub = b.add_subparsers(dest="bound", required=True, parser_class=_Parser)
    x = bsub.add_parser("basic", parents=[common],
                        help="basic composition for pure DP: eps_g = sum of eps_i")
    x.add_argument("--eps", required=True, help="comma-separated eps_i")
    x.set_defaults(fn=cmd_bound_basic)
    x = bsub.add_parser("hybrid", parents=[common],
                        help="hybrid-argument composition for approximate DP, delta term "
                             "minimized over orderings")
    x.add_argument("--params", required=True, help="comma-separated eps:delta pairs")
    x.set_defaults(fn=cmd_bound_hybrid)
    x = bsub.add_parser("optimal", parents=[common],
                        help="optimal concurrent composition theorem for pure DP "
                             "(with --noninteractive-delta: optimal composition of "
                             "noninteractive approximate-DP mechanisms)")
    x.add_argument("--eps", required=True)
    x.add_argument("--delta-g", type=float, required=True)
    x.add_argument("--noninteractive-delta", help="comma-separated delta_i (noninteractive only)")
    x.set_defaults(fn=cmd_bound_optimal)
    x = bsub.add_parser("compare", parents=[common],
                        help="basic vs optimal composition theorem curves for k = 1..k_max")
    x.add_argument("--eps", type=float, required=True)
    x.add_argument("--k-max", type=int, required=True)
    x.add_argument("--delta-g", type=float, required=True)
    x.add_argument("--delta", type=float, default=0.0)
    x.set_defaults(fn=cmd_bound_compare)

    x = sub.add_parser("privloss", parents=[common],
                       help="true privacy loss (least eps at given delta) of an interactive "
                            "mechanism, worst case over deterministic adversaries")
    x.add_argument("--mechanism", required=True, help="mechanism JSON file, or - for stdin")
    x.add_argument("--delta", required=True)
    x.set_defaults(fn=cmd_privloss)

    x = sub.add_parser("concomp", parents=[common],
                       help="concurrent composition of interactive mechanisms; --ordered "
                            "gives the round-robin normal form used by the null-query lemma")
    x.add_argument("--mechanisms", required=True, help="comma-separated mechanism files")
    x.add_argument("--out", required=True)
    x.add_argument("--ordered", action="store_true")
    x.set_defaults(fn=cmd_concomp)

    x = sub.add_parser("simulate-rr", parents=[common],
                       help="randomized-response simulation theorem for pure DP: build the "
                            "post-processor T and optionally verify it")
    x.add_argument("--mechanism", required=True)
    x.add_argument("--scale", help="u = e^eps (default: the mechanism's PrivLoss at delta 0)")
    x.add_argument("--verify", action="store_true")
    x.add_argument("--out", help="also write T as a mechanism file")
    x.set_defaults(fn=cmd_simulate_rr)

    x = sub.add_parser("lp-check", parents=[common],
                       help="approximate-DP randomized-response simulation question: exact LP "
                            "feasibility of post-processing RR_(eps, delta) into a 2-round mechanism")
    x.add_argument("--mechanism", required=True)
    x.add_argument("--delta", required=True)
    x.add_argument("--scale", help="u = e^eps (default: the mechanism's PrivLoss at delta)")
    x.add_argument("--dump", help="write the constraint rows as text")
    x.set_defaults(fn=cmd_lp_check)

    e = sub.add_parser("experiment", help="seeded experiment harnesses", parents=[common])
    esub = e.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    x = esub.add_parser("rr-feasibility", parents=[common],
                        help="sampled 2-round mechanisms: is each a post-processing of "
                             "RR at its own (eps, delta)? (RR simulation question)")
    x.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    x.add_argument("--full-scale", action="store_true", help=f"run {FULL_TRIALS} trials")
    x.add_argument("--delta", default=format_rational(DEFAULT_DELTA))
    x.add_argument("--control", action="store_true", help="solve at (1+u)/2 instead of u")
    x.add_argument("--workers", type=int, default=1)
    x.add_argument("--timing", action="store_true", help="fill the runtime_ms column")
    x.add_argument("--csv-out", help="also write per-trial CSV here")
    x.set_defaults(fn=cmd_exp_rr)
    x = esub.add_parser("compare-bounds", parents=[common],
                        help="basic vs optimal composition theorem over k, one curve per delta_g")
    x.add_argument("--eps", type=float, default=0.005)
    x.add_argument("--k-max", type=int, default=1000)
    x.add_argument("--delta-g", type=float, nargs="+", default=[1e-5])
    x.add_argument("--delta", type=float, default=0.0)
    x.set_defaults(fn=cmd_exp_bounds)
    _describe(p)
    return p


def _describe(parser):
    """Reuse each subcommand's one-line help as its --help description."""
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for choice in action._choices_actions:
                child = action.choices[choice.dest]
                child.description = child.description or choice.help
                _describe(child)


def _emit(data, ctx, meta):
    if isinstance(data, str):
        text = data
    else:
        doc = dict(data)
        doc["meta"] = meta
        text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if ctx.args.output:
        with open(ctx.args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    ctx = Context(args)
    t0 = time.perf_counter()
    try:
        data = args.fn(ctx, args)
        meta = {"runtime_ms": round((time.perf_counter() - t0) * 1000, 3)}
        if ctx.notes:
            meta["conversions"] = ctx.notes
        _emit(data, ctx, meta)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
