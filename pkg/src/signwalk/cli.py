"""Command-line front end.

Subcommands: approximate (run the greedy engine and save a trace), analyze
(statistics over a saved trace), check (window inequalities, reachable sums,
bookkeeping diagnostics), walk (planar greedy walks), repro (named recipes
reproducing the headline experiments).

Config files are flat JSON with the same keys as the long flags (dashes
become underscores); explicit flags win; unknown keys are rejected. Exit
codes: 0 success, 1 usage error, 2 numeric (precision-cap) error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import tempfile

from .exactnum import PrecisionExhaustedError, TargetExpr
from .moments import SequenceSpec
from .greedy import GreedyRun, GreedyTrace, first_crossing, run
from . import analysis, conditions
from .vectorwalk import (Explicit, NearestIntPhase, Rotation, WalkSpec, walk)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2

_ENV_PREC_CAP = "SIGNWALK_PREC_CAP"


class UsageError(Exception):
    pass


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="signwalk",
        description="Greedy signed-sum approximation experiments with "
                    "certified arithmetic.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat JSON config file; flags win")
        sp.add_argument("--out", help="output file path")

    ap = sub.add_parser("approximate", help="run the greedy engine")
    common(ap)
    ap.add_argument("--target", help="target: rational, sqrt(r) or log(r)")
    ap.add_argument("--seq", help="step sequence, e.g. harmonic, invsq, "
                                  "diff(harmonic,1)")
    ap.add_argument("--steps", type=int)
    ap.add_argument("--stride", type=int)
    ap.add_argument("--prec-init", type=int, dest="prec_init")
    ap.add_argument("--prec-cap", type=int, dest="prec_cap")
    ap.add_argument("--format", choices=["json", "csv"])

    an = sub.add_parser("analyze", help="statistics over a saved trace")
    common(an)
    an.add_argument("--trace", help="trace JSON file from `approximate`")
    an.add_argument("--k", type=int, help="max hit level to scan")
    an.add_argument("--beta", help="density exponent")
    an.add_argument("--start", type=int, help="Thue-Morse match start index")

    ck = sub.add_parser("check", help="hypothesis checks for a sequence")
    common(ck)
    ck.add_argument("--seq")
    ck.add_argument("--ell", type=int)
    ck.add_argument("--jmax", type=int)
    ck.add_argument("--sum", action="store_true",
                    help="enclose the total reachable sum")
    ck.add_argument("--sec33", action="store_true",
                    help="evaluate the literal level-counting inequality")
    ck.add_argument("--n", type=int)
    ck.add_argument("--k", type=int)

    wa = sub.add_parser("walk", help="greedy planar walk")
    common(wa)
    wa.add_argument("--gen", choices=["rotation", "nearestint", "explicit"])
    wa.add_argument("--alpha", help="rotation parameter")
    wa.add_argument("--beta", help="nearest-integer phase parameter")
    wa.add_argument("--steps", type=int)
    wa.add_argument("--file", help="CSV of explicit step vectors (x,y rows)")

    rp = sub.add_parser("repro", help="named recipes for the headline runs")
    common(rp)
    rp.add_argument("name", nargs="?", help="recipe name; omit with --list")
    rp.add_argument("--list", action="store_true", dest="list_recipes")
    return p


_NO_CONFIG_KEYS = {"command", "config", "list_recipes", "name"}


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill unset options from the JSON config file; reject unknown keys."""
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}")
    if not isinstance(cfg, dict):
        raise UsageError("config must be a flat JSON object")
    known = {k for k in vars(args) if k not in _NO_CONFIG_KEYS}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, dest) in (None, False):
            setattr(args, dest, value)


def _resolve_prec_cap(args: argparse.Namespace) -> None:
    if getattr(args, "prec_cap", None) is None:
        env = os.environ.get(_ENV_PREC_CAP)
        if env is not None:
            try:
                args.prec_cap = int(env)
            except ValueError:
                raise UsageError(f"bad {_ENV_PREC_CAP}: {env!r}")


def _parse_target(text: str) -> TargetExpr:
    # accept the shorthand sqrt3 / sqrt2 alongside sqrt(3)
    m = re.fullmatch(r"(sqrt|log)(\d+)", text.strip())
    if m:
        text = f"{m.group(1)}({m.group(2)})"
    try:
        return TargetExpr.parse(text)
    except ValueError as exc:
        raise UsageError(f"bad target {text!r}: {exc}")


def _parse_seq(text: str) -> SequenceSpec:
    try:
        return SequenceSpec.parse(text)
    except ValueError as exc:
        raise UsageError(f"bad sequence {text!r}: {exc}")


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            flag = "--" + name.replace("_", "-")
            raise UsageError(f"{args.command}: {flag} is required")


# ---------------------------------------------------------------------------
# subcommands

def _cmd_approximate(args: argparse.Namespace) -> int:
    _require(args, "target", "seq", "steps")
    cfg = GreedyRun(
        target=_parse_target(args.target),
        spec=_parse_seq(args.seq),
        max_steps=args.steps,
        checkpoint_stride=args.stride or 1,
        prec_init=args.prec_init or GreedyRun.prec_init,
        prec_cap=args.prec_cap or GreedyRun.prec_cap,
    )
    trace = run(cfg)
    _print_run_summary(trace)
    if args.out:
        if (args.format or "json") == "json":
            _atomic_write(args.out, trace.to_json())
        else:
            import io
            buf = io.StringIO()
            trace.write_csv(buf)
            _atomic_write(args.out, buf.getvalue())
        print(f"trace written to {args.out}")
    return EXIT_OK


def _print_run_summary(trace: GreedyTrace) -> None:
    fc = first_crossing(trace)
    print(f"steps: {len(trace)}  mode: "
          f"{'exact' if trace.exact_mode else f'interval@{trace.final_bits}b'}")
    print(f"first crossing: {fc}")
    ck = trace.checkpoints
    best = None
    for i in range(len(ck)):
        hm, he = ck.hi_m[i], ck.hi_e[i]
        v = -math.inf if hm == 0 else math.log10(hm) + he * math.log10(2)
        if best is None or v < best[1]:
            best = (ck.ns[i], v)
    if best:
        print(f"best certified error: 10^{best[1]:.2f} at n={best[0]}")
    for k in range(1, 7):
        rec = analysis.hits(trace, k, n_min=2)
        amb = f" (+{len(rec.ambiguous)} ambiguous)" if rec.ambiguous else ""
        print(f"hits k={k}: {len(rec.indices)}{amb}")
    w = min(len(trace), 1000)
    if w >= 2:
        alt = analysis.alternation_tail(trace, w)
        if alt.alternating:
            print(f"signs alternate from step {alt.start}: "
                  "suspected exceptional target")


def _cmd_analyze(args: argparse.Namespace) -> int:
    _require(args, "trace")
    try:
        with open(args.trace) as f:
            trace = GreedyTrace.from_json(f.read())
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load trace {args.trace}: {exc}")
    k_max = args.k or 6
    report: dict = {
        "trace": {"target": str(trace.cfg.target), "spec": str(trace.cfg.spec),
                  "steps": len(trace)},
        "first_crossing": first_crossing(trace),
        "hits": {},
    }
    for k in range(1, k_max + 1):
        rec = analysis.hits(trace, k, n_min=2)
        report["hits"][str(k)] = {"count": len(rec.indices),
                                  "first": rec.indices[:20],
                                  "ambiguous": rec.ambiguous}
    if args.beta is not None:
        dr = analysis.level_density(trace, float(args.beta), 1.0, len(trace))
        report["density"] = {"beta": float(args.beta), "fraction": dr.fraction,
                             "ambiguous": dr.ambiguous}
    stat = analysis.liminf_stat(trace)
    if stat:
        report["liminf_stat"] = {"final": stat[-1][1],
                                 "distance_to_limit": abs(stat[-1][1] + 1 / math.log(4))}
    if args.start is not None:
        report["tm_match"] = {"start": args.start,
                              "length": analysis.tm_match(trace, args.start)}
    alt = analysis.alternation_tail(trace, min(len(trace), 1000)) \
        if len(trace) >= 2 else None
    if alt is not None:
        report["alternating_tail"] = {"alternating": alt.alternating,
                                      "start": alt.start}
    text = json.dumps(report, indent=2)
    if args.out:
        _atomic_write(args.out, text)
        print(f"report written to {args.out}")
    else:
        print(text)
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    report: dict = {}
    if args.sec33:
        _require(args, "n", "k")
        lhs, rhs, holds = conditions.section33_inequality(args.n, args.k)
        report["sec33"] = {"N": args.n, "k": args.k, "lhs": str(lhs),
                           "rhs": str(rhs), "holds": holds}
    if args.sum or args.ell is not None:
        _require(args, "seq")
    if args.seq is not None:
        spec = _parse_seq(args.seq)
        if args.ell is not None:
            jmax = args.jmax or 1000
            dr = conditions.diamond_uniform(spec, jmax, args.ell)
            report["diamond"] = json.loads(dr.to_json())
        if args.sum:
            s = conditions.reachable_sum(spec)
            if isinstance(s, str):
                report["reachable_sum"] = s
            else:
                report["reachable_sum"] = {"lo": str(s.lo), "hi": str(s.hi),
                                           "float": float(s.midpoint)}
    if not report:
        raise UsageError("check: nothing to do (use --ell, --sum or --sec33)")
    text = json.dumps(report, indent=2)
    if args.out:
        _atomic_write(args.out, text)
        print(f"report written to {args.out}")
    else:
        print(text)
    return EXIT_OK


def _cmd_walk(args: argparse.Namespace) -> int:
    _require(args, "gen")
    if args.gen == "rotation":
        _require(args, "alpha", "steps")
        gen = Rotation.of(str(_parse_target(str(args.alpha))))
    elif args.gen == "nearestint":
        _require(args, "beta", "steps")
        gen = NearestIntPhase.of(str(_parse_target(str(args.beta))))
    else:
        _require(args, "file")
        pairs = []
        try:
            with open(args.file) as f:
                for line in f:
                    line = line.strip()
                    if not line or line.lower().startswith("x"):
                        continue
                    a, b = line.split(",")
                    pairs.append((a, b))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read vectors from {args.file}: {exc}")
        gen = Explicit.of(pairs)
        if args.steps is None:
            args.steps = len(pairs)
    trace = walk(WalkSpec(gen, args.steps))
    last = trace.points[-1]
    print(f"{len(trace.points)} steps, final point "
          f"({float(last.x):.6f}, {float(last.y):.6f})")
    if args.out:
        trace.write_csv(args.out)
        print(f"points written to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# repro recipes

def _recipe_sqrt2_harmonic():
    trace = run(GreedyRun(TargetExpr.parse("sqrt(2)"),
                          SequenceSpec.parse("harmonic"), 10000))
    from .greedy import error_at
    for n in (98, 850, 3858):
        iv = error_at(trace, n, 256)
        print(f"|a_{n} - sqrt(2)| <= {float(iv.hi):.3e}")


def _recipe_sqrt2_invsq():
    trace = run(GreedyRun(TargetExpr.parse("sqrt(2)"),
                          SequenceSpec.parse("invsq"), 5000))
    from .greedy import error_at
    iv = error_at(trace, 4566, 256)
    print(f"|a_4566 - sqrt(2)| <= {float(iv.hi):.3e}")


def _recipe_log2_alternation():
    trace = run(GreedyRun(TargetExpr.parse("log(2)"),
                          SequenceSpec.parse("harmonic"), 10000))
    alt = analysis.alternation_tail(trace, 10000)
    from .greedy import error_at
    iv = error_at(trace, 10000, 256)
    print(f"alternating: {alt.alternating} from step {alt.start}")
    print(f"n * error at n=10^4: {10000 * float(iv.hi):.4f}")


def _recipe_thue_morse():
    trace = run(GreedyRun(TargetExpr.parse("0.8"),
                          SequenceSpec.parse("harmonic"), 200))
    length = analysis.tm_match(trace, 55)
    window = "".join("+" if s > 0 else "-" for s in trace.signs[55:67])
    print(f"signs after step 55: {window}")
    print(f"Thue-Morse match length: {length}")


def _recipe_rorschach():
    trace = walk(WalkSpec(NearestIntPhase.of("sqrt(3)"), 100000))
    r2 = max(float(p.norm_sq()) for p in trace.points)
    print(f"10^5-step nearest-integer sqrt(3) walk, max |x| = {math.sqrt(r2):.4f}")


RECIPES = {
    "sqrt2-harmonic": ("sqrt(2)/harmonic superpolynomial milestones",
                       _recipe_sqrt2_harmonic),
    "sqrt2-invsq": ("sqrt(2)/1/n^2 deep milestone at n=4566",
                    _recipe_sqrt2_invsq),
    "log2-alternation": ("log(2)/harmonic exceptional alternation",
                         _recipe_log2_alternation),
    "thue-morse": ("Thue-Morse sign window for target 0.8",
                   _recipe_thue_morse),
    "rorschach": ("deterministic nearest-integer sqrt(3) walk",
                  _recipe_rorschach),
}


def _cmd_repro(args: argparse.Namespace) -> int:
    if args.list_recipes or not args.name:
        for name, (desc, _) in RECIPES.items():
            print(f"{name:20s} {desc}")
        return EXIT_OK
    if args.name not in RECIPES:
        raise UsageError(f"unknown recipe {args.name!r}; try --list")
    print(f"== {args.name}: {RECIPES[args.name][0]}")
    RECIPES[args.name][1]()
    return EXIT_OK


_COMMANDS = {
    "approximate": _cmd_approximate,
    "analyze": _cmd_analyze,
    "check": _cmd_check,
    "walk": _cmd_walk,
    "repro": _cmd_repro,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        _apply_config(args, parser)
        _resolve_prec_cap(args)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrecisionExhaustedError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
