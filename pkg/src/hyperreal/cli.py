"""Command-line front end: evaluate, compare, shadow, classify, sequence,
audit.

Exit status: 0 for determinate results (including certified indeterminate
verdicts), 2 for unknown-at-horizon, 1 for errors.  Determinacy is always
printed; unknown is never coerced to false.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import truth
from .render import determinacy_tag, render_value, value_json_text
from .parser import EvalError, ParseError, evaluate, load_definitions, parse
from .scalar import PrecisionExceeded
from .truth import Comparison, TruthValue
from .value import (
    DEFAULT_HORIZON,
    Hyperreal,
    ShadowUndefined,
    Uncertified,
    as_hyperreal,
    classify,
    compare,
    membership_case_split,
    shadow,
)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hyperreal",
        description="evaluate divergent sums, improper integrals, set sizes, "
        "expectations, utility streams, worlds, and survival probabilities "
        "as exact hyperreal values",
    )
    ap.add_argument("--json", action="store_true", help="emit JSON output")
    ap.add_argument("--prefix", type=int, default=0, metavar="N",
                    help="include the first N canonical-sequence elements")
    ap.add_argument("--horizon", type=int, default=DEFAULT_HORIZON, metavar="N",
                    help="scan horizon for uncertified comparisons")
    ap.add_argument("--shadow", action="store_true",
                    help="round the result to its shadow before printing")
    ap.add_argument("--precision", type=int, default=None, metavar="D",
                    help="interval precision cap (decimal digits) for "
                         "transcendental comparisons")
    ap.add_argument("--omega-symbol", action="store_true",
                    help="render the infinite unit as the Greek letter")
    ap.add_argument("--defs", metavar="FILE",
                    help="definition file: 'name = expr' lines usable in "
                         "expressions")
    sub = ap.add_subparsers(dest="verb", required=True)

    p_eval = sub.add_parser("eval", help="evaluate an expression")
    p_eval.add_argument("expression")

    p_cmp = sub.add_parser("compare", help="compare two expressions")
    p_cmp.add_argument("left")
    p_cmp.add_argument("right")

    p_sh = sub.add_parser("shadow", help="nearest-real rounding of a value")
    p_sh.add_argument("expression")

    p_cl = sub.add_parser("classify", help="magnitude class of a value")
    p_cl.add_argument("expression")

    p_seq = sub.add_parser("sequence", help="print a canonical-sequence prefix")
    p_seq.add_argument("expression")
    p_seq.add_argument("-n", type=int, default=10, help="prefix length")

    p_audit = sub.add_parser("audit", help="run a named audit")
    p_audit.add_argument("kind", choices=["pareto", "anonymity", "partition",
                                          "identities", "membership"])
    p_audit.add_argument("args", nargs="+")
    return ap


def _w(args) -> str:
    return "ω" if args.omega_symbol else "w"


def _emit_value(h: Hyperreal, args) -> int:
    if args.shadow:
        h = shadow(h)
    if args.json:
        print(value_json_text(h, prefix=args.prefix, w=_w(args)))
    else:
        tag = determinacy_tag(h)
        text = render_value(h, w=_w(args))
        if h.symbolic is None and args.prefix == 0:
            pre = ", ".join(str(v) for v in h.prefix(8))
            print("%s  [%s; prefix: %s, ...]" % (text, tag, pre))
        else:
            print("%s  [%s]" % (text, tag))
        if args.prefix:
            print("prefix:", ", ".join(str(v) for v in h.prefix(args.prefix)))
    return 0 if determinacy_tag(h) != "uncertified" else 2


def _emit_comparison(c: Comparison, args) -> int:
    if args.json:
        print(json.dumps({
            "outcome": c.outcome,
            "candidates": list(c.candidates),
            "certificate": c.certificate.describe() if c.certificate else None,
            "horizon": c.horizon,
        }, indent=2))
    else:
        if c.outcome == "indeterminate":
            print("indeterminate")
        elif c.outcome == "unknown":
            print("unknown")
        else:
            print(c.outcome)
        if c.certificate is not None:
            print("certificate:", c.certificate.describe())
        if c.outcome == "unknown":
            print("horizon:", c.horizon)
    return 2 if c.outcome == "unknown" else 0


def _emit_truth(t: TruthValue, args) -> int:
    if args.json:
        print(json.dumps({
            "verdict": str(t),
            "certificate": t.certificate.describe() if t.certificate else None,
            "horizon": t.horizon,
        }, indent=2))
    else:
        print(str(t))
        if t.certificate is not None:
            print("certificate:", t.certificate.describe())
    return 2 if t.kind == "unknown" else 0


def _run(args) -> int:
    env = {}
    if args.defs:
        with open(args.defs, "r", encoding="utf-8") as fh:
            env = load_definitions(fh.read())
    if args.precision is not None:
        from . import scalar as scalar_mod

        ladder = [d for d in (16, 32, 64, 128, 256) if d <= args.precision]
        scalar_mod._PRECISIONS = tuple(ladder or [args.precision])

    if args.verb == "eval":
        value = evaluate(parse(args.expression), env)
        if isinstance(value, Hyperreal):
            return _emit_value(value, args)
        if isinstance(value, TruthValue):
            return _emit_truth(value, args)
        print(value)
        return 0
    if args.verb == "compare":
        left = as_hyperreal(evaluate(parse(args.left), env))
        right = as_hyperreal(evaluate(parse(args.right), env))
        return _emit_comparison(compare(left, right, args.horizon), args)
    if args.verb == "shadow":
        value = as_hyperreal(evaluate(parse(args.expression), env))
        return _emit_value(shadow(value), args)
    if args.verb == "classify":
        value = as_hyperreal(evaluate(parse(args.expression), env))
        try:
            print(classify(value, args.horizon))
            return 0
        except Uncertified as e:
            print("unknown (no certificate; horizon %s)" % (e.horizon or args.horizon))
            return 2
    if args.verb == "sequence":
        value = as_hyperreal(evaluate(parse(args.expression), env))
        n = args.n
        print(", ".join(str(v) for v in value.prefix(n)))
        return 0
    if args.verb == "audit":
        return _run_audit(args, env)
    raise AssertionError(args.verb)


def _run_audit(args, env) -> int:
    kind = args.kind
    from . import streams as streams_mod
    from . import intsets
    from . import survival as surv_mod

    if kind == "pareto":
        x = evaluate(parse(args.args[0]), env)
        y = evaluate(parse(args.args[1]), env)
        return _emit_truth(streams_mod.audit_strong_pareto(x, y), args)
    if kind == "anonymity":
        s = evaluate(parse(args.args[0]), env)
        perm = json.loads(args.args[1])
        verdict = streams_mod.audit_finite_anonymity(
            s, {int(k): int(v) for k, v in perm.items()}
        )
        return _emit_truth(verdict, args)
    if kind == "partition":
        whole = evaluate(parse(args.args[0]), env)
        parts = [evaluate(parse(a), env) for a in args.args[1:]]
        return _emit_truth(intsets.verify_partition_additivity(parts, whole), args)
    if kind == "identities":
        proc = evaluate(parse(args.args[0]), env)
        code = 0
        for chk in surv_mod.verify_identities(proc):
            factor = "" if chk.floor_factor is None else \
                "  floor factor: %s" % chk.floor_factor
            print("%s: smooth %s; %s%s" % (chk.name, chk.smooth, chk.floor_note, factor))
            if chk.smooth.kind == "unknown" or chk.floor_exact.kind == "unknown":
                code = 2
        return code
    if kind == "membership":
        x = as_hyperreal(evaluate(parse(args.args[0]), env))
        cands = [as_hyperreal(evaluate(parse(a), env)) for a in args.args[1:]]
        return _emit_truth(membership_case_split(x, cands, horizon=args.horizon), args)
    raise AssertionError(kind)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return _run(args)
    except (ParseError, EvalError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 1
    except (ZeroDivisionError, ValueError, ShadowUndefined, PrecisionExceeded) as e:
        print("error: %s" % e, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
