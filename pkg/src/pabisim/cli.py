"""Command-line front end: ``pabisim <command> ...``.

Exit codes: 0 equivalent/accepted/proven, 1 distinct/rejected/refuted,
2 unknown, 3 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .algebra import BOTTOM, axioms_report
from .bisim import CONVEX, STRONG, bisimilarity
from .errors import CapacityError, PabisimError
from .model import convex_combine, format_dist, load_pa, parse_dist
from .mutants import unnormalized_combine
from .transformer import successors
from .upto import (BASES, CVX_E, PROVEN, REFUTED, TechniqueConfig, certificate_to_json,
                   check_certificate, dump_certificate, format_formula, load_certificate,
                   search_witness)

OK, NEGATIVE, UNKNOWN_CODE, USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pabisim", description="Bisimulation checks for probabilistic automata.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="are two states strongly/convexly bisimilar?")
    p.add_argument("--mode", choices=(STRONG, CONVEX), default=STRONG)
    p.add_argument("file")
    p.add_argument("left")
    p.add_argument("right")

    p = sub.add_parser("certify", help="check a bisimulation up-to certificate")
    p.add_argument("file")
    p.add_argument("certfile")

    p = sub.add_parser("search", help="search for a certificate or a refutation")
    p.add_argument("file")
    p.add_argument("left", help='distribution literal, e.g. "x1:1/2,x2:1/2" or a state name')
    p.add_argument("right")
    p.add_argument("--max-pairs", type=int, default=32)
    p.add_argument("--max-depth", type=int, default=5)
    p.add_argument("--technique", choices=BASES, default=CVX_E)
    p.add_argument("--identity-slack", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out", help="write a found certificate to this file")

    p = sub.add_parser("successors", help="belief-state successors of a distribution")
    p.add_argument("file")
    p.add_argument("dist")
    p.add_argument("label")

    p = sub.add_parser("partition", help="print the bisimilarity partition")
    p.add_argument("--mode", choices=(STRONG, CONVEX), default=STRONG)
    p.add_argument("file")

    p = sub.add_parser("selftest", help="randomised convex-algebra law checks")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mutant", action="store_true", help=argparse.SUPPRESS)

    for name, p in sub.choices.items():
        p.add_argument("--json", action="store_true", help="print a JSON report instead of text")
    return parser


def _emit(args, lines, doc):
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        for line in lines:
            print(line)


def _block_text(block):
    return "{" + ", ".join(block) + "}"


def cmd_check(args) -> int:
    pa = load_pa(args.file)
    for s in (args.left, args.right):
        if s not in pa.states:
            raise PabisimError(f"unknown state {s!r}")
    part = bisimilarity(pa, args.mode)
    index = {s: b for b in part for s in b}
    same = index[args.left] == index[args.right]
    verdict = "equivalent" if same else "distinct"
    lines = [verdict,
             f"{args.left} in {_block_text(index[args.left])}",
             f"{args.right} in {_block_text(index[args.right])}"]
    doc = {"mode": args.mode, "verdict": verdict,
           "left_block": list(index[args.left]), "right_block": list(index[args.right])}
    _emit(args, lines, doc)
    return OK if same else NEGATIVE


def cmd_certify(args) -> int:
    pa = load_pa(args.file)
    cert = load_certificate(args.certfile)
    verdict = check_certificate(pa, cert)
    lines = [str(verdict)] + [ob.describe(cert) for ob in verdict.obligations]
    doc = {
        "verdict": str(verdict),
        "obligations": [
            {"pair": ob.pair_index, "label": ob.label, "side": ob.side,
             "generator": None if ob.generator is None else format_dist(ob.generator),
             "reason": ob.reason}
            for ob in verdict.obligations
        ],
    }
    _emit(args, lines, doc)
    return OK if verdict.accepted else NEGATIVE


def cmd_search(args) -> int:
    if args.max_pairs < 1 or args.max_depth < 1:
        raise UsageError("budgets must be at least 1")
    pa = load_pa(args.file)
    xi, zeta = parse_dist(args.left), parse_dist(args.right)
    config = TechniqueConfig(args.technique, args.identity_slack)
    res = search_witness(pa, xi, zeta, args.max_pairs, args.max_depth, config)
    doc = {"verdict": res.status.capitalize()}
    if res.status == PROVEN:
        lines = ["Proven", f"certificate ({len(res.certificate.pairs)} pairs, "
                           f"{config.base}{' + identity slack' if config.identity_slack else ''}):"]
        lines += [f"  {format_dist(l)} | {format_dist(r)}" for l, r in res.certificate.pairs]
        doc["certificate"] = certificate_to_json(res.certificate)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(dump_certificate(res.certificate))
            lines.append(f"written to {args.out}")
        code = OK
    elif res.status == REFUTED:
        ref = res.refutation
        lines = ["Refuted", f"distinguishing formula: {format_formula(ref.formula)}"]
        lines += [f"  {t}" for t in ref.trace]
        doc["formula"] = format_formula(ref.formula)
        doc["holds_on"] = "left" if ref.holds_left else "right"
        doc["trace"] = list(ref.trace)
        code = NEGATIVE
    else:
        lines = ["Unknown"] + [f"  {n}" for n in res.notes]
        doc["notes"] = list(res.notes)
        code = UNKNOWN_CODE
    _emit(args, lines, doc)
    return code


def cmd_successors(args) -> int:
    pa = load_pa(args.file)
    xi = parse_dist(args.dist)
    unknown = [s for s in xi if s not in pa.states]
    if unknown:
        raise PabisimError(f"unknown states {unknown}")
    if args.label not in pa.labels:
        raise PabisimError(f"unknown label {args.label!r}")
    succ = successors(pa, xi, args.label)
    if succ is BOTTOM:
        lines = ["*"]
        doc = {"can_step": False, "generators": []}
    else:
        lines = [format_dist(g) for g in succ.poly.generators]
        doc = {"can_step": True, "generators": lines}
    _emit(args, lines, doc)
    return OK


def cmd_partition(args) -> int:
    pa = load_pa(args.file)
    part = bisimilarity(pa, args.mode)
    lines = [_block_text(b) for b in part]
    _emit(args, lines, {"mode": args.mode, "blocks": [list(b) for b in part]})
    return OK


def cmd_selftest(args) -> int:
    if args.samples < 0:
        raise UsageError("--samples must be nonnegative")
    combine = unnormalized_combine if args.mutant else convex_combine
    report = axioms_report(args.samples, args.seed, combine)
    total = sum(r.failures for r in report.results)
    lines = report.lines() + [f"{'OK' if report.ok else 'FAILED'}: {total} counterexamples"]
    doc = {
        "samples": args.samples, "seed": args.seed, "counterexamples": total,
        "results": [{"law": r.law, "carrier": r.carrier, "passes": r.passes,
                     "failures": r.failures, "counterexample": r.counterexample}
                    for r in report.results],
    }
    _emit(args, lines, doc)
    return OK if report.ok else NEGATIVE


COMMANDS = {
    "check": cmd_check,
    "certify": cmd_certify,
    "search": cmd_search,
    "successors": cmd_successors,
    "partition": cmd_partition,
    "selftest": cmd_selftest,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else OK
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return USAGE
    except (PabisimError, CapacityError, OSError, ValueError) as exc:
        print(f"pabisim: error: {exc}", file=sys.stderr)
        return USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
