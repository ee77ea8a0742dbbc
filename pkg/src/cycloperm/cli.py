"""Command-line entry point: ``cycloperm <command> [flags]``.

Exit codes: 0 success / permutation, 1 not a permutation, 2 input error,
3 internal inconsistency or failed reproduction check.
"""

from __future__ import annotations

import argparse
import json
import sys
from math import gcd
from typing import Any, Sequence

from .criteria import (
    NNC,
    VerdictReport,
    binomial_l3_iff,
    full_equivalence,
    make_binomial,
    oracle_is_permutation,
    prop_nonexistence_scan,
    twice_index_of_product,
)
from .cyclopoly import (
    decompose,
    detect_decompositions,
    extract_factored,
    mapping_coeffs,
    parse_poly,
    require_reduced,
)
from .errors import CyclopermError, HypothesisFails, MalformedInput
from .ffield import default_table, divisors, format_element, format_field, parse_field
from .search import (
    SweepSpec,
    crossval_exhaustive,
    crossval_random,
    summarize_records,
    sweep_binomials,
    sweep_trinomials_f13,
    write_jsonl,
)

EXIT_PP, EXIT_NOT_PP, EXIT_INPUT, EXIT_INCONSISTENT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="table")

    parser = _Parser(prog="cycloperm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("field-info", parents=[common], help="field parameters and index table")
    p.add_argument("--field", required=True, help='e.g. "13", "3^2" or "3^2/1,0,1"')

    p = sub.add_parser("verify", parents=[common], help="run every criterion on one polynomial")
    p.add_argument("--field", required=True)
    p.add_argument("--poly", required=True, help='e.g. "2x^9+x^5+2x"')
    p.add_argument("--l", type=int, help="divisor of q-1 (all valid l when omitted)")

    p = sub.add_parser("search-binomials", parents=[common], help="sweep x^r (x^(es)+1)")
    p.add_argument("--field", action="append", default=[], help="repeatable")
    p.add_argument("--l", type=int, action="append", help="repeatable divisor filter")
    p.add_argument("--r-min", type=int)
    p.add_argument("--r-max", type=int)
    p.add_argument("--e-min", type=int)
    p.add_argument("--e-max", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--spec", help="SweepSpec JSON file (overrides the other sweep flags)")
    p.add_argument("--out", help="JSON Lines output path (default stdout)")

    p = sub.add_parser("trinomials-f13", parents=[common], help="2x^(r+8)+x^(r+4)+2x^r over F_13")
    p.add_argument("--out")

    p = sub.add_parser("crossval", parents=[common], help="criteria against the oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--max-q", type=int, default=2048, help="largest field in the random pool")
    p.add_argument("--field", action="append", default=[], help="restrict the pool (repeatable)")
    p.add_argument("--exhaustive", action="store_true",
                   help="run the exhaustive small-field domain (q <= 49) instead")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")

    sub.add_parser("reproduce-paper", parents=[common], help="run the golden example suite")
    return parser


# -- output helpers ----------------------------------------------------------

def _emit(obj: Any, out=None) -> None:
    stream = out or sys.stdout
    stream.write(json.dumps(obj, ensure_ascii=False, indent=2) + "\n")


def _table(rows: Sequence[Sequence[Any]]) -> str:
    rows = [[("-" if c is None else json.dumps(c) if isinstance(c, (list, dict)) else str(c))
             for c in row] for row in rows]
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _report_table(rep: VerdictReport) -> str:
    head = f"P = {rep.polynomial} over F_{rep.field}, l = {rep.l}, r = {rep.r}"
    rows = [("condition", "ref", "holds", "witness")]
    rows += [(c.name, c.ref, c.holds, c.to_json()["witness"]) for c in rep.conditions]
    tail = f"oracle: {rep.oracle}  consistent: {rep.consistent}"
    if rep.disputed:
        tail += f"  disputed: {', '.join(rep.disputed)}"
    return f"{head}\n{_table(rows)}\n{tail}"


def _open_out(path: str | None):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


# -- commands ----------------------------------------------------------------

def cmd_field_info(args) -> int:
    F = parse_field(args.field)
    table = default_table(F)
    info = {
        "field": format_field(F),
        "q": F.q,
        "p": F.p,
        "m": F.m,
        "modulus": list(F.modulus),
        "primitive": str(table.gamma),
        "divisors_of_q_minus_1": list(divisors(F.q - 1)),
    }
    if args.format == "json":
        _emit(info)
        return 0
    for k, v in info.items():
        print(f"{k}: {v}")
    if F.q <= 64:
        rows = [("k", "gamma^k")] + [(k, format_element(F, int(v)))
                                      for k, v in enumerate(table.power_of)]
        print(_table(rows))
    return 0


def cmd_verify(args) -> int:
    F = parse_field(args.field)
    P = parse_poly(F, args.poly)
    require_reduced(P)
    table = default_table(F)
    if args.l is not None:
        forms = [extract_factored(P, decompose(F, table, args.l))]
    else:
        forms = detect_decompositions(P, table)
        if not forms:
            extract_factored(P, decompose(F, table, F.q - 1))
    reports = [full_equivalence(ff, table) for ff in forms]
    verdicts = {rep.is_pp for rep in reports}
    consistent = all(rep.consistent for rep in reports) and len(verdicts) == 1
    is_pp = reports[0].is_pp
    if args.format == "json":
        if args.l is not None:
            out = reports[0].to_json()
            out["is_pp"] = is_pp
        else:
            out = {"polynomial": reports[0].polynomial, "field": format_field(F),
                   "is_pp": is_pp, "consistent": consistent,
                   "verdicts": [rep.to_json() for rep in reports]}
        _emit(out)
    else:
        print("\n\n".join(_report_table(rep) for rep in reports))
        print(f"\n{'PERMUTATION' if is_pp else 'NOT A PERMUTATION'}"
              + ("" if consistent else "  (INCONSISTENT)"))
    if not consistent:
        return EXIT_INCONSISTENT
    return EXIT_PP if is_pp else EXIT_NOT_PP


def _sweep_spec(args) -> SweepSpec:
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            return SweepSpec.from_json(fh.read())
    if not args.field:
        raise MalformedInput("search-binomials needs --field or --spec")

    def rng(lo, hi):
        if lo is None and hi is None:
            return None
        return (1 if lo is None else lo, 10**9 if hi is None else hi)
    return SweepSpec(fields=args.field, mode="binomial", l_values=args.l,
                     r_range=rng(args.r_min, args.r_max), e_range=rng(args.e_min, args.e_max),
                     worker_count=args.workers)


def _records_out(records, args) -> None:
    summary = summarize_records(records)
    if args.format == "json" or args.out:
        fh = _open_out(args.out)
        try:
            write_jsonl(records, fh, summary)
        finally:
            if fh is not sys.stdout:
                fh.close()
        if args.out and args.format == "table":
            print(json.dumps(summary))
        return
    rows = [("field", "l", "r", "e", "polynomial", "is_pp", "consistent", "disputed")]
    rows += [(r.field, r.l, r.r, r.e, r.polynomial, r.is_pp, r.consistent,
              ",".join(r.verdict.disputed) if r.verdict else r.note) for r in records]
    print(_table(rows))
    print(json.dumps(summary))


def cmd_search_binomials(args) -> int:
    records = sweep_binomials(_sweep_spec(args))
    _records_out(records, args)
    return EXIT_INCONSISTENT if any(not r.consistent for r in records) else 0


def cmd_trinomials(args) -> int:
    records = sweep_trinomials_f13()
    _records_out(records, args)
    return EXIT_INCONSISTENT if any(not r.consistent for r in records) else 0


def cmd_crossval(args) -> int:
    if args.exhaustive:
        summary = crossval_exhaustive(workers=args.workers, seed=args.seed)
    else:
        spec = SweepSpec(fields=args.field, mode="general_crossval", sample_count=args.samples,
                         seed=args.seed, worker_count=args.workers, max_field=args.max_q)
        summary = crossval_random(spec)
    fh = _open_out(args.out)
    try:
        if args.format == "json" or args.out:
            fh.write(json.dumps(summary, ensure_ascii=False) + "\n")
        else:
            for k, v in summary.items():
                if k not in ("records", "disputed_examples", "coverage"):
                    fh.write(f"{k}: {v}\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_INCONSISTENT if summary["disagreements"] else 0


# -- golden reproduction suite -----------------------------------------------

def _verify_one(field: str, poly: str, l: int):
    F = parse_field(field)
    table = default_table(F)
    ff = extract_factored(parse_poly(F, poly), decompose(F, table, l))
    return F, table, ff, full_equivalence(ff, table)


def _check_f5() -> bool:
    F, table, ff, rep = _verify_one("5", "x^3+2x", 2)
    nec = all(rep.holds(n) for n in ("gcd_r_s", "nonzero_branches", NNC))
    ok, pair = oracle_is_permutation(ff.expanded)
    return nec and not ok and [int(x) for x in pair] == [2, 4] and rep.consistent


def _check_nnc_example() -> bool:
    F, table, ff, rep = _verify_one("13", "x^7+x^3", 3)
    mc = mapping_coeffs(ff)
    return (mc.values == (2, 4, 10) and twice_index_of_product(mc, table) == 2
            and rep.holds(NNC) is False and rep.oracle is False and rep.consistent)


def _check_example_31() -> bool:
    F, table, ff, rep = _verify_one("13", "2x^9+x^5+2x", 3)
    A0, A1, A2 = mapping_coeffs(ff).values
    pinned = ((A0, A1, A2) == (5, 10, 4) and table.index(A0) == 9
              and table.index(F.mul(A2, A2)) == 4 and F.mul(A0, F.mul(A2, A2)) == 2)
    return pinned and rep.oracle and all(c.holds for c in rep.conditions) and rep.consistent


def _check_trinomials() -> bool:
    records = sweep_trinomials_f13()
    return ({r.r for r in records if r.is_pp} == {1, 3, 7, 9}
            and all(r.consistent for r in records))


def _check_nonexistence(p: int) -> bool:
    return prop_nonexistence_scan(p)


def _f31_existence() -> str:
    try:
        prop_nonexistence_scan(31)
    except HypothesisFails:
        pass
    else:
        return "NOT FOUND"
    F = parse_field("31")
    table = default_table(F)
    for r in range(1, 30):
        if gcd(r, 10) != 1:
            continue
        for e in (1, 2):
            bp = make_binomial(F, 3, r, e, table)
            if binomial_l3_iff(bp, table) and oracle_is_permutation(bp.poly())[0]:
                return "FOUND"
    return "NOT FOUND"


def reproduction_checks() -> list[tuple[str, str]]:
    out = []

    def run(name, fn, good="PASS", bad="FAIL"):
        try:
            res = fn()
        except CyclopermError as exc:
            out.append((name, f"{bad} ({type(exc).__name__}: {exc})"))
            return
        if isinstance(res, str):
            out.append((name, res))
        else:
            out.append((name, good if res else bad))

    run("F_5 necessary-but-not-sufficient", _check_f5)
    run("F_13 index-product counterexample", _check_nnc_example)
    run("F_13 Example 3.1", _check_example_31)
    run("F_13 trinomial family", _check_trinomials)
    for p in (7, 13, 19):
        run(f"F_{p} binomial nonexistence", lambda p=p: _check_nonexistence(p))
    run("F_31 binomial existence", _f31_existence)
    return out


def cmd_reproduce(args) -> int:
    checks = reproduction_checks()
    ok = all(status in ("PASS", "FOUND") for _, status in checks)
    if args.format == "json":
        _emit({"checks": [{"name": n, "status": s} for n, s in checks], "ok": ok})
    else:
        for name, status in checks:
            print(f"{name}: {status}")
    if not ok:
        first = next(n for n, s in checks if s not in ("PASS", "FOUND"))
        print(f"first failing check: {first}", file=sys.stderr)
        return EXIT_INCONSISTENT
    return 0


COMMANDS = {
    "field-info": cmd_field_info,
    "verify": cmd_verify,
    "search-binomials": cmd_search_binomials,
    "trinomials-f13": cmd_trinomials,
    "crossval": cmd_crossval,
    "reproduce-paper": cmd_reproduce,
}


def _fail(as_json: bool, code: int, kind: str, message: str) -> int:
    if as_json:
        _emit({"error": kind, "message": message, "exit_code": code})
    else:
        print(f"error ({kind}): {message}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "json" in argv and "--format" in argv or "--format=json" in argv
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(as_json, EXIT_INPUT, "UsageError", str(exc))
    as_json = args.format == "json" if hasattr(args, "format") else as_json
    try:
        return COMMANDS[args.command](args)
    except CyclopermError as exc:
        return _fail(as_json, EXIT_INPUT, type(exc).__name__, str(exc))
    except OSError as exc:
        return _fail(as_json, EXIT_INPUT, type(exc).__name__, str(exc))
    except Exception as exc:  # an internal bug; never report success
        return _fail(as_json, EXIT_INCONSISTENT, type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
