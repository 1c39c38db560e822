"""Command line: autgroup, search, verify, selftest.

Exit status: 0 when every check passes, 1 on verification failures, 2 on
usage or schema errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .cyclotomic import SubfieldSpec
from .errors import InvariantViolation, SchemaError, TwistError
from .pipeline import (
    FIXTURE_SCHEMA,
    automorphisms,
    ingest_fixture,
    load_fixture_dir,
    records_from_json,
    records_to_json,
    search,
    search_level,
    shipped_fixtures,
    verify,
)
from .solver import set_probe_offset

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=3, metavar="K",
                        help="check pi(h) = j for exponents below q^K (default 3)")
    common.add_argument("--seed", type=int, default=0, help="offset into the probe sequence")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-v", "--verbose", action="count", default=0)

    ap = _Parser(prog="modtwist", description="Twists of genus-0 modular curves over cyclotomic subfields.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("autgroup", parents=[common], help="automorphisms of the fixture's map")
    a.add_argument("fixture")
    a.add_argument("--ambient", type=int, help="conductor of the field to compute over")

    s = sub.add_parser("search", parents=[common], help="twists over subfields of the level field")
    s.add_argument("fixture")
    s.add_argument("--subfield", metavar="GENS",
                   help="comma-separated units mod the level generating H (K = fixed field); "
                        "'1' for the whole level field")
    s.add_argument("--route", choices=["auto", "norm", "conic"], default="auto")
    s.add_argument("--budget", type=int)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", help="write records (JSON list) here")

    v = sub.add_parser("verify", parents=[common], help="check a record file against fixtures")
    v.add_argument("records")
    v.add_argument("--fixtures", help="directory of fixture files (default: shipped fixtures)")

    sub.add_parser("selftest", parents=[common], help="run the built-in property checks")
    return ap


def _emit(args, text: str, data) -> None:
    if args.json:
        print(json.dumps(data, indent=1, sort_keys=True))
    else:
        print(text)


def _cmd_autgroup(args) -> int:
    fx = ingest_fixture(args.fixture, args.precision)
    aut, b = automorphisms(fx, args.ambient)
    field = args.ambient or b * search_level(fx)
    lines = [f"{fx.label}: |Aut| = {len(aut)} over K_{field}, b = {b}"]
    lines += [f"  {g!r}  order {g.order()}" for g in aut]
    data = {"fixture": fx.label, "conductor": field, "b": b,
            "aut": [{"matrix": g.to_json(), "order": g.order()} for g in aut]}
    _emit(args, "\n".join(lines), data)
    return EXIT_OK


def _parse_subfield(text: str, level: int) -> SubfieldSpec:
    try:
        gens = [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise SchemaError(f"--subfield expects comma-separated integers, got {text!r}") from None
    return SubfieldSpec(level, gens)


def _cmd_search(args) -> int:
    fx = ingest_fixture(args.fixture, args.precision)
    K = _parse_subfield(args.subfield, search_level(fx)) if args.subfield else None
    if K is not None and K.is_rational():
        raise SchemaError("the subgroup fixes Q, which is outside the scope of the search")
    records = search(fx, K, route=args.route, budget=args.budget, workers=args.workers, seed=args.seed)
    payload = records_to_json(records)
    if args.out:
        Path(args.out).write_text(payload)
    lines = [f"# {fx.label}: twists listed up to K-isomorphism; {len(records)} records"]
    for r in records:
        what = "A = " + repr(r.A) if r.A is not None else ("conic" if r.conic is not None else "no point found")
        lines.append(f"{r.status:12s} {r.label}  route={r.route}  {what}")
    if args.json:
        print(payload, end="")
    else:
        print("\n".join(lines))
    ok = all(r.status != "found" for r in records)
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_verify(args) -> int:
    try:
        text = Path(args.records).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {args.records}: {exc}") from exc
    records = records_from_json(text)
    fixtures = load_fixture_dir(args.fixtures, args.precision) if args.fixtures else shipped_fixtures(args.precision)
    missing = sorted({r.fixture for r in records} - set(fixtures))
    if missing:
        raise SchemaError(f"records reference unknown fixtures: {', '.join(missing)}")
    rep = verify(records, fixtures)
    summary = f"# {len(records)} records, {len(rep.failures())} failed checks"
    _emit(args, rep.text() + "\n" + summary, {"ok": rep.ok, "lines": rep.to_json()})
    return EXIT_OK if rep.ok else EXIT_FAIL


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(seed=args.seed)
    text = "\n".join(f"{'PASS' if ok else 'FAIL'} {name}" + (f" ({detail})" if detail else "")
                     for name, ok, detail in results)
    _emit(args, text, [{"check": n, "pass": ok, "detail": d} for n, ok, d in results])
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_FAIL


COMMANDS = {"autgroup": _cmd_autgroup, "search": _cmd_search, "verify": _cmd_verify, "selftest": _cmd_selftest}


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(name)s: %(message)s")
    set_probe_offset(args.seed)
    try:
        return COMMANDS[args.command](args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        print(f"schema error: {exc}\n\n{FIXTURE_SCHEMA}", file=sys.stderr)
        return EXIT_USAGE
    except TwistError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


def cli(argv=None) -> int:
    return main(argv)


if __name__ == "__main__":
    raise SystemExit(main())
