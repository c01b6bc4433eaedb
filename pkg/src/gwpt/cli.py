"""Command-line interface.

Exit codes: 0 when every check passes, 1 when a check fails or is
vacuous, 2 for unreadable or invalid scenario files.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .fixtures import conifold_toy_document, synthetic_document
from .local_models import verify_local_correspondence
from .report import RunReport, document_digest, run_all, run_check
from .scenario import ScenarioError, canonical_json, load_scenario, read_document

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def _orders(args) -> dict:
    return {"u": args.u_order, "q": args.q_order, "degree": args.degree_bound}


def _parse_class(text: str) -> List[int]:
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def _emit(report: RunReport, args) -> int:
    text = report.to_json()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    for line in report.summary_lines():
        print(line)
    return EXIT_OK if report.verdict == "pass" else EXIT_FAIL


def _load(args):
    return load_scenario(args.scenario, _orders(args))


def cmd_validate(args) -> int:
    doc = read_document(args.scenario)
    load_scenario(doc)
    text = canonical_json(doc)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"valid: {args.scenario}", file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    sc = _load(args)
    return _emit(run_all(sc, args.check), args)


def _single(args, chk: dict) -> int:
    sc = _load(args)
    report = RunReport(sc.name, document_digest(sc.document), dict(sc.orders), [run_check(sc, chk)])
    return _emit(report, args)


def cmd_key(args) -> int:
    return _single(args, {"type": "key-equality", "class": _parse_class(args.cls), "insertions": args.insertion})


def cmd_main(args) -> int:
    return _single(args, {"type": "main-theorem", "class": _parse_class(args.cls), "insertions": args.insertion})


def cmd_ktilde(args) -> int:
    return _single(args, {"type": "validate-ktilde"})


def cmd_local(args) -> int:
    u_order = 12 if args.u_order is None else args.u_order
    ok = True
    records = []
    for d in args.degree or [1, 2, 3]:
        r = verify_local_correspondence(d, u_order)
        ok = ok and r.passed
        records.append(r.to_dict())
        print(f"{'PASS' if r.passed else 'FAIL':8s} local-correspondence [degree={d}, u_order={u_order}] "
              f"{r.rational}")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(canonical_json({"checks": records, "verdict": "pass" if ok else "fail"}))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fixture(args) -> int:
    if args.name == "conifold-toy":
        doc = conifold_toy_document(args.seed)
    else:
        doc = synthetic_document(args.seed)
    text = canonical_json(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gwpt", description="Exact checks of GW/PT partition-function identities.")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, func, help_text):
        s = sub.add_parser(name, help=help_text)
        s.add_argument("scenario", help="scenario JSON file")
        s.add_argument("--u-order", type=int, default=None)
        s.add_argument("--q-order", type=int, default=None)
        s.add_argument("--degree-bound", type=int, default=None)
        s.add_argument("--report", default=None, help="write the JSON report here")
        s.set_defaults(func=func)
        return s

    s = scenario_cmd("validate", cmd_validate, "validate a scenario and echo its canonical form")
    s = scenario_cmd("run-scenario", cmd_run, "run every declared check")
    s.add_argument("--check", action="append", default=None, help="restrict to this check type (repeatable)")
    s = scenario_cmd("check-key-equality", cmd_key, "key equality at one blow-up class")
    s.add_argument("--class", dest="cls", required=True, help="comma-separated class coordinates")
    s.add_argument("--insertion", action="append", default=[], help="e.g. 'tau_1(H)' (repeatable)")
    s = scenario_cmd("main-theorem", cmd_main, "X-side correspondence at one class")
    s.add_argument("--class", dest="cls", required=True, help="comma-separated class coordinates")
    s.add_argument("--insertion", action="append", default=[], help="e.g. 'tau_1(H)' (repeatable)")
    scenario_cmd("validate-ktilde", cmd_ktilde, "check the matrix properties")

    s = sub.add_parser("verify-local", help="local-curve GW/PT correspondence")
    s.add_argument("--degree", type=int, action="append", default=None, help="degree to check (repeatable; default 1, 2, 3)")
    s.add_argument("--u-order", "--order", dest="u_order", type=int, default=None)
    s.add_argument("--report", default=None)
    s.set_defaults(func=cmd_local)

    s = sub.add_parser("make-fixture", help="write a built-in scenario document")
    s.add_argument("name", choices=["conifold-toy", "synthetic"])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_fixture)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as e:
        for problem in e.problems:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
