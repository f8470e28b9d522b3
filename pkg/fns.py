"""
fns: exact Frölicher-Nijenhuis / Schouten calculus and identity verifier.

    python fns.py eval "gp1(p1*dq1, p1*p2)"
    python fns.py verify T35-5
    python fns.py verify all --cases 10 --json reports.json
    python fns.py demo counterexample
    python fns.py demo killing --metric storage/metrics/shear.txt --tensor "v1.v1"
"""
import argparse
import logging
import sys
from fractions import Fraction

import requests

from backend.calculus import schouten
from backend.config import CONFIG_FILE, load_config
from backend.connection import (SAMPLE_METRICS, contravariant_metric, levi_civita, load_metric,
                                schouten_with_metric_defect)
from backend.dsl import EvalContext, evaluate_expression, load_environment
from backend.errors import FnsError
from backend.report import emit_report
from backend.suites import CaseConfig, SUITES, counterexample, counterexample_inputs, list_suites, run_all

logger = logging.getLogger("fns")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def connection_for(name):
    """A metric file path or the name of a built-in sample metric."""
    if name in SAMPLE_METRICS:
        return levi_civita(SAMPLE_METRICS[name]())
    return load_metric(name)


def cmd_eval(args, config):
    conn = connection_for(args.metric) if args.metric else None
    context = EvalContext.for_dimension(args.chart, conn)
    if args.env:
        load_environment(args.env, context)
    result = evaluate_expression(args.expr, context=context)
    print(result)
    return EXIT_OK


def post_reports(url, reports):
    """Pushes finished reports to a running API's ingest endpoint."""
    try:
        response = requests.post(url, json={'reports': [r.to_dict() for r in reports]}, timeout=5)
        response.raise_for_status()
        logger.info("Posted %d reports to %s", len(reports), url)
    except requests.exceptions.RequestException as e:
        logger.error("Error sending reports to API (%s): %s", url, e)


def cmd_verify(args, config):
    case_config = CaseConfig.from_settings(config, dimension=args.dim, coefficient_degree=args.deg,
                                           cases=args.cases, seed=args.seed, workers=args.workers)
    suite_ids = list(SUITES) if args.suite == "all" else [args.suite]
    reports = run_all(case_config, suite_ids)
    print(emit_report(reports if len(reports) > 1 else reports[0], "text"))
    if args.json:
        document = emit_report(reports if len(reports) > 1 else reports[0], "json")
        with open(args.json, 'w') as f:
            f.write(document)
        logger.info("Wrote JSON report to %s", args.json)
    if args.post:
        post_reports(args.post, reports)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAILED


def cmd_suites(args, config):
    for entry in list_suites():
        marker = " [expected failure]" if entry["expected_failure"] else ""
        print(f"{entry['id']:<18} {entry['formula']}{marker}")
    return EXIT_OK


def cmd_demo(args, config):
    if args.demo == "counterexample":
        inputs = counterexample_inputs()
        result = counterexample(**inputs)
        print(f"A = {inputs['A']}    B = {inputs['B']}")
        print(f"{{pb(A), pb(B)}}^1 = {result['chi']}")
        print(f"d{{pb(A), pb(B)}}^1 = {result['d_chi']}")
        print(f"[h(A), h(B)] = {result['bracket']}")
        verdict = result["representative"]
        if hasattr(verdict, "failed_check"):
            print(f"not in the image of h: {verdict.failed_check} check fails ({verdict.message})")
        else:
            print(f"representative found: {verdict}")
        return EXIT_OK
    if not args.metric or not args.tensor:
        print("demo killing needs --metric and --tensor", file=sys.stderr)
        return EXIT_USAGE
    conn = connection_for(args.metric)
    context = EvalContext.for_dimension(conn.chart.dimension, conn)
    S = evaluate_expression(args.tensor, context=context)
    defect = schouten_with_metric_defect(conn, S)
    print(f"S = {S}")
    print(f"D(S) = {defect}")
    print(f"1/2 [g, S] = {schouten(contravariant_metric(conn.metric), S).scale(Fraction(1, 2))}")
    print("Killing tensor" if defect.is_zero() else "not a Killing tensor")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="fns", description="Exact graded bracket calculus and identity verifier.")
    parser.add_argument("--config", default=CONFIG_FILE, help="settings JSON (default: %(default)s)")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate an expression")
    p.add_argument("expr")
    p.add_argument("--env", help="JSON file of name -> expression bindings")
    p.add_argument("--chart", type=int, default=2, help="base dimension (default: %(default)s)")
    p.add_argument("--metric", help="metric file or sample name for nabla, dg, dgp, Dop, NB")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("verify", help="run identity suites")
    p.add_argument("suite", help="suite id or 'all'")
    p.add_argument("--dim", type=int)
    p.add_argument("--deg", type=int)
    p.add_argument("--cases", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--json", help="write the JSON report to this file")
    p.add_argument("--post", help="ingest URL of a running API, e.g. http://127.0.0.1:5000/api/reports/ingest")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("suites", help="list the identity catalog")
    p.set_defaults(handler=cmd_suites)

    p = sub.add_parser("demo", help="worked computations")
    p.add_argument("demo", choices=["counterexample", "killing"])
    p.add_argument("--metric", help="metric file or sample name (" + ", ".join(SAMPLE_METRICS) + ")")
    p.add_argument("--tensor", help="symmetric tensor expression, e.g. v1.v2")
    p.set_defaults(handler=cmd_demo)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    config = load_config(args.config)
    level = logging.DEBUG if args.verbose else config.get("log_level", "INFO")
    logging.basicConfig(level=level, format="[%(asctime)s] %(levelname)s %(name)s: %(message)s", datefmt="%H:%M:%S")
    try:
        return args.handler(args, config)
    except FnsError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
