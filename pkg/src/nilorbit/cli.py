"""``nilorbit``: sample strata, report dimensions, run the property suites.

Exit codes: 0 on success, 1 when a property check fails, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

from . import numkernel
from .errors import StratumEmptyError
from .momentgeo import reduction_dimension
from .numkernel import EXACT, FLOAT
from .suites import FLOAT_SUITES, SUITES, run_all, run_suite
from .sympcore import (
    SymplecticSpace,
    orbit_dimension,
    orbit_dimension_formula,
    sample_nilpotent,
    stratum_of,
)

MAX_K = 6
SUITE_CHOICES = tuple(SUITES) + ("all",)


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _k(text: str) -> int:
    value = _positive(text)
    if value > MAX_K:
        raise argparse.ArgumentTypeError(f"k is capped at {MAX_K}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=_k, default=3, help=f"half of dim V (1..{MAX_K})")
    common.add_argument("--seed", type=int, default=None, help="base seed (env NILORBIT_SEED, else 0)")
    common.add_argument("--backend", choices=(EXACT, FLOAT), default=EXACT)
    common.add_argument("--height", type=_positive, default=10, help="sampling height bound")
    common.add_argument("--tolerance", type=float, default=None, help="float comparison tolerance")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--timing", action="store_true", help="add elapsed_ms to the report")

    parser = argparse.ArgumentParser(prog="nilorbit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    strata = sub.add_parser("strata", parents=[common], help="sample each stratum and compare orbit dimensions")
    strata.add_argument("--p", type=int, action="append", default=None,
                        help="restrict to these ranks (repeatable)")

    sub.add_parser("dim-report", parents=[common], help="dimension of the PGL(2) reduction")

    verify = sub.add_parser("verify", parents=[common], help="run a property suite")
    verify.add_argument("--suite", choices=SUITE_CHOICES, default="all")
    verify.add_argument("--trials", type=_positive, default=100)
    return parser


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("NILORBIT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"NILORBIT_SEED must be an integer, got {env!r}") from exc


def cmd_strata(args) -> tuple[dict, int]:
    space = SymplecticSpace(args.k)
    seed = _seed(args)
    ranks = args.p if args.p is not None else list(range(min(3, args.k) + 1))
    rows, status = [], 0
    for p in ranks:
        if p < 0:
            raise UsageError("ranks are nonnegative")
        try:
            B = sample_nilpotent(space, p, seed ^ p, args.height)
        except StratumEmptyError as exc:
            rows.append({"p": p, "empty": True, "notice": str(exc)})
            continue
        member = stratum_of(space, B.B) == p
        dim = orbit_dimension(space, B)
        formula = orbit_dimension_formula(args.k, p)
        ok = member and dim == formula
        status = status or (0 if ok else 1)
        rows.append({"p": p, "empty": False, "in_stratum": member, "orbit_dim": dim,
                     "formula": formula, "agree": dim == formula})
    return {"command": "strata", "k": args.k, "seed": str(seed), "rows": rows}, status


def cmd_dim_report(args) -> tuple[dict, int]:
    k = args.k
    info = reduction_dimension(SymplecticSpace(k), _seed(args), args.height)
    computed = info["dim"]
    formula = 3 * (2 * k - 2)
    total = computed + 2 * k
    reference = 6 * k - 2
    report = {
        "command": "dim-report",
        "k": k,
        "rank": info["rank"],
        "ker_dQ": info["ker_dQ"],
        "stabilizer": info["stabilizer"],
        "computed": computed,
        "formula": formula,
        "local_model_total": total,
        "reference_total": reference,
        "totals_agree": total == reference,
        "anomaly": computed > formula,
    }
    return report, 0


def cmd_verify(args) -> tuple[dict, int]:
    if args.backend == FLOAT and (args.suite == "all" or args.suite not in FLOAT_SUITES):
        raise UsageError(f"the float backend supports only {', '.join(sorted(FLOAT_SUITES))}")
    seed = _seed(args)
    if args.suite == "all":
        report = run_all(args.k, args.trials, seed, args.height, args.backend)
    else:
        report = run_suite(args.suite, args.k, args.trials, seed, args.height, args.backend)
    return report, (1 if report["failures"] else 0)


def _csv(report: dict) -> str:
    buf = io.StringIO()
    if "rows" in report:
        rows = report["rows"]
        fields = sorted({key for r in rows for key in r})
    elif "failures" in report:
        rows = [dict(f, suite=report["suite"], k=report["k"]) for f in report["failures"]]
        fields = ["suite", "k", "trial", "seed", "detail"]
    else:
        rows = [{key: v for key, v in report.items()}]
        fields = list(report)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def render(report: dict, fmt: str) -> str:
    if fmt == "csv":
        return _csv(report)
    return json.dumps(report, indent=2) + "\n"


COMMANDS = {"strata": cmd_strata, "dim-report": cmd_dim_report, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tolerance is not None:
        if args.tolerance <= 0:
            parser.error("--tolerance must be positive")
        numkernel.set_tolerance(args.tolerance)
    start = time.perf_counter()
    try:
        report, status = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    if args.timing:
        report["elapsed_ms"] = int((time.perf_counter() - start) * 1000)
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
