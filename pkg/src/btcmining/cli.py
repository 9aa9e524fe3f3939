"""Command-line front end: tables and reports as CSV or JSON."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from .doublespend import (
    ConfirmationQuery,
    confirmations_for_risk,
    double_spend_asymptotic,
    double_spend_probability,
    double_spend_probability_conditional,
)
from .errors import ConfigError, DomainError
from .mining_model import NetworkParams
from .nakamoto_profitability import minimal_profitable_double_spend
from .simulator import config_from_json, run
from .strategies import (
    EQUAL_FORK_STUBBORN,
    HONEST,
    LEAD_STUBBORN,
    SELFISH,
    a_trailing,
    dominance_grid,
    strategy_revenue_ratio,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_PROFITABLE = 3


class _Output:
    def __init__(self, args):
        self.format = args.format
        self.precision = args.precision
        self.path = args.output

    def num(self, x):
        if x is None:
            return None
        if isinstance(x, (bool, np.bool_)):
            return bool(x)
        if isinstance(x, (int, np.integer)):
            return int(x)
        x = float(x)
        if not math.isfinite(x):
            return x
        return float(f"{x:.{self.precision}g}")

    def text(self, x):
        x = self.num(x)
        if x is None:
            return ""
        if isinstance(x, bool):
            return "true" if x else "false"
        if isinstance(x, float):
            return f"{x:.{self.precision}g}"
        return str(x)

    def round_tree(self, doc):
        if isinstance(doc, dict):
            return {k: self.round_tree(v) for k, v in doc.items()}
        if isinstance(doc, list):
            return [self.round_tree(v) for v in doc]
        if isinstance(doc, str):
            return doc
        return self.num(doc)

    def table(self, header, rows, extra_json=None, footer=None):
        if self.format == "json":
            doc = {"columns": list(header), "rows": [dict(zip(header, map(self._json_cell, r))) for r in rows]}
            if extra_json:
                doc.update(self.round_tree(extra_json))
            self.write_json(doc)
            return
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            writer.writerow([c if isinstance(c, str) else self.text(c) for c in r])
        for r in footer or []:
            writer.writerow([c if isinstance(c, str) else self.text(c) for c in r])
        self.emit(buf.getvalue())

    def _json_cell(self, c):
        return c if isinstance(c, str) else self.num(c)

    def write_json(self, doc):
        self.emit(json.dumps(self.round_tree(doc), indent=2) + "\n")

    def emit(self, text):
        if self.path in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(self.path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)


def _params(args, q=None, gamma=0.0):
    return NetworkParams(q=args.q if q is None else q, gamma=gamma, tau0=args.tau0, b=args.b)


def cmd_ds_prob(args, out):
    params = _params(args)
    header = ["q", "z", "probability"]
    row = [params.q, args.z, double_spend_probability(args.z, params)]
    if args.kappa is not None:
        header += ["kappa", "conditional_probability"]
        row += [args.kappa, double_spend_probability_conditional(ConfirmationQuery(args.z, params, args.kappa))]
    out.table(header, [row])
    return EXIT_OK


def cmd_ds_table(args, out):
    if args.z_max < 1:
        raise DomainError("z-max must be at least 1")
    params = _params(args)
    rows = []
    for z in range(1, args.z_max + 1):
        exact = double_spend_probability(z, params)
        approx = double_spend_asymptotic(z, params)
        rows.append([z, exact, approx, exact / approx])
    targets = [(r, confirmations_for_risk(r, params)) for r in args.risk]
    footer = [["risk_target", r, "confirmations", z] for r, z in targets]
    extra = {"q": params.q, "risk_targets": [{"max_risk": r, "confirmations": z} for r, z in targets]}
    out.table(["z", "probability", "asymptotic", "ratio"], rows, extra, footer)
    return EXIT_OK


def _candidates(A_values):
    return [HONEST, SELFISH, LEAD_STUBBORN, EQUAL_FORK_STUBBORN] + [a_trailing(a) for a in A_values]


def cmd_compare(args, out):
    params = _params(args, gamma=args.gamma)
    rows = []
    for spec in _candidates(args.A):
        res = strategy_revenue_ratio(spec, params)
        rows.append([spec.label(), res.revenue_ratio_over_honest, res.apparent_hashrate, res.is_profitable])
    out.table(["strategy", "ratio_over_honest", "apparent_hashrate", "is_profitable"], rows)
    return EXIT_OK


def cmd_dominance(args, out):
    if args.steps < 2:
        raise DomainError("steps must be at least 2")
    if not (0.0 < args.q_min <= args.q_max < 0.5):
        raise DomainError("q range must satisfy 0 < q-min <= q-max < 1/2")
    if not (0.0 <= args.gamma_min <= args.gamma_max <= 1.0):
        raise DomainError("gamma range must satisfy 0 <= gamma-min <= gamma-max <= 1")
    qs = np.linspace(args.q_min, args.q_max, args.steps).tolist()
    gs = np.linspace(args.gamma_min, args.gamma_max, args.steps).tolist()
    grid = dominance_grid(qs, gs, args.A, tau0=args.tau0, b=args.b)
    rows = []
    for q, row in zip(qs, grid):
        for g, (spec, ratio) in zip(gs, row):
            rows.append([q, g, spec.label(), ratio])
    out.table(["q", "gamma", "winner", "winner_ratio"], rows)
    return EXIT_OK


def cmd_simulate(args, out):
    if args.config == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}") from None
    config = config_from_json(text)
    report = run(config, workers=args.workers)
    doc = report.to_dict()
    if out.format == "json":
        out.write_json(doc)
    else:
        rows = []
        for key, value in doc.items():
            if key == "config":
                continue
            if isinstance(value, dict):
                rows.append([key, value["value"], value["se"]])
            else:
                rows.append([key, "" if value is None else value, ""])
        out.table(["field", "value", "se"], rows)
    return EXIT_NOT_PROFITABLE if report.profitable is False else EXIT_OK


def cmd_min_value(args, out):
    params = _params(args)
    v0 = minimal_profitable_double_spend(args.z, params)
    out.table(["q", "z", "v0_coinbases", "v0_coins"], [[params.q, args.z, v0 / params.b, v0]])
    return EXIT_OK


def _precision(text):
    value = int(text)
    if not 1 <= value <= 17:
        raise argparse.ArgumentTypeError("precision must be between 1 and 17")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=None, help="csv, or json for simulate")
    common.add_argument("--output", default=None, help="file path, or - for standard output")
    common.add_argument("--precision", type=_precision, default=10, help="significant digits (1-17)")
    common.add_argument("--tau0", type=float, default=600.0, help="target block interval in seconds")
    common.add_argument("--b", type=float, default=12.5, help="coinbase reward in coins")

    parser = argparse.ArgumentParser(prog="btcmining", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ds-prob", parents=[common], help="double-spend probability P(z) and P(z, kappa)")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--z", type=int, required=True)
    p.add_argument("--kappa", type=float, default=None)
    p.set_defaults(func=cmd_ds_prob)

    p = sub.add_parser("ds-table", parents=[common], help="P(z) table with its asymptotic")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--z-max", type=int, required=True)
    p.add_argument("--risk", type=float, action="append", default=[], help="risk target (repeatable)")
    p.set_defaults(func=cmd_ds_table)

    p = sub.add_parser("compare", parents=[common], help="revenue ratios of all strategies")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--A", type=_positive_int, nargs="*", default=[])
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("dominance", parents=[common], help="most profitable strategy on a (q, gamma) grid")
    p.add_argument("--q-min", type=float, default=0.01)
    p.add_argument("--q-max", type=float, default=0.49)
    p.add_argument("--gamma-min", type=float, default=0.0)
    p.add_argument("--gamma-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--A", type=_positive_int, nargs="*", default=[1, 2, 3, 5, 10])
    p.set_defaults(func=cmd_dominance)

    p = sub.add_parser("simulate", parents=[common], help="run a JSON simulation config")
    p.add_argument("config", help="config file path, or - for standard input")
    p.add_argument("--workers", type=_positive_int, default=None)
    p.set_defaults(func=cmd_simulate, default_format="json")

    p = sub.add_parser("min-value", parents=[common], help="minimal profitable double-spend amount")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--z", type=int, required=True)
    p.set_defaults(func=cmd_min_value)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = getattr(args, "default_format", "csv")
    out = _Output(args)
    try:
        return args.func(args, out)
    except (DomainError, ConfigError) as exc:
        print(f"btcmining {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
