"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .binom import build_model
from .bounds import BoundReport, bound_report
from .errors import DomainError
from .moments import MomentConstraints, aggregate
from .simulate import (
    AdaptedRule,
    Scenario,
    SimSpec,
    default_campaign,
    run_campaign,
    step_laws_for,
)
from .transform import TransformQuery, chernoff_inf, g2_oracle, g_beta

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

TABLE_COLUMNS = ("x", "tail_step", "tail_interp", "g2", "hoeffding", "poisson_closed", "poisson_g2", "tightness")


def format_float(v: float, digits: int = 17) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return format(v, f".{digits}g")


def render_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Canonical JSON: sorted keys, floats at 17 significant digits.

    Parsing the output and rendering it again gives identical bytes.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {render_json(obj[k], indent, _level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + render_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    return json.dumps(str(obj))


def _csv(rows, header) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(row[h]) for h in header))
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    return str(v)


def _human(d: dict) -> str:
    lines = []
    for k, v in d.items():
        if isinstance(v, float):
            v = format_float(v, 7)
        elif isinstance(v, (list, tuple)):
            v = ", ".join(format_float(x, 7) if isinstance(x, float) else str(x) for x in v)
        lines.append(f"{k:>16}: {v}")
    return "\n".join(lines) + "\n"


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _load_constraints(args) -> MomentConstraints:
    if args.constraints:
        try:
            with open(args.constraints) as fh:
                spec = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read constraints file: {exc}") from exc
        n = spec.get("n", args.n)
        if args.n is not None and n != args.n:
            raise DomainError(f"--n {args.n} disagrees with n = {n} in the constraints file")
        if n is None:
            raise DomainError("constraints file must give n")
        return MomentConstraints(int(n), spec.get("sigma2"), spec.get("skew"), spec.get("kurt"))
    if args.n is None:
        raise DomainError("--n is required")
    if args.sigma2 is None and args.skew is None and args.kurt is None:
        raise DomainError("give at least one of --sigma2, --skew, --kurt or --constraints")
    return MomentConstraints(args.n, args.sigma2, args.skew, args.kurt)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bound(args) -> int:
    report = bound_report(_load_constraints(args), args.x)
    d = report.to_dict()
    if args.format == "json":
        text = render_json(d) + "\n"
    elif args.format == "csv":
        text = _csv([d], list(d))
    else:
        text = _human(d)
    _emit(text, args.output)
    return EXIT_OK


def table_rows(constraints: MomentConstraints, points: int | None = None, at_atoms: bool = False) -> list[dict]:
    agg = aggregate(constraints)
    model = build_model(constraints.n, agg.sigma2_eff)
    xs = set(float(a) for a in model.atoms)
    if not at_atoms:
        xs.update(float(r) for r in model.breakpoints)
        if points:
            xs.update(float(x) for x in np.linspace(model.atoms[0], model.n, points))
    rows = []
    for x in sorted(xs):
        r: BoundReport = bound_report(constraints, x, model=model)
        rows.append(
            {
                "x": x,
                "tail_step": r.tail_step,
                "tail_interp": r.tail_reference,
                "g2": r.g2,
                "hoeffding": r.hoeffding,
                "poisson_closed": r.poisson_closed,
                "poisson_g2": r.poisson_g2,
                "tightness": r.tightness,
            }
        )
    return rows


def cmd_table(args) -> int:
    if not args.at_atoms and not args.points:
        raise DomainError("give --points P or --at-atoms")
    rows = table_rows(_load_constraints(args), args.points, args.at_atoms)
    _emit(_csv(rows, TABLE_COLUMNS), args.output)
    return EXIT_OK


def cmd_transform(args) -> int:
    constraints = _load_constraints(args)
    agg = aggregate(constraints)
    model = build_model(constraints.n, agg.sigma2_eff)
    dist = model.distribution()
    rows = []
    for x in args.x:
        rows.append(
            {
                "x": x,
                "beta": args.beta,
                "g_beta": g_beta(dist, TransformQuery(x, args.beta)),
                "g2_oracle": g2_oracle(dist, x),
                "chernoff": chernoff_inf(dist, x),
                "tail": dist.tail(x),
            }
        )
    if args.format == "json":
        text = render_json({"n": constraints.n, "sigma2_eff": agg.sigma2_eff, "rows": rows}) + "\n"
    elif args.format == "csv":
        text = _csv(rows, list(rows[0]) if rows else ["x"])
    else:
        text = "".join(_human(r) + "\n" for r in rows)
    _emit(text, args.output)
    return EXIT_OK


def _build_scenarios(args) -> list[Scenario]:
    if getattr(args, "campaign", False):
        return default_campaign(samples=args.samples, seed=args.seed)
    if not args.xs:
        raise DomainError("--xs is required unless --campaign is given")
    constraints = _load_constraints(args)
    law = AdaptedRule() if args.adapted else step_laws_for(constraints)
    spec = SimSpec(n=constraints.n, step_law=law, samples=args.samples, seed=args.seed, maximal=args.maximal)
    name = ("adapted" if args.adapted else "iid") + ("-max" if args.maximal else "")
    return [Scenario(name=name, constraints=constraints, spec=spec, xs=tuple(args.xs))]


def cmd_verify(args) -> int:
    if args.samples < 1:
        raise DomainError(f"--samples must be positive, got {args.samples}")
    if args.adapted and not args.campaign and (args.n or 0) < 2:
        raise DomainError("--adapted needs --n >= 2")
    results = run_campaign(_build_scenarios(args), workers=args.workers, inject_zero_bound=args.inject_zero_bound)
    passed = all(r.passed for r in results)
    if args.format == "json":
        text = render_json({"passed": passed, "scenarios": [r.to_dict() for r in results]}) + "\n"
    else:
        lines = []
        for r in results:
            for t, v in zip(r.tails, r.verdicts):
                worst = min(v.margins, key=v.margins.get)
                lines.append(
                    f"{'PASS' if v.passed else 'FAIL'}  {r.scenario.name:<26} x={format_float(t.x, 7):<8} "
                    f"est={format_float(t.estimate, 7):<10} se={format_float(t.stderr, 7):<10} "
                    f"tightest={worst} margin={format_float(v.margins[worst], 7)}"
                )
        lines.append("ALL PASS" if passed else "FAILURES PRESENT")
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return EXIT_OK if passed else EXIT_FAIL


def _add_constraint_args(p):
    p.add_argument("--n", type=int, help="number of summands")
    p.add_argument("--sigma2", type=float, help="variance cap applied to every summand")
    p.add_argument("--skew", type=float, help="skewness floor applied to every summand")
    p.add_argument("--kurt", type=float, help="kurtosis cap applied to every summand")
    p.add_argument("--constraints", metavar="FILE", help='json file {"n": .., "sigma2": [..], "skew": [..], "kurt": [..]}')
    p.add_argument("--output", metavar="PATH", help="write to PATH instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tailbound", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="all bounds at one threshold")
    _add_constraint_args(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--format", choices=("human", "json", "csv"), default="human")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("table", help="CSV curve of bounds over x")
    _add_constraint_args(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--points", type=int, help="uniform points on [d_0, n], plus atoms and breakpoints")
    g.add_argument("--at-atoms", action="store_true", help="rows at the atoms of T_n only")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("transform", help="G_beta and Chernoff transforms of the binomial law")
    _add_constraint_args(p)
    p.add_argument("--x", type=_float_list, required=True, help="comma-separated thresholds")
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--format", choices=("human", "json", "csv"), default="human")
    p.set_defaults(func=cmd_transform)

    for name, helptext in (("simulate", "Monte Carlo tails checked against the bounds"), ("verify", "verification campaign")):
        p = sub.add_parser(name, help=helptext)
        _add_constraint_args(p)
        p.add_argument("--xs", type=_float_list, help="comma-separated thresholds")
        p.add_argument("--samples", type=int, default=10**6)
        p.add_argument("--seed", type=int, default=20080101)
        p.add_argument("--adapted", action="store_true", help="use the two-regime adapted martingale")
        p.add_argument("--maximal", action="store_true", help="threshold the running maximum")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--format", choices=("human", "json"), default="human")
        p.add_argument("--inject-zero-bound", action="store_true", help=argparse.SUPPRESS)
        p.add_argument("--campaign", action="store_true", help="run the built-in scenario campaign")
        p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"tailbound: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
