"""Command-line front end: ``entverify {strategy,count,figure,simulate,robustness}``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import counting
from .bases import mub_set
from .errors import DomainError, EntVerifyError
from .robustness import SchmidtVector, ppt_beta_witness, robustness_quantities
from .sim import (
    analytic_pass_rate,
    depolarized_state,
    estimate_fidelity,
    run_protocol,
    run_protocol_parallel,
    worst_case_state,
)
from .strategy import WeightedBasisSet, build_strategy, homogenize, trivial_probability

SEED_ENV = "ENTVERIFY_SEED"


def fmt(x) -> str:
    """12 significant digits for floats, plain str for everything else."""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return "" if x is None else str(x)


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows([fmt(v) for v in row] for row in rows)


def _print_table(header, rows, out=sys.stdout):
    cells = [list(header)] + [[fmt(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=out)


def _open_unit(name):
    def parse(text):
        x = float(text)
        if not 0.0 < x < 1.0:
            raise argparse.ArgumentTypeError(f"{name} must lie in (0, 1), got {text}")
        return x

    return parse


def _resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env, 0)
        except ValueError as exc:
            raise DomainError(f"{SEED_ENV}={env!r} is not an integer") from exc
    return 0


def _optimal_strategy(d, g):
    return build_strategy(WeightedBasisSet.uniform(mub_set(d, g)))


# -- subcommands ------------------------------------------------------------


def cmd_strategy(args):
    s = _optimal_strategy(args.d, args.g)
    report = {}
    if args.lam is not None:
        report["trivial_probability"] = trivial_probability(args.d, args.lam)
        s = homogenize(s, args.lam)
    flags = s.flags.as_dict()
    print(f"d = {s.d}  g = {args.g}  tests = {s.g}")
    print(f"beta = {fmt(s.beta)}  nu = {fmt(s.nu)}")
    if "trivial_probability" in report:
        print(f"trivial test probability = {fmt(report['trivial_probability'])}")
    print("flags: " + (", ".join(k for k, v in flags.items() if v) or "none"))
    if args.out:
        _write_json(args.out, {**s.to_json(), **report})
    return 0


def cmd_count(args):
    d = args.d
    param = args.nu if args.nu is not None else args.lam
    if param is None:
        if d is None:
            raise DomainError("count needs one of --nu, --lambda or --d")
        if args.scenario == counting.NONADVERSARIAL:
            param = d / (d + 1)  # optimal strategy
        elif args.scenario == counting.ADVERSARIAL_HOMOGENEOUS:
            param = 2 / (d + 1)
        else:
            raise DomainError("adversarial-singular needs an explicit --nu")
    plan = counting.count_plan(args.scenario, args.epsilon, args.delta, param, d)
    row = plan.as_dict()
    _print_table(list(row), [list(row.values())])
    if args.out:
        _write_json(args.out, row)
    return 0


def _figure_ed(delta, d_min, d_max):
    header = ["d", "N_nonadversarial", "N_adversarial"]
    rows = [
        [
            d,
            counting.entanglement_tests_optimal(d, delta),
            counting.entanglement_tests_adversarial(d, delta, 2 / (d + 1)),
        ]
        for d in range(d_min, d_max + 1)
    ]
    return header, rows


def _figure_ed_one_test(delta, d_min, d_max):
    thr = counting.one_test_threshold(delta)
    header = ["d", "lambda_minus", "lambda_plus", "two_over_d_plus_1", "one_minus_sqrt", "one_over_d_plus_1"]
    rows = []
    for d in range(max(d_min, thr.d_star), d_max + 1):
        lo, hi = thr.bounds(d)
        rows.append([d, lo, hi, 2 / (d + 1), 1 - math.sqrt(1 - delta), 1 / (d + 1)])
    return header, rows


def cmd_figure(args):
    if args.name == "ed":
        if not 0 < args.delta < 1:
            raise DomainError(f"delta={args.delta} must lie in (0, 1)")
        header, rows = _figure_ed(args.delta, args.d_min or 2, args.d_max or 60)
    else:
        if not 0 < args.delta <= 0.5:
            raise DomainError(f"delta={args.delta} must lie in (0, 1/2]")
        d_star = counting.one_test_threshold(args.delta).d_star
        header, rows = _figure_ed_one_test(
            args.delta, args.d_min or d_star, args.d_max or d_star + 50
        )
    if not rows:
        raise DomainError("empty dimension range")
    _print_table(header, rows)
    if args.out:
        _write_csv(args.out, header, rows)
    return 0


def cmd_simulate(args):
    seed = _resolve_seed(args.seed)
    s = _optimal_strategy(args.d, args.g)
    if args.model == "depolarized":
        model = depolarized_state(args.d, args.epsilon)
    else:
        model = worst_case_state(s, args.epsilon)
    if args.workers > 1:
        result = run_protocol_parallel(s, model, args.n, seed, args.workers)
    else:
        result = run_protocol(s, model, args.n, seed)
    analytic = analytic_pass_rate(s, model)
    print(f"passes = {result.passes}/{result.trials}  seed = {seed}")
    print(f"empirical rate = {fmt(result.rate)} +- {fmt(result.stderr)}")
    print(f"analytic rate  = {fmt(analytic)}")
    payload = {**result.to_json(), "analytic_rate": analytic, "model": model.kind}
    if s.flags.optimal:
        est, err = estimate_fidelity(s, result)
        print(f"fidelity estimate = {fmt(est)} +- {fmt(err)}")
        payload.update(fidelity_estimate=est, fidelity_stderr=err)
    if args.out:
        _write_json(args.out, payload)
    return 0


def cmd_robustness(args):
    if args.schmidt:
        sv = SchmidtVector(args.schmidt)
    elif args.d:
        sv = SchmidtVector.maximally_entangled(args.d)
    else:
        raise DomainError("robustness needs --schmidt or --d")
    rep = robustness_quantities(sv)
    row = dict(rep.__dict__)
    if sv.d <= 12:
        row["ppt_beta_witness"] = ppt_beta_witness(sv)
    _print_table(list(row), [list(row.values())])
    if args.out:
        _write_json(args.out, row)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entverify",
        description="Verification strategies for the maximally entangled state.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("strategy", help="build an MUB strategy and classify it")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--g", type=int, required=True, help="number of bases")
    p.add_argument("--lambda", dest="lam", type=float, help="homogenize to this beta")
    p.add_argument("--out", help="write the strategy as JSON")
    p.set_defaults(func=cmd_strategy)

    p = sub.add_parser("count", help="number of tests for a scenario")
    p.add_argument("--scenario", choices=counting.SCENARIOS, required=True)
    p.add_argument("--epsilon", type=_open_unit("epsilon"), required=True)
    p.add_argument("--delta", type=_open_unit("delta"), required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--nu", type=float)
    group.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--d", type=int, help="derive nu or lambda from the dimension")
    p.add_argument("--out")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("figure", help="entanglement-detection tables as CSV")
    p.add_argument("name", choices=["ed", "ed-one-test"])
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--d-min", type=int)
    p.add_argument("--d-max", type=int)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("simulate", help="Monte Carlo run of the protocol")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=lambda t: int(t, 0), help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--model", choices=["depolarized", "worst"], default="depolarized")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("robustness", help="robustness measures of a pure state")
    p.add_argument("--schmidt", type=float, nargs="+")
    p.add_argument("--d", type=int, help="maximally entangled state of this dimension")
    p.add_argument("--out")
    p.set_defaults(func=cmd_robustness)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EntVerifyError as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
