"""Command-line front end.

Subcommands: run, coeffs, simulate, figure1, rank, adversarial.  Structured
artifacts are JSON (rationals rendered as [numerator, denominator] pairs plus
decimals); experiment tables are CSV.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction

from .core import BidProfile
from .experiments import (ExperimentConfig, adversarial_profile, evaluate,
                          figure1_experiment, worst_case_index)
from .ordering import rank_agents
from .rebates import hetero_alphas
from .scaling import claim1_bound, solve_lp
from .wco import wco_coefficients, wco_index

DEFAULT_SEED_ENV = "REDISTRIB_SEED"


def _rat(x):
    f = Fraction(x) if not isinstance(x, Fraction) else x
    return [f.numerator, f.denominator]


def _num(x):
    return float(x)


def _write_json(data, path):
    text = json.dumps(data, indent=2)
    if path is None:
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _load_profile(path) -> BidProfile:
    with open(path) as fh:
        return BidProfile.from_json_dict(json.load(fh))


def _cmd_run(args):
    profile = _load_profile(args.input)
    kwargs = {}
    if args.gammas:
        kwargs["gamma"] = _parse_gammas(args.gammas)
    outcome = evaluate(profile, args.mech, **kwargs)
    data = {
        "mechanism": args.mech,
        "allocation": [list(pr) for pr in outcome.allocation.pairs],
        "allocation_value": _num(outcome.allocation.value),
        "payments": [_num(t) for t in outcome.payments],
        "rebates": [_num(r) for r in outcome.rebates],
        "surplus": _num(outcome.surplus),
        "fraction": None if outcome.fraction is None else _num(outcome.fraction),
    }
    _write_json(data, args.out)


def _parse_gammas(text):
    return tuple(Fraction(g) for g in text.split(","))


def _cmd_coeffs(args):
    n, p = args.n, args.p
    if args.mech == "wco":
        coeffs = wco_coefficients(n, p)
        data = {"mechanism": "wco", "n": n, "p": p,
                "c": [_rat(c) for c in coeffs.c],
                "c_decimal": [_num(c) for c in coeffs.c],
                "e_star": _rat(wco_index(n, p)),
                "e_star_decimal": _num(wco_index(n, p))}
    elif args.mech == "hetero":
        coeffs = hetero_alphas(n, p)
        data = {"mechanism": "hetero", "n": n, "p": p,
                "alpha": [_rat(a) for a in coeffs.alpha],
                "alpha_decimal": [_num(a) for a in coeffs.alpha]}
    elif args.mech == "scaling":
        if not args.gammas:
            raise ValueError("scaling coefficients need --gammas")
        gamma = _parse_gammas(args.gammas)
        model = solve_lp(n, p, gamma)
        data = {"mechanism": "scaling", "n": n, "p": p,
                "gamma": [_num(g) for g in gamma],
                "e_star": _rat(model.e_star),
                "e_star_decimal": _num(model.e_star),
                "bound": _rat(model.bound),
                "bound_decimal": _num(model.bound),
                "exact": model.exact,
                "c": [_rat(c) for c in model.c],
                "c_decimal": [_num(c) for c in model.c]}
    else:
        raise ValueError(f"no coefficient table for mechanism {args.mech!r}")
    _write_json(data, args.out)


def _parse_generator(text):
    """'uniform:LO:HI', 'binary', ..., or 'file:PATH' -> (kind, lo, hi, source)."""
    kind, _, rest = text.partition(":")
    if kind == "file":
        if not rest:
            raise ValueError("file generator needs a path: file:PATH")
        return kind, 0.0, 100.0, rest
    if kind in ("uniform", "binary", "binary_homogeneous",
                "uniform_homogeneous"):
        parts = rest.split(":") if rest else []
        lo = float(parts[0]) if len(parts) > 0 else 0.0
        hi = float(parts[1]) if len(parts) > 1 else 100.0
        return kind, lo, hi, None
    raise ValueError(f"unknown generator {text!r}")


def _cmd_simulate(args):
    kind, lo, hi, source = _parse_generator(args.gen)
    config = ExperimentConfig(
        n=args.n, p=args.p, mechanism=args.mech, generator=kind,
        lo=lo, hi=hi, trials=args.trials, seed=args.seed,
        gamma=_parse_gammas(args.gammas) if args.gammas else None,
        source=source)
    report = worst_case_index(config, workers=args.workers)
    _write_json(report.to_json_dict(), args.out)


def _cmd_figure1(args):
    p_range = range(args.p_min, args.p_max + 1)
    rows = figure1_experiment(n=args.n, p_range=p_range, trials=args.trials,
                              seed=args.seed, workers=args.workers)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=[
            "p", "mech", "worst_fraction", "mean_fraction", "trials", "seed"])
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            fh.close()


def _cmd_rank(args):
    profile = _load_profile(args.input)
    ranking = rank_agents(profile)
    data = {"classes": [sorted(cls) for cls in ranking.classes]}
    _write_json(data, args.out)


def _cmd_adversarial(args):
    profile = adversarial_profile(args.n, args.p)
    outcome = evaluate(profile, "bailey_cavallo")
    data = profile.to_json_dict()
    data["surplus"] = _num(outcome.surplus)
    _write_json(data, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="redistrib",
        description="Groves redistribution mechanisms for unit-demand "
                    "assignment of heterogeneous objects")
    default_seed = int(os.environ.get(DEFAULT_SEED_ENV, "0"))
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="apply one mechanism to a profile file")
    run.add_argument("--mech", required=True,
                     choices=["wco", "scaling", "bailey_cavallo", "hetero"])
    run.add_argument("--input", required=True)
    run.add_argument("--gammas", help="comma-separated gamma vector (scaling)")
    run.add_argument("--out")
    run.set_defaults(func=_cmd_run)

    coeffs = sub.add_parser("coeffs", help="emit a mechanism's coefficients")
    coeffs.add_argument("--mech", required=True,
                        choices=["wco", "scaling", "hetero"])
    coeffs.add_argument("--n", type=int, required=True)
    coeffs.add_argument("--p", type=int, required=True)
    coeffs.add_argument("--gammas")
    coeffs.add_argument("--out")
    coeffs.set_defaults(func=_cmd_coeffs)

    sim = sub.add_parser("simulate", help="worst-case index over a profile stream")
    sim.add_argument("--mech", required=True,
                     choices=["wco", "scaling", "bailey_cavallo", "hetero"])
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--gen", default="uniform:0:100")
    sim.add_argument("--trials", type=int, default=10_000)
    sim.add_argument("--seed", type=int, default=default_seed)
    sim.add_argument("--gammas")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out")
    sim.set_defaults(func=_cmd_simulate)

    fig = sub.add_parser("figure1", help="BC vs HETERO comparison table (CSV)")
    fig.add_argument("--n", type=int, default=10)
    fig.add_argument("--p-min", type=int, default=1)
    fig.add_argument("--p-max", type=int, default=7)
    fig.add_argument("--trials", type=int, default=10_000)
    fig.add_argument("--seed", type=int, default=default_seed)
    fig.add_argument("--workers", type=int, default=1)
    fig.add_argument("--out")
    fig.set_defaults(func=_cmd_figure1)

    rank = sub.add_parser("rank", help="bid-induced agent ranking")
    rank.add_argument("--input", required=True)
    rank.add_argument("--out")
    rank.set_defaults(func=_cmd_rank)

    adv = sub.add_parser("adversarial",
                         help="the zero-redistribution witness profile")
    adv.add_argument("--n", type=int, required=True)
    adv.add_argument("--p", type=int, required=True)
    adv.add_argument("--out")
    adv.set_defaults(func=_cmd_adversarial)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        json.dump({"error": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
