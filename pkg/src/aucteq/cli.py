"""Command-line entry point: ``aucteq <command> ...``.

Results go to stdout as JSON.  With ``--output DIR`` they are also written
to ``DIR/<command>.json`` along with any CSV side files.  Exit codes: 0 on
success or a passing check, 1 on a failed check, 2 on bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path
from typing import Sequence

from . import bounds
from .cdf import min_envelope, reciprocal_cdf
from .construct import (
    construct_case1_welfare,
    construct_pure_nash_mixture,
    construct_symmetric_worst_revenue,
    construct_table1,
    construct_worst_welfare,
    discretize,
    reduce_to_two,
)
from .core import AuctionInstance, summarize
from .dynamics import LearnerConfig, default_seed, run
from .errors import AuctEqError, InvalidInputError
from .lp.polytope import BidGrid, extremal_equilibrium
from .report import build_report
from .serialization import (
    ParseError,
    csv_text,
    dumps,
    equilibrium_to_dict,
    loads_cdf,
    loads_equilibrium,
    write_csv,
)
from .verify import DeviationPolicy, verify_ce, verify_cce

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


# ---------------------------------------------------------------- parsing helpers

def _floats(text: str) -> tuple[float, ...]:
    try:
        out = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("expected at least one number")
    return out


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _price_atoms(text: str) -> dict[float, float]:
    """``price:mass,price:mass``."""
    out = {}
    for item in text.split(","):
        try:
            price, mass = item.split(":")
            out[float(price)] = float(mass)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected price:mass pairs, got {item!r}") from None
    return out


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="aucteq", description="Equilibria of full-information first-price auctions.")
    p.add_argument("--output", metavar="DIR", help="also write results under DIR")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="check an equilibrium JSON file")
    v.add_argument("--input", required=True)
    v.add_argument("--mode", choices=("cce", "ce"), default="cce")
    v.add_argument("--tol", type=float, default=0.0)
    v.add_argument("--tie", choices=[x.value for x in DeviationPolicy], default="deviator-loses")

    c = sub.add_parser("construct", help="build a closed-form equilibrium")
    csub = c.add_subparsers(dest="which", required=True, parser_class=_Parser)
    t1 = csub.add_parser("table1")
    t1.add_argument("--eps", type=float, default=1e-4)
    ww = csub.add_parser("worst-welfare")
    grp = ww.add_mutually_exclusive_group()
    grp.add_argument("--alpha", type=float)
    grp.add_argument("--optimal", action="store_true", help="use the welfare-minimizing alpha (default)")
    ww.add_argument("--grid", type=int)
    c1 = csub.add_parser("case1-welfare")
    c1.add_argument("--alpha", type=float)
    c1.add_argument("--grid", type=int)
    wr = csub.add_parser("worst-revenue")
    wr.add_argument("--n", type=int, default=2)
    wr.add_argument("--value", type=float, default=1.0)
    wr.add_argument("--grid", type=int)
    nm = csub.add_parser("nash-mixture")
    nm.add_argument("--values", type=_floats, required=True, help="v1,v2")
    nm.add_argument("--prices", type=_price_atoms, required=True, help="price:mass,...")

    b = sub.add_parser("bound", help="evaluate a closed-form bound")
    bsub = b.add_subparsers(dest="which", required=True, parser_class=_Parser)
    bsub.add_parser("welfare-min")
    bsub.add_parser("revenue-floor")
    sy = bsub.add_parser("symmetric")
    sy.add_argument("--n", type=int, required=True)
    sy.add_argument("--value", type=float, default=1.0)
    gp = bsub.add_parser("gap")
    gp.add_argument("--eps", type=float, required=True)
    ub = bsub.add_parser("u-bounds")
    ub.add_argument("--alpha", type=float, required=True)
    wl = bsub.add_parser("welfare-lb")
    wl.add_argument("--alpha", type=float, required=True)
    wl.add_argument("--beta", type=float, required=True)
    wl.add_argument("--v", type=float, required=True)

    lp = sub.add_parser("lp", help="extremal equilibrium over a bid grid")
    lp.add_argument("--values", type=_floats, required=True)
    lp.add_argument("--grid", type=int, required=True)
    lp.add_argument("--top", type=float, help="highest grid bid (default: highest value)")
    lp.add_argument("--class", dest="eq_class", choices=("cce", "ce"), default="cce")
    lp.add_argument("--objective", choices=("welfare", "revenue"), default="welfare")
    lp.add_argument("--direction", choices=("min", "max"), default="min")
    lp.add_argument("--no-overbid", action="store_true")
    lp.add_argument("--deviation-tie", choices=[x.value for x in DeviationPolicy], default="deviator-wins")

    s = sub.add_parser("simulate", help="no-regret dynamics on a bid grid")
    s.add_argument("--values", type=_floats, required=True)
    s.add_argument("--grid", type=int, required=True)
    s.add_argument("--algo", default="regret-matching",
                   choices=("regret-matching", "rm", "multiplicative-weights", "mw"))
    s.add_argument("--rounds", type=int, default=10_000)
    s.add_argument("--seed", type=int, help="default: $AUCTEQ_SEED or a fixed constant")
    s.add_argument("--rate", type=float)
    s.add_argument("--no-overbid", action="store_true")

    r = sub.add_parser("reduce", help="collapse an n-player equilibrium to two players")
    r.add_argument("--input", required=True)

    rep = sub.add_parser("report", help="run the acceptance suite")
    rep.add_argument("--criteria", type=_ints, help="comma-separated subset, e.g. 1,2,5")

    cd = sub.add_parser("cdf", help="sample a price CDF as CSV")
    src = cd.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CDF JSON file")
    src.add_argument("--envelope", type=_floats, metavar="A,B,V")
    src.add_argument("--reciprocal", type=_floats, metavar="A,B")
    cd.add_argument("--samples", type=int, default=101)
    return p


# ---------------------------------------------------------------- commands

def _emit(args, payload, extra: dict[str, str] | None = None) -> None:
    text = dumps(payload)
    sys.stdout.write(text)
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.json").write_text(text)
        for name, body in (extra or {}).items():
            (out / name).write_text(body)


def cmd_verify(args) -> int:
    instance, eq = loads_equilibrium(_read(args.input))
    check = verify_cce if args.mode == "cce" else verify_ce
    report = check(instance, eq, args.tol, DeviationPolicy(args.tie))
    payload = {"input_sha256": hashlib.sha256(Path(args.input).read_bytes()).hexdigest(),
               **report.to_dict()}
    _emit(args, payload)
    return EXIT_OK if report.passed else EXIT_FAIL


def _continuous_payload(ce, grid: int | None) -> dict:
    payload = {"construction": ce.to_dict(), "summary": ce.summary().to_dict(),
               "deviation_gains": list(ce.deviation_gains())}
    if grid is not None:
        eq = discretize(ce, grid)
        report = verify_cce(ce.instance, eq, 0.0, DeviationPolicy.DEVIATOR_WINS)
        payload["discretized"] = {
            "grid": grid,
            "equilibrium": equilibrium_to_dict(ce.instance, eq),
            "summary": summarize(ce.instance, eq).to_dict(),
            "max_regret": report.max_regret,
        }
    return payload


def cmd_construct(args) -> int:
    if args.which == "table1":
        instance, eq = construct_table1(args.eps)
    elif args.which == "nash-mixture":
        if len(args.values) != 2:
            raise InvalidInputError("--values needs exactly two numbers")
        instance, eq = construct_pure_nash_mixture(*args.values, args.prices)
    else:
        if args.which == "worst-welfare":
            ce = construct_worst_welfare(args.alpha)
        elif args.which == "case1-welfare":
            ce = construct_case1_welfare(args.alpha)
        else:
            ce = construct_symmetric_worst_revenue(args.n, args.value)
        _emit(args, _continuous_payload(ce, args.grid))
        return EXIT_OK
    _emit(args, {"equilibrium": equilibrium_to_dict(instance, eq),
                 "summary": summarize(instance, eq).to_dict()})
    return EXIT_OK


def cmd_bound(args) -> int:
    w = args.which
    if w == "welfare-min":
        res = bounds.minimize_welfare()
        payload = {"alpha": res.params["alpha"], **res.to_dict()}
    elif w == "revenue-floor":
        payload = {"value": bounds.revenue_floor(), "n": 2, "v": 1.0}
    elif w == "symmetric":
        payload = {"value": bounds.symmetric_revenue_bound(args.n, args.value),
                   "alpha": bounds.symmetric_alpha(args.n, args.value), "n": args.n, "v": args.value}
    elif w == "gap":
        payload = {"value": bounds.gap_threshold(args.eps), "eps": args.eps}
    elif w == "u-bounds":
        payload = {"alpha": args.alpha, **bounds.u_bounds(args.alpha).to_dict()}
    else:
        payload = {"value": bounds.welfare_lb(args.alpha, args.beta, args.v),
                   "alpha": args.alpha, "beta": args.beta, "v": args.v}
    _emit(args, payload)
    return EXIT_OK


def cmd_lp(args) -> int:
    instance = AuctionInstance(args.values)
    grid = BidGrid.uniform(instance, args.grid, top=args.top)
    res = extremal_equilibrium(instance, grid, args.eq_class, args.objective, args.direction,
                               args.no_overbid, deviation_tie=args.deviation_tie)
    payload = res.to_dict()
    if res.equilibrium is not None:
        payload["equilibrium"] = equilibrium_to_dict(instance, res.equilibrium)
        payload["summary"] = summarize(instance, res.equilibrium).to_dict()
    _emit(args, payload)
    return EXIT_OK if res.solution.optimal and res.report.passed else EXIT_FAIL


def cmd_simulate(args) -> int:
    instance = AuctionInstance(args.values)
    grid = BidGrid.uniform(instance, args.grid)
    seed = default_seed() if args.seed is None else args.seed
    cfg = LearnerConfig(args.algo, args.rounds, seed, args.rate, args.no_overbid)
    res = run(instance, grid, cfg)
    trajectory = csv_text(("round", "avg_welfare", "avg_revenue"),
                          ((int(t), w, r) for t, w, r in res.trajectory))
    payload = {**res.to_dict(), "equilibrium": equilibrium_to_dict(instance, res.equilibrium)}
    _emit(args, payload, {"trajectory.csv": trajectory})
    return EXIT_OK


def cmd_reduce(args) -> int:
    instance, eq = loads_equilibrium(_read(args.input))
    red_inst, red = reduce_to_two(instance, eq)
    _emit(args, {"equilibrium": equilibrium_to_dict(red_inst, red),
                 "before": summarize(instance, eq).to_dict(),
                 "after": summarize(red_inst, red).to_dict()})
    return EXIT_OK


def cmd_report(args, argv: Sequence[str]) -> int:
    bundle = build_report(["aucteq", *argv], args.criteria)
    print(bundle.render())
    if args.output:
        js, csv_path = bundle.write(args.output)
        print(f"wrote {js} and {csv_path}")
    return EXIT_OK if bundle.passed else EXIT_FAIL


def cmd_cdf(args) -> int:
    if args.input:
        cdf = loads_cdf(_read(args.input))
    elif args.envelope:
        if len(args.envelope) != 3:
            raise InvalidInputError("--envelope needs A,B,V")
        cdf = min_envelope(*args.envelope)
    else:
        if len(args.reciprocal) != 2:
            raise InvalidInputError("--reciprocal needs A,B")
        cdf = reciprocal_cdf(*args.reciprocal)
    text = csv_text(("x", "F"), cdf.samples(args.samples))
    sys.stdout.write(text)
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "cdf.csv", ("x", "F"), cdf.samples(args.samples))
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "construct": cmd_construct,
    "bound": cmd_bound,
    "lp": cmd_lp,
    "simulate": cmd_simulate,
    "reduce": cmd_reduce,
    "cdf": cmd_cdf,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            return cmd_report(args, argv)
        return COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"aucteq: parse error at {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AuctEqError, ValueError) as exc:
        print(f"aucteq: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
