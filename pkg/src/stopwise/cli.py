"""Command-line front door.

Subcommands: solve, reservation, figure1, infinite, simulate, oracle,
serve. Exit codes: 0 success, 1 usage or input error, 2 numerical
failure (non-convergence or budget exhaustion). All outputs are
deterministic for a fixed configuration; CSV files carry a single
timestamp header line, everything after it is byte-reproducible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone

from .errors import (
    BudgetExceededError,
    DomainError,
    InfeasibleObservationError,
    NonConvergenceError,
    RangeError,
)
from .house_selling import (
    behavior_table,
    belief_key,
    commitment_levels,
    rejection_bands,
    reservation_level_infinite,
    reservation_levels_exp,
    reservation_levels_finite,
)
from .oracle_sim import brute_force_value, monte_carlo_eval
from .serialize import (
    bands_to_csv,
    bands_to_json,
    brute_force_report_to_json,
    house_model_from_json,
    house_model_to_json,
    mc_report_to_json,
    po_model_from_json,
    po_model_to_json,
    reservation_table_to_csv,
    reservation_table_to_json,
    stage_values_to_csv,
    value_report_to_json,
    _key_to_text,
)
from .stopping_core import value_iteration
from .utility import UtilitySpec
from .belief import BetaBernoulli, Bernoulli
from .house_selling import HouseModel


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _thread_default() -> int:
    env = os.environ.get("STOPWISE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_common(parser):
    parser.add_argument("--out", help="write output to this path instead of stdout")
    parser.add_argument(
        "--format", choices=("json", "csv"), default="json", help="output format"
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="bound worker parallelism (default: STOPWISE_THREADS or logical cores)",
    )


def _add_utility_flags(parser):
    parser.add_argument(
        "--utility",
        choices=("linear", "exponential", "log", "power"),
        default="linear",
    )
    parser.add_argument("--gamma", type=float, help="exponential risk aversion (< 0)")
    parser.add_argument("--exponent", type=float, help="power exponent in (0, 1)")
    parser.add_argument("--shift", type=float, default=0.0, help="domain shift")


def build_parser() -> _Parser:
    parser = _Parser(prog="stopwise", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("solve", parents=[], help="run the general solver on a model file")
    p.add_argument("--model", required=True, help="general model JSON file")
    p.add_argument("--N", type=int, required=True, help="horizon")
    p.add_argument("--node-budget", type=int, default=None)
    _add_utility_flags(p)
    _add_common(p)

    p = sub.add_parser("oracle", help="brute-force the optimal rule value")
    p.add_argument("--model", required=True, help="general or house model JSON file")
    p.add_argument("--N", type=int, default=None, help="horizon (defaults to the house model's)")
    p.add_argument("--path-budget", type=int, default=None)
    p.add_argument("--rule-budget", type=int, default=None)
    p.add_argument("--root-forced-continue", action="store_true")
    _add_utility_flags(p)
    _add_common(p)

    p = sub.add_parser("reservation", help="emit a reservation-level table")
    p.add_argument("--model", required=True, help="house model JSON file")
    p.add_argument(
        "--kind",
        choices=("clipped", "exp", "commitment", "behavior"),
        default="clipped",
    )
    _add_common(p)

    p = sub.add_parser("figure1", help="rejection-count bands over risk aversion")
    p.add_argument("--c", type=float, required=True, help="rejection cost")
    p.add_argument("--N", type=int, required=True, help="horizon")
    p.add_argument("--prior", default="uniform", help="'uniform' or 'beta:a:b'")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--gamma-lo", type=float, default=-4.0)
    p.add_argument("--gamma-hi", type=float, default=-1e-9)
    p.add_argument("--points", type=int, default=400)
    _add_common(p)

    p = sub.add_parser("infinite", help="stationary reservation level")
    p.add_argument("--model", required=True, help="house model JSON file (horizon null)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--cap", type=int, default=100_000)
    _add_common(p)

    p = sub.add_parser("simulate", help="seeded Monte Carlo of a policy")
    p.add_argument("--model", required=True, help="house or general model JSON file")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--N", type=int, default=None, help="horizon for general models")
    p.add_argument(
        "--kind",
        choices=("clipped", "exp", "commitment", "behavior"),
        default="behavior",
        help="which table drives the policy for house models",
    )
    _add_utility_flags(p)
    _add_common(p)

    p = sub.add_parser("serve", help="start the HTTP advisor service")
    p.add_argument("--bind", default="127.0.0.1:8000", help="host:port to listen on")
    p.add_argument(
        "--persist", default=None, help="JSON file to dump sessions into on shutdown"
    )

    return parser


def _utility_from_args(args) -> UtilitySpec:
    if args.utility == "exponential":
        if args.gamma is None:
            raise _UsageError("--gamma is required for exponential utility")
        return UtilitySpec("exponential", gamma=args.gamma)
    if args.utility == "power":
        if args.exponent is None:
            raise _UsageError("--exponent is required for power utility")
        return UtilitySpec("power", exponent=args.exponent, shift=args.shift)
    if args.utility == "log":
        return UtilitySpec("log", shift=args.shift)
    return UtilitySpec("linear")


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_json(obj, out: str | None) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True) + "\n", out)


def _timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _table_of_kind(model: HouseModel, kind: str):
    if kind == "clipped":
        return reservation_levels_finite(model)
    if kind == "exp":
        return reservation_levels_exp(model)
    if kind == "commitment":
        return commitment_levels(model)
    return behavior_table(model)


def _parse_prior(text: str) -> BetaBernoulli:
    if text == "uniform":
        return BetaBernoulli(1.0, 1.0)
    if text.startswith("beta:"):
        parts = text.split(":")
        if len(parts) == 3:
            return BetaBernoulli(float(parts[1]), float(parts[2]))
    raise _UsageError(f"unrecognized prior {text!r}; use 'uniform' or 'beta:a:b'")


def _cmd_solve(args) -> int:
    data = _load_json(args.model)
    model = po_model_from_json(data)
    utility = _utility_from_args(args)
    kwargs = {}
    if args.node_budget is not None:
        kwargs["node_budget"] = args.node_budget
    report, _policy = value_iteration(model, utility, args.N, **kwargs)
    if args.format == "csv":
        _emit(stage_values_to_csv(report, _timestamp()), args.out)
    else:
        _emit_json(value_report_to_json(report), args.out)
    return 0


def _cmd_oracle(args) -> int:
    data = _load_json(args.model)
    if "kernel" in data:
        model = po_model_from_json(data)
        if args.N is None:
            raise _UsageError("--N is required for general models")
        horizon = args.N
        utility = _utility_from_args(args)
    else:
        model = house_model_from_json(data)
        horizon = args.N if args.N is not None else model.horizon
        if horizon is None:
            raise _UsageError("oracle needs a finite horizon")
        utility = model.utility
    kwargs = {}
    if args.path_budget is not None:
        kwargs["path_budget"] = args.path_budget
    if args.rule_budget is not None:
        kwargs["rule_budget"] = args.rule_budget
    if args.root_forced_continue:
        kwargs["root_forced_continue"] = True
    report = brute_force_value(model, utility, horizon, **kwargs)
    _emit_json(brute_force_report_to_json(report, data), args.out)
    return 0


def _cmd_reservation(args) -> int:
    model = house_model_from_json(_load_json(args.model))
    table = _table_of_kind(model, args.kind)
    if args.format == "csv":
        _emit(reservation_table_to_csv(table, _timestamp()), args.out)
    else:
        _emit_json(reservation_table_to_json(table), args.out)
    return 0


def _cmd_figure1(args) -> int:
    model = HouseModel(
        offers=Bernoulli(),
        prior=_parse_prior(args.prior),
        cost=args.c,
        utility=UtilitySpec("exponential", gamma=-1.0),
        horizon=args.N,
    )
    bands = rejection_bands(
        model,
        tol=args.tol,
        scan_lo=args.gamma_lo,
        scan_hi=args.gamma_hi,
        scan_points=args.points,
    )
    if args.format == "csv":
        _emit(bands_to_csv(bands, _timestamp()), args.out)
    else:
        _emit_json(bands_to_json(bands), args.out)
    return 0


def _cmd_infinite(args) -> int:
    model = house_model_from_json(_load_json(args.model))
    table = reservation_level_infinite(model, tol=args.tol, cap=args.cap)
    level = table.level(0, model.prior)
    _emit_json(
        {
            "kind": table.kind,
            "tol": args.tol,
            "belief_key": _key_to_text(belief_key(model.prior)),
            "level": level,
        },
        args.out,
    )
    return 0


def _cmd_simulate(args) -> int:
    data = _load_json(args.model)
    if "kernel" in data:
        model = po_model_from_json(data)
        if args.N is None:
            raise _UsageError("--N is required for general models")
        utility = _utility_from_args(args)
        _report, policy = value_iteration(model, utility, args.N)
        estimate = monte_carlo_eval(
            model, policy, samples=args.samples, seed=args.seed, utility=utility
        )
        model_json = po_model_to_json(model)
    else:
        model = house_model_from_json(data)
        table = _table_of_kind(model, args.kind)
        estimate = monte_carlo_eval(model, table, samples=args.samples, seed=args.seed)
        model_json = house_model_to_json(model)
    _emit_json(mc_report_to_json(estimate, model_json), args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port_text = args.bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise _UsageError(f"--bind must be host:port, got {args.bind!r}")
    app = create_app(persist_path=args.persist)
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "oracle": _cmd_oracle,
    "reservation": _cmd_reservation,
    "figure1": _cmd_figure1,
    "infinite": _cmd_infinite,
    "simulate": _cmd_simulate,
    "serve": _cmd_serve,
}


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        sys.stderr.write(f"error: {err}\n")
        parser.print_usage(sys.stderr)
        return 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as err:
        sys.stderr.write(f"error: {err}\n")
        return 1
    except (NonConvergenceError, BudgetExceededError) as err:
        sys.stderr.write(f"numerical failure: {err}\n")
        return 2
    except (
        DomainError,
        RangeError,
        InfeasibleObservationError,
        ValueError,
        TypeError,
        KeyError,
        OSError,
        json.JSONDecodeError,
    ) as err:
        sys.stderr.write(f"error: {err}\n")
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
