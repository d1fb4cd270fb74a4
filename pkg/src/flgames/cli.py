"""Command line front end.

Instances travel as JSON files; every number crossing the interface is
an exact string (decimal or p/q), never binary floating point.  Reports
carry each value twice: the exact rational, and a readable decimal
approximation (12 places, truncated) in a sibling *_decimal field.

Exit codes: 0 success, 2 parse failure, 3 enumeration guard exceeded,
4 mechanism/space mismatch.  The environment variable FLG_GUARD
overrides the default enumeration guard of 10^7.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .core import (
    Deterministic,
    Instance,
    Line,
    Outcome,
    line_instance,
    metric_instance,
    outcome_cost,
    parse_scalar,
)
from .instances import RandomFamily
from .mechanisms import MechanismMismatch, parse_mechanism
from .solver import DEFAULT_GUARD, GuardExceeded, optimal, ratio_of
from .verify import (
    DEFAULT_GRID_POINTS,
    REPLAY_CONSTRUCTIONS,
    find_group_deviation,
    iter_sweep,
    joint_misreport_count,
    misreport_options,
    misreport_set,
    replay_lower_bound,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_GUARD = 3
EXIT_MISMATCH = 4


class InstanceParseError(ValueError):
    """Malformed instance file or malformed exact number."""


# ---------------------------------------------------------------------------
# exact serialization


def decimal_string(value: Fraction, places: int = 12) -> str:
    """Decimal rendering of an exact rational, truncated toward zero."""
    sign = "-" if value < 0 else ""
    whole, rem = divmod(abs(value.numerator), value.denominator)
    if rem == 0:
        return f"{sign}{whole}"
    digits = rem * 10**places // value.denominator
    frac = str(digits).rjust(places, "0").rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


def put_scalar(payload: dict, key: str, value) -> None:
    """Store a ratio or cost under key plus key_decimal."""
    if isinstance(value, Fraction):
        payload[key] = str(value)
        payload[key + "_decimal"] = decimal_string(value)
    else:
        payload[key] = "inf"
        payload[key + "_decimal"] = "inf"


def _parse_exact(value, what: str) -> Fraction:
    if isinstance(value, float):
        raise InstanceParseError(
            f"{what}: floats are not exact, write the value as a string"
        )
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InstanceParseError(f"{what}: expected an exact number, got {value!r}")
    try:
        return parse_scalar(value)
    except ValueError as exc:
        raise InstanceParseError(f"{what}: {exc}") from None


def _parse_index(value, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise InstanceParseError(f"{what}: expected an integer index, got {value!r}")
    return value


def instance_from_json(obj) -> Instance:
    """Parse the instance file schema; unknown fields are rejected."""
    if not isinstance(obj, dict):
        raise InstanceParseError("instance file must hold a JSON object")
    space = obj.get("space")
    if space == "line":
        required = {"space", "agents", "candidates", "k"}
    elif space == "metric":
        required = {"space", "points", "matrix", "agents", "candidates", "k"}
    else:
        raise InstanceParseError(f'space must be "line" or "metric", got {space!r}')
    if set(obj) != required:
        unknown = sorted(set(obj) - required)
        missing = sorted(required - set(obj))
        detail = []
        if unknown:
            detail.append(f"unknown fields {unknown}")
        if missing:
            detail.append(f"missing fields {missing}")
        raise InstanceParseError("; ".join(detail))
    k = _parse_index(obj["k"], "k")
    if not isinstance(obj["agents"], list) or not isinstance(obj["candidates"], list):
        raise InstanceParseError("agents and candidates must be arrays")
    try:
        if space == "line":
            agents = [_parse_exact(x, f"agents[{i}]") for i, x in enumerate(obj["agents"])]
            candidates = [
                _parse_exact(y, f"candidates[{i}]") for i, y in enumerate(obj["candidates"])
            ]
            return line_instance(agents, candidates, k)
        p = _parse_index(obj["points"], "points")
        matrix = obj["matrix"]
        if not isinstance(matrix, list) or len(matrix) != p or any(
            not isinstance(row, list) or len(row) != p for row in matrix
        ):
            raise InstanceParseError(f"matrix must be a {p}x{p} array")
        rows = [
            [_parse_exact(entry, f"matrix[{i}][{j}]") for j, entry in enumerate(row)]
            for i, row in enumerate(matrix)
        ]
        agents = [_parse_index(x, f"agents[{i}]") for i, x in enumerate(obj["agents"])]
        candidates = [
            _parse_index(y, f"candidates[{i}]") for i, y in enumerate(obj["candidates"])
        ]
        return metric_instance(rows, agents, candidates, k)
    except ValueError as exc:
        if isinstance(exc, InstanceParseError):
            raise
        raise InstanceParseError(str(exc)) from None


def instance_to_json(instance: Instance) -> dict:
    if isinstance(instance.space, Line):
        return {
            "space": "line",
            "agents": [str(x) for x in instance.agents],
            "candidates": [str(y) for y in instance.candidates],
            "k": instance.k,
        }
    return {
        "space": "metric",
        "points": instance.space.size,
        "matrix": [[str(d) for d in row] for row in instance.space.matrix],
        "agents": list(instance.agents),
        "candidates": list(instance.candidates),
        "k": instance.k,
    }


def load_instance(path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as handle:
            obj = json.load(handle)
    except OSError as exc:
        raise InstanceParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"invalid JSON in {path}: {exc}") from None
    return instance_from_json(obj)


def _locations(instance: Instance, selection: tuple[int, ...]):
    if isinstance(instance.space, Line):
        return [str(instance.candidate(j)) for j in selection]
    return [instance.candidate(j) for j in selection]


def outcome_json(instance: Instance, outcome: Outcome) -> dict:
    if isinstance(outcome, Deterministic):
        return {
            "type": "deterministic",
            "selection": list(outcome.selection),
            "locations": _locations(instance, outcome.selection),
        }
    support = []
    for det, prob in outcome.support:
        entry = {
            "selection": list(det.selection),
            "locations": _locations(instance, det.selection),
        }
        put_scalar(entry, "probability", prob)
        support.append(entry)
    return {"type": "randomized", "support": support}


def _misreport_json(instance: Instance, report):
    return str(report) if isinstance(instance.space, Line) else report


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args, guard: int) -> int:
    instance = load_instance(args.instance)
    result = optimal(instance, args.objective, guard)
    payload = {
        "command": "solve",
        "objective": args.objective,
        "n": instance.n,
        "m": instance.m,
        "k": instance.k,
        "optimal_selections": [list(det.selection) for det in result.all_best],
    }
    put_scalar(payload, "optimal_value", result.value)
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_run(args, guard: int) -> int:
    instance = load_instance(args.instance)
    mechanism = parse_mechanism(args.mechanism)
    outcome = mechanism.apply(instance)
    payload = {
        "command": "run",
        "mechanism": mechanism.label(),
        "outcome": outcome_json(instance, outcome),
    }
    for objective in ("sc", "mc"):
        cost = outcome_cost(instance, outcome, objective)
        opt = optimal(instance, objective, guard).value
        put_scalar(payload, f"cost_{objective}", cost)
        put_scalar(payload, f"optimal_{objective}", opt)
        put_scalar(payload, f"ratio_{objective}", ratio_of(cost, opt))
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_verify(args, guard: int) -> int:
    instance = load_instance(args.instance)
    mechanism = parse_mechanism(args.mechanism)
    reports = misreport_set(instance, args.grid)
    witness = find_group_deviation(
        instance, mechanism, misreports=reports, max_coalition=args.group_max, guard=guard
    )
    if witness is None:
        payload = {
            "command": "verify",
            "mechanism": mechanism.label(),
            "result": "none",
            "searched": {
                "agents": instance.n,
                "grid_points": reports.grid_points,
                "misreports_per_agent": [
                    len(opts) for opts in misreport_options(instance, reports)
                ],
                "max_coalition": args.group_max,
                "joint_misreports": joint_misreport_count(
                    instance, reports, args.group_max
                ),
            },
        }
    else:
        costs = []
        for agent, before, after in zip(
            witness.coalition, witness.costs_before, witness.costs_after
        ):
            entry = {"agent": agent}
            put_scalar(entry, "before", before)
            put_scalar(entry, "after", after)
            costs.append(entry)
        payload = {
            "command": "verify",
            "mechanism": mechanism.label(),
            "result": "witness",
            "coalition": list(witness.coalition),
            "misreports": [_misreport_json(instance, r) for r in witness.misreports],
            "outcome_before": outcome_json(instance, witness.outcome_before),
            "outcome_after": outcome_json(instance, witness.outcome_after),
            "costs": costs,
        }
    print(json.dumps(payload, indent=2))
    return EXIT_OK


def cmd_sweep(args, guard: int) -> int:
    family = RandomFamily(
        kind=args.family,
        n=args.n,
        m=args.m,
        k=args.k,
        seed=args.seed,
        low=_parse_exact(args.low, "--low"),
        high=_parse_exact(args.high, "--high"),
    )
    mechanism = parse_mechanism(args.mechanism)
    lines = ["index,n,m,k,mech_cost,opt_cost,ratio"]
    worst = None
    for row in iter_sweep(family, mechanism, args.objective, args.count, guard):
        ratio_text = str(row.ratio) if isinstance(row.ratio, Fraction) else "inf"
        lines.append(
            f"{row.index},{row.instance.n},{row.instance.m},{row.instance.k},"
            f"{row.mechanism_cost},{row.optimal_cost},{ratio_text}"
        )
        if worst is None or row.ratio > worst:
            worst = row.ratio
    if worst is None:
        footer = "max,,,,,,n/a"
    else:
        footer = f"max,,,,,,{worst if isinstance(worst, Fraction) else 'inf'}"
    lines.append(footer)
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_replay(args, guard: int) -> int:
    mechanism = parse_mechanism(args.mechanism)
    report = replay_lower_bound(
        args.construction,
        mechanism,
        eps=_parse_exact(args.epsilon, "--epsilon"),
        far=_parse_exact(args.L, "--L"),
    )
    payload = {
        "command": "replay",
        "construction": report.construction,
        "mechanism": report.mechanism,
    }
    put_scalar(payload, "epsilon", report.eps)
    if report.far is not None:
        put_scalar(payload, "far", report.far)
    put_scalar(payload, "bound", report.bound)
    payload["outcome_base"] = outcome_json(report.instance_base, report.outcome_base)
    payload["outcome_shifted"] = outcome_json(report.instance_shifted, report.outcome_shifted)
    put_scalar(payload, "ratio_base", report.ratio_base)
    put_scalar(payload, "ratio_shifted", report.ratio_shifted)
    payload["beats_bound"] = report.beats_bound
    manipulation = {"agent": report.manipulator, "misreport": str(report.misreport)}
    put_scalar(manipulation, "cost_truthful", report.cost_truthful)
    put_scalar(manipulation, "cost_misreport", report.cost_misreport)
    put_scalar(manipulation, "margin", report.margin)
    payload["manipulation"] = manipulation
    payload["sp_violation"] = report.sp_violation
    if report.far_missing_base is not None:
        put_scalar(payload, "far_missing_base", report.far_missing_base)
        put_scalar(payload, "far_missing_shifted", report.far_missing_shifted)
    print(json.dumps(payload, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flgames",
        description="Facility location games with candidate locations: "
        "exact mechanisms, optima, and falsification.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    solve = sub.add_parser("solve", help="exact optimum of an instance file")
    solve.add_argument("instance")
    solve.add_argument("--objective", choices=("sc", "mc"), required=True)
    solve.set_defaults(handler=cmd_solve)

    run = sub.add_parser("run", help="run a mechanism on an instance file")
    run.add_argument("instance")
    run.add_argument("--mechanism", required=True)
    run.set_defaults(handler=cmd_run)

    verify = sub.add_parser("verify", help="search for profitable misreports")
    verify.add_argument("instance")
    verify.add_argument("--mechanism", required=True)
    verify.add_argument("--group-max", type=int, default=1)
    verify.add_argument("--grid", type=int, default=DEFAULT_GRID_POINTS)
    verify.set_defaults(handler=cmd_verify)

    sweep = sub.add_parser("sweep", help="ratio sweep over a random family (CSV)")
    sweep.add_argument("--family", choices=("line-uniform", "metric-closure"), required=True)
    sweep.add_argument("--n", type=int, required=True)
    sweep.add_argument("--m", type=int, required=True)
    sweep.add_argument("--k", type=int, default=1)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--low", default="0")
    sweep.add_argument("--high", default="1")
    sweep.add_argument("--mechanism", required=True)
    sweep.add_argument("--objective", choices=("sc", "mc"), required=True)
    sweep.add_argument("--count", type=int, required=True)
    sweep.add_argument("--out")
    sweep.set_defaults(handler=cmd_sweep)

    replay = sub.add_parser("replay", help="run a lower-bound construction")
    replay.add_argument("--construction", choices=REPLAY_CONSTRUCTIONS, required=True)
    replay.add_argument("--mechanism", required=True)
    replay.add_argument("--epsilon", required=True)
    replay.add_argument("--L", default="1000")
    replay.set_defaults(handler=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_PARSE
    guard = DEFAULT_GUARD
    raw_guard = os.environ.get("FLG_GUARD")
    if raw_guard:
        try:
            guard = int(raw_guard)
        except ValueError:
            print(f"FLG_GUARD must be an integer, got {raw_guard!r}", file=sys.stderr)
            return EXIT_PARSE
    try:
        return args.handler(args, guard)
    except InstanceParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except GuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except MechanismMismatch as exc:
        print(f"mechanism mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
