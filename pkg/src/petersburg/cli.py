"""Command-line front end.

Every command prints one JSON record to stdout::

    {"command": ..., "parameters": {...}, "result": {...},
     "provenance": {"version": ..., "seed": ..., "config": {...}}}

``nmax-curve`` additionally writes CSV to ``--out``.  Exit codes: 0 success,
2 usage, 3 domain precondition, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any

from . import __version__
from .criteria import CriterionId, EvalConfig, eval_criterion
from .errors import DiagnosticError, DomainError
from .model import Game
from .montecarlo import SeededStream, limit_order_grid, simulate_ensemble_growth, simulate_time_average
from .solver import breakeven_price, default_grid, nmax_curve, resolves_matrix

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

SEED_ENV = "PETERSBURG_SEED"
CSV_HEADER = "p0_over_w,nmax_real,nmax_int"


@dataclass
class OutputRecord:
    command: str
    parameters: dict[str, Any]
    result: Any
    provenance: dict[str, Any]
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        out = {
            "command": self.command,
            "parameters": self.parameters,
            "result": self.result,
            "provenance": self.provenance,
        }
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> OutputRecord:
        data = json.loads(text)
        return cls(data["command"], data["parameters"], data["result"], data["provenance"], data.get("warnings", []))


def format_number(x) -> str:
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".17g")


def curve_csv(points) -> str:
    lines = [CSV_HEADER]
    lines += [f"{format_number(p.p0_over_w)},{format_number(p.nmax_real)},{p.nmax_int}" for p in points]
    return "\n".join(lines) + "\n"


# -- library adapters (also used by the golden tests) ------------------------

def evaluate_payload(criterion: CriterionId, game: Game, W: float, P: float, config: EvalConfig) -> dict:
    value = eval_criterion(criterion, game, W, P, config)
    payload = value.to_dict()
    payload["recommendation"] = value.recommendation(config).value
    return payload


def table2_payload(W: float, config: EvalConfig) -> dict:
    rows = resolves_matrix(W, config)
    return {
        "rows": [[report.to_dict() for report in row] for row in rows],
        "resolved": {
            row[0].criterion.value: [r.game.value for r in row if r.resolves] for row in rows
        },
    }


def breakeven_payload(criterion: CriterionId, game: Game, W: float, config: EvalConfig) -> dict:
    return {"criterion": criterion.value, "game": game.value, "price": breakeven_price(criterion, game, W, config)}


# -- argument parsing ----------------------------------------------------------

def _positive(text: str) -> float:
    x = _real(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def _real(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return x


def _count(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text}") from None
    return value


def _count_list(text: str) -> list[int]:
    return [_count(part) for part in text.split(",") if part.strip()]


_CRITERIA = [c.value for c in CriterionId]
_GAMES = [g.value for g in Game]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=_positive, default=None, help="tail tolerance for series evaluation")
    common.add_argument("--n-cap", type=int, default=None, help="waiting-time cap for enumerations (<= 60)")

    parser = argparse.ArgumentParser(
        prog="petersburg",
        description="Decision criteria and Monte Carlo checks for St. Petersburg-type lotteries.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", parents=[common], help="evaluate one criterion")
    p.add_argument("--criterion", required=True, choices=_CRITERIA)
    p.add_argument("--game", required=True, choices=_GAMES)
    p.add_argument("--wealth", required=True, type=_real)
    p.add_argument("--price", default=0.0, type=_real)

    p = sub.add_parser("table2", parents=[common], help="which criteria resolve which games")
    p.add_argument("--wealth", default=1.0, type=_real)

    p = sub.add_parser("breakeven", parents=[common], help="break-even price for criterion ii or iii")
    p.add_argument("--criterion", required=True, choices=["ii", "iii"])
    p.add_argument("--game", required=True, choices=_GAMES)
    p.add_argument("--wealth", required=True, type=_real)

    p = sub.add_parser("nmax-curve", parents=[common], help="tosses needed to balance a price in game B (CSV)")
    p.add_argument("--wealth", default=1.0, type=_real)
    p.add_argument("--points", default=512, type=int)
    p.add_argument("--max-ratio", default=0.999, type=_real)
    p.add_argument("--ratio", action="append", type=_real, default=[], help="extra P0/W ratio to include")
    p.add_argument("--out", default=None, help="CSV destination (stdout if omitted)")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo time and ensemble averages")
    p.add_argument("--game", required=True, choices=_GAMES)
    p.add_argument("--wealth", required=True, type=_real)
    p.add_argument("--price", default=0.0, type=_real)
    p.add_argument("--rounds", default=100000, type=_count)
    p.add_argument("--seed", default=None, type=_count)
    p.add_argument("--ensemble", default=None, type=_count, metavar="N")
    p.add_argument("--grid", action="store_true", help="run the N x T limit-order grid")
    p.add_argument("--grid-n", default="1,16,256,4096", type=_count_list)
    p.add_argument("--grid-t", default="1,16,256,4096", type=_count_list)
    return parser


def _config(args) -> EvalConfig:
    kwargs = {}
    if args.tolerance is not None:
        kwargs["tail_tolerance"] = args.tolerance
    if args.n_cap is not None:
        kwargs["n_cap"] = args.n_cap
    return EvalConfig(**kwargs)


def _seed(args, parser) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        parser.error(f"{SEED_ENV} must be an integer, got {env!r}")


def run(args, parser) -> tuple[OutputRecord, str | None]:
    """Execute a parsed command; returns the record and optional CSV text."""
    config = _config(args)
    provenance = {"version": __version__, "seed": None, "config": config.to_dict()}
    cmd = args.command

    if cmd == "evaluate":
        criterion, game = CriterionId(args.criterion), Game(args.game)
        params = {"criterion": args.criterion, "game": args.game, "wealth": args.wealth, "price": args.price}
        warnings = []
        if criterion is CriterionId.IV and args.price != 0:
            warnings.append("criterion iv ignores the ticket price")
        result = evaluate_payload(criterion, game, args.wealth, args.price, config)
        return OutputRecord(cmd, params, result, provenance, warnings), None

    if cmd == "table2":
        return OutputRecord(cmd, {"wealth": args.wealth}, table2_payload(args.wealth, config), provenance), None

    if cmd == "breakeven":
        criterion, game = CriterionId(args.criterion), Game(args.game)
        params = {"criterion": args.criterion, "game": args.game, "wealth": args.wealth}
        return OutputRecord(cmd, params, breakeven_payload(criterion, game, args.wealth, config), provenance), None

    if cmd == "nmax-curve":
        grid = sorted(set(default_grid(args.points, args.max_ratio)) | set(args.ratio))
        points = nmax_curve(args.wealth, grid)
        params = {"wealth": args.wealth, "points": args.points, "max_ratio": args.max_ratio,
                  "ratio": list(args.ratio), "out": args.out}
        result = {"rows": len(points), "header": CSV_HEADER.split(","), "out": args.out}
        return OutputRecord(cmd, params, result, provenance), curve_csv(points)

    # simulate
    game = Game(args.game)
    seed = _seed(args, parser)
    provenance["seed"] = seed
    stream = SeededStream(seed)
    params = {"game": args.game, "wealth": args.wealth, "price": args.price, "rounds": args.rounds,
              "ensemble": args.ensemble, "grid": args.grid}
    result: dict[str, Any] = {
        "trajectory": simulate_time_average(game, args.wealth, args.price, args.rounds, stream.substream(0)).to_dict(),
        "criterion_ii": evaluate_payload(CriterionId.II, game, args.wealth, args.price, config),
    }
    if args.ensemble is not None:
        result["ensemble"] = simulate_ensemble_growth(
            game, args.wealth, args.price, args.ensemble, stream.substream(1)
        ).to_dict()
    if args.grid:
        params["grid_n"], params["grid_t"] = args.grid_n, args.grid_t
        result["grid"] = limit_order_grid(
            game, args.wealth, args.price, args.grid_n, args.grid_t, stream.substream(2)
        ).to_dict()
    return OutputRecord(cmd, params, result, provenance), None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        record, csv_text = run(args, parser)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (DomainError, DiagnosticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    for warning in record.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if csv_text is not None:
        if args.out is None:
            sys.stdout.write(csv_text)
            return EXIT_OK
        try:
            with open(args.out, "w", newline="\n") as fh:
                fh.write(csv_text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    print(record.to_json())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
