#!/usr/bin/env python3
"""
Command Line Interface for the eliminax engine
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import BaseModel

from app.config import OutputFormat, get_config
from app.services.elimination_service import (
    PROPERTIES,
    EliminationService,
    check_lines,
    eliminate_lines,
    example_lines,
    order_independence_lines,
    replay_lines,
)
from app.services.symbolic_service import StageMismatchError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INPUT = 2

COMMANDS = ("eliminate", "compare", "order-independence", "example", "check")


@dataclass
class CliConfig:
    """One parsed invocation"""
    command: str
    operators: List[str] = field(default_factory=list)
    beliefs: Optional[str] = None
    game_path: Optional[str] = None
    cap: Optional[str] = None
    trials: Optional[int] = None
    seed: Optional[int] = None
    output_format: OutputFormat = OutputFormat.TEXT
    example: Optional[str] = None
    upto: Optional[str] = None
    list_examples: bool = False
    expect_single: bool = False
    expect_coincide: bool = False
    properties: List[str] = field(default_factory=lambda: list(PROPERTIES))

    @property
    def needs_game(self) -> bool:
        return self.command != "example"

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        operators = []
        if getattr(args, "op", None):
            operators = [args.op]
        elif getattr(args, "ops", None):
            operators = [token.strip() for token in args.ops.split(",") if token.strip()]
        return cls(
            command=args.command,
            operators=operators,
            beliefs=getattr(args, "beliefs", None),
            game_path=getattr(args, "game", None),
            cap=getattr(args, "cap", None),
            trials=getattr(args, "trials", None),
            seed=getattr(args, "seed", None),
            output_format=OutputFormat(args.format) if args.format else get_config().engine.output_format,
            example=getattr(args, "name", None),
            upto=getattr(args, "upto", None),
            list_examples=getattr(args, "list", False),
            expect_single=getattr(args, "expect_single", False),
            expect_coincide=getattr(args, "expect_coincide", False),
            properties=list(getattr(args, "properties", None) or PROPERTIES),
        )


@dataclass
class CliResult:
    status: int
    stdout: List[str] = field(default_factory=list)
    stderr: List[str] = field(default_factory=list)


def _jsonl(records: Sequence[BaseModel]) -> List[str]:
    return [record.model_dump_json() for record in records]


def _emit(config: CliConfig, text: List[str], records: Sequence[BaseModel]) -> List[str]:
    return _jsonl(records) if config.output_format == OutputFormat.JSONL else text


def _execute(config: CliConfig, service: EliminationService, game_text: Optional[str]) -> CliResult:
    if config.command == "example":
        if config.list_examples:
            records = service.examples()
            return CliResult(EXIT_OK, _emit(config, example_lines(records), records))
        if not config.example:
            raise ValueError("example needs --name or --list")
        response = service.replay_example(config.example, config.upto)
        records = [*response.stages, response.verdict, *response.relaxations, *response.checks]
        status = EXIT_OK if response.validated else EXIT_VALIDATION
        return CliResult(status, _emit(config, replay_lines(response), records))

    game = service.load_game(game_text)
    if config.command == "compare":
        if len(config.operators) < 2:
            raise ValueError("compare needs at least two operators in --ops")
        response = service.compare(game, config.operators, config.beliefs, config.cap)
        failed = config.expect_coincide and not response.comparison.coincide
        return CliResult(
            EXIT_VALIDATION if failed else EXIT_OK, _emit(config, response.lines, [response.comparison])
        )

    if len(config.operators) != 1:
        raise ValueError(f"{config.command} needs exactly one operator in --op")
    operator = config.operators[0]

    if config.command == "eliminate":
        response = service.eliminate(game, operator, config.beliefs, config.cap)
        return CliResult(EXIT_OK, _emit(config, eliminate_lines(response), [*response.stages, response.verdict]))

    if config.command == "order-independence":
        response = service.order_independence(
            game, operator, config.beliefs, config.trials, config.seed, config.cap
        )
        failed = config.expect_single and not response.summary.singleton
        return CliResult(
            EXIT_VALIDATION if failed else EXIT_OK,
            _emit(config, order_independence_lines(response), [*response.outcomes, response.summary]),
        )

    if config.command == "check":
        response = service.check(game, operator, config.beliefs, config.properties, config.cap)
        return CliResult(
            EXIT_OK if response.passed else EXIT_VALIDATION,
            _emit(config, check_lines(response), response.properties),
        )

    raise ValueError(f"unknown command '{config.command}' (valid: {', '.join(COMMANDS)})")


def run(config: CliConfig, game_text: Optional[str] = None, service: Optional[EliminationService] = None) -> CliResult:
    """
    Run one command on the game text.

    Returns:
        CliResult with exit status 0 (success), 1 (validation failure) or 2 (input error)
    """
    service = service or EliminationService()
    if config.needs_game and game_text is None:
        return CliResult(EXIT_INPUT, stderr=[f"❌ {config.command} needs --game"])
    try:
        return _execute(config, service, game_text)
    except StageMismatchError as e:
        return CliResult(EXIT_VALIDATION, stderr=[f"❌ {e}"])
    except ValueError as e:
        return CliResult(EXIT_INPUT, stderr=[f"❌ {e}"])


def _add_common(parser: argparse.ArgumentParser, operator_flag: str):
    if operator_flag == "op":
        parser.add_argument("--op", required=True, help="Operator token (gs, gsbar, ls, lsbar, mgs, ..., lrbar)")
    else:
        parser.add_argument("--ops", required=True, help="Comma separated operator tokens")
    parser.add_argument("--game", required=True, help="Path to the game file")
    parser.add_argument(
        "--beliefs", choices=["point", "correlated", "independent"],
        help="Belief structure for rationalizability operators"
    )
    parser.add_argument("--cap", help="Ordinal cap (12, w, w+3, w*2); default from ELIMINAX_CAP or w*2")


def build_parser() -> argparse.ArgumentParser:
    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=[f.value for f in OutputFormat], help="Output format")

    parser = argparse.ArgumentParser(description="Exact iterated elimination of strategies")
    parser.add_argument("--env-file", help="Path to a .env file")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Eliminate command
    eliminate_parser = subparsers.add_parser("eliminate", parents=[output], help="Iterate an operator and print its trace")
    _add_common(eliminate_parser, "op")

    # Compare command
    compare_parser = subparsers.add_parser("compare", parents=[output], help="Compare operators stage by stage")
    _add_common(compare_parser, "ops")
    compare_parser.add_argument("--expect-coincide", action="store_true", help="Exit 1 when the operators diverge")

    # Order-independence command
    order_parser = subparsers.add_parser("order-independence", parents=[output], help="Outcomes of sampled relaxations")
    _add_common(order_parser, "op")
    order_parser.add_argument("--trials", type=int, help="Number of sampled relaxations")
    order_parser.add_argument("--seed", type=int, help="Experiment seed (required when trials > 0)")
    order_parser.add_argument("--expect-single", action="store_true", help="Exit 1 unless there is one outcome")

    # Example command
    example_parser = subparsers.add_parser("example", parents=[output], help="Replay a symbolic example")
    example_parser.add_argument("--name", help="Example name")
    example_parser.add_argument("--upto", help="Validate stages through this ordinal (e.g. 5, w+2)")
    example_parser.add_argument("--list", action="store_true", help="List the examples")

    # Check command
    check_parser = subparsers.add_parser("check", parents=[output], help="Evaluate properties B, C, D, E, MD along a trace")
    _add_common(check_parser, "op")
    check_parser.add_argument(
        "--properties", nargs="+", choices=list(PROPERTIES), help="Properties to evaluate (default: all)"
    )

    return parser


def main(argv: Optional[Sequence[str]] = None):
    """Main CLI function"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return

    engine_config = get_config(args.env_file, reload=bool(args.env_file))
    logging.basicConfig(level=getattr(logging, engine_config.engine.log_level.value), stream=sys.stderr)

    config = CliConfig.from_args(args)
    game_text = None
    if config.needs_game:
        try:
            game_text = Path(config.game_path).read_text(encoding="utf-8")
        except OSError as e:
            print(f"❌ cannot read game file {config.game_path}: {e.strerror}", file=sys.stderr)
            sys.exit(EXIT_INPUT)

    result = run(config, game_text, EliminationService(engine_config))
    for line in result.stdout:
        print(line)
    for line in result.stderr:
        print(line, file=sys.stderr)
    sys.exit(result.status)


if __name__ == "__main__":
    main()
