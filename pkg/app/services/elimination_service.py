"""
Elimination service shared by the command line and the HTTP API.

Parses games, wires operators, runs the lattice engine and turns its results
into the pydantic records of ``app.models`` together with their text rendering.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union

from ..config import EliminaxConfig, get_config
from ..models import (
    CheckRecord,
    CheckResponse,
    CompareResponse,
    ComparisonRecord,
    EliminateResponse,
    ExampleRecord,
    OperatorInfo,
    OrderIndependenceResponse,
    OutcomeRecord,
    PropertyRecord,
    RelaxationRecord,
    ReplayResponse,
    StageRecord,
    TrialSummaryRecord,
    VerdictRecord,
)
from .game_service import FiniteGame, parse_game, render_rational
from .lattice_service import (
    CycleDetected,
    FixpointAt,
    IterationTrace,
    Ordinal,
    Verdict,
    compare_operators,
    iterate,
    order_independence_trial,
    parse_ordinal,
)
from .operator_service import (
    GameOperator,
    OperatorName,
    check_property_B,
    make_operator,
    property_report,
)
from .symbolic_service import get_example, list_examples, replay

logger = logging.getLogger(__name__)

PROPERTIES = ("B", "C", "D", "E", "MD")


@dataclass(frozen=True)
class ReplayWindow:
    """How far an example replay validates its closed-form stages."""
    finite_upto: Optional[int] = None
    past_limit: Optional[int] = None

    @classmethod
    def upto(cls, text: Union[None, str, int, Ordinal]) -> "ReplayWindow":
        """
        Window validating stages through ``text``.

        A finite ordinal n validates stages 0..max(n, 2) only. ``w+k`` also
        validates the w-stage and k stages past it; ``w`` counts as ``w+1``
        since the w-stage is only checked together with its successor.
        """
        if text is None:
            return cls()
        ordinal = parse_ordinal(text)
        if ordinal.omega == 0:
            return cls(finite_upto=max(ordinal.finite, 2), past_limit=0)
        if ordinal.omega > 1:
            raise ValueError(f"replays stop below w*2, got {ordinal}")
        return cls(past_limit=max(ordinal.finite, 1))


def verdict_record(operator: str, verdict: Verdict) -> VerdictRecord:
    if isinstance(verdict, FixpointAt):
        return VerdictRecord(operator=operator, kind="fixpoint", ordinal=str(verdict.ordinal), text=verdict.render())
    if isinstance(verdict, CycleDetected):
        return VerdictRecord(
            operator=operator, kind="cycle", ordinal=str(verdict.first_stage),
            period=str(verdict.period), text=verdict.render(),
        )
    return VerdictRecord(operator=operator, kind="cap", ordinal=str(verdict.ordinal), text=verdict.render())


def stage_records(trace: IterationTrace, render) -> List[StageRecord]:
    return [
        StageRecord(operator=trace.operator, ordinal=str(ordinal), restriction=render(element))
        for ordinal, element in trace.shown_stages()
    ]


def stage_lines(stages: Iterable[StageRecord]) -> List[str]:
    return [f"stage {stage.ordinal} : {stage.restriction}" for stage in stages]


class EliminationService:
    """Runs elimination requests against the configured engine."""

    def __init__(self, config: Optional[EliminaxConfig] = None):
        self.config = config or get_config()

    def load_game(self, text: str) -> FiniteGame:
        return parse_game(text)

    def build_operator(self, game: FiniteGame, token: str, beliefs: Optional[str] = None) -> GameOperator:
        """Beliefs are handed to rationalizability operators only."""
        name = OperatorName.from_token(token)
        return make_operator(name, game, beliefs if name.rationalizability else None)

    def _cap(self, cap) -> Ordinal:
        return parse_ordinal(cap if cap is not None else self.config.engine.cap)

    def operators(self) -> List[OperatorInfo]:
        return [
            OperatorInfo(
                token=name.token,
                name=name.value,
                contracting=name.contracting,
                monotonic=name.monotonic,
                needs_beliefs=name.rationalizability,
            )
            for name in OperatorName
        ]

    def eliminate(self, game: FiniteGame, operator: str, beliefs: Optional[str] = None, cap=None) -> EliminateResponse:
        op = self.build_operator(game, operator, beliefs)
        trace = iterate(op, self._cap(cap), self.config.engine.max_finite_stages)
        return EliminateResponse(
            game=game.name,
            operator=op.label,
            stages=stage_records(trace, game.render_restriction),
            verdict=verdict_record(op.label, trace.verdict),
            closure=str(trace.closure) if trace.closure is not None else None,
            outcome=game.render_restriction(trace.outcome) if trace.outcome is not None else None,
        )

    def compare(
        self, game: FiniteGame, operators: Sequence[str], beliefs: Optional[str] = None, cap=None
    ) -> CompareResponse:
        ops = [self.build_operator(game, token, beliefs) for token in operators]
        report = compare_operators(ops, self._cap(cap), self.config.engine.max_finite_stages)
        record = ComparisonRecord(
            operators=list(report.operators),
            coincide=report.coincide,
            ordinal=str(report.ordinal),
            verdict=report.verdict.render() if report.verdict is not None else None,
            stages={} if report.coincide else {
                name: game.render_restriction(stage) for name, stage in zip(report.operators, report.stages)
            },
        )
        return CompareResponse(game=game.name, comparison=record, lines=report.render(game.render_restriction))

    def order_independence(
        self,
        game: FiniteGame,
        operator: str,
        beliefs: Optional[str] = None,
        trials: Optional[int] = None,
        seed: Optional[int] = None,
        cap=None,
    ) -> OrderIndependenceResponse:
        """
        Raises:
            ValueError: If trials are requested without a seed
            NotContractingError: If the operator is not contracting
        """
        trials = self.config.trials.trials if trials is None else trials
        seed = self.config.trials.seed if seed is None else seed
        if trials > 0 and seed is None:
            raise ValueError("a seed is required when trials > 0 (--seed or ELIMINAX_SEED)")
        op = self.build_operator(game, operator, beliefs)
        report = order_independence_trial(op, trials, seed or 0, self._cap(cap), self.config.trials.max_workers)
        outcomes = [
            OutcomeRecord(
                operator=report.operator,
                restriction=game.render_restriction(summary.restriction),
                count=summary.count,
                closures=[str(closure) for closure in summary.closures],
                omega_outcome=summary.omega_outcome,
            )
            for summary in report.outcomes
        ]
        summary = TrialSummaryRecord(
            operator=report.operator,
            trials=report.trials,
            seed=report.seed,
            distinct=len(report.outcomes),
            no_outcome=report.no_outcome,
            singleton=report.singleton,
            base_outcome=game.render_restriction(report.base_outcome) if report.base_outcome is not None else None,
            base_closure=str(report.base_closure) if report.base_closure is not None else None,
        )
        return OrderIndependenceResponse(game=game.name, summary=summary, outcomes=outcomes)

    def check(
        self,
        game: FiniteGame,
        operator: str,
        beliefs: Optional[str] = None,
        properties: Sequence[str] = PROPERTIES,
        cap=None,
    ) -> CheckResponse:
        """
        Evaluate properties C, D, E and MD at every stage of the operator's trace,
        and property B once for its belief structure.
        """
        wanted = [p.upper() for p in properties]
        unknown = [p for p in wanted if p not in PROPERTIES]
        if unknown:
            raise ValueError(f"unknown properties {', '.join(unknown)} (valid: {', '.join(PROPERTIES)})")
        op = self.build_operator(game, operator, beliefs)
        trace = iterate(op, self._cap(cap), self.config.engine.max_finite_stages)

        def strategy(player: int, index: int) -> str:
            return f"player {player + 1} strategy {game.strategy_labels[player][index]}"

        def mixture(player: int, weights) -> str:
            return " + ".join(
                f"{render_rational(w)} {game.strategy_labels[player][d]}" for d, w in sorted(weights.items())
            )

        records: List[PropertyRecord] = []
        if "B" in wanted and op.beliefs is not None:
            records.append(PropertyRecord(property="B", holds=check_property_B(game, op.beliefs)))
        for ordinal, restriction in trace.shown_stages():
            for name in ("C", "D", "E", "MD"):
                if name not in wanted:
                    continue
                report = property_report(game, restriction, name)
                witnesses = {
                    f"{p + 1}:{game.strategy_labels[p][s]}": game.strategy_labels[p][d]
                    for (p, s), d in report.witnesses.items()
                }
                witnesses.update({
                    f"{p + 1}:{game.strategy_labels[p][s]}": mixture(p, weights)
                    for (p, s), weights in report.mixtures.items()
                })
                records.append(PropertyRecord(
                    property=name,
                    ordinal=str(ordinal),
                    holds=report.holds,
                    violation=strategy(*report.violation) if report.violation is not None else None,
                    witnesses=witnesses,
                ))
        passed = all(record.holds for record in records)
        if not passed:
            logger.warning(f"Property check on {game.name} with {op.label} failed")
        return CheckResponse(game=game.name, operator=op.label, properties=records, passed=passed)

    def examples(self) -> List[ExampleRecord]:
        return [
            ExampleRecord(
                name=summary.name,
                title=summary.title,
                operator=summary.operator,
                player_count=summary.player_count,
                expected=summary.expected,
                expected_closure=summary.expected_closure,
            )
            for summary in list_examples()
        ]

    def replay_example(self, name: str, upto: Union[None, str, int, Ordinal] = None) -> ReplayResponse:
        """
        Raises:
            UnknownExampleError: For an unknown example name
            StageMismatchError: If a closed-form stage disagrees with the step function
        """
        example = get_example(name)
        window = ReplayWindow.upto(upto)
        report = replay(example, window.finite_upto, window.past_limit)
        trace = report.trace
        return ReplayResponse(
            example=report.example,
            validated=report.validated,
            stages=stage_records(trace, example.render),
            verdict=verdict_record(trace.operator, trace.verdict),
            expected=report.expected_verdict.render(),
            closure=str(trace.closure) if trace.closure is not None else None,
            checks=[CheckRecord(name=c.name, passed=c.passed, detail=c.detail) for c in report.checks],
            relaxations=[
                RelaxationRecord(
                    name=outcome.name,
                    verdict=outcome.trace.verdict.render(),
                    outcome=example.render(outcome.outcome) if outcome.outcome is not None else None,
                    valid=outcome.report.valid,
                )
                for outcome in report.relaxations
            ],
        )


def eliminate_lines(response: EliminateResponse) -> List[str]:
    return stage_lines(response.stages) + [response.verdict.text]


def order_independence_lines(response: OrderIndependenceResponse) -> List[str]:
    summary = response.summary
    lines = [f"operator {summary.operator} trials {summary.trials} seed {summary.seed}"]
    for outcome in response.outcomes:
        lines.append(f"outcome {outcome.restriction} : {outcome.count} trials, closure {', '.join(outcome.closures)}")
    if summary.no_outcome:
        lines.append(f"no outcome : {summary.no_outcome} trials")
    if summary.base_outcome is not None:
        lines.append(f"unrelaxed outcome {summary.base_outcome}, closure {summary.base_closure}")
    lines.append(f"distinct outcomes {summary.distinct}")
    return lines


def check_lines(response: CheckResponse) -> List[str]:
    lines = []
    for record in response.properties:
        where = f" at {record.ordinal}" if record.ordinal is not None else ""
        state = "holds" if record.holds else f"fails ({record.violation})" if record.violation else "fails"
        lines.append(f"property {record.property}{where} : {state}")
    lines.append("all properties hold" if response.passed else "some properties fail")
    return lines


def replay_lines(response: ReplayResponse) -> List[str]:
    lines = stage_lines(response.stages) + [response.verdict.text]
    if response.closure is not None:
        lines.append(f"closure {response.closure}")
    for relaxation in response.relaxations:
        outcome = f", outcome {relaxation.outcome}" if relaxation.outcome is not None else ""
        lines.append(f"relaxation {relaxation.name} : {relaxation.verdict}{outcome}")
    lines.extend(f"check failed: {c.name} ({c.detail})" for c in response.checks if not c.passed)
    lines.append("validated" if response.validated else "not validated")
    return lines


def example_lines(records: Sequence[ExampleRecord]) -> List[str]:
    return [f"{r.name} : {r.operator}, {r.expected} -- {r.title}" for r in records]
