"""
Ordinal-indexed iteration of operators on a complete lattice.

The engine works on any lattice element offering ``leq``, ``meet``, equality
and hashing: restrictions of finite games and the symbolic restrictions of the
infinite examples. Operators offer ``top()`` and ``apply(ordinal, element)``;
game operators ignore the ordinal, relaxation scripts may use it.
"""

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import get_config
from .game_service import GameMismatchError, Restriction

logger = logging.getLogger(__name__)

_ORDINAL_PATTERN = re.compile(r"^(?:w(?:\*(\d+))?(?:\+(\d+))?|(\d+))$")
_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class OrdinalFormatError(ValueError):
    """Text is not an ordinal of the form w*k+n"""
    pass


class NotContractingError(ValueError):
    """A relaxation or order-independence trial was requested for a non-contracting operator"""
    pass


@dataclass(frozen=True, order=True)
class Ordinal:
    """The ordinal w*omega + finite."""
    omega: int = 0
    finite: int = 0

    def __post_init__(self):
        if self.omega < 0 or self.finite < 0:
            raise OrdinalFormatError(f"negative ordinal coefficients ({self.omega}, {self.finite})")

    def successor(self) -> "Ordinal":
        return Ordinal(self.omega, self.finite + 1)

    @property
    def is_limit(self) -> bool:
        return self.omega > 0 and self.finite == 0

    @property
    def is_finite(self) -> bool:
        return self.omega == 0

    def distance_from(self, earlier: "Ordinal") -> "Ordinal":
        """The ordinal x with earlier + x == self."""
        if earlier > self:
            raise ValueError(f"{earlier} is larger than {self}")
        if earlier.omega == self.omega:
            return Ordinal(0, self.finite - earlier.finite)
        return Ordinal(self.omega - earlier.omega, self.finite)

    def render(self) -> str:
        if self.omega == 0:
            return str(self.finite)
        head = "w" if self.omega == 1 else f"w*{self.omega}"
        return head if self.finite == 0 else f"{head}+{self.finite}"

    def __str__(self) -> str:
        return self.render()


ZERO = Ordinal(0, 0)
ONE = Ordinal(0, 1)
OMEGA = Ordinal(1, 0)


def parse_ordinal(text: Union[str, int, Ordinal]) -> Ordinal:
    """Parse ``12``, ``w``, ``w+3``, ``w*2`` or ``w*2+1``."""
    if isinstance(text, Ordinal):
        return text
    if isinstance(text, int):
        return Ordinal(0, text)
    match = _ORDINAL_PATTERN.match(text.strip())
    if not match:
        raise OrdinalFormatError(f"'{text}' is not an ordinal (expected e.g. 12, w, w+1, w*2)")
    coefficient, finite_part, plain = match.groups()
    if plain is not None:
        return Ordinal(0, int(plain))
    omega = int(coefficient) if coefficient is not None else 1
    if omega == 0:
        raise OrdinalFormatError(f"'{text}' has a zero coefficient of w")
    return Ordinal(omega, int(finite_part) if finite_part is not None else 0)


@dataclass(frozen=True)
class FixpointAt:
    ordinal: Ordinal

    def render(self) -> str:
        return f"fixpoint at {self.ordinal}"


@dataclass(frozen=True)
class CycleDetected:
    period: Ordinal
    first_stage: Ordinal

    def render(self) -> str:
        return f"cycle of period {self.period} from stage {self.first_stage}"


@dataclass(frozen=True)
class CapReached:
    ordinal: Ordinal

    def render(self) -> str:
        return f"cap reached at {self.ordinal}"


Verdict = Union[FixpointAt, CycleDetected, CapReached]


class StageLog:
    """Records stages in ordinal order and reports the first fixpoint or revisit."""

    def __init__(self):
        self.stages: List[Tuple[Ordinal, Any]] = []
        self.verdict: Optional[Verdict] = None
        self._seen: Dict[Any, Ordinal] = {}

    def record(self, ordinal: Ordinal, element) -> Optional[Verdict]:
        if self.verdict is not None:
            raise RuntimeError("stage recorded after the verdict")
        if self.stages and ordinal <= self.stages[-1][0]:
            raise ValueError(f"stage {ordinal} recorded after stage {self.stages[-1][0]}")
        previous = self.stages[-1] if self.stages else None
        self.stages.append((ordinal, element))
        if previous is not None and previous[0].successor() == ordinal and previous[1] == element:
            self.verdict = FixpointAt(previous[0])
        elif element in self._seen:
            first = self._seen[element]
            self.verdict = CycleDetected(ordinal.distance_from(first), first)
        else:
            self._seen[element] = ordinal
        return self.verdict


@dataclass(frozen=True)
class IterationTrace:
    """Stages of an iteration from the top element, with the verdict that ended it."""
    operator: str
    stages: Tuple[Tuple[Ordinal, Any], ...]
    verdict: Verdict

    def stage(self, ordinal: Union[Ordinal, str, int]):
        ordinal = parse_ordinal(ordinal)
        for recorded, element in self.stages:
            if recorded == ordinal:
                return element
        raise KeyError(f"stage {ordinal} not recorded")

    def stage_at(self, ordinal: Union[Ordinal, str, int]):
        """Recorded stage, or the outcome for any ordinal past the closure ordinal."""
        ordinal = parse_ordinal(ordinal)
        if isinstance(self.verdict, FixpointAt) and ordinal >= self.verdict.ordinal:
            return self.outcome
        return self.stage(ordinal)

    @property
    def ordinals(self) -> List[Ordinal]:
        return [ordinal for ordinal, _ in self.stages]

    @property
    def closure(self) -> Optional[Ordinal]:
        return self.verdict.ordinal if isinstance(self.verdict, FixpointAt) else None

    @property
    def outcome(self):
        if not isinstance(self.verdict, FixpointAt):
            return None
        return self.stage(self.verdict.ordinal)

    def shown_stages(self) -> List[Tuple[Ordinal, Any]]:
        """Stages up to the verdict ordinal (the confirming stage is left out)."""
        if isinstance(self.verdict, FixpointAt):
            limit = self.verdict.ordinal
        elif isinstance(self.verdict, CycleDetected):
            limit = self.stages[-1][0]
        else:
            limit = self.verdict.ordinal
        return [(ordinal, element) for ordinal, element in self.stages if ordinal <= limit]


def closure_ordinal(trace: IterationTrace) -> Optional[Ordinal]:
    """The least α with T^(α+1) = T^α, or None without a fixpoint."""
    return trace.closure


def _resolve_cap(cap) -> Ordinal:
    if cap is None:
        cap = get_config().engine.cap
    cap = parse_ordinal(cap)
    if cap < ONE:
        raise ValueError("cap must be at least 1")
    return cap


def _label(op) -> str:
    return getattr(op, "label", None) or str(getattr(op, "name", op))


def iterate(op, cap=None, max_finite_stages: Optional[int] = None, top=None) -> IterationTrace:
    """
    Iterate ``op`` from its top element (or ``top``) until a fixpoint, a revisit, or the cap.

    Successor stages apply the operator. A strictly decreasing sequence in a
    finite lattice stabilises before w, so limit stages are never computed
    here; ``IterationTrace.stage_at`` materialises them from the fixpoint.

    Args:
        op: Operator with ``top()`` and ``apply(ordinal, element)``
        cap: Last ordinal that may be computed (default from configuration)
        max_finite_stages: Budget of finite stages (default from configuration)
        top: Start element replacing ``op.top()``

    Returns:
        IterationTrace with verdict FixpointAt, CycleDetected or CapReached
    """
    cap = _resolve_cap(cap)
    budget = max_finite_stages or get_config().engine.max_finite_stages
    current = op.top() if top is None else top
    log = StageLog()
    log.record(ZERO, current)
    bound = current.size() + 1 if isinstance(current, Restriction) else None
    decreasing = True
    ordinal = ZERO
    verdict: Optional[Verdict] = None

    while verdict is None:
        successor = ordinal.successor()
        if successor > cap or successor.finite > budget:
            verdict = CapReached(ordinal)
            log.verdict = verdict
            break
        following = op.apply(ordinal, current)
        decreasing = decreasing and following.leq(current)
        logger.debug(f"{_label(op)} stage {successor}: {following}")
        verdict = log.record(successor, following)
        if verdict is None and decreasing and bound is not None and successor.finite > bound:
            raise RuntimeError(f"decreasing sequence of {_label(op)} did not stabilise within {bound} steps")
        ordinal, current = successor, following

    trace = IterationTrace(_label(op), tuple(log.stages), verdict)
    logger.info(f"Iterated {trace.operator}: {verdict.render()}")
    return trace


def is_decreasing(trace: IterationTrace) -> bool:
    """Whether every recorded successor stage is contained in its predecessor."""
    return all(
        later.leq(earlier)
        for (o1, earlier), (o2, later) in zip(trace.stages, trace.stages[1:])
        if o1.successor() == o2
    )


def is_fixpoint(op, element) -> bool:
    return op.apply(ZERO, element) == element


def check_trace_inclusion(lower: IterationTrace, upper: IterationTrace) -> Optional[Ordinal]:
    """First ordinal where the stage of ``lower`` is not contained in that of ``upper``, else None."""
    ordinals = sorted(set(lower.ordinals) | set(upper.ordinals))
    for ordinal in ordinals:
        try:
            a, b = lower.stage_at(ordinal), upper.stage_at(ordinal)
        except KeyError:
            continue
        if not a.leq(b):
            return ordinal
    return None


def render_trace(trace: IterationTrace, render: Optional[Callable[[Any], str]] = None) -> List[str]:
    """``stage <ordinal> : <element>`` lines followed by the verdict line."""
    render = render or str
    lines = [f"stage {ordinal} : {render(element)}" for ordinal, element in trace.shown_stages()]
    lines.append(trace.verdict.render())
    return lines


@dataclass(frozen=True)
class Sampled:
    seed: int

    def render(self) -> str:
        return f"sampled(seed={self.seed})"


@dataclass(frozen=True)
class Scripted:
    name: str

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class RelaxationScript:
    """
    A relaxation R of a base operator T.

    ``choose(ordinal, element, proposal)`` returns R(element), where
    ``proposal`` is T(element).
    """
    base: Any
    choose: Callable[[Ordinal, Any, Any], Any] = field(repr=False, compare=False)
    provenance: Union[Sampled, Scripted] = field(default_factory=lambda: Scripted("relaxation"))

    def apply(self, ordinal: Ordinal, element):
        return self.choose(ordinal, element, self.base.apply(ordinal, element))

    def top(self):
        return self.base.top()

    @property
    def contracting(self) -> bool:
        return isinstance(self.provenance, Sampled) and bool(getattr(self.base, "contracting", False))

    @property
    def label(self) -> str:
        return f"{_label(self.base)}~{self.provenance.render()}"


def trial_seed(seed: int, trial: int) -> int:
    """The ``trial``-th output of a splitmix64 stream started at ``seed``."""
    z = (seed + (trial + 1) * _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def trial_seeds(seed: int, trials: int) -> List[int]:
    return [trial_seed(seed, k) for k in range(trials)]


def sample_relaxation(op, seed: int) -> RelaxationScript:
    """
    A random relaxation of a contracting operator on restrictions.

    At each stage with current G and proposal P = T(G) it removes a uniformly
    random non-empty subset of G minus P, so P ⊆ R(G) ⊊ G whenever P ≠ G.
    Choices depend only on (seed, stage ordinal).

    Raises:
        NotContractingError: If ``op`` is not contracting
    """
    if not getattr(op, "contracting", False):
        raise NotContractingError(f"{_label(op)} is not contracting")

    def choose(ordinal: Ordinal, current: Restriction, proposal: Restriction) -> Restriction:
        removable = proposal.removed_from(current)
        if not removable:
            return current
        rng = np.random.default_rng([seed, ordinal.omega, ordinal.finite])
        mask = rng.integers(0, 2, size=len(removable)).astype(bool)
        while not mask.any():
            mask = rng.integers(0, 2, size=len(removable)).astype(bool)
        chosen = [pair for pair, keep in zip(removable, mask) if keep]
        logger.debug(f"relaxation seed {seed} at {ordinal} removes {chosen}")
        return current.without(chosen)

    return RelaxationScript(op, choose, Sampled(seed))


def scripted_relaxation(base, name: str, choose: Callable[[Ordinal, Any, Any], Any]) -> RelaxationScript:
    return RelaxationScript(base, choose, Scripted(name))


@dataclass(frozen=True)
class RelaxationViolation:
    ordinal: Ordinal
    condition: int
    detail: str


@dataclass(frozen=True)
class RelaxationReport:
    valid: bool
    checked: int
    violation: Optional[RelaxationViolation] = None

    def render(self) -> str:
        if self.valid:
            return "valid"
        v = self.violation
        return f"violation at stage {v.ordinal}: condition {v.condition} ({v.detail})"


def check_relaxation(script: RelaxationScript, trace: IterationTrace) -> RelaxationReport:
    """
    Check the relaxation conditions at every recorded stage R^α of the script's trace:

      1. T(R^α) ⊆ R(R^α)
      2. T(R^α) ⊆ R^α implies R(R^α) ⊆ R^α
      3. R(R^α) = R^α implies T(R^α) = R^α
    """
    base = script.base
    for ordinal, current in trace.stages:
        proposal = base.apply(ordinal, current)
        relaxed = script.apply(ordinal, current)
        violation = None
        if not proposal.leq(relaxed):
            violation = RelaxationViolation(ordinal, 1, "R removes a strategy that T keeps")
        elif proposal.leq(current) and not relaxed.leq(current):
            violation = RelaxationViolation(ordinal, 2, "R adds a strategy while T contracts")
        elif relaxed == current and proposal != current:
            violation = RelaxationViolation(ordinal, 3, "fixpoint of R is not a fixpoint of T")
        if violation is not None:
            logger.warning(f"Relaxation {script.label}: condition {violation.condition} fails at {ordinal}")
            return RelaxationReport(False, len(trace.stages), violation)
    return RelaxationReport(True, len(trace.stages))


@dataclass(frozen=True)
class OutcomeSummary:
    restriction: Any
    count: int
    closures: Tuple[Ordinal, ...]

    @property
    def omega_outcome(self) -> bool:
        return all(closure <= OMEGA for closure in self.closures)


@dataclass(frozen=True)
class OrderIndependenceReport:
    operator: str
    trials: int
    seed: int
    outcomes: Tuple[OutcomeSummary, ...]
    no_outcome: int
    base_outcome: Any
    base_closure: Optional[Ordinal]

    @property
    def singleton(self) -> bool:
        return len(self.outcomes) == 1 and self.no_outcome == 0


def order_independence_trial(
    op, trials: int, seed: int, cap=None, max_workers: Optional[int] = None
) -> OrderIndependenceReport:
    """
    Run ``trials`` sampled relaxations of ``op`` and collect their distinct outcomes.

    Trials run concurrently; results are merged in trial order.

    Raises:
        NotContractingError: If ``op`` is not contracting
    """
    if not getattr(op, "contracting", False):
        raise NotContractingError(f"{_label(op)} is not contracting")
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    cap = _resolve_cap(cap)
    workers = max_workers or get_config().trials.max_workers

    def run(trial_seed_value: int) -> IterationTrace:
        return iterate(sample_relaxation(op, trial_seed_value), cap)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        traces = list(pool.map(run, trial_seeds(seed, trials)))

    counts: Dict[Any, int] = {}
    closures: Dict[Any, set] = {}
    no_outcome = 0
    for trace in traces:
        if trace.closure is None:
            no_outcome += 1
            continue
        counts[trace.outcome] = counts.get(trace.outcome, 0) + 1
        closures.setdefault(trace.outcome, set()).add(trace.closure)

    base = iterate(op, cap)
    outcomes = tuple(
        OutcomeSummary(restriction, count, tuple(sorted(closures[restriction])))
        for restriction, count in counts.items()
    )
    logger.info(f"Order independence of {_label(op)}: {len(outcomes)} outcome(s) over {trials} trials")
    return OrderIndependenceReport(_label(op), trials, seed, outcomes, no_outcome, base.outcome, base.closure)


@dataclass(frozen=True)
class ComparisonReport:
    operators: Tuple[str, ...]
    coincide: bool
    ordinal: Ordinal
    verdict: Optional[Verdict]
    stages: Tuple[Any, ...]

    def render(self, render: Optional[Callable[[Any], str]] = None) -> List[str]:
        render = render or str
        if not self.coincide:
            lines = [f"diverge at stage {self.ordinal}"]
            lines.extend(f"  {name} : {render(stage)}" for name, stage in zip(self.operators, self.stages))
            return lines
        if isinstance(self.verdict, FixpointAt):
            return ["coincide through fixpoint", f"closure {self.verdict.ordinal}"]
        if isinstance(self.verdict, CycleDetected):
            return ["coincide through cycle", self.verdict.render()]
        return [f"coincide through stage {self.ordinal}", self.verdict.render()]


def compare_operators(ops: Sequence, cap=None, max_finite_stages: Optional[int] = None) -> ComparisonReport:
    """
    Iterate operators in lockstep and report the first stage where two differ.

    Raises:
        GameMismatchError: If the operators act on different games
    """
    if not ops:
        raise ValueError("no operators to compare")
    games = [getattr(op, "game", None) for op in ops]
    if any(g is not None and g is not games[0] and g != games[0] for g in games):
        raise GameMismatchError("operators act on different games")
    cap = _resolve_cap(cap)
    budget = max_finite_stages or get_config().engine.max_finite_stages
    names = tuple(_label(op) for op in ops)

    currents = [op.top() for op in ops]
    log = StageLog()
    ordinal = ZERO
    while True:
        if any(c != currents[0] for c in currents[1:]):
            logger.info(f"Operators {', '.join(names)} diverge at {ordinal}")
            return ComparisonReport(names, False, ordinal, None, tuple(currents))
        verdict = log.record(ordinal, currents[0])
        if verdict is not None:
            return ComparisonReport(names, True, ordinal, verdict, tuple(currents))
        successor = ordinal.successor()
        if successor > cap or successor.finite > budget:
            return ComparisonReport(names, True, ordinal, CapReached(ordinal), tuple(currents))
        currents = [op.apply(ordinal, current) for op, current in zip(ops, currents)]
        ordinal = successor
