"""
Closed-form replays of infinite games.

Infinite games are never iterated blindly. Each example ships a hand-derived
step function over symbolic strategy sets and a closed-form stage function;
``replay`` checks the one-step recurrence at every finite stage it is asked
for, checks that the w-stage is the intersection of the finite stages, carries
on past the limit, and spot-checks the step functions against the payoff
definitions at sampled strategies.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ..config import get_config
from .game_service import FiniteGame, render_rational
from .lattice_service import (
    OMEGA,
    ZERO,
    CapReached,
    CycleDetected,
    FixpointAt,
    IterationTrace,
    Ordinal,
    RelaxationReport,
    RelaxationScript,
    StageLog,
    Verdict,
    check_relaxation,
    iterate,
    scripted_relaxation,
)
from .operator_service import OperatorName, SuggestingError, make_operator

logger = logging.getLogger(__name__)


class UndecidableSetOperation(ValueError):
    """The symbolic representation cannot decide this set operation"""
    pass


class StageMismatchError(ValueError):
    """A closed-form stage disagrees with one application of the step function"""

    def __init__(self, ordinal: Ordinal, detail: str):
        self.ordinal = ordinal
        self.detail = detail
        super().__init__(f"stage {ordinal}: {detail}")


class UnknownExampleError(SuggestingError):
    kind = "example"


# ---------------------------------------------------------------------------
# Symbolic strategy sets
# ---------------------------------------------------------------------------

def _is_integer(value) -> bool:
    return Fraction(value).denominator == 1


class SymbolicSet:
    """A strategy set with decidable membership, emptiness, intersection and inclusion."""

    __slots__ = ()

    def contains(self, value) -> bool:
        raise NotImplementedError

    def is_empty(self) -> bool:
        return False

    def meet(self, other: "SymbolicSet") -> "SymbolicSet":
        raise NotImplementedError

    def leq(self, other: "SymbolicSet") -> bool:
        raise NotImplementedError

    def render(self) -> str:
        raise NotImplementedError

    def __and__(self, other: "SymbolicSet") -> "SymbolicSet":
        return self.meet(other)

    def __le__(self, other: "SymbolicSet") -> bool:
        return self.leq(other)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.render()})"


class EmptySet(SymbolicSet):
    __slots__ = ()

    def contains(self, value) -> bool:
        return False

    def is_empty(self) -> bool:
        return True

    def meet(self, other: SymbolicSet) -> SymbolicSet:
        return self

    def leq(self, other: SymbolicSet) -> bool:
        return True

    def render(self) -> str:
        return "{}"

    def __eq__(self, other) -> bool:
        return isinstance(other, EmptySet)

    def __hash__(self) -> int:
        return hash("EmptySet")


EMPTY = EmptySet()


class FiniteSet(SymbolicSet):
    """A non-empty finite set of rationals."""

    __slots__ = ("values",)

    def __init__(self, values: Iterable):
        values = frozenset(Fraction(v) for v in values)
        if not values:
            raise ValueError("FiniteSet needs at least one value; use finite_set()")
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("symbolic sets are immutable")

    def contains(self, value) -> bool:
        return Fraction(value) in self.values

    def meet(self, other: SymbolicSet) -> SymbolicSet:
        return finite_set(v for v in self.values if other.contains(v))

    def leq(self, other: SymbolicSet) -> bool:
        return all(other.contains(v) for v in self.values)

    def render(self) -> str:
        return "{" + ",".join(render_rational(v) for v in sorted(self.values)) + "}"

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteSet) and self.values == other.values

    def __hash__(self) -> int:
        return hash(("FiniteSet", self.values))


class SingletonRational(FiniteSet):
    """{v}; equal to FiniteSet({v})."""

    __slots__ = ()

    def __init__(self, value):
        super().__init__([value])

    @property
    def value(self) -> Fraction:
        return next(iter(self.values))


class CofinNatMinus(SymbolicSet):
    """(N ∪ {-1}) minus a finite excluded set."""

    __slots__ = ("excluded",)

    def __init__(self, excluded: Iterable = ()):
        kept = frozenset(int(e) for e in excluded if _is_integer(e) and e >= -1)
        object.__setattr__(self, "excluded", kept)

    def __setattr__(self, name, value):
        raise AttributeError("symbolic sets are immutable")

    def contains(self, value) -> bool:
        return _is_integer(value) and value >= -1 and int(value) not in self.excluded

    def meet(self, other: SymbolicSet) -> SymbolicSet:
        if isinstance(other, CofinNatMinus):
            return CofinNatMinus(self.excluded | other.excluded)
        if isinstance(other, IntervalLOC):
            first = max(-1, math.floor(other.lo) + 1)
            return finite_set(k for k in range(first, math.floor(other.hi) + 1) if self.contains(k))
        return other.meet(self)

    def leq(self, other: SymbolicSet) -> bool:
        if isinstance(other, CofinNatMinus):
            return other.excluded <= self.excluded
        return False

    def render(self) -> str:
        if -1 in self.excluded:
            rest = sorted(self.excluded - {-1})
            return "N" if not rest else "N \\ {" + ",".join(str(e) for e in rest) + "}"
        if not self.excluded:
            return "N'"
        return "N' \\ {" + ",".join(str(e) for e in sorted(self.excluded)) + "}"

    def __eq__(self, other) -> bool:
        return isinstance(other, CofinNatMinus) and self.excluded == other.excluded

    def __hash__(self) -> int:
        return hash(("CofinNatMinus", self.excluded))


class IntervalLOC(SymbolicSet):
    """The non-empty left-open right-closed interval (lo, hi]."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo, hi = Fraction(lo), Fraction(hi)
        if lo >= hi:
            raise ValueError(f"empty interval ({lo},{hi}]; use interval()")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("symbolic sets are immutable")

    def contains(self, value) -> bool:
        return self.lo < Fraction(value) <= self.hi

    def meet(self, other: SymbolicSet) -> SymbolicSet:
        if isinstance(other, IntervalLOC):
            return interval(max(self.lo, other.lo), min(self.hi, other.hi))
        return other.meet(self)

    def leq(self, other: SymbolicSet) -> bool:
        if isinstance(other, IntervalLOC):
            return other.lo <= self.lo and self.hi <= other.hi
        return False

    def render(self) -> str:
        return f"({render_rational(self.lo)},{render_rational(self.hi)}]"

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalLOC) and (self.lo, self.hi) == (other.lo, other.hi)

    def __hash__(self) -> int:
        return hash(("IntervalLOC", self.lo, self.hi))


NAT_MINUS = CofinNatMinus()
NATURALS = CofinNatMinus({-1})
MINUS_ONE = SingletonRational(-1)


def finite_set(values: Iterable) -> SymbolicSet:
    values = list(values)
    return FiniteSet(values) if values else EMPTY


def interval(lo, hi) -> SymbolicSet:
    return IntervalLOC(lo, hi) if Fraction(lo) < Fraction(hi) else EMPTY


def nat_minus_excluding(excluded: Iterable) -> CofinNatMinus:
    return CofinNatMinus(excluded)


def naturals_excluding(excluded: Iterable) -> CofinNatMinus:
    return CofinNatMinus({-1, *excluded})


def union(a: SymbolicSet, b: SymbolicSet) -> SymbolicSet:
    """Union of integer sets; intervals only union with the empty set."""
    if a.is_empty():
        return b
    if b.is_empty():
        return a
    if isinstance(a, FiniteSet) and isinstance(b, FiniteSet):
        return FiniteSet(a.values | b.values)
    if isinstance(a, FiniteSet) and isinstance(b, CofinNatMinus):
        a, b = b, a
    if isinstance(a, CofinNatMinus) and isinstance(b, FiniteSet):
        if not all(_is_integer(v) and v >= -1 for v in b.values):
            raise UndecidableSetOperation(f"{b} has members outside N ∪ {{-1}}")
        return CofinNatMinus(a.excluded - {int(v) for v in b.values})
    if isinstance(a, CofinNatMinus) and isinstance(b, CofinNatMinus):
        return CofinNatMinus(a.excluded & b.excluded)
    raise UndecidableSetOperation(f"union of {a} and {b}")


def naturals_part(x: SymbolicSet) -> SymbolicSet:
    return x.meet(NATURALS)


def successors(x: SymbolicSet) -> SymbolicSet:
    """{k + 1 : k in x} for a subset x of N."""
    if x.is_empty():
        return EMPTY
    if isinstance(x, FiniteSet) and all(_is_integer(v) and v >= 0 for v in x.values):
        return FiniteSet(v + 1 for v in x.values)
    if isinstance(x, CofinNatMinus) and -1 in x.excluded:
        return CofinNatMinus({-1, 0} | {e + 1 for e in x.excluded if e >= 0})
    raise UndecidableSetOperation(f"successors of {x}")


def is_bounded(x: SymbolicSet) -> bool:
    return not isinstance(x, CofinNatMinus)


def max_value(x: SymbolicSet) -> Optional[Fraction]:
    """Largest member, or None when x is empty or unbounded."""
    if isinstance(x, FiniteSet):
        return max(x.values)
    if isinstance(x, IntervalLOC):
        return x.hi
    return None


def exists_greater(x: SymbolicSet, value) -> bool:
    value = Fraction(value)
    if isinstance(x, FiniteSet):
        return any(v > value for v in x.values)
    if isinstance(x, IntervalLOC):
        return x.hi > value
    return isinstance(x, CofinNatMinus)


def exists_at_most(x: SymbolicSet, value) -> bool:
    value = Fraction(value)
    if isinstance(x, FiniteSet):
        return any(v <= value for v in x.values)
    if isinstance(x, IntervalLOC):
        return x.lo < value
    if isinstance(x, CofinNatMinus):
        return any(x.contains(k) for k in range(-1, math.floor(value) + 1))
    return False


def has_member_other_than(x: SymbolicSet, value) -> bool:
    if isinstance(x, FiniteSet):
        return any(v != value for v in x.values)
    return not x.is_empty()


def meets_open(x: SymbolicSet, lo=None, hi=None) -> bool:
    """Whether x meets the open interval (lo, hi); None bounds are infinite."""
    if isinstance(x, FiniteSet):
        return any((lo is None or v > lo) and (hi is None or v < hi) for v in x.values)
    if isinstance(x, IntervalLOC):
        left = x.lo if lo is None else max(x.lo, Fraction(lo))
        return left < x.hi and (hi is None or left < hi)
    if isinstance(x, CofinNatMinus):
        if hi is None:
            return True
        first = -1 if lo is None else max(-1, math.floor(lo) + 1)
        return any(x.contains(k) for k in range(first, math.ceil(hi)))
    return False


def first_member_above(x: SymbolicSet, threshold) -> Optional[Fraction]:
    """Smallest member above ``threshold`` for integer sets, ``hi`` for intervals."""
    threshold = Fraction(threshold)
    if isinstance(x, FiniteSet):
        above = [v for v in x.values if v > threshold]
        return min(above) if above else None
    if isinstance(x, IntervalLOC):
        return x.hi if x.hi > threshold else None
    if isinstance(x, CofinNatMinus):
        k = max(-1, math.floor(threshold) + 1)
        while not x.contains(k):
            k += 1
        return Fraction(k)
    return None


def sample_members(x: SymbolicSet, grid: Sequence) -> List[Fraction]:
    """All members of a finite set; grid members (plus endpoints) of an infinite one."""
    if isinstance(x, FiniteSet):
        return sorted(x.values)
    if x.is_empty():
        return []
    picked = {Fraction(v) for v in grid if x.contains(v)}
    if isinstance(x, IntervalLOC):
        picked |= {x.hi, (x.lo + x.hi) / 2}
    return sorted(picked)


class SymbolicRestriction:
    """A tuple of symbolic strategy sets, one per player."""

    __slots__ = ("sets", "_hash")

    def __init__(self, sets: Iterable[SymbolicSet]):
        sets = tuple(sets)
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "_hash", hash(sets))

    def __setattr__(self, name, value):
        raise AttributeError("SymbolicRestriction is immutable")

    @classmethod
    def of(cls, *sets: SymbolicSet) -> "SymbolicRestriction":
        return cls(sets)

    @property
    def player_count(self) -> int:
        return len(self.sets)

    def __getitem__(self, player: int) -> SymbolicSet:
        return self.sets[player]

    def __iter__(self):
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolicRestriction):
            return NotImplemented
        return self.sets == other.sets

    def __hash__(self) -> int:
        return self._hash

    def is_empty(self) -> bool:
        return all(s.is_empty() for s in self.sets)

    def leq(self, other: "SymbolicRestriction") -> bool:
        return all(a.leq(b) for a, b in zip(self.sets, other.sets))

    def meet(self, other: "SymbolicRestriction") -> "SymbolicRestriction":
        return SymbolicRestriction(a.meet(b) for a, b in zip(self.sets, other.sets))

    __le__ = leq
    __and__ = meet

    def render(self) -> str:
        return " | ".join(s.render() for s in self.sets)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"SymbolicRestriction({self.render()})"


@dataclass(frozen=True)
class SymbolicOperator:
    """A hand-derived step function on symbolic restrictions."""
    label: str
    step: Callable[[SymbolicRestriction], SymbolicRestriction] = field(repr=False, compare=False)
    top_element: SymbolicRestriction
    contracting: bool = True

    def apply(self, ordinal, restriction: SymbolicRestriction) -> SymbolicRestriction:
        return self.step(restriction)

    def top(self) -> SymbolicRestriction:
        return self.top_element


def _contracted(step: Callable[[SymbolicRestriction], SymbolicRestriction]):
    return lambda g: step(g) & g


def _joint(player: int, strategy, others: Tuple) -> Tuple:
    return others[:player] + (strategy,) + others[player:]


def _opponent_profiles(g: SymbolicRestriction, player: int, grid: Sequence) -> List[Tuple]:
    pools = [sample_members(s, grid) for j, s in enumerate(g.sets) if j != player]
    return list(itertools.product(*pools))


def _best_response_somewhere(payoff, player, strategy, beliefs, competitors) -> bool:
    """``strategy`` beats every certificate competitor against one of the sampled beliefs."""
    for belief in beliefs:
        value = payoff(player, _joint(player, strategy, belief))
        if all(value >= payoff(player, _joint(player, d, belief)) for d in competitors(strategy, belief)):
            return True
    return False


def _dominated_somehow(payoff, player, strategy, beliefs, dominators) -> bool:
    """Some certificate dominator is strictly better at every sampled opponent profile."""
    return any(
        all(payoff(player, _joint(player, d, b)) > payoff(player, _joint(player, strategy, b)) for b in beliefs)
        for d in dominators
    )


# ---------------------------------------------------------------------------
# Bertrand competition on (0, 100]
# ---------------------------------------------------------------------------

BERTRAND_STRATEGIES = IntervalLOC(0, 100)
_BERTRAND_GRID = tuple(Fraction(v) for v in ("1/2", 1, 25, 49, 50, 51, 75, 99, 100))
_BERTRAND_PEAK = Fraction(2500)


def bertrand_payoff(player: int, joint: Sequence) -> Fraction:
    """s(100 - s) for the lower price, half of it on a tie, 0 for the higher price."""
    own, other = Fraction(joint[player]), Fraction(joint[1 - player])
    revenue = own * (100 - own)
    if own < other:
        return revenue
    if own == other:
        return revenue / 2
    return Fraction(0)


def _bertrand_global_responses(own: SymbolicSet, other: SymbolicSet) -> SymbolicSet:
    # against s > 50 the unique best response in (0,100] is 50; against s <= 50 there is none
    return own.meet(SingletonRational(50)) if exists_greater(other, 50) else EMPTY


def _representative_beliefs(values: Sequence[Fraction], other: SymbolicSet) -> List[Fraction]:
    """One belief per order class relative to ``values`` that ``other`` actually meets."""
    beliefs = [v for v in values if other.contains(v)]
    if meets_open(other, None, values[0]):
        beliefs.append(values[0] - 1)
    for a, b in zip(values, values[1:]):
        if meets_open(other, a, b):
            beliefs.append((a + b) / 2)
    if meets_open(other, values[-1], None):
        beliefs.append(values[-1] + 1)
    return beliefs


def _bertrand_local_responses(own: SymbolicSet, other: SymbolicSet) -> SymbolicSet:
    """
    Best responses within ``own`` to some price in ``other``.

    For own = (lo, hi]:
      - a belief at most lo makes every own price earn 0, so all of own is kept;
      - a belief above hi is answered by min(hi, 50) when lo < 50;
      - a belief in (max(lo, 50), hi] is answered by 50 when lo < 50;
      - any other belief has no best response in own.
    A finite own set is evaluated directly at one belief per order class.
    """
    if own.is_empty() or other.is_empty():
        return EMPTY
    if isinstance(own, IntervalLOC):
        lo, hi = own.lo, own.hi
        if exists_at_most(other, lo):
            return own
        kept = set()
        if lo < 50:
            if exists_greater(other, hi):
                kept.add(min(hi, Fraction(50)))
            if not other.meet(interval(max(lo, Fraction(50)), hi)).is_empty():
                kept.add(Fraction(50))
        return finite_set(kept)
    if isinstance(own, FiniteSet):
        values = sorted(own.values)
        kept = set()
        for belief in _representative_beliefs(values, other):
            payoffs = {v: bertrand_payoff(0, (v, belief)) for v in values}
            best = max(payoffs.values())
            kept.update(v for v, p in payoffs.items() if p == best)
        return finite_set(kept)
    raise UndecidableSetOperation(f"local best responses within {own}")


def _bertrand_grbar(g: SymbolicRestriction) -> SymbolicRestriction:
    return SymbolicRestriction.of(
        _bertrand_global_responses(g[0], g[1]).meet(g[0]),
        _bertrand_global_responses(g[1], g[0]).meet(g[1]),
    )


def _bertrand_lrbar(g: SymbolicRestriction) -> SymbolicRestriction:
    return SymbolicRestriction.of(_bertrand_local_responses(g[0], g[1]), _bertrand_local_responses(g[1], g[0]))


def _bertrand_competitors(domain: SymbolicSet):
    def competitors(strategy, belief):
        (b,) = belief
        if isinstance(domain, FiniteSet):
            return sorted(domain.values)
        if not isinstance(domain, IntervalLOC):
            return []
        lo, hi = domain.lo, domain.hi
        pool = {Fraction(50), hi, Fraction(b), (lo + hi) / 2}
        for k in range(1, 41):
            pool.add(b - (b - lo) / 2 ** k)
            if strategy > lo:
                pool.add(lo + (strategy - lo) / 2 ** k)
        return [d for d in pool if domain.contains(d)]
    return competitors


def _bertrand_survives(local: bool):
    def survives(player: int, strategy, g: SymbolicRestriction) -> bool:
        if not g[player].contains(strategy):
            return False
        domain = g[player] if local else BERTRAND_STRATEGIES
        beliefs = _opponent_profiles(g, player, _BERTRAND_GRID)
        return _best_response_somewhere(bertrand_payoff, player, strategy, beliefs, _bertrand_competitors(domain))
    return survives


def _bertrand_relaxation_r(ordinal, g: SymbolicRestriction, proposal: SymbolicRestriction) -> SymbolicRestriction:
    """((0,50], (0,50]) at the initial game, the L̄R proposal elsewhere along the trace."""
    if g == _BERTRAND_TOP:
        return SymbolicRestriction.of(IntervalLOC(0, 50), IntervalLOC(0, 50))
    return proposal


_BERTRAND_TOP = SymbolicRestriction.of(BERTRAND_STRATEGIES, BERTRAND_STRATEGIES)
_BERTRAND_FIFTY = SymbolicRestriction.of(SingletonRational(50), SingletonRational(50))
_EMPTY_PAIR = SymbolicRestriction.of(EMPTY, EMPTY)


def _bertrand_grbar_stage(ordinal: Ordinal) -> SymbolicRestriction:
    if ordinal == ZERO:
        return _BERTRAND_TOP
    return _BERTRAND_FIFTY if ordinal == Ordinal(0, 1) else _EMPTY_PAIR


def _bertrand_lrbar_stage(ordinal: Ordinal) -> SymbolicRestriction:
    return _BERTRAND_TOP if ordinal == ZERO else _BERTRAND_FIFTY


def _bertrand_relaxation_stage(ordinal: Ordinal) -> SymbolicRestriction:
    if ordinal == ZERO:
        return _BERTRAND_TOP
    if ordinal == Ordinal(0, 1):
        return SymbolicRestriction.of(IntervalLOC(0, 50), IntervalLOC(0, 50))
    return _EMPTY_PAIR


# ---------------------------------------------------------------------------
# Production with a discontinuity at (100, 100)
# ---------------------------------------------------------------------------

def production_payoff(player: int, joint: Sequence) -> Fraction:
    """Own amount, except 0 for both when both choose 100."""
    if Fraction(joint[0]) == 100 and Fraction(joint[1]) == 100:
        return Fraction(0)
    return Fraction(joint[player])


def _production_global_survivors(own: SymbolicSet, other: SymbolicSet) -> SymbolicSet:
    # every s < 100 is beaten by any amount in (s, 100); 100 survives while the
    # opponent may play something other than 100
    if other.is_empty() or not has_member_other_than(other, 100):
        return EMPTY
    return own.meet(SingletonRational(100))


def _production_locally_dominated(value: Fraction, own: SymbolicSet, other: SymbolicSet) -> bool:
    if value < 100:
        return meets_open(own, value, 100) or (own.contains(100) and not other.contains(100))
    return not has_member_other_than(other, 100) and meets_open(own, None, 100)


def _production_local_survivors(own: SymbolicSet, other: SymbolicSet) -> SymbolicSet:
    """
    Strategies of ``own`` not strictly dominated by another strategy of ``own``.

    Everything below the top of an interval is dominated inside it, so only
    the top (or, for finite sets, each member) needs the exact test.
    """
    if own.is_empty() or other.is_empty():
        return EMPTY
    if isinstance(own, IntervalLOC):
        candidates = [own.hi]
    elif isinstance(own, FiniteSet):
        candidates = sorted(own.values)
    else:
        raise UndecidableSetOperation(f"local dominance within {own}")
    return finite_set(v for v in candidates if not _production_locally_dominated(v, own, other))


def _production_gsbar(g: SymbolicRestriction) -> SymbolicRestriction:
    return SymbolicRestriction.of(
        _production_global_survivors(g[0], g[1]).meet(g[0]),
        _production_global_survivors(g[1], g[0]).meet(g[1]),
    )


def _production_lsbar(g: SymbolicRestriction) -> SymbolicRestriction:
    return SymbolicRestriction.of(_production_local_survivors(g[0], g[1]), _production_local_survivors(g[1], g[0]))


def _production_dominators(domain: SymbolicSet, strategy: Fraction) -> List[Fraction]:
    if isinstance(domain, FiniteSet):
        return sorted(domain.values)
    if not isinstance(domain, IntervalLOC):
        return []
    lo, hi = domain.lo, domain.hi
    pool = {hi, (lo + hi) / 2, Fraction(100), (max(lo, Fraction(strategy)) + min(hi, Fraction(100))) / 2}
    return [d for d in pool if domain.contains(d)]


def _production_survives(local: bool):
    def survives(player: int, strategy, g: SymbolicRestriction) -> bool:
        if not g[player].contains(strategy):
            return False
        domain = g[player] if local else BERTRAND_STRATEGIES
        beliefs = _opponent_profiles(g, player, _BERTRAND_GRID)
        dominators = _production_dominators(domain, Fraction(strategy))
        return not _dominated_somehow(production_payoff, player, strategy, beliefs, dominators)
    return survives


_PRODUCTION_HUNDRED = SymbolicRestriction.of(SingletonRational(100), SingletonRational(100))


def _production_gsbar_stage(ordinal: Ordinal) -> SymbolicRestriction:
    if ordinal == ZERO:
        return _BERTRAND_TOP
    return _PRODUCTION_HUNDRED if ordinal == Ordinal(0, 1) else _EMPTY_PAIR


def _production_lsbar_stage(ordinal: Ordinal) -> SymbolicRestriction:
    return _BERTRAND_TOP if ordinal == ZERO else _PRODUCTION_HUNDRED


# ---------------------------------------------------------------------------
# Strategies N ∪ {-1}: best responses along a successor chain
# ---------------------------------------------------------------------------

_NAT_GRID = tuple(range(-1, 13))
_NAT_SAMPLES = tuple(range(-1, 9))
_NAT_LIMIT_SAMPLES = tuple(range(-1, 21))


def nat_minus_one_payoff(player: int, joint: Sequence) -> Fraction:
    k, l = (int(v) for v in joint)
    if player == 0:
        if k >= 0 and l >= 0:
            return Fraction(l + 1 if k == l + 1 else 0)
        return Fraction(l + 1 if k == -1 else k)
    if k >= 0 and l >= 0:
        return Fraction(k if k == l else 0)
    return Fraction(k if l == -1 else l)


def _first_player_responses(domain: SymbolicSet, beliefs: SymbolicSet) -> SymbolicSet:
    """
    Strategies of player 1 that are best responses, compared within ``domain``,
    to some strategy of player 2 in ``beliefs``.

    Against l >= 0 the best payoff l + 1 is reached by -1 and l + 1; if
    neither is in the domain every strategy earns the domain maximum 0.
    Against -1 the payoff is the own number (0 for -1), so a best response
    exists only when the naturals of the domain are bounded, by M say, and
    then it is every k >= M, plus -1 when M = 0.
    """
    if beliefs.is_empty():
        return EMPTY
    if domain.is_empty():
        return NAT_MINUS
    result: SymbolicSet = EMPTY
    positive = naturals_part(beliefs)
    if not positive.is_empty():
        top = successors(positive)
        if not domain.contains(-1) and not top.leq(domain):
            return NAT_MINUS
        result = union(top, MINUS_ONE)
    if beliefs.contains(-1):
        natural_domain = naturals_part(domain)
        if is_bounded(natural_domain):
            peak = int(max_value(natural_domain)) if not natural_domain.is_empty() else 0
            result = union(result, naturals_excluding(range(peak)))
            if peak == 0:
                result = union(result, MINUS_ONE)
    return result


def _second_player_responses(domain: SymbolicSet, beliefs: SymbolicSet) -> SymbolicSet:
    """
    Strategies of player 2 that are best responses, compared within ``domain``,
    to some strategy of player 1 in ``beliefs``.

    Against 0 every strategy earns 0. Against k > 0 the best payoff k is
    reached by -1 and k. Against -1 the payoff is the own number (-1 for -1).
    """
    if beliefs.is_empty():
        return EMPTY
    if domain.is_empty() or beliefs.contains(0):
        return NAT_MINUS
    result: SymbolicSet = EMPTY
    positive = naturals_part(beliefs)
    if not positive.is_empty():
        if not domain.contains(-1) and not positive.leq(domain):
            return NAT_MINUS
        result = union(positive, MINUS_ONE)
    if beliefs.contains(-1):
        natural_domain = naturals_part(domain)
        if is_bounded(natural_domain):
            peak = int(max_value(natural_domain)) if not natural_domain.is_empty() else -1
            result = union(result, naturals_excluding(range(max(peak, 0))))
            if peak <= -1:
                result = union(result, MINUS_ONE)
    return result


def _nat_minus_one_grbar(g: SymbolicRestriction) -> SymbolicRestriction:
    return SymbolicRestriction.of(
        _first_player_responses(NAT_MINUS, g[1]).meet(g[0]),
        _second_player_responses(NAT_MINUS, g[0]).meet(g[1]),
    )


def _nat_minus_one_lr(g: SymbolicRestriction) -> SymbolicRestriction:
    return SymbolicRestriction.of(_first_player_responses(g[0], g[1]), _second_player_responses(g[1], g[0]))


def _without_prefix(m: int) -> CofinNatMinus:
    """N' minus {0, ..., m}; m = -1 gives N'."""
    return nat_minus_excluding(range(m + 1))


def _nat_minus_one_finite_stage(n: int) -> SymbolicRestriction:
    k = n // 2
    if n % 2 == 0:
        return SymbolicRestriction.of(_without_prefix(k - 1), _without_prefix(k - 1))
    return SymbolicRestriction.of(_without_prefix(k), _without_prefix(k - 1))


_MINUS_ONE_PAIR = SymbolicRestriction.of(MINUS_ONE, MINUS_ONE)


def _transfinite(finite: Callable[[int], Any], past_limit: Callable[[int], Any]) -> Callable[[Ordinal], Any]:
    def stage(ordinal: Ordinal):
        if ordinal.omega == 0:
            return finite(ordinal.finite)
        if ordinal.omega == 1:
            return past_limit(ordinal.finite)
        raise ValueError(f"no closed form at {ordinal}")
    return stage


_nat_minus_one_grbar_stage = _transfinite(
    _nat_minus_one_finite_stage, lambda j: _MINUS_ONE_PAIR if j == 0 else _EMPTY_PAIR
)
_nat_minus_one_lr_stage = _transfinite(
    _nat_minus_one_finite_stage, lambda j: _MINUS_ONE_PAIR if j == 0 else _nat_minus_one_finite_stage(j - 1)
)
_nat_minus_one_lrbar_stage = _transfinite(_nat_minus_one_finite_stage, lambda j: _MINUS_ONE_PAIR)


def _nat_minus_one_competitors(player: int, domain: SymbolicSet):
    def competitors(strategy, belief):
        (b,) = belief
        anyone = first_member_above(domain, -2)
        if b >= 0:
            favoured = (-1, b + 1) if player == 0 else (-1, b)
            picks = [Fraction(v) for v in favoured if domain.contains(v)]
            return picks + ([anyone] if anyone is not None else [])
        natural_domain = naturals_part(domain)
        if is_bounded(natural_domain):
            return sample_members(domain, ())
        return [first_member_above(domain, max(Fraction(strategy), Fraction(0)))]
    return competitors


def _nat_minus_one_survives(local: bool, contracting: bool):
    def survives(player: int, strategy, g: SymbolicRestriction) -> bool:
        if contracting and not g[player].contains(strategy):
            return False
        domain = g[player] if local else NAT_MINUS
        beliefs = _opponent_profiles(g, player, _NAT_GRID)
        competitors = _nat_minus_one_competitors(player, domain)
        return _best_response_somewhere(nat_minus_one_payoff, player, strategy, beliefs, competitors)
    return survives


def _prefix_horizon(value) -> int:
    # natural v has left both components by stage 2v + 2
    return 2 * int(value) + 2 if value >= 0 else 0


# ---------------------------------------------------------------------------
# Strategies N, payoff = own number
# ---------------------------------------------------------------------------

def naturals_payoff(player: int, joint: Sequence) -> Fraction:
    return Fraction(joint[player])


def _naturals_ls_component(own: SymbolicSet, other: SymbolicSet) -> SymbolicSet:
    """
    Strategies not strictly dominated by a strategy of ``own``.

    With no own strategies nothing dominates; with no opponent strategies
    every own strategy dominates everything; otherwise d dominates s iff
    d > s, so only numbers at least max(own) survive.
    """
    if own.is_empty():
        return NATURALS
    if other.is_empty() or not is_bounded(own):
        return EMPTY
    return naturals_excluding(range(int(max_value(own))))


def _naturals_lr_component(own: SymbolicSet, other: SymbolicSet) -> SymbolicSet:
    # the payoff ignores the belief: the best response is max(own), when it exists
    if own.is_empty() or other.is_empty() or not is_bounded(own):
        return EMPTY
    return SingletonRational(max_value(own))


def _naturals_ls(g: SymbolicRestriction) -> SymbolicRestriction:
    return SymbolicRestriction.of(_naturals_ls_component(g[0], g[1]), _naturals_ls_component(g[1], g[0]))


def _naturals_lrbar(g: SymbolicRestriction) -> SymbolicRestriction:
    return SymbolicRestriction.of(
        _naturals_lr_component(g[0], g[1]).meet(g[0]),
        _naturals_lr_component(g[1], g[0]).meet(g[1]),
    )


def _naturals_above(domain: SymbolicSet, strategy) -> List[Fraction]:
    if isinstance(domain, FiniteSet):
        return sorted(domain.values)
    if domain.is_empty():
        return []
    return [first_member_above(domain, strategy)]


def _naturals_ls_survives(contracting: bool):
    def survives(player: int, strategy, g: SymbolicRestriction) -> bool:
        if contracting and not g[player].contains(strategy):
            return False
        beliefs = _opponent_profiles(g, player, _NAT_GRID)
        dominators = _naturals_above(g[player], strategy)
        return not _dominated_somehow(naturals_payoff, player, strategy, beliefs, dominators)
    return survives


def _naturals_lr_survives(player: int, strategy, g: SymbolicRestriction) -> bool:
    if not g[player].contains(strategy):
        return False
    beliefs = _opponent_profiles(g, player, _NAT_GRID)
    competitors = lambda s, b: _naturals_above(g[player], s)
    return _best_response_somewhere(naturals_payoff, player, strategy, beliefs, competitors)


_NATURALS_TOP = SymbolicRestriction.of(NATURALS, NATURALS)

_naturals_ls_stage = _transfinite(
    lambda n: _NATURALS_TOP if n % 2 == 0 else _EMPTY_PAIR,
    lambda j: _NATURALS_TOP if j % 2 == 1 else _EMPTY_PAIR,
)
_naturals_collapse_stage = _transfinite(lambda n: _NATURALS_TOP if n == 0 else _EMPTY_PAIR, lambda j: _EMPTY_PAIR)


def _pick(i: int):
    """R(H) = ({i}, {i}); the operator's own proposal elsewhere."""
    def choose(ordinal, g: SymbolicRestriction, proposal: SymbolicRestriction) -> SymbolicRestriction:
        if g == _NATURALS_TOP:
            return SymbolicRestriction.of(SingletonRational(i), SingletonRational(i))
        return proposal
    return choose


# ---------------------------------------------------------------------------
# Three players on N, the third one indifferent
# ---------------------------------------------------------------------------

def three_player_payoff(player: int, joint: Sequence) -> Fraction:
    k, l, _ = (int(v) for v in joint)
    if player == 0:
        return Fraction(l + 1 if k == l + 1 else 0)
    if player == 1:
        return Fraction(k if k == l else 0)
    return Fraction(0)


def _three_player_step(local: bool):
    """
    Player 1 answers (l, m) with l + 1, player 2 answers (k, m) with k (any
    strategy when k = 0), player 3 is indifferent. When the unique best
    response is outside the comparison domain every strategy ties at 0.
    """
    def step(g: SymbolicRestriction) -> SymbolicRestriction:
        s1, s2, s3 = g.sets
        d1, d2 = (s1, s2) if local else (NATURALS, NATURALS)
        if s2.is_empty() or s3.is_empty():
            first = EMPTY
        else:
            top = successors(s2)
            first = top if top.leq(d1) else NATURALS
        if s1.is_empty() or s3.is_empty():
            second = EMPTY
        elif s1.contains(0) or not s1.leq(d2):
            second = NATURALS
        else:
            second = s1
        third = NATURALS if not s1.is_empty() and not s2.is_empty() else EMPTY
        return SymbolicRestriction.of(first, second, third).meet(g)
    return step


def _three_player_finite_stage(n: int) -> SymbolicRestriction:
    k = n // 2
    if n % 2 == 0:
        return SymbolicRestriction.of(naturals_excluding(range(k)), naturals_excluding(range(k)), NATURALS)
    return SymbolicRestriction.of(naturals_excluding(range(k + 1)), naturals_excluding(range(k)), NATURALS)


_three_player_stage = _transfinite(
    _three_player_finite_stage,
    lambda j: SymbolicRestriction.of(EMPTY, EMPTY, NATURALS) if j == 0 else SymbolicRestriction.of(EMPTY, EMPTY, EMPTY),
)


def _three_player_survives(local: bool):
    def survives(player: int, strategy, g: SymbolicRestriction) -> bool:
        if not g[player].contains(strategy):
            return False
        domain = g[player] if local else NATURALS
        anyone = first_member_above(domain, -1)
        fallback = [anyone] if anyone is not None else []

        def competitors(s, belief):
            if player == 0:
                favoured = belief[0] + 1
            elif player == 1:
                favoured = belief[0]
            else:
                return fallback
            return ([favoured] if domain.contains(favoured) else []) + fallback

        beliefs = _opponent_profiles(g, player, range(0, 13))
        return _best_response_somewhere(three_player_payoff, player, strategy, beliefs, competitors)
    return survives


# ---------------------------------------------------------------------------
# A finite game where the local contracting operators are not monotonic
# ---------------------------------------------------------------------------

def nonmonotone_game(n: int = 3) -> FiniteGame:
    """Both players choose from 1..n; player 1 earns the own number, player 2 always 1."""
    labels = [str(v) for v in range(1, n + 1)]
    return FiniteGame.from_function("nonmonotone", [labels, labels], lambda joint: (joint[0] + 1, 1))


# ---------------------------------------------------------------------------
# Catalogue and replay
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpotCheck:
    """Per-player strategies to test and a direct payoff-based survival oracle."""
    samples: Tuple[Tuple[Any, ...], ...]
    survives: Callable[[int, Any, Any], bool] = field(repr=False)


@dataclass(frozen=True)
class ReplayCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class SymbolicExample:
    """
    An infinite (or finite) game with a hand-derived operator and its closed-form stages.

    ``stage_formula(0)`` is the full game and ``stage_formula(α + 1)`` must equal
    the operator applied to ``stage_formula(α)``.
    """
    name: str
    title: str
    operator: Any
    stage_formula: Callable[[Ordinal], Any] = field(repr=False)
    expected_verdict: Verdict
    expected_outcome: Optional[Any] = None
    limit_samples: Tuple[Tuple[Any, ...], ...] = ()
    horizon: Optional[Callable[[Any], int]] = field(default=None, repr=False)
    spot_check: Optional[SpotCheck] = field(default=None, repr=False)
    relaxations: Tuple[Tuple[str, Callable], ...] = field(default=(), repr=False)
    extra_checks: Optional[Callable[[], List[ReplayCheck]]] = field(default=None, repr=False)
    render: Callable[[Any], str] = field(default=str, repr=False)

    @property
    def operator_name(self) -> str:
        return self.operator.label

    @property
    def player_count(self) -> int:
        return len(self.operator.top())

    @property
    def expected_closure(self) -> Optional[Ordinal]:
        return self.expected_verdict.ordinal if isinstance(self.expected_verdict, FixpointAt) else None

    def step(self, element):
        return self.operator.apply(ZERO, element)


@dataclass(frozen=True)
class ExampleSummary:
    name: str
    title: str
    operator: str
    player_count: int
    expected: str
    expected_closure: Optional[str]


@dataclass(frozen=True)
class RelaxationOutcome:
    name: str
    trace: IterationTrace
    report: RelaxationReport

    @property
    def outcome(self):
        return self.trace.outcome


@dataclass(frozen=True)
class ReplayReport:
    example: str
    validated: bool
    trace: IterationTrace
    expected_verdict: Verdict
    expected_outcome: Optional[Any]
    checks: Tuple[ReplayCheck, ...]
    relaxations: Tuple[RelaxationOutcome, ...]

    @property
    def expected_closure(self) -> Optional[Ordinal]:
        return self.expected_verdict.ordinal if isinstance(self.expected_verdict, FixpointAt) else None

    @property
    def computed_closure(self) -> Optional[Ordinal]:
        return self.trace.closure

    @property
    def computed_outcome(self):
        return self.trace.outcome


def _symbolic(label: str, step, top: SymbolicRestriction, contracting: bool = True) -> SymbolicOperator:
    return SymbolicOperator(label, step, top, contracting)


def _nonmonotone_witness(op) -> Callable[[], List[ReplayCheck]]:
    def checks() -> List[ReplayCheck]:
        game = op.game
        full = game.full()
        corner = game.restriction([["1"], ["1"]])
        image_full, image_corner = op(full), op(corner)
        violated = corner.leq(full) and not image_corner.leq(image_full)
        detail = (
            f"{game.render_restriction(corner)} maps to {game.render_restriction(image_corner)}, "
            f"not inside {game.render_restriction(image_full)}"
        )
        return [ReplayCheck("monotonicity violation", violated, detail)]
    return checks


def _catalogue() -> Dict[str, SymbolicExample]:
    examples: List[SymbolicExample] = []

    bertrand_lrbar = _symbolic("LRbar[point]", _bertrand_lrbar, _BERTRAND_TOP)
    bertrand_spots = (_BERTRAND_GRID, _BERTRAND_GRID)
    bertrand_common = dict(
        limit_samples=bertrand_spots,
        horizon=lambda v: 3,
    )
    examples += [
        SymbolicExample(
            "bertrand_GRbar", "Bertrand competition on (0,100], global rationalizability",
            _symbolic("GRbar[point]", _bertrand_grbar, _BERTRAND_TOP), _bertrand_grbar_stage,
            FixpointAt(Ordinal(0, 2)), _EMPTY_PAIR,
            spot_check=SpotCheck(bertrand_spots, _bertrand_survives(local=False)), **bertrand_common,
        ),
        SymbolicExample(
            "bertrand_LRbar", "Bertrand competition on (0,100], local rationalizability",
            bertrand_lrbar, _bertrand_lrbar_stage,
            FixpointAt(Ordinal(0, 1)), _BERTRAND_FIFTY,
            spot_check=SpotCheck(bertrand_spots, _bertrand_survives(local=True)),
            relaxations=(("R", _bertrand_relaxation_r),), **bertrand_common,
        ),
        SymbolicExample(
            "bertrand_LRbar_relaxation_R", "Bertrand competition, a relaxation of LRbar that empties the game",
            scripted_relaxation(bertrand_lrbar, "R", _bertrand_relaxation_r), _bertrand_relaxation_stage,
            FixpointAt(Ordinal(0, 2)), _EMPTY_PAIR, **bertrand_common,
        ),
        SymbolicExample(
            "production_GSbar", "Production with a discontinuity, global strict dominance",
            _symbolic("GSbar", _production_gsbar, _BERTRAND_TOP), _production_gsbar_stage,
            FixpointAt(Ordinal(0, 2)), _EMPTY_PAIR,
            spot_check=SpotCheck(bertrand_spots, _production_survives(local=False)), **bertrand_common,
        ),
        SymbolicExample(
            "production_LSbar", "Production with a discontinuity, local strict dominance",
            _symbolic("LSbar", _production_lsbar, _BERTRAND_TOP), _production_lsbar_stage,
            FixpointAt(Ordinal(0, 1)), _PRODUCTION_HUNDRED,
            spot_check=SpotCheck(bertrand_spots, _production_survives(local=True)), **bertrand_common,
        ),
    ]

    nat_top = SymbolicRestriction.of(NAT_MINUS, NAT_MINUS)
    nat_common = dict(limit_samples=(_NAT_LIMIT_SAMPLES, _NAT_LIMIT_SAMPLES), horizon=_prefix_horizon)
    nat_spots = (_NAT_SAMPLES, _NAT_SAMPLES)
    examples += [
        SymbolicExample(
            "nat_minus_one_GRbar", "Strategies N ∪ {-1}, global rationalizability",
            _symbolic("GRbar[point]", _nat_minus_one_grbar, nat_top), _nat_minus_one_grbar_stage,
            FixpointAt(Ordinal(1, 1)), _EMPTY_PAIR,
            spot_check=SpotCheck(nat_spots, _nat_minus_one_survives(local=False, contracting=True)), **nat_common,
        ),
        SymbolicExample(
            "nat_minus_one_LR", "Strategies N ∪ {-1}, local rationalizability without contraction",
            _symbolic("LR[point]", _nat_minus_one_lr, nat_top, contracting=False), _nat_minus_one_lr_stage,
            CycleDetected(Ordinal(1, 1), ZERO), None,
            spot_check=SpotCheck(nat_spots, _nat_minus_one_survives(local=True, contracting=False)), **nat_common,
        ),
        SymbolicExample(
            "nat_minus_one_LRbar", "Strategies N ∪ {-1}, local rationalizability",
            _symbolic("LRbar[point]", _contracted(_nat_minus_one_lr), nat_top), _nat_minus_one_lrbar_stage,
            FixpointAt(OMEGA), _MINUS_ONE_PAIR,
            spot_check=SpotCheck(nat_spots, _nat_minus_one_survives(local=True, contracting=True)), **nat_common,
        ),
    ]

    naturals_common = dict(limit_samples=(_NAT_LIMIT_SAMPLES, _NAT_LIMIT_SAMPLES), horizon=lambda v: 1)
    naturals_spots = (tuple(range(0, 9)), tuple(range(0, 9)))
    picks = tuple((f"pick_{i}", _pick(i)) for i in range(3))
    examples += [
        SymbolicExample(
            "naturals_LS", "Strategies N, payoff is the own number, local strict dominance",
            _symbolic("LS", _naturals_ls, _NATURALS_TOP, contracting=False), _naturals_ls_stage,
            CycleDetected(Ordinal(0, 2), ZERO), None,
            spot_check=SpotCheck(naturals_spots, _naturals_ls_survives(contracting=False)), **naturals_common,
        ),
        SymbolicExample(
            "naturals_LSbar", "Strategies N, payoff is the own number, contracting local strict dominance",
            _symbolic("LSbar", _contracted(_naturals_ls), _NATURALS_TOP), _naturals_collapse_stage,
            FixpointAt(Ordinal(0, 1)), _EMPTY_PAIR,
            spot_check=SpotCheck(naturals_spots, _naturals_ls_survives(contracting=True)),
            relaxations=picks, **naturals_common,
        ),
        SymbolicExample(
            "naturals_LRbar", "Strategies N, payoff is the own number, finitely supported mixed beliefs",
            _symbolic("LRbar[correlated]", _naturals_lrbar, _NATURALS_TOP), _naturals_collapse_stage,
            FixpointAt(Ordinal(0, 1)), _EMPTY_PAIR,
            spot_check=SpotCheck(naturals_spots, _naturals_lr_survives),
            relaxations=picks, **naturals_common,
        ),
    ]

    three_top = SymbolicRestriction.of(NATURALS, NATURALS, NATURALS)
    three_empty = SymbolicRestriction.of(EMPTY, EMPTY, EMPTY)
    three_samples = (_NAT_LIMIT_SAMPLES,) * 3
    three_spots = (tuple(range(0, 9)),) * 3
    for local, token in ((False, "GRbar"), (True, "LRbar")):
        examples.append(SymbolicExample(
            f"three_player_nat_{token}", f"Three players on N, the third indifferent, {token}",
            _symbolic(f"{token}[point]", _three_player_step(local), three_top), _three_player_stage,
            FixpointAt(Ordinal(1, 1)), three_empty,
            limit_samples=three_samples, horizon=_prefix_horizon,
            spot_check=SpotCheck(three_spots, _three_player_survives(local)),
        ))

    game = nonmonotone_game(3)
    outcome = game.restriction([["3"], ["1", "2", "3"]])
    for token, beliefs in (("LRbar", "correlated"), ("LSbar", None)):
        op = make_operator(OperatorName.from_token(token), game, beliefs)
        examples.append(SymbolicExample(
            f"finite_nonmonotone_{token}", f"Finite game on 1..3 where {token} is not monotonic",
            op, _transfinite(lambda n, full=game.full(): full if n == 0 else outcome, lambda j: outcome),
            FixpointAt(Ordinal(0, 1)), outcome,
            extra_checks=_nonmonotone_witness(op), render=game.render_restriction,
        ))

    return {example.name: example for example in examples}


_EXAMPLES: Optional[Dict[str, SymbolicExample]] = None


def _examples() -> Dict[str, SymbolicExample]:
    global _EXAMPLES
    if _EXAMPLES is None:
        _EXAMPLES = _catalogue()
    return _EXAMPLES


def get_example(name: str) -> SymbolicExample:
    """
    Raises:
        UnknownExampleError: With close matches among the catalogue names
    """
    examples = _examples()
    if name not in examples:
        raise UnknownExampleError(name, list(examples))
    return examples[name]


def list_examples() -> List[ExampleSummary]:
    return [
        ExampleSummary(
            name=example.name,
            title=example.title,
            operator=example.operator_name,
            player_count=example.player_count,
            expected=example.expected_verdict.render(),
            expected_closure=str(example.expected_closure) if example.expected_closure is not None else None,
        )
        for example in _examples().values()
    ]


def _check_transition(example: SymbolicExample, ordinal: Ordinal):
    """stage(ordinal + 1) == step(stage(ordinal))"""
    current = example.stage_formula(ordinal)
    claimed = example.stage_formula(ordinal.successor())
    computed = example.step(current)
    if computed != claimed:
        raise StageMismatchError(
            ordinal.successor(),
            f"closed form {example.render(claimed)} but one step gives {example.render(computed)}",
        )
    return computed


def _check_limit(example: SymbolicExample, finite_upto: int) -> SymbolicRestriction:
    """The w-stage is contained in every finite stage, and sampled values outside it leave some finite stage."""
    limit = example.stage_formula(OMEGA)
    for n in range(finite_upto + 1):
        if not limit.leq(example.stage_formula(Ordinal(0, n))):
            raise StageMismatchError(OMEGA, f"w-stage is not contained in stage {n}")
    if example.horizon is not None:
        for player, values in enumerate(example.limit_samples):
            for value in values:
                if limit[player].contains(value):
                    continue
                horizon = example.horizon(value)
                if all(example.stage_formula(Ordinal(0, n))[player].contains(value) for n in range(horizon + 1)):
                    raise StageMismatchError(
                        OMEGA, f"{value} stays in player {player + 1}'s finite stages but not in the w-stage"
                    )
    return limit


def _spot_check(example: SymbolicExample, ordinal: Ordinal):
    spot = example.spot_check
    current = example.stage_formula(ordinal)
    computed = example.step(current)
    top = example.operator.top()
    for player, values in enumerate(spot.samples):
        for value in values:
            if not top[player].contains(value):
                continue
            expected = spot.survives(player, value, current)
            if computed[player].contains(value) != expected:
                state = "survive" if expected else "be removed"
                raise StageMismatchError(
                    ordinal.successor(),
                    f"payoffs say strategy {value} of player {player + 1} should {state}",
                )


def replay(
    example: Union[str, SymbolicExample],
    check_finite_upto: Optional[int] = None,
    check_past_limit: Optional[int] = None,
) -> ReplayReport:
    """
    Validate an example's closed-form stages and collect its trace.

    Checks stage(α+1) = step(stage(α)) for α = 0..check_finite_upto, the
    w-stage against the finite ones, and stage(w+j+1) = step(stage(w+j))
    for j < check_past_limit. Examples whose stages settle before w are
    checked the same way; their w-stage is the settled stage.

    Raises:
        ValueError: If check_finite_upto < 2
        StageMismatchError: If a closed-form stage disagrees with the step function
        UnknownExampleError: For an unknown example name
    """
    if isinstance(example, str):
        example = get_example(example)
    config = get_config().replay
    finite_upto = config.check_finite_upto if check_finite_upto is None else check_finite_upto
    past_limit = config.check_past_limit if check_past_limit is None else check_past_limit
    if finite_upto < 2:
        raise ValueError("check_finite_upto must be at least 2")
    if past_limit < 0:
        raise ValueError("check_past_limit must be nonnegative")

    top = example.operator.top()
    if example.stage_formula(ZERO) != top:
        raise StageMismatchError(ZERO, "stage 0 is not the full game")

    checks: List[ReplayCheck] = []
    log = StageLog()
    log.record(ZERO, top)
    spot_ordinals = {Ordinal(0, n) for n in range(4)} | {OMEGA, Ordinal(1, 1)}

    for n in range(finite_upto):
        ordinal = Ordinal(0, n)
        computed = _check_transition(example, ordinal)
        if example.spot_check is not None and ordinal in spot_ordinals:
            _spot_check(example, ordinal)
        if log.verdict is None:
            log.record(ordinal.successor(), computed)
    last = Ordinal(0, finite_upto)
    if log.verdict is None:
        following = example.step(example.stage_formula(last))
        if following == example.stage_formula(last):
            log.record(last.successor(), following)
    checks.append(ReplayCheck("finite stages", True, f"0..{finite_upto}"))

    if past_limit > 0:
        limit = _check_limit(example, finite_upto)
        checks.append(ReplayCheck("w-stage", True, "intersection of the finite stages"))
        if log.verdict is None:
            log.record(OMEGA, limit)
        for j in range(past_limit):
            ordinal = Ordinal(1, j)
            computed = _check_transition(example, ordinal)
            if example.spot_check is not None and ordinal in spot_ordinals:
                _spot_check(example, ordinal)
            if log.verdict is None:
                log.record(ordinal.successor(), computed)
        checks.append(ReplayCheck("stages past w", True, f"w..w+{past_limit}"))
    if example.spot_check is not None:
        checks.append(ReplayCheck("payoff spot checks", True))

    if log.verdict is None:
        log.verdict = CapReached(log.stages[-1][0])
    trace = IterationTrace(example.operator_name, tuple(log.stages), log.verdict)

    if isinstance(example.operator, RelaxationScript):
        report = check_relaxation(example.operator, trace)
        checks.append(ReplayCheck("relaxation conditions", report.valid, report.render()))
    if example.extra_checks is not None:
        checks.extend(example.extra_checks())

    relaxations = []
    for name, choose in example.relaxations:
        script = scripted_relaxation(example.operator, name, choose)
        relaxed = iterate(script, cap=Ordinal(0, 64))
        relaxations.append(RelaxationOutcome(name, relaxed, check_relaxation(script, relaxed)))
        checks.append(ReplayCheck(f"relaxation {name}", relaxations[-1].report.valid, relaxations[-1].report.render()))

    matches = trace.verdict == example.expected_verdict and trace.outcome == example.expected_outcome
    checks.append(ReplayCheck(
        "expected verdict", matches, f"expected {example.expected_verdict.render()}, got {trace.verdict.render()}"
    ))
    validated = all(check.passed for check in checks)
    if validated:
        logger.info(f"Replayed {example.name}: {trace.verdict.render()}")
    else:
        logger.warning(f"Replay of {example.name} not validated: {[c.name for c in checks if not c.passed]}")
    return ReplayReport(
        example=example.name,
        validated=validated,
        trace=trace,
        expected_verdict=example.expected_verdict,
        expected_outcome=example.expected_outcome,
        checks=tuple(checks),
        relaxations=tuple(relaxations),
    )
