"""
Elimination operators on the restrictions of a finite game.

Dominance operators (GS, LS, MGS, MLS) remove strategies strictly dominated on
the current restriction, by a pure or mixed strategy drawn from all strategies
(global) or from the current restriction (local). Rationalizability operators
(GR, LR) keep strategies that are best responses to some belief over the
current opponent strategies, compared against all strategies (global) or the
current ones (local). Base steps are not intersected with their argument; the
``bar`` variants are.

Every test is computed on ``FiniteGame.payoff_matrix``: rows are the player's
strategies, columns the opponent profiles of the restriction.
"""

import difflib
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .game_service import FiniteGame, Restriction, Strategy, GameMismatchError
from .lp_service import LinearProgram, LpStatus, Sense, lp_feasible, lp_solve

logger = logging.getLogger(__name__)


class UnsupportedBeliefsError(ValueError):
    """Belief structure missing, superfluous, or not supported for this game"""
    pass


class SupportOutsideNarrowingError(ValueError):
    """A belief puts weight outside the opponent strategies of the restriction"""
    pass


class InvalidBeliefError(ValueError):
    """A correlated belief is not a probability distribution"""
    pass


class SuggestingError(ValueError):
    """Unknown token; message lists close matches and the valid tokens"""

    kind = "token"

    def __init__(self, token: str, valid: Sequence[str]):
        self.token = token
        lowered = {v.lower(): v for v in valid}
        matches = difflib.get_close_matches(token.lower(), list(lowered), n=3, cutoff=0.5)
        self.suggestions = [lowered[m] for m in matches]
        hint = f"; did you mean: {', '.join(self.suggestions)}?" if self.suggestions else ""
        super().__init__(f"unknown {self.kind} '{token}'{hint} (valid: {', '.join(valid)})")


class UnknownOperatorError(SuggestingError):
    kind = "operator"


class UnknownBeliefsError(SuggestingError):
    kind = "belief structure"


class BeliefKind(str, Enum):
    """Belief structures over opponent strategies"""
    POINT = "point"
    CORRELATED = "correlated"
    INDEPENDENT = "independent"

    @classmethod
    def from_token(cls, token: str) -> "BeliefKind":
        try:
            return cls(token.strip().lower())
        except ValueError:
            raise UnknownBeliefsError(token, [k.value for k in cls]) from None


@dataclass(frozen=True)
class BeliefStructure:
    """
    Which beliefs a player may hold about the opponents.

    Point beliefs are single opponent profiles. Correlated beliefs are
    distributions over opponent profiles. Independent beliefs (products of
    per-opponent distributions) are only accepted for two players, where
    they coincide with correlated beliefs.
    """
    kind: BeliefKind

    @classmethod
    def of(cls, value: Union["BeliefStructure", BeliefKind, str]) -> "BeliefStructure":
        if isinstance(value, BeliefStructure):
            return value
        if isinstance(value, BeliefKind):
            return cls(value)
        return cls(BeliefKind.from_token(value))

    def check(self, game: FiniteGame):
        if self.kind == BeliefKind.INDEPENDENT and game.player_count > 2:
            raise UnsupportedBeliefsError(
                f"independent beliefs are only supported for 2 players, game {game.name} has {game.player_count}"
            )

    @property
    def mixed(self) -> bool:
        return self.kind != BeliefKind.POINT


class OperatorName(str, Enum):
    GR = "GR"
    GRBAR = "GRbar"
    LR = "LR"
    LRBAR = "LRbar"
    GS = "GS"
    GSBAR = "GSbar"
    LS = "LS"
    LSBAR = "LSbar"
    MGS = "MGS"
    MGSBAR = "MGSbar"
    MLS = "MLS"
    MLSBAR = "MLSbar"

    @classmethod
    def from_token(cls, token: Union[str, "OperatorName"]) -> "OperatorName":
        if isinstance(token, OperatorName):
            return token
        lowered = token.strip().lower()
        for member in cls:
            if member.token == lowered:
                return member
        raise UnknownOperatorError(token, [m.token for m in cls])

    @property
    def token(self) -> str:
        return self.value.lower()

    @property
    def contracting(self) -> bool:
        return self.value.endswith("bar")

    @property
    def base(self) -> "OperatorName":
        return OperatorName(self.value[:-3]) if self.contracting else self

    @property
    def contracted(self) -> "OperatorName":
        return self if self.contracting else OperatorName(self.value + "bar")

    @property
    def rationalizability(self) -> bool:
        return self.base in (OperatorName.GR, OperatorName.LR)

    @property
    def monotonic(self) -> bool:
        """Monotonic by theory: the global operators and their contracting versions"""
        return self.base in (OperatorName.GR, OperatorName.GS, OperatorName.MGS)

    @property
    def local(self) -> bool:
        return self.base in (OperatorName.LR, OperatorName.LS, OperatorName.MLS)


def _dominance_matrix(matrix: np.ndarray) -> np.ndarray:
    """Entry [d, s] is True when row d strictly exceeds row s in every column."""
    return np.all(matrix[:, None, :] > matrix[None, :, :], axis=2)


def _comparators(game: FiniteGame, restriction: Restriction, player: int, local: bool) -> List[int]:
    return restriction.sorted_indices(player) if local else list(range(game.shape[player]))


def strictly_dominates(
    game: FiniteGame, restriction: Restriction, player: int, dominator: Strategy, dominated: Strategy
) -> bool:
    """
    Whether ``dominator`` strictly dominates ``dominated`` on the restriction.

    Both strategies may lie outside S_i. Vacuously true when S_{-i} is empty.
    """
    d = game.resolve_strategy(player, dominator)
    s = game.resolve_strategy(player, dominated)
    matrix = game.payoff_matrix(player, restriction)
    return bool(np.all(matrix[d] > matrix[s]))


def _pure_dominance_step(game: FiniteGame, restriction: Restriction, local: bool) -> Restriction:
    kept = []
    for player in range(game.player_count):
        dominance = _dominance_matrix(game.payoff_matrix(player, restriction))
        dominators = _comparators(game, restriction, player, local)
        if dominators:
            dominated = np.any(dominance[dominators, :], axis=0)
            kept.append([s for s in range(game.shape[player]) if not dominated[s]])
        else:
            kept.append(range(game.shape[player]))
    return Restriction(game.shape, kept)


def gs_step(game: FiniteGame, restriction: Restriction) -> Restriction:
    """Strategies of T_i not strictly dominated on the restriction by any strategy of T_i."""
    return _pure_dominance_step(game, restriction, local=False)


def ls_step(game: FiniteGame, restriction: Restriction) -> Restriction:
    """Strategies of T_i not strictly dominated on the restriction by any strategy of S_i."""
    return _pure_dominance_step(game, restriction, local=True)


def _dominance_program(matrix: np.ndarray, strategy: int, domain: Sequence[int]) -> LinearProgram:
    """
    max e+ - e-  s.t.  sum_d m_d M[d,c] - e+ + e- >= M[s,c] for every column c,
    sum_d m_d = 1, all variables >= 0.
    """
    columns = matrix.shape[1]
    rows = [[matrix[d, c] for d in domain] + [-1, 1] for c in range(columns)]
    rhs = [matrix[strategy, c] for c in range(columns)]
    senses = [Sense.GE] * columns
    rows.append([1] * len(domain) + [0, 0])
    rhs.append(1)
    senses.append(Sense.EQ)
    objective = [0] * len(domain) + [1, -1]
    return LinearProgram.build(objective, rows, rhs, senses)


def _margin(matrix: np.ndarray, strategy: int, domain: Sequence[int]) -> Optional[Fraction]:
    if not domain or matrix.shape[1] == 0:
        return None
    result = lp_solve(_dominance_program(matrix, strategy, domain))
    if result.status != LpStatus.OPTIMAL:
        return None
    return result.value


def _point_best_response(matrix: np.ndarray, strategy: int, domain: Sequence[int]) -> bool:
    if matrix.shape[1] == 0:
        return False
    if not domain:
        return True
    best = matrix[list(domain)].max(axis=0)
    return bool(np.any(matrix[strategy] >= best))


def _mixed_dominated(matrix: np.ndarray, strategy: int, domain: Sequence[int], shortcuts: bool) -> bool:
    if not domain:
        return False
    if matrix.shape[1] == 0:
        return True
    if shortcuts:
        if any(np.all(matrix[d] > matrix[strategy]) for d in domain):
            return True
        if _point_best_response(matrix, strategy, domain):
            return False
    margin = _margin(matrix, strategy, domain)
    return margin is not None and margin > 0


def _mixed_dominator(matrix: np.ndarray, strategy: int, domain: Sequence[int]) -> Optional[Dict[int, Fraction]]:
    """Weights of a mixed strategy over ``domain`` strictly dominating ``strategy``, if one exists."""
    if not domain:
        return None
    if matrix.shape[1] == 0:
        return {domain[0]: Fraction(1)}
    result = lp_solve(_dominance_program(matrix, strategy, domain))
    if result.status != LpStatus.OPTIMAL or result.value <= 0:
        return None
    return {d: weight for d, weight in zip(domain, result.witness) if weight}


def _correlated_best_response(matrix: np.ndarray, strategy: int, domain: Sequence[int], shortcuts: bool) -> bool:
    columns = matrix.shape[1]
    if columns == 0:
        return False
    comparators = [d for d in domain if d != strategy]
    if not comparators:
        return True
    if shortcuts:
        if _point_best_response(matrix, strategy, domain):
            return True
        if any(np.all(matrix[d] > matrix[strategy]) for d in comparators):
            return False
    rows = [[matrix[strategy, c] - matrix[d, c] for c in range(columns)] for d in comparators]
    rows.append([1] * columns)
    senses = [Sense.GE] * len(comparators) + [Sense.EQ]
    rhs = [0] * len(comparators) + [1]
    return lp_feasible(rows, senses, rhs).feasible


def mixed_dominance_margin(
    game: FiniteGame, restriction: Restriction, player: int, strategy: Strategy, local: bool = False
) -> Optional[Fraction]:
    """
    Optimum ε of the mixed-dominance program for ``strategy``.

    Returns:
        The best ε, or None when the program has no finite optimum (empty
        dominator domain, or no opponent profiles in the restriction)
    """
    s = game.resolve_strategy(player, strategy)
    matrix = game.payoff_matrix(player, restriction)
    return _margin(matrix, s, _comparators(game, restriction, player, local))


def dominated_by_mixed(
    game: FiniteGame,
    restriction: Restriction,
    player: int,
    strategy: Strategy,
    local: bool = False,
    shortcuts: bool = False,
) -> bool:
    """Whether some mixed strategy over T_i (or S_i when local) strictly dominates ``strategy``."""
    s = game.resolve_strategy(player, strategy)
    matrix = game.payoff_matrix(player, restriction)
    return _mixed_dominated(matrix, s, _comparators(game, restriction, player, local), shortcuts)


def correlated_best_response_exists(
    game: FiniteGame,
    restriction: Restriction,
    player: int,
    strategy: Strategy,
    local: bool = False,
    shortcuts: bool = False,
) -> bool:
    """Whether ``strategy`` is a best response (against T_i, or S_i when local) to a correlated belief over S_{-i}."""
    s = game.resolve_strategy(player, strategy)
    matrix = game.payoff_matrix(player, restriction)
    return _correlated_best_response(matrix, s, _comparators(game, restriction, player, local), shortcuts)


def _mixed_dominance_step(game: FiniteGame, restriction: Restriction, local: bool, shortcuts: bool) -> Restriction:
    kept = []
    for player in range(game.player_count):
        matrix = game.payoff_matrix(player, restriction)
        domain = _comparators(game, restriction, player, local)
        kept.append([s for s in range(game.shape[player]) if not _mixed_dominated(matrix, s, domain, shortcuts)])
    return Restriction(game.shape, kept)


def mgs_step(game: FiniteGame, restriction: Restriction, shortcuts: bool = True) -> Restriction:
    """Strategies of T_i not strictly dominated on the restriction by a mixed strategy over T_i."""
    return _mixed_dominance_step(game, restriction, local=False, shortcuts=shortcuts)


def mls_step(game: FiniteGame, restriction: Restriction, shortcuts: bool = True) -> Restriction:
    """Strategies of T_i not strictly dominated on the restriction by a mixed strategy over S_i."""
    return _mixed_dominance_step(game, restriction, local=True, shortcuts=shortcuts)


def _best_response_step(
    game: FiniteGame, beliefs: BeliefStructure, restriction: Restriction, local: bool, shortcuts: bool
) -> Restriction:
    beliefs = BeliefStructure.of(beliefs)
    beliefs.check(game)
    kept = []
    for player in range(game.player_count):
        matrix = game.payoff_matrix(player, restriction)
        domain = _comparators(game, restriction, player, local)
        if beliefs.mixed:
            keep = [s for s in range(game.shape[player]) if _correlated_best_response(matrix, s, domain, shortcuts)]
        elif matrix.shape[1] == 0:
            keep = []
        elif not domain:
            keep = list(range(game.shape[player]))
        else:
            best = matrix[domain].max(axis=0)
            responds = np.any(matrix >= best, axis=1)
            keep = [s for s in range(game.shape[player]) if responds[s]]
        kept.append(keep)
    return Restriction(game.shape, kept)


def gr_step(game: FiniteGame, beliefs, restriction: Restriction, shortcuts: bool = True) -> Restriction:
    """Strategies of T_i that are best responses in the full game to some belief over S_{-i}."""
    return _best_response_step(game, beliefs, restriction, local=False, shortcuts=shortcuts)


def lr_step(game: FiniteGame, beliefs, restriction: Restriction, shortcuts: bool = True) -> Restriction:
    """Strategies of T_i that are best responses in the restriction to some belief over S_{-i}."""
    return _best_response_step(game, beliefs, restriction, local=True, shortcuts=shortcuts)


def _full_joint(player: int, strategy: int, opponents: Sequence[int]) -> Tuple[int, ...]:
    joint = list(opponents)
    joint.insert(player, strategy)
    return tuple(joint)


def is_best_response(
    game: FiniteGame,
    player: int,
    strategy: Strategy,
    belief: Union[Sequence[Strategy], Mapping[Sequence[Strategy], object]],
    domain: Optional[Restriction] = None,
) -> bool:
    """
    Whether ``strategy`` is a best response to ``belief``.

    Args:
        game: The game
        player: Player index (0-based)
        strategy: Label or index of the candidate
        belief: A point belief (one strategy per opponent) or a mapping from
            opponent profiles to probabilities
        domain: None for best responses in the full game; a restriction G
            for best responses in G (comparators S_i, support inside S_{-i})

    Raises:
        SupportOutsideNarrowingError: If the belief leaves S_{-i}
        InvalidBeliefError: If a correlated belief is not a distribution
        UnknownStrategyError: For unknown labels
    """
    s = game.resolve_strategy(player, strategy)
    narrowing = domain if domain is not None else game.full()
    if narrowing.shape != game.shape:
        raise GameMismatchError("domain is not a restriction of this game")
    others = [p for p in range(game.player_count) if p != player]

    if isinstance(belief, Mapping):
        weights: Dict[Tuple[int, ...], Fraction] = {}
        for profile, weight in belief.items():
            profile = tuple(profile)
            if len(profile) != len(others):
                raise InvalidBeliefError(f"opponent profile {profile} needs {len(others)} strategies")
            key = tuple(game.resolve_strategy(p, x) for p, x in zip(others, profile))
            weights[key] = weights.get(key, Fraction(0)) + Fraction(weight)
        if any(w < 0 for w in weights.values()) or sum(weights.values()) != 1:
            raise InvalidBeliefError("belief weights must be nonnegative and sum to 1")
    else:
        profile = tuple(belief)
        if len(profile) != len(others):
            raise InvalidBeliefError(f"point belief needs {len(others)} strategies")
        weights = {tuple(game.resolve_strategy(p, x) for p, x in zip(others, profile)): Fraction(1)}

    for key, weight in weights.items():
        if weight and any(x not in narrowing[p] for p, x in zip(others, key)):
            raise SupportOutsideNarrowingError(f"belief support {key} lies outside the restriction")

    def expected(candidate: int) -> Fraction:
        return sum(
            (w * game.payoffs[player][_full_joint(player, candidate, key)] for key, w in weights.items()),
            Fraction(0),
        )

    comparators = narrowing.sorted_indices(player) if domain is not None else range(game.shape[player])
    value = expected(s)
    return all(value >= expected(d) for d in comparators)


@dataclass(frozen=True)
class GameOperator:
    """A named step function on the restrictions of one game."""
    name: OperatorName
    game: FiniteGame
    beliefs: Optional[BeliefStructure]
    step: Callable[[Restriction], Restriction] = field(repr=False, compare=False)

    def __call__(self, restriction: Restriction) -> Restriction:
        return self.step(restriction)

    def apply(self, ordinal, restriction: Restriction) -> Restriction:
        return self.step(restriction)

    def top(self) -> Restriction:
        return self.game.full()

    @property
    def contracting(self) -> bool:
        return self.name.contracting

    @property
    def monotonic(self) -> bool:
        return self.name.monotonic

    @property
    def label(self) -> str:
        if self.beliefs is None:
            return self.name.value
        return f"{self.name.value}[{self.beliefs.kind.value}]"

    def render(self, restriction: Restriction) -> str:
        return self.game.render_restriction(restriction)


def make_operator(
    name: Union[str, OperatorName],
    game: FiniteGame,
    beliefs: Union[None, str, BeliefKind, BeliefStructure] = None,
    shortcuts: bool = True,
) -> GameOperator:
    """
    Wire an operator's step function.

    Args:
        name: Operator token or name (``gsbar``, ``GRbar``...)
        game: The game
        beliefs: Belief structure, required exactly for GR/LR variants
        shortcuts: Let mixed operators settle pure cases without an LP

    Raises:
        UnknownOperatorError: For an unknown token
        UnsupportedBeliefsError: Beliefs missing, superfluous or unsupported
    """
    op_name = OperatorName.from_token(name)
    structure: Optional[BeliefStructure] = None
    if op_name.rationalizability:
        if beliefs is None:
            raise UnsupportedBeliefsError(f"{op_name.value} needs a belief structure")
        structure = BeliefStructure.of(beliefs)
        structure.check(game)
    elif beliefs is not None:
        raise UnsupportedBeliefsError(f"{op_name.value} is a dominance operator and takes no beliefs")

    base = op_name.base
    if base == OperatorName.GS:
        def base_step(g): return gs_step(game, g)
    elif base == OperatorName.LS:
        def base_step(g): return ls_step(game, g)
    elif base == OperatorName.MGS:
        def base_step(g): return mgs_step(game, g, shortcuts)
    elif base == OperatorName.MLS:
        def base_step(g): return mls_step(game, g, shortcuts)
    elif base == OperatorName.GR:
        def base_step(g): return gr_step(game, structure, g, shortcuts)
    else:
        def base_step(g): return lr_step(game, structure, g, shortcuts)

    cached = lru_cache(maxsize=4096)(base_step)
    if op_name.contracting:
        def step(g): return cached(g) & g
    else:
        step = cached

    logger.debug(f"Built operator {op_name.value} for game {game.name} (beliefs={structure})")
    return GameOperator(op_name, game, structure, step)


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of a per-restriction property check with its witnesses."""
    name: str
    holds: bool
    witnesses: Dict[Tuple[int, int], int]
    violation: Optional[Tuple[int, int]] = None
    mixtures: Dict[Tuple[int, int], Dict[int, Fraction]] = field(default_factory=dict)


def property_report(game: FiniteGame, restriction: Restriction, name: str) -> PropertyReport:
    """
    Evaluate property C, D, E or MD at a restriction.

    C: every strategy of T_i dominated on G by some T_i strategy has a dominator
       in T_i that is itself undominated on G.
    D: every strategy of T_i dominated on G by some T_i strategy has a dominator in S_i.
    E: every strategy of S_i dominated on G by some S_i strategy has a dominator
       in S_i undominated by S_i strategies.
    MD: every strategy of T_i dominated on G by a mixed strategy over T_i is
        dominated on G by a mixed strategy over S_i.

    Witnesses map (player, strategy) to the dominator found; for MD the
    dominating mixtures are reported in ``mixtures`` instead.
    """
    name = name.upper()
    if name not in ("C", "D", "E", "MD"):
        raise ValueError(f"unknown property '{name}'")
    if restriction.shape != game.shape:
        raise GameMismatchError("restriction is not of this game")
    if name == "MD":
        return _mixed_property_report(game, restriction)

    witnesses: Dict[Tuple[int, int], int] = {}
    for player in range(game.player_count):
        dominance = _dominance_matrix(game.payoff_matrix(player, restriction))
        everyone = list(range(game.shape[player]))
        current = restriction.sorted_indices(player)
        if name == "C":
            candidates, pool = everyone, [d for d in everyone if not dominance[:, d].any()]
        elif name == "D":
            candidates, pool = everyone, current
        else:
            candidates = current
            pool = [d for d in current if not any(dominance[e, d] for e in current)]
        for s in candidates:
            dominated = any(dominance[d, s] for d in (current if name == "E" else everyone))
            if not dominated:
                continue
            witness = next((d for d in pool if dominance[d, s]), None)
            if witness is None:
                return PropertyReport(name, False, witnesses, (player, s))
            witnesses[(player, s)] = witness
    return PropertyReport(name, True, witnesses)


def _mixed_property_report(game: FiniteGame, restriction: Restriction) -> PropertyReport:
    mixtures: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for player in range(game.player_count):
        matrix = game.payoff_matrix(player, restriction)
        everyone = list(range(game.shape[player]))
        current = restriction.sorted_indices(player)
        for s in everyone:
            if not _mixed_dominated(matrix, s, everyone, shortcuts=True):
                continue
            mixture = _mixed_dominator(matrix, s, current)
            if mixture is None:
                return PropertyReport("MD", False, {}, (player, s), mixtures)
            mixtures[(player, s)] = mixture
    return PropertyReport("MD", True, {}, None, mixtures)


def check_property_C_at(game: FiniteGame, restriction: Restriction) -> bool:
    return property_report(game, restriction, "C").holds


def check_property_D_at(game: FiniteGame, restriction: Restriction) -> bool:
    return property_report(game, restriction, "D").holds


def check_property_E_at(game: FiniteGame, restriction: Restriction) -> bool:
    return property_report(game, restriction, "E").holds


def check_property_MD_at(game: FiniteGame, restriction: Restriction) -> bool:
    return property_report(game, restriction, "MD").holds


def check_property_B(game: FiniteGame, beliefs) -> bool:
    """
    Every belief over the full game admits a best response in the full game.

    Point beliefs are verified profile by profile. For correlated (and
    two-player independent) beliefs the expected payoff is linear in the
    belief, so the finitely many pure strategies always contain a maximiser;
    the property holds for every finite game and is returned as such.
    """
    structure = BeliefStructure.of(beliefs)
    if structure.mixed:
        return True
    full = game.full()
    for player in range(game.player_count):
        matrix = game.payoff_matrix(player, full)
        best = matrix.max(axis=0)
        if not np.all(np.any(matrix == best, axis=0)):
            return False
    return True
