"""
Finite strategic games, their restrictions, and the line-oriented game file format.

A restriction picks a subset of every player's strategies; the restrictions of
a game, ordered componentwise by inclusion, form the complete lattice on which
every elimination operator acts. Payoffs are exact ``Fraction`` values held in
per-player numpy object tensors so that slicing a restriction out of a game is
a single ``np.ix_`` call.
"""

import itertools
import logging
import re
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

Rational = Fraction
Strategy = Union[int, str]
JointStrategy = Tuple[int, ...]

_RATIONAL_PATTERN = re.compile(r"^[+-]?\d+(?:/\d+)?$")
# used by the restriction syntax "{a,b} | {c}"
RESERVED_LABEL_CHARACTERS = ",|{}"


class GameError(ValueError):
    """Base exception for game construction and restriction errors"""
    pass


class GameParseError(GameError):
    """A game file could not be parsed; carries the offending line number"""

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


class DuplicateLabelError(GameParseError):
    pass


class ReservedLabelError(GameParseError):
    pass


class MissingPayoffRowError(GameParseError):
    pass


class DuplicatePayoffRowError(GameParseError):
    pass


class MalformedRationalError(GameParseError):
    pass


class PlayerCountMismatchError(GameParseError):
    pass


class UnknownLabelError(GameParseError):
    pass


class GameMismatchError(GameError):
    """Two values that must belong to the same game do not"""
    pass


class UnknownStrategyError(GameError):
    """A strategy label or index does not exist for the given player"""
    pass


class RestrictionFormatError(GameError):
    """Text could not be read back as a restriction"""
    pass


def parse_rational(token: str) -> Fraction:
    """Parse an integer or ``a/b`` token into an exact rational."""
    if not _RATIONAL_PATTERN.match(token):
        raise ValueError(f"malformed rational '{token}'")
    value = Fraction(token)
    return value


def _reserved_characters(label: str) -> str:
    return "".join(c for c in RESERVED_LABEL_CHARACTERS if c in label)


def render_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class Restriction:
    """
    A restriction (S_1, ..., S_n) of a game, stored as frozensets of strategy indices.

    Restrictions are immutable and hashable. Empty components are valid values.
    """

    __slots__ = ("shape", "sets", "_hash")

    def __init__(self, shape: Sequence[int], sets: Iterable[Iterable[int]]):
        shape = tuple(int(n) for n in shape)
        sets = tuple(frozenset(int(s) for s in component) for component in sets)
        if len(sets) != len(shape):
            raise GameMismatchError(f"restriction has {len(sets)} components for {len(shape)} players")
        for player, (count, component) in enumerate(zip(shape, sets)):
            for s in component:
                if s < 0 or s >= count:
                    raise UnknownStrategyError(f"player {player + 1} has no strategy index {s}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "_hash", hash((shape, sets)))

    def __setattr__(self, name, value):
        raise AttributeError("Restriction is immutable")

    @classmethod
    def full(cls, shape: Sequence[int]) -> "Restriction":
        return cls(shape, [range(n) for n in shape])

    @classmethod
    def empty(cls, shape: Sequence[int]) -> "Restriction":
        return cls(shape, [() for _ in shape])

    @property
    def player_count(self) -> int:
        return len(self.shape)

    def __getitem__(self, player: int) -> frozenset:
        return self.sets[player]

    def __iter__(self) -> Iterator[frozenset]:
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Restriction):
            return NotImplemented
        return self.shape == other.shape and self.sets == other.sets

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        body = " | ".join("{" + ",".join(str(s) for s in sorted(c)) + "}" for c in self.sets)
        return f"Restriction({body})"

    def size(self) -> int:
        """Total number of strategies kept across all players"""
        return sum(len(c) for c in self.sets)

    def is_empty(self) -> bool:
        return all(not c for c in self.sets)

    def has_empty_component(self) -> bool:
        return any(not c for c in self.sets)

    def sorted_indices(self, player: int) -> List[int]:
        return sorted(self.sets[player])

    def leq(self, other: "Restriction") -> bool:
        return restriction_leq(self, other)

    def meet(self, other: "Restriction") -> "Restriction":
        return restriction_meet(self, other)

    def join(self, other: "Restriction") -> "Restriction":
        return restriction_join(self, other)

    __le__ = leq
    __and__ = meet
    __or__ = join

    def removed_from(self, larger: "Restriction") -> List[Tuple[int, int]]:
        """(player, strategy) pairs present in ``larger`` but not in this restriction, in index order"""
        _check_same_shape(self, larger)
        return [
            (player, s)
            for player, component in enumerate(larger.sets)
            for s in sorted(component - self.sets[player])
        ]

    def without(self, pairs: Iterable[Tuple[int, int]]) -> "Restriction":
        """A copy with the given (player, strategy) pairs removed"""
        dropped: Dict[int, set] = {}
        for player, s in pairs:
            dropped.setdefault(player, set()).add(s)
        return Restriction(
            self.shape,
            [component - dropped.get(player, set()) for player, component in enumerate(self.sets)],
        )


def _check_same_shape(a: Restriction, b: Restriction):
    if a.shape != b.shape:
        raise GameMismatchError(f"restrictions of different games: shapes {a.shape} and {b.shape}")


def restriction_meet(a: Restriction, b: Restriction) -> Restriction:
    """Componentwise intersection."""
    _check_same_shape(a, b)
    return Restriction(a.shape, [x & y for x, y in zip(a.sets, b.sets)])


def restriction_join(a: Restriction, b: Restriction) -> Restriction:
    """Componentwise union."""
    _check_same_shape(a, b)
    return Restriction(a.shape, [x | y for x, y in zip(a.sets, b.sets)])


def restriction_leq(a: Restriction, b: Restriction) -> bool:
    """True iff every component of ``a`` is a subset of the matching component of ``b``."""
    _check_same_shape(a, b)
    return all(x <= y for x, y in zip(a.sets, b.sets))


class FiniteGame:
    """
    A finite strategic game with named strategies and exact rational payoffs.

    Payoffs are stored as one numpy object array per player, indexed by the
    joint strategy (one axis per player).
    """

    def __init__(self, name: str, strategy_labels: Sequence[Sequence[str]], payoffs: Sequence[np.ndarray]):
        """
        Args:
            name: Game name
            strategy_labels: Per player, the ordered list of distinct strategy labels
            payoffs: Per player, an object array of Fractions with one axis per player

        Raises:
            GameError: If the labels or payoff tensors are inconsistent
        """
        labels = tuple(tuple(str(label) for label in player_labels) for player_labels in strategy_labels)
        if len(labels) < 2:
            raise GameError("a game needs at least two players")
        for player, player_labels in enumerate(labels):
            if not player_labels:
                raise GameError(f"player {player + 1} has no strategies")
            if len(set(player_labels)) != len(player_labels):
                raise GameError(f"player {player + 1} has duplicate strategy labels")
            for label in player_labels:
                if _reserved_characters(label):
                    raise GameError(f"label '{label}' of player {player + 1} contains reserved characters")
        shape = tuple(len(player_labels) for player_labels in labels)
        if len(payoffs) != len(labels):
            raise GameError(f"expected {len(labels)} payoff tensors, got {len(payoffs)}")
        tensors = []
        for player, tensor in enumerate(payoffs):
            tensor = np.asarray(tensor, dtype=object)
            if tensor.shape != shape:
                raise GameError(f"payoff tensor of player {player + 1} has shape {tensor.shape}, expected {shape}")
            tensor = np.vectorize(Fraction, otypes=[object])(tensor) if tensor.size else tensor
            tensor.flags.writeable = False
            tensors.append(tensor)

        self.name = name
        self.strategy_labels = labels
        self.shape = shape
        self.payoffs = tuple(tensors)
        self._label_index = tuple({label: k for k, label in enumerate(player_labels)} for player_labels in labels)

    @classmethod
    def from_function(
        cls,
        name: str,
        strategy_labels: Sequence[Sequence[str]],
        payoff: Callable[[JointStrategy], Sequence],
    ) -> "FiniteGame":
        """Build a game by evaluating ``payoff`` on every joint strategy (as an index tuple)."""
        shape = tuple(len(player_labels) for player_labels in strategy_labels)
        tensors = [np.empty(shape, dtype=object) for _ in shape]
        for joint in itertools.product(*(range(n) for n in shape)):
            vector = payoff(joint)
            if len(vector) != len(shape):
                raise GameError(f"payoff vector at {joint} has {len(vector)} entries, expected {len(shape)}")
            for player, value in enumerate(vector):
                tensors[player][joint] = Fraction(value)
        return cls(name, strategy_labels, tensors)

    @property
    def player_count(self) -> int:
        return len(self.shape)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteGame):
            return NotImplemented
        return (
            self.strategy_labels == other.strategy_labels
            and all(np.array_equal(a, b) for a, b in zip(self.payoffs, other.payoffs))
        )

    __hash__ = object.__hash__

    def __repr__(self) -> str:
        return f"FiniteGame({self.name!r}, shape={self.shape})"

    def full(self) -> Restriction:
        return Restriction.full(self.shape)

    def empty(self) -> Restriction:
        return Restriction.empty(self.shape)

    def resolve_strategy(self, player: int, strategy: Strategy) -> int:
        """Translate a label or index of ``player`` into an index."""
        if player < 0 or player >= self.player_count:
            raise UnknownStrategyError(f"no player {player + 1} in game {self.name}")
        if isinstance(strategy, str):
            try:
                return self._label_index[player][strategy]
            except KeyError:
                raise UnknownStrategyError(f"player {player + 1} has no strategy '{strategy}'") from None
        index = int(strategy)
        if index < 0 or index >= self.shape[player]:
            raise UnknownStrategyError(f"player {player + 1} has no strategy index {index}")
        return index

    def index_of(self, player: int, label: str) -> int:
        return self.resolve_strategy(player, label)

    def payoff(self, player: int, joint: Sequence[Strategy]) -> Fraction:
        indices = tuple(self.resolve_strategy(p, s) for p, s in enumerate(joint))
        return self.payoffs[player][indices]

    def restriction(self, labels: Sequence[Iterable[Strategy]]) -> Restriction:
        """Build a restriction from per-player labels (or indices)."""
        if len(labels) != self.player_count:
            raise GameMismatchError(f"expected {self.player_count} components, got {len(labels)}")
        return Restriction(
            self.shape,
            [[self.resolve_strategy(player, s) for s in component] for player, component in enumerate(labels)],
        )

    def labels_of(self, restriction: Restriction) -> List[List[str]]:
        """Per-player labels of a restriction in declaration order."""
        self._check_restriction(restriction)
        return [
            [self.strategy_labels[player][s] for s in restriction.sorted_indices(player)]
            for player in range(self.player_count)
        ]

    def render_restriction(self, restriction: Restriction) -> str:
        """Render as ``{C,D} | {C}``."""
        return " | ".join("{" + ",".join(labels) + "}" for labels in self.labels_of(restriction))

    def _check_restriction(self, restriction: Restriction):
        if restriction.shape != self.shape:
            raise GameMismatchError(f"restriction of shape {restriction.shape} used with game {self.name} {self.shape}")

    def opponent_profiles(self, player: int, restriction: Restriction) -> List[JointStrategy]:
        """Joint opponent strategies in S_{-i}, lexicographic, each as a tuple over the other players."""
        self._check_restriction(restriction)
        others = [restriction.sorted_indices(p) for p in range(self.player_count) if p != player]
        return list(itertools.product(*others))

    def payoff_matrix(self, player: int, restriction: Restriction) -> np.ndarray:
        """
        Payoffs of ``player`` with rows T_i (all own strategies) and columns S_{-i}.

        Columns follow the order of ``opponent_profiles``. The result has shape
        (|T_i|, |S_{-i}|) and may have zero columns.
        """
        self._check_restriction(restriction)
        axes = [
            np.arange(self.shape[p], dtype=np.intp) if p == player
            else np.array(restriction.sorted_indices(p), dtype=np.intp)
            for p in range(self.player_count)
        ]
        block = self.payoffs[player][np.ix_(*axes)]
        block = np.moveaxis(block, player, 0)
        columns = int(np.prod([len(a) for p, a in enumerate(axes) if p != player], dtype=np.int64))
        return block.reshape(self.shape[player], columns)

    def relabel(self, mappings: Sequence[Dict[str, str]], name: Optional[str] = None) -> "FiniteGame":
        """A copy with strategy labels renamed; unmapped labels are kept."""
        labels = [
            [mappings[player].get(label, label) if player < len(mappings) else label for label in player_labels]
            for player, player_labels in enumerate(self.strategy_labels)
        ]
        return FiniteGame(name or self.name, labels, [t.copy() for t in self.payoffs])


def parse_game(text: str) -> FiniteGame:
    """
    Parse the line-oriented game format.

    Args:
        text: File contents (``#`` starts a comment)

    Returns:
        The parsed FiniteGame

    Raises:
        GameParseError: Subclass naming the offending line
    """
    name: Optional[str] = None
    players: Optional[int] = None
    labels: List[List[str]] = []
    index: List[Dict[str, int]] = []
    rows: Dict[JointStrategy, List[Fraction]] = {}
    last_line = 0

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        last_line = line_number
        tokens = line.split()
        directive = tokens[0]

        if name is None:
            if directive != "game" or len(tokens) != 2:
                raise GameParseError(line_number, "expected 'game <name>'")
            name = tokens[1]
            continue

        if players is None:
            if directive != "players" or len(tokens) != 2 or not tokens[1].isdigit():
                raise GameParseError(line_number, "expected 'players <n>'")
            players = int(tokens[1])
            if players < 2:
                raise PlayerCountMismatchError(line_number, f"a game needs at least 2 players, got {players}")
            continue

        if directive == "strategies":
            if len(labels) == players:
                raise PlayerCountMismatchError(line_number, f"more strategies lines than the {players} declared players")
            if rows:
                raise GameParseError(line_number, "strategies must be declared before payoff rows")
            expected = len(labels) + 1
            if len(tokens) < 2 or tokens[1] != str(expected):
                raise PlayerCountMismatchError(line_number, f"expected 'strategies {expected} ...'")
            player_labels = tokens[2:]
            if not player_labels:
                raise GameParseError(line_number, f"player {expected} has no strategies")
            seen: Dict[str, int] = {}
            for label in player_labels:
                reserved = _reserved_characters(label)
                if reserved:
                    raise ReservedLabelError(
                        line_number, f"label '{label}' of player {expected} contains reserved characters {reserved}"
                    )
                if label in seen:
                    raise DuplicateLabelError(line_number, f"duplicate label '{label}' for player {expected}")
                seen[label] = len(seen)
            labels.append(player_labels)
            index.append(seen)
            continue

        if directive == "payoff":
            if len(labels) != players:
                raise PlayerCountMismatchError(
                    line_number, f"payoff row before all {players} strategies lines (found {len(labels)})"
                )
            if ":" not in tokens:
                raise GameParseError(line_number, "expected 'payoff <labels> : <values>'")
            split = tokens.index(":")
            joint_labels, values = tokens[1:split], tokens[split + 1:]
            if len(joint_labels) != players or len(values) != players:
                raise PlayerCountMismatchError(
                    line_number,
                    f"payoff row needs {players} labels and {players} values, "
                    f"got {len(joint_labels)} and {len(values)}",
                )
            joint = []
            for player, label in enumerate(joint_labels):
                if label not in index[player]:
                    raise UnknownLabelError(line_number, f"player {player + 1} has no strategy '{label}'")
                joint.append(index[player][label])
            joint = tuple(joint)
            if joint in rows:
                raise DuplicatePayoffRowError(line_number, f"duplicate payoff row for {' '.join(joint_labels)}")
            vector = []
            for token in values:
                try:
                    vector.append(parse_rational(token))
                except (ValueError, ZeroDivisionError):
                    raise MalformedRationalError(line_number, f"malformed rational '{token}'") from None
            rows[joint] = vector
            continue

        raise GameParseError(line_number, f"unknown directive '{directive}'")

    if name is None:
        raise GameParseError(max(last_line, 1), "empty game file")
    if players is None:
        raise GameParseError(last_line, "missing 'players <n>'")
    if len(labels) != players:
        raise PlayerCountMismatchError(last_line, f"declared {players} players but found {len(labels)} strategies lines")
    for joint in itertools.product(*(range(len(player_labels)) for player_labels in labels)):
        if joint not in rows:
            missing = " ".join(labels[p][s] for p, s in enumerate(joint))
            raise MissingPayoffRowError(last_line, f"missing payoff row for {missing}")

    game = FiniteGame.from_function(name, labels, lambda joint: rows[joint])
    logger.info(f"Parsed game {name}: {players} players, shape {game.shape}")
    return game


def render_game(game: FiniteGame) -> str:
    """Canonical file text; ``parse_game(render_game(g)) == g``."""
    lines = [f"game {game.name}", f"players {game.player_count}"]
    for player, player_labels in enumerate(game.strategy_labels):
        lines.append(f"strategies {player + 1} " + " ".join(player_labels))
    for joint in itertools.product(*(range(n) for n in game.shape)):
        joint_labels = " ".join(game.strategy_labels[p][s] for p, s in enumerate(joint))
        values = " ".join(render_rational(game.payoffs[p][joint]) for p in range(game.player_count))
        lines.append(f"payoff {joint_labels} : {values}")
    return "\n".join(lines) + "\n"


def parse_restriction(game: FiniteGame, text: str) -> Restriction:
    """Read back a restriction rendered as ``{C,D} | {C}``."""
    parts = [part.strip() for part in text.split("|")]
    if len(parts) != game.player_count:
        raise RestrictionFormatError(f"expected {game.player_count} components in '{text}'")
    components = []
    for part in parts:
        if not (part.startswith("{") and part.endswith("}")):
            raise RestrictionFormatError(f"component '{part}' is not braced")
        body = part[1:-1].strip()
        components.append([label.strip() for label in body.split(",")] if body else [])
    return game.restriction(components)
