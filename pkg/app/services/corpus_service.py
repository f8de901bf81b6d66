"""
Seeded random games for property suites and order-independence experiments.
"""

import logging
import string
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .game_service import FiniteGame

logger = logging.getLogger(__name__)

DEFAULT_PLAYERS: Tuple[int, int] = (2, 3)
DEFAULT_STRATEGIES: Tuple[int, int] = (2, 5)
DEFAULT_PAYOFFS: Tuple[int, int] = (-9, 9)


def _labels(player: int, count: int) -> List[str]:
    prefix = string.ascii_lowercase[player % 26]
    return [f"{prefix}{k}" for k in range(count)]


def random_game(
    rng: np.random.Generator,
    players: Optional[int] = None,
    strategies: Optional[Sequence[int]] = None,
    payoff_range: Tuple[int, int] = DEFAULT_PAYOFFS,
    name: str = "random",
    player_range: Tuple[int, int] = DEFAULT_PLAYERS,
    strategy_range: Tuple[int, int] = DEFAULT_STRATEGIES,
) -> FiniteGame:
    """
    Draw an integer-payoff game.

    Args:
        rng: numpy Generator supplying every draw
        players: Player count, drawn from ``player_range`` when omitted
        strategies: Strategy count per player, drawn from ``strategy_range`` when omitted
        payoff_range: Inclusive bounds of the integer payoffs
        name: Game name

    Returns:
        FiniteGame with labels ``a0 a1 ...`` for player 1, ``b0 ...`` for player 2
    """
    low, high = payoff_range
    if low > high:
        raise ValueError(f"empty payoff range [{low}, {high}]")
    if players is None:
        players = int(rng.integers(player_range[0], player_range[1] + 1))
    if players < 2:
        raise ValueError("a game needs at least two players")
    if strategies is None:
        strategies = [int(n) for n in rng.integers(strategy_range[0], strategy_range[1] + 1, size=players)]
    if len(strategies) != players:
        raise ValueError(f"{len(strategies)} strategy counts for {players} players")

    shape = tuple(strategies)
    tensors = [rng.integers(low, high + 1, size=shape) for _ in range(players)]
    labels = [_labels(player, n) for player, n in enumerate(shape)]
    return FiniteGame(name, labels, tensors)


def random_corpus(
    seed: int,
    count: int,
    players: Optional[int] = None,
    payoff_range: Tuple[int, int] = DEFAULT_PAYOFFS,
    player_range: Tuple[int, int] = DEFAULT_PLAYERS,
    strategy_range: Tuple[int, int] = DEFAULT_STRATEGIES,
) -> List[FiniteGame]:
    """``count`` games from one seeded generator; the same seed gives the same corpus."""
    rng = np.random.default_rng(seed)
    games = [
        random_game(
            rng,
            players=players,
            payoff_range=payoff_range,
            name=f"random{seed}_{k}",
            player_range=player_range,
            strategy_range=strategy_range,
        )
        for k in range(count)
    ]
    logger.info(f"Generated corpus of {count} games from seed {seed}")
    return games
