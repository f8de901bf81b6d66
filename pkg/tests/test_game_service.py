import unittest
from fractions import Fraction
from pathlib import Path

from hypothesis import given, settings, strategies as st

from app.services.game_service import (
    DuplicateLabelError,
    DuplicatePayoffRowError,
    FiniteGame,
    GameError,
    GameMismatchError,
    GameParseError,
    MalformedRationalError,
    MissingPayoffRowError,
    PlayerCountMismatchError,
    ReservedLabelError,
    Restriction,
    RestrictionFormatError,
    UnknownLabelError,
    UnknownStrategyError,
    parse_game,
    parse_rational,
    parse_restriction,
    render_game,
    render_rational,
    restriction_join,
    restriction_leq,
    restriction_meet,
)

FIXTURES = Path(__file__).parent / "fixtures"

PD_HEADER = "game pd\nplayers 2\nstrategies 1 C D\nstrategies 2 C D\n"
PD_ROWS = [
    "payoff C C : 2 2",
    "payoff C D : 0 3",
    "payoff D C : 3 0",
    "payoff D D : 1 1",
]

SHAPE = (2, 3, 4)


def restrictions(shape=SHAPE):
    return st.tuples(*(st.frozensets(st.integers(0, n - 1)) for n in shape)).map(
        lambda sets: Restriction(shape, sets)
    )


class TestRationals(unittest.TestCase):
    """Test cases for rational tokens"""

    def test_parse_integer_and_fraction(self):
        self.assertEqual(parse_rational("7"), Fraction(7))
        self.assertEqual(parse_rational("-3/6"), Fraction(-1, 2))

    def test_parse_rejects_decimals(self):
        with self.assertRaises(ValueError):
            parse_rational("0.5")

    def test_render(self):
        self.assertEqual(render_rational(Fraction(4, 2)), "2")
        self.assertEqual(render_rational(Fraction(-1, 3)), "-1/3")


class TestParseGame(unittest.TestCase):
    """Test cases for the game file format"""

    def test_prisoners_dilemma(self):
        game = parse_game(PD_HEADER + "\n".join(PD_ROWS))
        self.assertEqual(game.name, "pd")
        self.assertEqual(game.shape, (2, 2))
        self.assertEqual(game.strategy_labels, (("C", "D"), ("C", "D")))
        self.assertEqual(game.payoff(0, ("D", "D")), Fraction(1))
        self.assertEqual(game.payoff(1, ("C", "D")), Fraction(3))

    def test_fixture_matches_inline_text(self):
        text = (FIXTURES / "pd.game").read_text(encoding="utf-8")
        self.assertEqual(parse_game(text), parse_game(PD_HEADER + "\n".join(PD_ROWS)))

    def test_comments_and_blank_lines_are_ignored(self):
        text = "# header\n\n" + PD_HEADER + "\n".join(row + "  # note" for row in PD_ROWS)
        self.assertEqual(parse_game(text).shape, (2, 2))

    def test_rational_payoffs(self):
        text = PD_HEADER + "\n".join(PD_ROWS[:-1] + ["payoff D D : 1/3 -2/4"])
        game = parse_game(text)
        self.assertEqual(game.payoff(0, ("D", "D")), Fraction(1, 3))
        self.assertEqual(game.payoff(1, ("D", "D")), Fraction(-1, 2))

    def test_duplicate_row(self):
        text = PD_HEADER + "\n".join(PD_ROWS + ["payoff C C : 5 5"])
        with self.assertRaises(DuplicatePayoffRowError) as ctx:
            parse_game(text)
        self.assertEqual(ctx.exception.line, 9)
        self.assertIn("line 9", str(ctx.exception))

    def test_missing_row(self):
        with self.assertRaises(MissingPayoffRowError):
            parse_game(PD_HEADER + "\n".join(PD_ROWS[:3]))

    def test_malformed_rational(self):
        text = PD_HEADER + "\n".join(PD_ROWS[:-1] + ["payoff D D : 1 x"])
        with self.assertRaises(MalformedRationalError) as ctx:
            parse_game(text)
        self.assertEqual(ctx.exception.line, 8)

    def test_zero_denominator(self):
        text = PD_HEADER + "\n".join(PD_ROWS[:-1] + ["payoff D D : 1/0 1"])
        with self.assertRaises(MalformedRationalError):
            parse_game(text)

    def test_duplicate_label(self):
        text = "game g\nplayers 2\nstrategies 1 C C\nstrategies 2 C D\n"
        with self.assertRaises(DuplicateLabelError) as ctx:
            parse_game(text)
        self.assertEqual(ctx.exception.line, 3)

    def test_reserved_characters_in_labels(self):
        for label in ("a,b", "x|y", "{C}", "}"):
            text = f"game g\nplayers 2\nstrategies 1 C D\n# player 2\nstrategies 2 C {label}\n"
            with self.subTest(label=label):
                with self.assertRaises(ReservedLabelError) as ctx:
                    parse_game(text)
                self.assertEqual(ctx.exception.line, 5)
                self.assertIsInstance(ctx.exception, GameParseError)

    def test_player_count_mismatch(self):
        text = PD_HEADER + "payoff C C : 2 2 2"
        with self.assertRaises(PlayerCountMismatchError):
            parse_game(text)

    def test_unknown_label(self):
        text = PD_HEADER + "payoff C X : 2 2"
        with self.assertRaises(UnknownLabelError):
            parse_game(text)

    def test_missing_header(self):
        with self.assertRaises(GameParseError) as ctx:
            parse_game("players 2\n")
        self.assertEqual(ctx.exception.line, 1)

    def test_every_parse_error_is_a_value_error(self):
        with self.assertRaises(ValueError):
            parse_game("")

    def test_render_round_trip(self):
        for name in ("pd.game", "mixed_dominance.game", "nonmonotone.game"):
            game = parse_game((FIXTURES / name).read_text(encoding="utf-8"))
            self.assertEqual(parse_game(render_game(game)), game)
            self.assertEqual(render_game(parse_game(render_game(game))), render_game(game))


class TestFiniteGame(unittest.TestCase):
    """Test cases for FiniteGame"""

    def setUp(self):
        self.game = parse_game(PD_HEADER + "\n".join(PD_ROWS))

    def test_restriction_by_labels(self):
        g = self.game.restriction([["D"], ["C", "D"]])
        self.assertEqual(g.sets, (frozenset({1}), frozenset({0, 1})))
        self.assertEqual(self.game.render_restriction(g), "{D} | {C,D}")

    def test_empty_component_renders_braces(self):
        g = self.game.restriction([[], ["C"]])
        self.assertEqual(self.game.render_restriction(g), "{} | {C}")

    def test_unknown_strategy(self):
        with self.assertRaises(UnknownStrategyError):
            self.game.restriction([["X"], ["C"]])

    def test_payoff_matrix_rows_are_all_strategies(self):
        g = self.game.restriction([["C"], ["D"]])
        matrix = self.game.payoff_matrix(0, g)
        self.assertEqual(matrix.shape, (2, 1))
        self.assertEqual(list(matrix[:, 0]), [Fraction(0), Fraction(1)])

    def test_payoff_matrix_with_empty_opponents(self):
        g = self.game.restriction([["C", "D"], []])
        self.assertEqual(self.game.payoff_matrix(0, g).shape, (2, 0))

    def test_payoff_matrix_three_players(self):
        game = FiniteGame.from_function(
            "sum", [["a0", "a1"], ["b0", "b1", "b2"], ["c0", "c1"]], lambda joint: (sum(joint), 0, joint[2])
        )
        g = game.restriction([["a0"], ["b1", "b2"], ["c1"]])
        matrix = game.payoff_matrix(2, g)
        self.assertEqual(matrix.shape, (2, 2))
        self.assertEqual(game.opponent_profiles(2, g), [(0, 1), (0, 2)])
        self.assertEqual(list(matrix[1]), [Fraction(1), Fraction(1)])

    def test_parse_restriction_inverts_rendering(self):
        for labels in ([["C", "D"], ["C"]], [[], ["D"]], [["D"], ["C", "D"]]):
            g = self.game.restriction(labels)
            self.assertEqual(parse_restriction(self.game, self.game.render_restriction(g)), g)

    def test_parse_restriction_rejects_bad_text(self):
        with self.assertRaises(RestrictionFormatError):
            parse_restriction(self.game, "{C}")
        with self.assertRaises(RestrictionFormatError):
            parse_restriction(self.game, "C | {D}")

    def test_relabel(self):
        renamed = self.game.relabel([{"C": "cooperate"}, {"D": "defect"}])
        self.assertEqual(renamed.strategy_labels, (("cooperate", "D"), ("C", "defect")))
        self.assertEqual(renamed.payoff(0, ("D", "defect")), Fraction(1))

    def test_relabel_rejects_reserved_characters(self):
        with self.assertRaises(GameError):
            self.game.relabel([{"C": "C,D"}])
        with self.assertRaises(GameError):
            FiniteGame.from_function("g", [["a|b"], ["c"]], lambda joint: (0, 0))


class TestRestrictionLattice(unittest.TestCase):
    """Test cases for the restriction lattice"""

    def setUp(self):
        self.game = parse_game(PD_HEADER + "\n".join(PD_ROWS))

    def test_meet_example(self):
        a = self.game.restriction([["C", "D"], ["C"]])
        b = self.game.restriction([["D"], ["C", "D"]])
        self.assertEqual(restriction_meet(a, b), self.game.restriction([["D"], ["C"]]))

    def test_leq_examples(self):
        full = self.game.full()
        self.assertTrue(restriction_leq(self.game.restriction([["D"], ["C"]]), full))
        self.assertFalse(restriction_leq(
            self.game.restriction([["C"], ["C"]]), self.game.restriction([["D"], ["C", "D"]])
        ))

    def test_empty_is_least(self):
        empty = self.game.empty()
        self.assertTrue(empty.is_empty())
        self.assertTrue(empty <= self.game.restriction([["C"], []]))

    def test_mismatched_shapes(self):
        with self.assertRaises(GameMismatchError):
            restriction_meet(Restriction.full((2, 2)), Restriction.full((2, 3)))

    def test_removed_from(self):
        full = self.game.full()
        g = self.game.restriction([["D"], ["C", "D"]])
        self.assertEqual(g.removed_from(full), [(0, 0)])
        self.assertEqual(full.without([(0, 0)]), g)

    @settings(max_examples=200, deadline=None)
    @given(restrictions(), restrictions(), restrictions())
    def test_lattice_laws(self, a, b, c):
        self.assertEqual(a & b, b & a)
        self.assertEqual(a | b, b | a)
        self.assertEqual((a & b) & c, a & (b & c))
        self.assertEqual((a | b) | c, a | (b | c))
        self.assertEqual(a & (a | b), a)
        self.assertEqual(a | (a & b), a)
        self.assertEqual(a & a, a)
        self.assertEqual(restriction_join(a, b), a | b)

    @settings(max_examples=200, deadline=None)
    @given(restrictions(), restrictions())
    def test_order_agrees_with_meet(self, a, b):
        self.assertEqual(a <= b, (a & b) == a)
        self.assertTrue((a & b) <= a)
        self.assertTrue(a <= (a | b))
        self.assertTrue(a <= Restriction.full(SHAPE))
        self.assertTrue(Restriction.empty(SHAPE) <= a)
        self.assertEqual(a & Restriction.full(SHAPE), a)


if __name__ == '__main__':
    unittest.main()
