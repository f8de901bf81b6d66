import unittest
from fractions import Fraction
from pathlib import Path

import numpy as np

from app.services.corpus_service import random_corpus, random_game
from app.services.game_service import FiniteGame, Restriction, parse_game
from app.services.lattice_service import iterate
from app.services.operator_service import (
    BeliefKind,
    InvalidBeliefError,
    OperatorName,
    SupportOutsideNarrowingError,
    UnknownBeliefsError,
    UnknownOperatorError,
    UnsupportedBeliefsError,
    check_property_B,
    check_property_C_at,
    check_property_D_at,
    check_property_E_at,
    check_property_MD_at,
    correlated_best_response_exists,
    dominated_by_mixed,
    gs_step,
    is_best_response,
    ls_step,
    make_operator,
    mgs_step,
    mixed_dominance_margin,
    mls_step,
    property_report,
    strictly_dominates,
)

FIXTURES = Path(__file__).parent / "fixtures"


def load(name: str) -> FiniteGame:
    return parse_game((FIXTURES / name).read_text(encoding="utf-8"))


def random_restriction(rng: np.random.Generator, game: FiniteGame) -> Restriction:
    return Restriction(game.shape, [
        [s for s in range(n) if rng.random() < 0.6] for n in game.shape
    ])


class TestOperatorNames(unittest.TestCase):
    """Test cases for operator and belief tokens"""

    def test_tokens(self):
        self.assertEqual(OperatorName.from_token("gsbar"), OperatorName.GSBAR)
        self.assertEqual(OperatorName.from_token(" MLS "), OperatorName.MLS)
        self.assertEqual(OperatorName.GRBAR.token, "grbar")

    def test_derived_flags(self):
        self.assertTrue(OperatorName.LRBAR.contracting)
        self.assertEqual(OperatorName.LRBAR.base, OperatorName.LR)
        self.assertEqual(OperatorName.MGS.contracted, OperatorName.MGSBAR)
        self.assertTrue(OperatorName.GR.rationalizability)
        self.assertTrue(OperatorName.GSBAR.monotonic)
        self.assertFalse(OperatorName.LSBAR.monotonic)
        self.assertTrue(OperatorName.MLS.local)

    def test_unknown_operator_suggests(self):
        with self.assertRaises(UnknownOperatorError) as ctx:
            OperatorName.from_token("gsbr")
        self.assertIn("gsbar", ctx.exception.suggestions)
        self.assertIn("did you mean", str(ctx.exception))

    def test_unknown_beliefs_suggests(self):
        with self.assertRaises(UnknownBeliefsError) as ctx:
            BeliefKind.from_token("corelated")
        self.assertEqual(ctx.exception.suggestions[0], "correlated")


class TestMakeOperator(unittest.TestCase):
    """Test cases for operator wiring"""

    def setUp(self):
        self.pd = load("pd.game")

    def test_label(self):
        self.assertEqual(make_operator("grbar", self.pd, "point").label, "GRbar[point]")
        self.assertEqual(make_operator("ls", self.pd).label, "LS")

    def test_rationalizability_needs_beliefs(self):
        with self.assertRaises(UnsupportedBeliefsError):
            make_operator("gr", self.pd)

    def test_dominance_rejects_beliefs(self):
        with self.assertRaises(UnsupportedBeliefsError):
            make_operator("gs", self.pd, "point")

    def test_independent_beliefs_need_two_players(self):
        game = random_game(np.random.default_rng(1), players=3)
        with self.assertRaises(UnsupportedBeliefsError):
            make_operator("grbar", game, "independent")
        make_operator("grbar", self.pd, "independent")

    def test_contracting_is_meet_with_argument(self):
        rng = np.random.default_rng(7)
        for game in random_corpus(11, 15):
            for name in OperatorName:
                if name.contracting:
                    continue
                beliefs = "point" if name.rationalizability else None
                base = make_operator(name, game, beliefs)
                bar = make_operator(name.contracted, game, beliefs)
                for _ in range(3):
                    g = random_restriction(rng, game)
                    with self.subTest(game=game.name, op=name.value):
                        self.assertEqual(bar(g), base(g) & g)


class TestDominance(unittest.TestCase):
    """Test cases for strict dominance operators"""

    def setUp(self):
        self.pd = load("pd.game")
        self.mixed = load("mixed_dominance.game")

    def test_prisoners_dilemma(self):
        expected = self.pd.restriction([["D"], ["D"]])
        full = self.pd.full()
        self.assertEqual(gs_step(self.pd, full), expected)
        self.assertEqual(ls_step(self.pd, full), expected)
        self.assertEqual(mgs_step(self.pd, full), expected)
        self.assertTrue(strictly_dominates(self.pd, full, 0, "D", "C"))
        self.assertFalse(strictly_dominates(self.pd, full, 0, "C", "D"))

    def test_dominance_is_vacuous_without_opponents(self):
        g = self.pd.restriction([["C", "D"], []])
        self.assertTrue(strictly_dominates(self.pd, g, 0, "C", "D"))
        self.assertEqual(gs_step(self.pd, g)[0], frozenset())
        self.assertEqual(gs_step(self.pd, self.pd.empty()), self.pd.empty())

    def test_mixed_dominance_needs_a_mixture(self):
        full = self.mixed.full()
        self.assertEqual(gs_step(self.mixed, full), full)
        self.assertEqual(mgs_step(self.mixed, full), self.mixed.restriction([["T", "M"], ["L", "R"]]))
        self.assertEqual(mixed_dominance_margin(self.mixed, full, 0, "B"), Fraction(1, 2))
        self.assertTrue(dominated_by_mixed(self.mixed, full, 0, "B"))
        self.assertFalse(dominated_by_mixed(self.mixed, full, 0, "T"))

    def test_local_dominators_come_from_the_restriction(self):
        g = self.mixed.restriction([["T", "B"], ["L", "R"]])
        self.assertNotIn(2, mgs_step(self.mixed, g)[0])
        self.assertIn(2, mls_step(self.mixed, g)[0])
        self.assertTrue(dominated_by_mixed(self.mixed, g, 0, "B", local=False))
        self.assertFalse(dominated_by_mixed(self.mixed, g, 0, "B", local=True))

    def test_shortcuts_do_not_change_results(self):
        rng = np.random.default_rng(3)
        for game in random_corpus(5, 12):
            g = random_restriction(rng, game)
            self.assertEqual(mgs_step(game, g, shortcuts=True), mgs_step(game, g, shortcuts=False))
            self.assertEqual(mls_step(game, g, shortcuts=True), mls_step(game, g, shortcuts=False))


class TestRationalizability(unittest.TestCase):
    """Test cases for best-response operators"""

    def setUp(self):
        self.pd = load("pd.game")
        self.mixed = load("mixed_dominance.game")

    def test_point_best_response(self):
        self.assertTrue(is_best_response(self.pd, 0, "D", ["C"]))
        self.assertFalse(is_best_response(self.pd, 0, "C", ["C"]))

    def test_correlated_best_response(self):
        belief = {("L",): Fraction(1, 2), ("R",): Fraction(1, 2)}
        self.assertTrue(is_best_response(self.mixed, 0, "T", belief))
        self.assertFalse(is_best_response(self.mixed, 0, "B", belief))

    def test_best_response_in_a_restriction(self):
        g = self.mixed.restriction([["B"], ["L"]])
        self.assertTrue(is_best_response(self.mixed, 0, "B", ["L"], domain=g))
        self.assertFalse(is_best_response(self.mixed, 0, "B", ["L"]))

    def test_support_outside_restriction(self):
        g = self.pd.restriction([["C", "D"], ["C"]])
        with self.assertRaises(SupportOutsideNarrowingError):
            is_best_response(self.pd, 0, "D", ["D"], domain=g)

    def test_invalid_belief(self):
        with self.assertRaises(InvalidBeliefError):
            is_best_response(self.pd, 0, "D", {("C",): Fraction(1, 2)})

    def test_never_best_response_removed(self):
        full = self.mixed.full()
        expected = self.mixed.restriction([["T", "M"], ["L", "R"]])
        for beliefs in ("point", "correlated"):
            self.assertEqual(make_operator("grbar", self.mixed, beliefs)(full), expected)
        self.assertFalse(correlated_best_response_exists(self.mixed, full, 0, "B"))
        self.assertTrue(correlated_best_response_exists(self.mixed, full, 0, "M"))

    def test_no_opponents_means_no_best_response(self):
        g = self.pd.restriction([["C", "D"], []])
        self.assertEqual(make_operator("gr", self.pd, "point")(g)[0], frozenset())
        self.assertEqual(make_operator("gr", self.pd, "correlated")(g)[0], frozenset())

    def test_duality_with_mixed_dominance(self):
        rng = np.random.default_rng(17)
        for game in random_corpus(23, 20, players=2):
            g = random_restriction(rng, game)
            for player in range(game.player_count):
                for s in range(game.shape[player]):
                    with self.subTest(game=game.name, player=player, strategy=s):
                        self.assertEqual(
                            correlated_best_response_exists(game, g, player, s),
                            not dominated_by_mixed(game, g, player, s),
                        )

    def test_global_operators_are_monotonic(self):
        rng = np.random.default_rng(29)
        tokens = [("gs", None), ("mgs", None), ("gr", "point"), ("gr", "correlated")]
        for game in random_corpus(31, 12):
            h = random_restriction(rng, game)
            g = h & random_restriction(rng, game)
            for token, beliefs in tokens:
                op = make_operator(token, game, beliefs)
                with self.subTest(game=game.name, op=token):
                    self.assertTrue(op(g) <= op(h))


class TestProperties(unittest.TestCase):
    """Test cases for property predicates"""

    def test_property_c_witnesses(self):
        pd = load("pd.game")
        report = property_report(pd, pd.full(), "C")
        self.assertTrue(report.holds)
        self.assertEqual(report.witnesses, {(0, 0): 1, (1, 0): 1})
        self.assertTrue(check_property_C_at(pd, pd.full()))

    def test_property_d_fails_when_dominators_were_removed(self):
        pd = load("pd.game")
        g = pd.restriction([["C"], ["C", "D"]])
        report = property_report(pd, g, "D")
        self.assertFalse(report.holds)
        self.assertEqual(report.violation, (0, 0))

    def test_property_d_holds_along_pure_dominance_traces(self):
        for game in random_corpus(37, 25):
            for token in ("gsbar", "lsbar"):
                trace = iterate(make_operator(token, game))
                for ordinal, g in trace.shown_stages():
                    with self.subTest(game=game.name, op=token, stage=str(ordinal)):
                        self.assertTrue(check_property_D_at(game, g))

    def test_property_e_witness_is_undominated(self):
        pd = load("pd.game")
        report = property_report(pd, pd.full(), "E")
        self.assertTrue(report.holds)
        self.assertEqual(report.witnesses, {(0, 0): 1, (1, 0): 1})
        self.assertTrue(check_property_E_at(pd, pd.restriction([["C"], ["C"]])))

    def test_property_e_only_looks_inside_the_restriction(self):
        pd = load("pd.game")
        report = property_report(pd, pd.restriction([["C"], ["C", "D"]]), "E")
        self.assertTrue(report.holds)
        self.assertEqual(report.witnesses, {(1, 0): 1})

    def test_property_e_fails_without_opponents(self):
        pd = load("pd.game")
        report = property_report(pd, pd.restriction([["C", "D"], []]), "E")
        self.assertFalse(report.holds)
        self.assertEqual(report.violation, (0, 0))

    def test_property_md_mixture(self):
        game = load("mixed_dominance.game")
        report = property_report(game, game.full(), "md")
        self.assertTrue(report.holds)
        self.assertEqual(report.name, "MD")
        self.assertEqual(report.mixtures, {(0, 2): {0: Fraction(1, 2), 1: Fraction(1, 2)}})

    def test_property_md_fails_when_mixture_support_was_removed(self):
        game = load("mixed_dominance.game")
        g = game.restriction([["B"], ["L", "R"]])
        report = property_report(game, g, "MD")
        self.assertFalse(report.holds)
        self.assertEqual(report.violation, (0, 2))
        # no pure dominator exists, so the pure property is silent
        self.assertTrue(check_property_D_at(game, g))

    def test_property_md_holds_along_mixed_dominance_traces(self):
        for game in random_corpus(41, 15):
            for token in ("mlsbar", "mgsbar"):
                trace = iterate(make_operator(token, game))
                for ordinal, g in trace.shown_stages():
                    with self.subTest(game=game.name, op=token, stage=str(ordinal)):
                        self.assertTrue(check_property_MD_at(game, g))

    def test_unknown_property(self):
        pd = load("pd.game")
        with self.assertRaises(ValueError):
            property_report(pd, pd.full(), "Z")

    def test_property_b(self):
        pd = load("pd.game")
        self.assertTrue(check_property_B(pd, "point"))
        self.assertTrue(check_property_B(pd, "correlated"))


class TestNonMonotonicity(unittest.TestCase):
    """The local contracting operators are not monotonic on finite games"""

    def test_witness(self):
        game = load("nonmonotone.game")
        full = game.full()
        corner = game.restriction([["1"], ["1"]])
        for token, beliefs in (("lsbar", None), ("lrbar", "correlated"), ("lrbar", "point")):
            op = make_operator(token, game, beliefs)
            with self.subTest(op=op.label):
                self.assertEqual(op(full), game.restriction([["3"], ["1", "2", "3"]]))
                self.assertEqual(op(corner), corner)
                self.assertFalse(op(corner) <= op(full))

    def test_relabelling_preserves_outcomes(self):
        game = load("nonmonotone.game")
        renamed = game.relabel([{"1": "low", "3": "high"}, {"2": "mid"}])
        for token in ("gsbar", "lsbar", "mgsbar"):
            self.assertEqual(make_operator(token, game)(game.full()), make_operator(token, renamed)(renamed.full()))


if __name__ == '__main__':
    unittest.main()
