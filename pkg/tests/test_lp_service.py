import itertools
import unittest
from fractions import Fraction

import numpy as np

from app.services.lp_service import (
    DimensionMismatchError,
    LinearProgram,
    LpStatus,
    Sense,
    lp_feasible,
    lp_solve,
)


def _det(matrix):
    if not matrix:
        return Fraction(1)
    total = Fraction(0)
    for j, a in enumerate(matrix[0]):
        if a:
            minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
            total += (-1) ** j * a * _det(minor)
    return total


def _satisfies(row, sense, b, x):
    lhs = sum((a * v for a, v in zip(row, x)), Fraction(0))
    if sense == Sense.LE:
        return lhs <= b
    if sense == Sense.GE:
        return lhs >= b
    return lhs == b


def vertex_oracle(lp: LinearProgram):
    """Brute-force optimum over the vertices and extreme rays of {x >= 0 : rows}."""
    n = lp.variable_count
    constraints = list(zip(lp.rows, lp.senses, lp.rhs))
    constraints += [
        (tuple(Fraction(int(j == k)) for j in range(n)), Sense.GE, Fraction(0)) for k in range(n)
    ]

    vertices = []
    for tight in itertools.combinations(constraints, n):
        matrix = [list(row) for row, _, _ in tight]
        det = _det(matrix)
        if det == 0:
            continue
        point = []
        for k in range(n):
            replaced = [row[:k] + [b] + row[k + 1:] for row, (_, _, b) in zip(matrix, tight)]
            point.append(_det(replaced) / det)
        if all(_satisfies(row, sense, b, point) for row, sense, b in constraints):
            vertices.append(point)
    if not vertices:
        return LpStatus.INFEASIBLE, None

    for tight in itertools.combinations(constraints, n - 1):
        matrix = [list(row) for row, _, _ in tight]
        direction = [(-1) ** j * _det([row[:j] + row[j + 1:] for row in matrix]) for j in range(n)]
        if not any(direction):
            continue
        for sign in (1, -1):
            d = [sign * v for v in direction]
            in_cone = all(_satisfies(row, sense, Fraction(0), d) for row, sense, _ in constraints)
            if in_cone and sum(c * v for c, v in zip(lp.objective, d)) > 0:
                return LpStatus.UNBOUNDED, None

    best = max(sum((c * v for c, v in zip(lp.objective, x)), Fraction(0)) for x in vertices)
    return LpStatus.OPTIMAL, best


def random_lp(rng: np.random.Generator) -> LinearProgram:
    def rational():
        return Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 6)))

    n = int(rng.integers(1, 4))
    m = int(rng.integers(1, 7))
    senses = [Sense.LE, Sense.GE, Sense.EQ]
    return LinearProgram.build(
        [rational() for _ in range(n)],
        [[rational() for _ in range(n)] for _ in range(m)],
        [rational() for _ in range(m)],
        [senses[int(k)] for k in rng.choice(3, size=m, p=[0.5, 0.3, 0.2])],
    )


class TestLpSolve(unittest.TestCase):
    """Test cases for the exact simplex"""

    def test_small_optimum(self):
        # max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
        lp = LinearProgram.build([3, 2], [[1, 1], [1, 3], [1, 0]], [4, 6, 3], ["<=", "<=", "<="])
        result = lp_solve(lp)
        self.assertEqual(result.status, LpStatus.OPTIMAL)
        self.assertEqual(result.value, Fraction(11))
        self.assertEqual(result.witness, (Fraction(3), Fraction(1)))

    def test_fractional_optimum(self):
        # max x + y, 2x + y <= 1, x + 2y <= 1
        lp = LinearProgram.build([1, 1], [[2, 1], [1, 2]], [1, 1], ["<=", "<="])
        result = lp_solve(lp)
        self.assertEqual(result.value, Fraction(2, 3))
        self.assertEqual(result.witness, (Fraction(1, 3), Fraction(1, 3)))

    def test_infeasible(self):
        lp = LinearProgram.build([1], [[1], [1]], [1, 2], ["<=", ">="])
        self.assertEqual(lp_solve(lp).status, LpStatus.INFEASIBLE)

    def test_unbounded(self):
        lp = LinearProgram.build([1, 0], [[0, 1]], [5], ["<="])
        self.assertEqual(lp_solve(lp).status, LpStatus.UNBOUNDED)

    def test_equality_and_negative_rhs(self):
        # max -x - y, x - y = -2 forces y = x + 2
        lp = LinearProgram.build([-1, -1], [[1, -1]], [-2], ["="])
        result = lp_solve(lp)
        self.assertEqual(result.status, LpStatus.OPTIMAL)
        self.assertEqual(result.value, Fraction(-2))

    def test_redundant_equalities(self):
        lp = LinearProgram.build([1, 1], [[1, 1], [2, 2]], [1, 2], ["=", "="])
        result = lp_solve(lp)
        self.assertEqual(result.status, LpStatus.OPTIMAL)
        self.assertEqual(result.value, Fraction(1))

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            LinearProgram.build([1, 1], [[1]], [1], ["<="])
        with self.assertRaises(DimensionMismatchError):
            LinearProgram.build([1], [[1]], [1, 2], ["<="])
        with self.assertRaises(DimensionMismatchError):
            LinearProgram.build([1], [[1]], [1], ["<"])

    def test_feasibility_witness(self):
        rows = [[1, 1], [1, -1]]
        result = lp_feasible(rows, [">=", "="], [2, 0])
        self.assertTrue(result)
        x, y = result.witness
        self.assertGreaterEqual(x + y, 2)
        self.assertEqual(x, y)

    def test_infeasible_feasibility(self):
        self.assertFalse(lp_feasible([[1, 1]], ["<="], [-1]))

    def test_matches_vertex_oracle(self):
        rng = np.random.default_rng(20240611)
        counts = {status: 0 for status in LpStatus}
        for k in range(500):
            lp = random_lp(rng)
            status, value = vertex_oracle(lp)
            result = lp_solve(lp)
            with self.subTest(lp=k):
                self.assertEqual(result.status, status)
                if status == LpStatus.OPTIMAL:
                    self.assertEqual(result.value, value)
            counts[status] += 1
        self.assertGreater(counts[LpStatus.OPTIMAL], 0)


if __name__ == '__main__':
    unittest.main()
