import unittest
from fractions import Fraction

import numpy as np

from src.generators import random_lp
from src.ratlp import (
    EQ,
    GE,
    LE,
    LinearProgram,
    LpStatus,
    SolverStats,
    feasible_point,
    scale_to_integers,
    solve,
    solve_linear_system,
    vertex_optimum,
)


class SimplexTests(unittest.TestCase):
    def test_two_variable_optimum(self):
        lp = LinearProgram(variables=["x", "y"], objective=[1, 1])
        lp.add({0: 1, 1: 2}, LE, 4)
        lp.add({0: 3, 1: 1}, LE, 6)
        result = solve(lp)
        self.assertEqual(result.status, LpStatus.OPTIMAL)
        self.assertEqual(result.solution, (Fraction(8, 5), Fraction(6, 5)))
        self.assertEqual(result.value, Fraction(14, 5))

    def test_minimization_with_equality(self):
        lp = LinearProgram(variables=["x", "y"], objective=[2, 3], maximize=False)
        lp.add({0: 1, 1: 1}, EQ, 5)
        lp.add({0: 1}, LE, 3)
        result = solve(lp)
        self.assertEqual(result.value, 2 * 3 + 3 * 2)
        self.assertEqual(result.solution, (Fraction(3), Fraction(2)))

    def test_unbounded_reports_ray(self):
        lp = LinearProgram(variables=["x", "y"], objective=[1, 0])
        lp.add({1: 1}, LE, 1)
        result = solve(lp)
        self.assertEqual(result.status, LpStatus.UNBOUNDED)
        self.assertGreater(result.ray[0], 0)
        self.assertEqual(result.ray[1], 0)

    def test_infeasible(self):
        lp = LinearProgram(variables=["x"])
        lp.add({0: 1}, GE, 2)
        lp.add({0: 1}, LE, 1)
        self.assertEqual(solve(lp).status, LpStatus.INFEASIBLE)
        self.assertIsNone(feasible_point(lp))

    def test_free_variable(self):
        lp = LinearProgram(variables=["x"], objective=[1], maximize=False, lower_bounds=[None])
        lp.add({0: 1}, GE, -3)
        result = solve(lp)
        self.assertEqual(result.solution, (Fraction(-3),))

    def test_shifted_lower_bound(self):
        lp = LinearProgram(variables=["x"], objective=[1], maximize=False, lower_bounds=[Fraction(5, 2)])
        self.assertEqual(solve(lp).solution, (Fraction(5, 2),))

    def test_empty_row_constraints(self):
        lp = LinearProgram(variables=[])
        lp.add({}, GE, 0)
        self.assertEqual(feasible_point(lp), ())
        lp.add({}, GE, 1)
        self.assertIsNone(feasible_point(lp))

    def test_stats_count_solves(self):
        stats = SolverStats()
        lp = LinearProgram(variables=["x"], objective=[1])
        lp.add({0: 1}, LE, 7)
        solve(lp, stats=stats)
        feasible_point(lp, stats=stats)
        self.assertEqual(stats.lp_solves, 2)
        self.assertGreaterEqual(stats.pivots, 1)
        self.assertEqual(set(stats.as_dict()), {"lp_solves", "pivots"})

    def test_feasible_point_satisfies_lp(self):
        lp = LinearProgram(variables=["a", "b", "c"])
        lp.add({0: 1, 1: -1}, EQ, 0)
        lp.add({1: 1, 2: 1}, GE, 1)
        point = feasible_point(lp)
        self.assertTrue(lp.satisfied_by(point))


class HelperTests(unittest.TestCase):
    def test_scale_to_integers(self):
        self.assertEqual(scale_to_integers([Fraction(1, 2), Fraction(1, 3), 0]), [3, 2, 0])
        self.assertEqual(scale_to_integers([]), [])

    def test_linear_system(self):
        self.assertEqual(solve_linear_system([[1, 1], [1, -1]], [3, 1]), [2, 1])
        self.assertEqual(solve_linear_system([[1, 1], [2, 2], [1, -1]], [2, 4, 0]), [1, 1])
        self.assertIsNone(solve_linear_system([[1, 1], [2, 2]], [1, 2]))
        self.assertIsNone(solve_linear_system([[1, 1], [1, 1]], [1, 2]))

    def test_vertex_optimum(self):
        lp = LinearProgram(variables=["x", "y"], objective=[1, 1])
        lp.add({0: 1, 1: 2}, LE, 4)
        lp.add({0: 3, 1: 1}, LE, 6)
        self.assertEqual(vertex_optimum(lp), Fraction(14, 5))
        self.assertEqual(vertex_optimum(lp.copy(maximize=False)), 0)
        with self.assertRaises(ValueError):
            vertex_optimum(LinearProgram(variables=["x"], lower_bounds=[None]))


class LpOracleTests(unittest.TestCase):
    def test_generator_rejects_too_few_rows(self):
        with self.assertRaises(ValueError):
            random_lp(np.random.default_rng(0), max_vars=4, max_constraints=3)

    def test_simplex_matches_vertex_enumeration(self):
        rng = np.random.default_rng(7)
        for case in range(200):
            lp = random_lp(rng)
            with self.subTest(case=case):
                self.assertLessEqual(len(lp.variables), 4)
                self.assertLessEqual(len(lp.constraints), 6)
                expected = vertex_optimum(lp)
                result = solve(lp)
                if expected is None:
                    self.assertEqual(result.status, LpStatus.INFEASIBLE)
                else:
                    self.assertEqual(result.status, LpStatus.OPTIMAL)
                    self.assertEqual(result.value, expected)
                    self.assertTrue(lp.satisfied_by(result.solution))


if __name__ == "__main__":
    unittest.main()
