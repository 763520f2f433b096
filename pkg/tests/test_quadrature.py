import math
import unittest
from concurrent.futures import ThreadPoolExecutor
import numpy as np
from egorovtools.exceptions import OrderError, QuadratureError
from egorovtools.quadrature import (
    QuadratureControl,
    integrate_simplex,
    simplex_rule,
    simplex_volume,
    unit_rule,
)


class TestSimplexVolume(unittest.TestCase):
    def test_examples(self):
        self.assertAlmostEqual(simplex_volume(2, 1.0), 0.5, places=12)
        self.assertAlmostEqual(simplex_volume(1, 3.0), 3.0, places=12)
        self.assertAlmostEqual(simplex_volume(4, 2.0), 16.0 / 24.0, places=12)

    def test_factorial_law(self):
        for dimension in range(1, 6):
            for t in (0.5, 1.0, 4.0):
                expected = t ** dimension / math.factorial(dimension)
                self.assertAlmostEqual(simplex_volume(dimension, t, points=4) / expected, 1.0, places=10)

    def test_zero_time(self):
        self.assertEqual(simplex_volume(3, 0.0), 0.0)

    def test_invalid_arguments(self):
        with self.assertRaises(OrderError):
            simplex_volume(0, 1.0)
        with self.assertRaises(ValueError):
            simplex_volume(2, -1.0)


class TestSimplexRule(unittest.TestCase):
    def test_unit_rule(self):
        nodes, weights = unit_rule(5)
        self.assertAlmostEqual(float(np.sum(weights)), 1.0)
        self.assertTrue(np.all((nodes > 0) & (nodes < 1)))

    def test_nodes_inside_simplex(self):
        nodes, weights = simplex_rule(3, 2.0, 6)
        self.assertEqual(nodes.shape, (216, 3))
        self.assertTrue(np.all(nodes >= 0))
        self.assertTrue(np.all(np.sum(nodes, axis=1) <= 2.0))
        self.assertTrue(np.all(weights > 0))

    def test_polynomial_moment(self):
        "integral of s_1 s_2 over the unit triangle is 1/24"
        nodes, weights = simplex_rule(2, 1.0, 8)
        self.assertAlmostEqual(float(np.sum(weights * nodes[:, 0] * nodes[:, 1])), 1.0 / 24.0, places=12)


class TestIntegrateSimplex(unittest.TestCase):
    def test_converges(self):
        value, report = integrate_simplex(lambda s: np.exp(-s[0]), 1, 1.0)
        self.assertAlmostEqual(float(value), 1.0 - np.exp(-1.0), places=12)
        self.assertTrue(report.converged)
        self.assertEqual(report.level, 12)
        self.assertEqual(report.nodes, 20)

    def test_array_valued_with_executor(self):
        def func(s):
            return np.array([1.0, s[0] + s[1]])

        with ThreadPoolExecutor(max_workers=2) as executor:
            value, report = integrate_simplex(func, 2, 1.0, executor=executor)
        np.testing.assert_allclose(value, [0.5, 1.0 / 3.0], atol=1e-13)
        self.assertTrue(report.converged)

    def test_not_converged_warns(self):
        control = QuadratureControl(levels=(1, 2), tolerance=1e-14)
        value, report = integrate_simplex(lambda s: np.cos(40.0 * s[0]), 1, 1.0, control)
        self.assertFalse(report.converged)
        self.assertEqual(report.level, 2)
        self.assertEqual(len(report.history), 1)

    def test_strict_raises(self):
        control = QuadratureControl(levels=(1, 2), tolerance=1e-14, strict=True)
        with self.assertRaises(QuadratureError):
            integrate_simplex(lambda s: np.cos(40.0 * s[0]), 1, 1.0, control)
