import unittest
import numpy as np
from egorovtools.analytic import gaussian
from egorovtools.classical import FlowCache
from egorovtools.exceptions import OrderError
from egorovtools.expansion import (
    ExpansionEngine,
    assemble_approximant,
    duhamel_remainder,
    exact_evolution,
    expansion_term,
    remainder_r,
    richardson_coefficient,
)
from egorovtools.models import gaussian_well, harmonic
from egorovtools.moyal import delta_h
from egorovtools.phase_space import PhaseGrid
from egorovtools.quadrature import QuadratureControl
from egorovtools.quantum import PositionGrid, operator_norm


GRID = PhaseGrid(extent=6.0, points_per_axis=64)

QUADRATURE = QuadratureControl(levels=(6, 10), tolerance=1e-6)


def max_norm(values):
    return float(np.max(np.abs(values)))


class TestHarmonic(unittest.TestCase):
    def setUp(self):
        self.b = gaussian(center=(0.5, 0.0)).sample(GRID, 0.2)
        self.engine = ExpansionEngine(self.b, harmonic(), quadrature=QUADRATURE)

    def test_remainders_vanish(self):
        for durations in ((0.3,), (0.2, 0.5), (0.1, 0.1, 0.1)):
            self.assertFalse(np.any(self.engine.remainder(durations).values))

    def test_terms_vanish(self):
        for j in (1, 2, 3):
            term = self.engine.term(j, 1.0)
            self.assertFalse(np.any(term.symbol.values))

    def test_approximant_independent_of_order(self):
        first = self.engine.approximant(0, 1.0)
        for N in (1, 2, 3):
            np.testing.assert_array_equal(self.engine.approximant(N, 1.0).symbol.values, first.symbol.values)

    def test_exact_for_quadratic_hamiltonian(self):
        grid = PositionGrid.from_phase_grid(GRID, 0.2, 3)
        approximant = self.engine.approximant(1, 1.0, position_grid=grid)
        exact = exact_evolution(self.b, harmonic(), grid, 1.0)
        self.assertLess(operator_norm(exact - approximant.operator), 1e-6)


class TestEngine(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.model = gaussian_well()
        cls.flows = FlowCache()
        cls.b = gaussian().sample(GRID, 0.2)
        cls.engine = ExpansionEngine(cls.b, cls.model, flow_cache=cls.flows, quadrature=QUADRATURE)

    def test_first_remainder_without_flow(self):
        r1 = self.engine.remainder((0.0,))
        expected = delta_h(self.b, self.model.symbol(GRID, 0.2))
        np.testing.assert_array_equal(r1.values, expected.values)

    def test_remainders_are_memoized(self):
        first = self.engine.remainder((0.25, 0.5))
        self.assertIs(self.engine.remainder((0.25, 0.5 + 1e-14)), first)
        self.assertIs(self.engine.remainder((0.25,)), self.engine.remainder((0.25,)))

    def test_shared_flow_cache(self):
        self.engine.term(0, 0.75)
        self.assertIs(self.engine.flows, self.flows)
        self.assertGreater(len(self.flows), 0)

    def test_zero_time(self):
        self.assertIs(self.engine.term(0, 0.0).symbol, self.b)
        for j in (1, 2):
            self.assertFalse(np.any(self.engine.term(j, 0.0).symbol.values))

    def test_term_sign(self):
        term = self.engine.term(1, 0.5)
        self.assertEqual(term.sign, -1)
        np.testing.assert_allclose(term.symbol.values, -term.integral.values)
        self.assertTrue(term.quadrature_report.converged)
        self.assertGreater(max_norm(term.symbol.values), 0.0)

    def test_term_is_cached(self):
        self.assertIs(self.engine.term(1, 0.5), self.engine.term(1, 0.5))

    def test_invalid_orders(self):
        with self.assertRaises(OrderError):
            self.engine.term(4, 1.0)
        with self.assertRaises(ValueError):
            self.engine.term(1, -1.0)
        with self.assertRaises(OrderError):
            self.engine.remainder(())
        with self.assertRaises(OrderError):
            self.engine.approximant(0, 1.0, "corollary")
        with self.assertRaises(ValueError):
            self.engine.approximant(1, 1.0, "midpoint")

    def test_conventions(self):
        theorem = self.engine.approximant(0, 0.5)
        corollary = self.engine.approximant(1, 0.5, "corollary")
        np.testing.assert_array_equal(theorem.symbol.values, corollary.symbol.values)
        self.assertEqual(len(self.engine.approximant(1, 0.5).terms), 2)

    def test_approximant_is_real(self):
        approximant = self.engine.approximant(1, 0.5)
        self.assertTrue(approximant.symbol.real_observable)
        self.assertIsNone(approximant.operator)

    def test_higher_order_improves(self):
        grid = PositionGrid.from_phase_grid(GRID, 0.2, 3)
        exact = exact_evolution(self.b, self.model, grid, 1.0)
        errors = [
            operator_norm(exact - self.engine.approximant(N, 1.0, position_grid=grid).operator)
            for N in (0, 1)
        ]
        self.assertLess(errors[1], errors[0])


class TestModuleFunctions(unittest.TestCase):
    def setUp(self):
        self.b = gaussian().sample(GRID, 0.2)

    def test_remainder_r(self):
        r = remainder_r(self.b, gaussian_well(), 2, (0.1, 0.2), t=0.5)
        self.assertEqual((r.k, r.times), (2, (0.1, 0.2)))
        self.assertGreater(max_norm(r.symbol.values), 0.0)

    def test_remainder_r_arguments(self):
        with self.assertRaises(OrderError):
            remainder_r(self.b, gaussian_well(), 0, ())
        with self.assertRaises(ValueError):
            remainder_r(self.b, gaussian_well(), 2, (0.1,))
        with self.assertRaises(ValueError):
            remainder_r(self.b, gaussian_well(), 2, (0.4, 0.4), t=0.5)
        with self.assertRaises(ValueError):
            remainder_r(self.b, gaussian_well(), 1, (-0.1,))

    def test_expansion_term(self):
        term = expansion_term(self.b, harmonic(), 2, 1.0, quad=QUADRATURE)
        self.assertEqual(term.j, 2)
        self.assertFalse(np.any(term.symbol.values))

    def test_assemble_approximant(self):
        grid = PositionGrid.from_phase_grid(GRID, 0.2, 3)
        approximant = assemble_approximant(self.b, harmonic(), 0, 0.5, position_grid=grid)
        self.assertEqual(approximant.operator.grid, grid)
        self.assertTrue(approximant.operator.hermitian)

    def test_duhamel_remainder(self):
        grid = PositionGrid.from_phase_grid(GRID, 0.2, 3)
        engine = ExpansionEngine(self.b, gaussian_well(), quadrature=QUADRATURE)
        check = duhamel_remainder(self.b, gaussian_well(), 0, 0.5, grid, engine=engine, sup_points=3)
        self.assertGreater(check.measured, 0.0)
        self.assertTrue(check.satisfied)


class TestRichardson(unittest.TestCase):
    def test_matches_first_order_term(self):
        "the hbar^2 coefficient of the exact Heisenberg symbol is b_1^t"
        flows = FlowCache()
        spec = gaussian()
        fit = richardson_coefficient(
            spec, gaussian_well(), GRID, 1.0, hbars=(0.2, 0.141421356, 0.1), flow_cache=flows
        )
        engine = ExpansionEngine(spec.sample(GRID, 0.1), gaussian_well(), flow_cache=flows)
        term = engine.term(1, 1.0)
        scale = max_norm(term.symbol.values)
        self.assertLess(max_norm(fit.coefficient.values - term.symbol.values), 0.05 * scale)

    def test_needs_two_values(self):
        with self.assertRaises(ValueError):
            richardson_coefficient(gaussian(), gaussian_well(), GRID, 1.0, hbars=(0.1,))
