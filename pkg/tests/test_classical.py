from dataclasses import replace
import unittest
import numpy as np
from egorovtools.analytic import gaussian
from egorovtools.classical import (
    AlphaSampling,
    FlowCache,
    affine_flow,
    contraction_ratio,
    estimate_alpha,
    identity_flow,
    imaginary_growth,
    integrate_flow,
    integrate_points,
    pullback,
    symplectic_flow,
)
from egorovtools.exceptions import AnalyticExtensionError, PullbackError, SymbolMismatchError
from egorovtools.models import HamiltonianModel, free, gaussian_well, harmonic
from egorovtools.phase_space import PhaseGrid, QuadraticPart, quadratic_symbol, sample_symbol


def centred_gaussian(x, xi):
    return np.exp(-x * x - xi * xi)


class TestFlow(unittest.TestCase):
    def setUp(self):
        self.grid = PhaseGrid(extent=4.0, points_per_axis=16)

    def test_harmonic_rotation(self):
        t = 0.7
        flow = integrate_flow(harmonic(), self.grid, t)
        x, xi = self.grid.mesh()
        np.testing.assert_allclose(flow.x, x * np.cos(t) + xi * np.sin(t), atol=1e-12)
        np.testing.assert_allclose(flow.xi, -x * np.sin(t) + xi * np.cos(t), atol=1e-12)
        self.assertTrue(flow.linear)
        self.assertEqual(flow.integrator_report.method, "affine")
        self.assertLess(flow.symplectic_defect(), 1e-12)

    def test_free_motion(self):
        phi, offset = affine_flow(free(), 0.5)
        np.testing.assert_allclose(phi @ np.array([1.0, 2.0]) + offset, [2.0, 2.0], atol=1e-14)
        x, xi, jacobian, _ = integrate_points(free(), [1.0], [2.0], 0.5)
        self.assertAlmostEqual(float(x[0]), 2.0, places=9)
        self.assertAlmostEqual(float(xi[0]), 2.0, places=9)
        np.testing.assert_allclose(jacobian[0], [[1.0, 0.5], [0.0, 1.0]], atol=1e-9)

    def test_gaussian_well_against_symplectic_integrator(self):
        model = gaussian_well()
        flow = integrate_flow(model, self.grid, 1.0)
        reference = symplectic_flow(model, self.grid, 1.0, step=1e-3)
        np.testing.assert_allclose(flow.x, reference.x, atol=1e-8)
        np.testing.assert_allclose(flow.xi, reference.xi, atol=1e-8)
        np.testing.assert_allclose(flow.jacobian, reference.jacobian, atol=1e-7)
        self.assertFalse(flow.linear)
        self.assertLess(flow.integrator_report.energy_drift, 1e-8)
        self.assertLess(flow.integrator_report.determinant_error, 1e-8)

    def test_group_property(self):
        "phi^t(phi^s(z)) = phi^{s+t}(z), with the chain rule for the Jacobians"
        model = gaussian_well()
        s, t = 0.4, 0.6
        first = integrate_flow(model, self.grid, s)
        x, xi, jacobian, _ = integrate_points(model, first.x, first.xi, t)
        combined = integrate_flow(model, self.grid, s + t)
        np.testing.assert_allclose(x, combined.x, atol=1e-7)
        np.testing.assert_allclose(xi, combined.xi, atol=1e-7)
        np.testing.assert_allclose(jacobian @ first.jacobian, combined.jacobian, atol=1e-7)

    def test_group_property_harmonic(self):
        first = integrate_flow(harmonic(), self.grid, 0.3)
        second = affine_flow(harmonic(), 0.9)
        combined = integrate_flow(harmonic(), self.grid, 1.2)
        phi, offset = second
        np.testing.assert_allclose(phi @ first.jacobian[0, 0], combined.jacobian[0, 0], atol=1e-12)
        np.testing.assert_allclose(
            phi[0, 0] * first.x + phi[0, 1] * first.xi + offset[0], combined.x, atol=1e-12
        )

    def test_zero_time(self):
        flow = integrate_flow(gaussian_well(), self.grid, 0.0)
        self.assertTrue(flow.is_identity())
        self.assertEqual(flow.integrator_report.method, "identity")

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            integrate_flow(harmonic(), self.grid, float("nan"))
        with self.assertRaises(ValueError):
            integrate_flow(harmonic(), self.grid, 1.0, tol=0.0)

    def test_affine_map_only_for_linear_flows(self):
        flow = integrate_flow(gaussian_well(), self.grid, 0.1)
        with self.assertRaises(ValueError):
            flow.affine_map()

    def test_symplectic_flow_needs_separable_model(self):
        model = HamiltonianModel(name="mixed", quadratic=QuadraticPart(hessian=((0.0, 1.0), (1.0, 0.0))))
        with self.assertRaises(ValueError):
            symplectic_flow(model, self.grid, 1.0)


class TestFlowCache(unittest.TestCase):
    def test_hits_and_misses(self):
        grid = PhaseGrid(extent=4.0, points_per_axis=8)
        cache = FlowCache()
        first = cache.get(harmonic(), grid, 1.0)
        second = cache.get(harmonic(), grid, 1.0 + 1e-14)
        self.assertIs(first, second)
        self.assertEqual((cache.hits, cache.misses, len(cache)), (1, 1, 1))
        cache.get(harmonic(), grid, 2.0)
        self.assertEqual(len(cache), 2)
        cache.clear()
        self.assertEqual(len(cache), 0)


class TestPullback(unittest.TestCase):
    def setUp(self):
        self.grid = PhaseGrid(extent=8.0, points_per_axis=64)

    def test_identity_flow(self):
        b = sample_symbol(self.grid, centred_gaussian, 0.1)
        self.assertIs(pullback(b, identity_flow(self.grid)), b)

    def test_linear_observable_under_rotation(self):
        t = 0.4
        b = quadratic_symbol(self.grid, 0.1, QuadraticPart(linear=(1.0, 0.0)))
        pulled = pullback(b, integrate_flow(harmonic(), self.grid, t))
        np.testing.assert_allclose(pulled.quadratic.linear, (np.cos(t), np.sin(t)), atol=1e-14)
        self.assertFalse(np.any(pulled.values))

    def test_sheared_gaussian(self):
        b = sample_symbol(self.grid, centred_gaussian, 0.1)
        pulled = pullback(b, integrate_flow(free(), self.grid, 1.0))
        x, xi = self.grid.mesh()
        np.testing.assert_allclose(pulled.full_values(), centred_gaussian(x + xi, xi), atol=1e-8)

    def test_spline_method(self):
        b = sample_symbol(self.grid, centred_gaussian, 0.1)
        pulled = pullback(b, integrate_flow(free(), self.grid, 1.0), method="spline")
        x, xi = self.grid.mesh()
        np.testing.assert_allclose(pulled.values, centred_gaussian(x + xi, xi), atol=1e-3)

    def test_unknown_method(self):
        b = sample_symbol(self.grid, centred_gaussian, 0.1)
        with self.assertRaises(ValueError):
            pullback(b, integrate_flow(free(), self.grid, 1.0), method="linear")

    def test_grid_mismatch(self):
        b = sample_symbol(PhaseGrid(extent=8.0, points_per_axis=32), centred_gaussian, 0.1)
        with self.assertRaises(SymbolMismatchError):
            pullback(b, integrate_flow(free(), self.grid, 1.0))

    def test_non_decaying_symbol_leaving_the_box(self):
        b = sample_symbol(self.grid, centred_gaussian, 0.1, decaying=False)
        with self.assertRaises(PullbackError):
            pullback(b, integrate_flow(free(), self.grid, 5.0))


class TestAlpha(unittest.TestCase):
    def test_constant_hessians(self):
        self.assertAlmostEqual(estimate_alpha(harmonic(), 0.5).value, 1.0)
        self.assertAlmostEqual(estimate_alpha(free(), 0.5).value, 1.0)

    def test_gaussian_well_on_strip(self):
        model = gaussian_well()
        sigma = 0.3
        xs = np.linspace(-8.0, 8.0, 4001)
        ys = np.linspace(-sigma, sigma, 61)
        z = xs[:, None] + 1j * ys[None, :]
        expected = max(1.0, float(np.max(np.abs(model.potential(z, 2)))))
        estimate = estimate_alpha(model, sigma)
        self.assertFalse(estimate.lower_estimate)
        self.assertAlmostEqual(estimate.value / expected, 1.0, delta=0.01)

    def test_lower_estimate_without_extension(self):
        model = replace(gaussian_well(), complex_extension=False)
        estimate = estimate_alpha(model, 0.3, AlphaSampling(points=41))
        self.assertTrue(estimate.lower_estimate)
        self.assertAlmostEqual(estimate.value, 2.0)

    def test_sigma_beyond_declared_radius(self):
        with self.assertRaises(AnalyticExtensionError):
            estimate_alpha(replace(gaussian_well(), declared_nu=0.1), 0.3)


class TestGrowth(unittest.TestCase):
    def test_imaginary_growth_harmonic(self):
        report = imaginary_growth(harmonic(), [0.5, -1.0], [0.0, 1.0], (0.2, 0.1), 2.0, alpha=1.0)
        self.assertTrue(report.satisfied)
        self.assertEqual(len(report.times), 11)

    def test_contraction_ratio(self):
        grid = PhaseGrid(extent=8.0, points_per_axis=32)
        flow = integrate_flow(harmonic(), grid, 1.0)
        ratio = contraction_ratio(gaussian(), flow, 0.5, 0.5, 1.0)
        self.assertGreater(ratio, 0.0)
        self.assertLessEqual(ratio, 1.0)
