import unittest
import numpy as np
from egorovtools.analytic import (
    OBSERVABLE_CATALOG,
    constant,
    gaussian,
    get_observable,
    modulated_gaussian,
    reference_family,
    sech_product,
    zero,
)
from egorovtools.exceptions import ConfigError
from egorovtools.phase_space import PhaseGrid


class TestAnalytic(unittest.TestCase):
    def setUp(self):
        self.grid = PhaseGrid(extent=8.0, points_per_axis=32)

    def test_gaussian_accepts_complex_arguments(self):
        spec = gaussian()
        self.assertAlmostEqual(abs(spec(0.0, 0.5j)), np.exp(0.25))

    def test_gaussian_sample(self):
        b = gaussian(center=(1.0, 0.0)).sample(self.grid, 0.1)
        self.assertTrue(b.real_observable)
        self.assertEqual(b.hbar, 0.1)
        self.assertAlmostEqual(b.max_norm(), 1.0)
        self.assertEqual(b.label, "gaussian(a=1, c=(1, 0), w=(1, 1))")

    def test_modulated_gaussian(self):
        spec = modulated_gaussian(frequencies=(2.0, 1.0))
        self.assertAlmostEqual(spec(np.pi / 4.0, 0.0), np.exp(-np.pi ** 2 / 16.0) * np.cos(np.pi / 2.0))
        self.assertEqual(spec.name, "cos(2x + 1xi) gaussian(a=1, c=(0, 0), w=(1, 1))")

    def test_sech_product(self):
        spec = sech_product(scale=2.0)
        self.assertAlmostEqual(spec.analyticity_radius, np.pi)
        self.assertEqual(spec.decay_rate, 0.5)
        self.assertAlmostEqual(spec(0.0, 0.0), 1.0)

    def test_zero_and_constant(self):
        self.assertEqual(zero().sample(self.grid, 0.1).max_norm(), 0.0)
        self.assertEqual(constant(2.0).decay_rate, 0.0)
        self.assertEqual(constant(2.0)(np.zeros(3), 0.0).tolist(), [2.0, 2.0, 2.0])

    def test_reference_family(self):
        names = [spec.name for spec in reference_family()]
        self.assertEqual(len(names), 6)
        self.assertIn("narrow gaussian", names)

    def test_get_observable(self):
        spec = get_observable("gaussian", widths=(0.5, 0.5))
        self.assertAlmostEqual(spec(0.5, 0.0), np.exp(-1.0))
        self.assertEqual(sorted(OBSERVABLE_CATALOG), ["gaussian", "modulated-gaussian", "sech-product"])

    def test_unknown_observable(self):
        with self.assertRaises(ConfigError):
            get_observable("lorentzian")
