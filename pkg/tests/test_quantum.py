import unittest
import numpy as np
from egorovtools.analytic import gaussian
from egorovtools.exceptions import AdmissibilityError, GridError, SymbolMismatchError
from egorovtools.models import gaussian_well, harmonic
from egorovtools.phase_space import PhaseGrid, QuadraticPart, quadratic_symbol, zero_symbol
from egorovtools.quantum import (
    DEFAULT_POINTS_PER_OSCILLATION,
    PositionGrid,
    QuantumOperator,
    check_admissible,
    heisenberg_evolve,
    identity,
    l1_fourier_norm_bound,
    operator_norm,
    propagator,
    required_refinement,
    unitarity_defect,
    weyl_quantize,
    weyl_symbol,
)


PHASE_GRID = PhaseGrid(extent=8.0, points_per_axis=64)


def low_energy_projector(H, count):
    _, eigenvectors = H.spectral_decomposition
    low = eigenvectors[:, :count]
    return low @ low.conj().T


class TestPositionGrid(unittest.TestCase):
    def test_from_phase_grid(self):
        grid = PositionGrid.from_phase_grid(PHASE_GRID, 0.1, 1)
        self.assertEqual(grid.points, 128)
        self.assertEqual(grid.spacing, 0.125)
        self.assertEqual(len(grid.midpoints), 255)
        self.assertEqual(grid.midpoints[2], grid.nodes[1])
        self.assertAlmostEqual(grid.max_momentum, 0.8 * np.pi)
        self.assertAlmostEqual(float(np.max(np.abs(grid.momenta))), grid.max_momentum)
        self.assertEqual(grid.refinement_over(PHASE_GRID), 1)

    def test_invalid(self):
        with self.assertRaises(GridError):
            PositionGrid(extent=8.0, points=100, hbar=0.1)
        with self.assertRaises(ValueError):
            PositionGrid(extent=8.0, points=64, hbar=0.0)

    def test_refinement_mismatch(self):
        with self.assertRaises(SymbolMismatchError):
            PositionGrid(extent=6.0, points=64, hbar=0.1).refinement_over(PHASE_GRID)
        with self.assertRaises(SymbolMismatchError):
            PositionGrid(extent=8.0, points=32, hbar=0.1).refinement_over(PHASE_GRID)


class TestAdmissibility(unittest.TestCase):
    def test_required_refinement(self):
        for hbar, expected in ((0.2, 3), (0.1, 4), (0.05, 5)):
            b = gaussian().sample(PHASE_GRID, hbar)
            self.assertEqual(required_refinement(b), expected)

    def test_too_small_hbar(self):
        b = gaussian().sample(PHASE_GRID, 0.1)
        grid = PositionGrid.from_phase_grid(PHASE_GRID, 0.1)
        with self.assertRaises(AdmissibilityError) as context:
            weyl_quantize(b, grid)
        self.assertAlmostEqual(context.exception.min_hbar, 3.75 / np.pi)

    def test_refinement_exhausted(self):
        b = gaussian().sample(PHASE_GRID, 0.05)
        with self.assertRaises(AdmissibilityError):
            required_refinement(b, max_refinement=1)

    def test_default_rule(self):
        self.assertEqual(DEFAULT_POINTS_PER_OSCILLATION, 6.0)

    def test_nyquist_rule(self):
        "two points per oscillation admits a grid the six point default rejects"
        b = gaussian().sample(PHASE_GRID, 0.2)
        grid = PositionGrid.from_phase_grid(PHASE_GRID, 0.2, 2)
        with self.assertRaises(AdmissibilityError):
            check_admissible(b, grid)
        check_admissible(b, grid, points_per_oscillation=2.0)
        self.assertEqual(required_refinement(b, points_per_oscillation=2.0), 1)

    def test_non_decaying_symbols_pass(self):
        H = gaussian_well().symbol(PHASE_GRID, 0.01)
        check_admissible(H, PositionGrid.from_phase_grid(PHASE_GRID, 0.01))


class TestWeylQuantize(unittest.TestCase):
    def setUp(self):
        self.grid = PositionGrid.from_phase_grid(PHASE_GRID, 0.1)

    def quantize(self, quadratic):
        return weyl_quantize(quadratic_symbol(PHASE_GRID, 0.1, quadratic), self.grid)

    def test_unit_symbol(self):
        A = self.quantize(QuadraticPart(constant=1.0))
        self.assertTrue(A.hermitian)
        np.testing.assert_allclose(A.matrix, np.eye(64), atol=1e-10)

    def test_position(self):
        A = self.quantize(QuadraticPart(linear=(1.0, 0.0)))
        np.testing.assert_allclose(A.matrix, np.diag(self.grid.nodes), atol=1e-10)

    def test_momentum_squared_is_spectral_laplacian(self):
        A = self.quantize(QuadraticPart(hessian=((0.0, 0.0), (0.0, 2.0))))
        momenta = self.grid.momenta
        laplacian = np.fft.ifft(momenta[:, None] ** 2 * np.fft.fft(np.eye(64), axis=0), axis=0)
        np.testing.assert_allclose(A.matrix, laplacian, atol=1e-10)

    def test_symbol_grid_mismatch(self):
        b = gaussian().sample(PHASE_GRID, 0.2)
        with self.assertRaises(SymbolMismatchError):
            weyl_quantize(b, PositionGrid.from_phase_grid(PHASE_GRID, 0.1, 2))

    def test_weyl_symbol_inverts_quantization(self):
        b = gaussian(center=(0.5, -0.5)).sample(PHASE_GRID, 0.2)
        grid = PositionGrid.from_phase_grid(PHASE_GRID, 0.2, 3)
        extracted = weyl_symbol(weyl_quantize(b, grid), PHASE_GRID)
        self.assertLess(float(np.max(np.abs(extracted.values - b.values))), 1e-6)


class TestOperators(unittest.TestCase):
    def setUp(self):
        self.grid = PositionGrid(extent=8.0, points=16, hbar=0.1)

    def test_hermitian_flag_checked(self):
        matrix = np.triu(np.ones((16, 16)))
        with self.assertRaises(ValueError):
            QuantumOperator(matrix, self.grid, hermitian=True)

    def test_shape_checked(self):
        with self.assertRaises(GridError):
            QuantumOperator(np.eye(8), self.grid)

    def test_arithmetic(self):
        one = identity(self.grid)
        total = one + 2.0 * one - one
        self.assertTrue(total.hermitian)
        np.testing.assert_allclose(total.matrix, 2.0 * np.eye(16))
        self.assertFalse((1j * one).hermitian)
        self.assertEqual((one @ one).hermitian_defect(), 0.0)

    def test_grid_mismatch(self):
        other = identity(PositionGrid(extent=8.0, points=16, hbar=0.2))
        with self.assertRaises(SymbolMismatchError):
            identity(self.grid) + other

    def test_spectral_decomposition(self):
        A = QuantumOperator(np.diag(np.arange(16.0)), self.grid, hermitian=True)
        self.assertIs(A.spectral_decomposition, A.spectral_decomposition)
        with self.assertRaises(ValueError):
            QuantumOperator(np.triu(np.ones((16, 16))), self.grid).spectral_decomposition


class TestEvolution(unittest.TestCase):
    def setUp(self):
        self.grid = PositionGrid.from_phase_grid(PHASE_GRID, 0.1, 1)
        self.H = weyl_quantize(harmonic().symbol(PHASE_GRID, 0.1), self.grid)

    def test_zero_time(self):
        np.testing.assert_array_equal(propagator(self.H, 0.0).matrix, np.eye(128))

    def test_harmonic_spectrum(self):
        eigenvalues, _ = self.H.spectral_decomposition
        np.testing.assert_allclose(eigenvalues[:6], 0.1 * (np.arange(6) + 0.5), atol=1e-9)

    def test_full_period(self):
        "U(2 pi) = -1 on the low-energy subspace"
        U = propagator(self.H, 2.0 * np.pi)
        P = low_energy_projector(self.H, 6)
        self.assertLess(np.linalg.norm(U.matrix @ P + P, 2), 1e-7)
        self.assertLess(unitarity_defect(U), 1e-10)

    def test_unitarity_anharmonic(self):
        H = weyl_quantize(gaussian_well().symbol(PHASE_GRID, 0.1), self.grid)
        self.assertLess(unitarity_defect(propagator(H, 1.3)), 1e-10)

    def test_exact_egorov_for_quadratic_hamiltonian(self):
        t = 0.7
        X = weyl_quantize(quadratic_symbol(PHASE_GRID, 0.1, QuadraticPart(linear=(1.0, 0.0))), self.grid)
        rotated = weyl_quantize(
            quadratic_symbol(PHASE_GRID, 0.1, QuadraticPart(linear=(np.cos(t), np.sin(t)))), self.grid
        )
        evolved = heisenberg_evolve(X, self.H, t)
        self.assertTrue(evolved.hermitian)
        P = low_energy_projector(self.H, 10)
        self.assertLess(np.linalg.norm(P @ (evolved.matrix - rotated.matrix) @ P, 2), 1e-7)

    def test_zero_time_evolution(self):
        X = identity(self.grid)
        self.assertIs(heisenberg_evolve(X, self.H, 0.0), X)


class TestOperatorNorm(unittest.TestCase):
    def test_identity(self):
        grid = PositionGrid(extent=8.0, points=32, hbar=0.1)
        self.assertAlmostEqual(operator_norm(identity(grid)), 1.0, places=9)

    def test_diagonal(self):
        grid = PositionGrid(extent=8.0, points=32, hbar=0.1)
        self.assertAlmostEqual(operator_norm(np.diag(grid.nodes)), 8.0, places=8)

    def test_random_hermitian(self):
        rng = np.random.default_rng(1)
        matrix = rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64))
        matrix = matrix + matrix.conj().T
        expected = float(np.max(np.abs(np.linalg.eigvalsh(matrix))))
        self.assertAlmostEqual(operator_norm(matrix) / expected, 1.0, places=8)

    def test_zero(self):
        self.assertEqual(operator_norm(np.zeros((8, 8))), 0.0)

    def test_l1_fourier_bound_dominates(self):
        b = gaussian().sample(PHASE_GRID, 0.2)
        grid = PositionGrid.from_phase_grid(PHASE_GRID, 0.2, 3)
        self.assertLessEqual(operator_norm(weyl_quantize(b, grid)), l1_fourier_norm_bound(b))
        self.assertEqual(l1_fourier_norm_bound(zero_symbol(PHASE_GRID, 0.2)), 0.0)

    def test_l1_fourier_bound_rejects_quadratic_part(self):
        with self.assertRaises(GridError):
            l1_fourier_norm_bound(quadratic_symbol(PHASE_GRID, 0.2, QuadraticPart(constant=1.0)))
