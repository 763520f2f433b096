"""
The quantum reference: Weyl quantization of grid symbols as dense matrices on
a position grid, the propagator U(t) = exp(iHt/hbar), Heisenberg evolution
B_t = U(t) B U(-t) and operator norms.
"""
from dataclasses import dataclass
from functools import cached_property
import numpy as np
from scipy import linalg
from egorovtools import LOGGER
from egorovtools.exceptions import (
    AdmissibilityError,
    ConvergenceError,
    GridError,
    SymbolMismatchError,
)
from egorovtools.phase_space import (
    Symbol,
    coefficients,
    evaluate_on_tensor,
    is_power_of_two,
    momentum_support,
)


DEFAULT_POINTS_PER_OSCILLATION = 6.0

HERMITIAN_TOLERANCE = 1e-10


@dataclass(frozen=True)
class PositionGrid:
    "M_q nodes x_i = -L + i dx on [-L, L) and the momenta p_k = hbar 2 pi fftfreq(M_q, dx)"
    extent: float
    points: int
    hbar: float

    def __post_init__(self):
        if not is_power_of_two(self.points) or self.points < 8:
            raise GridError("points must be a power of two >= 8, got %s" % self.points)
        if not self.extent > 0:
            raise GridError("extent must be positive, got %s" % self.extent)
        if not self.hbar > 0:
            raise ValueError("hbar must be positive, got %s" % self.hbar)

    @classmethod
    def from_phase_grid(cls, grid, hbar, refinement=0):
        "same extent as the phase grid, M 2^refinement points"
        return cls(extent=grid.extent, points=grid.points_per_axis * 2 ** refinement, hbar=hbar)

    @property
    def spacing(self):
        return 2.0 * self.extent / self.points

    @property
    def nodes(self):
        return -self.extent + self.spacing * np.arange(self.points)

    @property
    def midpoints(self):
        "(x_i + x_j)/2 for every i + j = s, s = 0 .. 2M - 2"
        return -self.extent + 0.5 * self.spacing * np.arange(2 * self.points - 1)

    @property
    def momenta(self):
        return self.hbar * 2.0 * np.pi * np.fft.fftfreq(self.points, self.spacing)

    @property
    def max_momentum(self):
        return np.pi * self.hbar / self.spacing

    def minimum_hbar(self, support, points_per_oscillation=DEFAULT_POINTS_PER_OSCILLATION):
        "smallest hbar with at least points_per_oscillation nodes per period of exp(i x support/hbar)"
        return points_per_oscillation * support * self.spacing / (2.0 * np.pi)

    def refinement_over(self, phase_grid):
        "r with points = M 2^r, after checking the grids share their extent"
        if not np.isclose(self.extent, phase_grid.extent, rtol=1e-14, atol=0.0):
            raise SymbolMismatchError(
                "position grid extent %s differs from phase grid extent %s"
                % (self.extent, phase_grid.extent)
            )
        ratio = self.points // phase_grid.points_per_axis
        if ratio * phase_grid.points_per_axis != self.points or not is_power_of_two(ratio):
            raise SymbolMismatchError(
                "position grid of %s points is not a refinement of %s phase grid points"
                % (self.points, phase_grid.points_per_axis)
            )
        return int(np.log2(ratio))


@dataclass(frozen=True, eq=False)
class QuantumOperator:
    matrix: np.ndarray
    grid: PositionGrid
    hermitian: bool = False

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (self.grid.points, self.grid.points):
            raise GridError(
                "matrix of shape %s does not match %s grid points" % (matrix.shape, self.grid.points)
            )
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        if self.hermitian:
            scale = max(np.linalg.norm(matrix), 1e-300)
            defect = np.linalg.norm(matrix - matrix.conj().T)
            if defect > HERMITIAN_TOLERANCE * scale:
                raise ValueError("operator flagged Hermitian has relative defect %.3e" % (defect / scale))

    def _check(self, other):
        if self.grid != other.grid:
            raise SymbolMismatchError("operators are defined on different position grids")

    def __add__(self, other):
        self._check(other)
        return QuantumOperator(
            self.matrix + other.matrix, self.grid, hermitian=self.hermitian and other.hermitian
        )

    def __sub__(self, other):
        self._check(other)
        return QuantumOperator(
            self.matrix - other.matrix, self.grid, hermitian=self.hermitian and other.hermitian
        )

    def __matmul__(self, other):
        self._check(other)
        return QuantumOperator(self.matrix @ other.matrix, self.grid)

    def scaled(self, factor):
        return QuantumOperator(
            factor * self.matrix, self.grid, hermitian=self.hermitian and np.isreal(factor)
        )

    def __mul__(self, factor):
        return self.scaled(factor)

    __rmul__ = __mul__

    def dagger(self):
        return QuantumOperator(self.matrix.conj().T, self.grid, hermitian=self.hermitian)

    def hermitian_defect(self):
        scale = max(np.linalg.norm(self.matrix), 1e-300)
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T) / scale)

    @cached_property
    def spectral_decomposition(self):
        "(eigenvalues, eigenvectors) of a Hermitian operator, computed once"
        if not self.hermitian:
            raise ValueError("spectral decomposition needs a Hermitian operator")
        try:
            eigenvalues, eigenvectors = linalg.eigh(self.matrix)
        except linalg.LinAlgError as exception:
            LOGGER.exception("eigendecomposition failed")
            raise ConvergenceError("eigendecomposition failed: %s" % exception)
        return eigenvalues, eigenvectors


def identity(grid):
    return QuantumOperator(np.eye(grid.points), grid, hermitian=True)


def check_admissible(b, grid, points_per_oscillation=DEFAULT_POINTS_PER_OSCILLATION):
    """
    raise AdmissibilityError unless 2 pi hbar / (xi_s dx) >= points_per_oscillation,
    xi_s being the momentum support of the grid part
    """
    if not b.decaying or not np.any(b.values):
        return
    support = momentum_support(b)
    if support == 0:
        return
    min_hbar = grid.minimum_hbar(support, points_per_oscillation)
    if grid.hbar < min_hbar:
        raise AdmissibilityError(
            "hbar=%s is too small for dx=%s and momentum support %.3f, minimum admissible hbar is %.4g"
            % (grid.hbar, grid.spacing, support, min_hbar),
            min_hbar=min_hbar,
        )


def required_refinement(b, points_per_oscillation=DEFAULT_POINTS_PER_OSCILLATION, max_refinement=5):
    "smallest r such that b is admissible on the position grid of M 2^r points"
    for refinement in range(max_refinement + 1):
        grid = PositionGrid.from_phase_grid(b.grid, b.hbar, refinement)
        try:
            check_admissible(b, grid, points_per_oscillation)
        except AdmissibilityError:
            continue
        return refinement
    grid = PositionGrid.from_phase_grid(b.grid, b.hbar, max_refinement)
    support = momentum_support(b)
    raise AdmissibilityError(
        "hbar=%s is not admissible up to refinement %s" % (b.hbar, max_refinement),
        min_hbar=grid.minimum_hbar(support, points_per_oscillation),
    )


def weyl_quantize(b, grid, points_per_oscillation=DEFAULT_POINTS_PER_OSCILLATION):
    """
    Op^W(b) as the matrix A_ij = (1/M) sum_k b((x_i + x_j)/2, p_k) e^{i (x_i - x_j) p_k / hbar}:
    the symbol is evaluated once on the (midpoint, momentum) lattice, one
    inverse FFT along the momenta gives every kernel diagonal
    """
    grid.refinement_over(b.grid)
    if not np.isclose(b.hbar, grid.hbar, rtol=1e-14, atol=0.0):
        raise SymbolMismatchError("symbol hbar %s differs from grid hbar %s" % (b.hbar, grid.hbar))
    check_admissible(b, grid, points_per_oscillation)
    size = grid.points
    samples = evaluate_on_tensor(b, grid.midpoints, np.fft.fftshift(grid.momenta))
    samples = np.fft.ifftshift(samples, axes=1)
    transformed = np.fft.ifft(samples, axis=1)
    index = np.arange(size)
    matrix = transformed[index[:, None] + index[None, :], (index[:, None] - index[None, :]) % size]
    real_symbol = b.real_observable or (
        np.max(np.abs(samples.imag)) <= 1e-12 * max(1.0, np.max(np.abs(samples)))
    )
    return QuantumOperator(matrix, grid, hermitian=bool(real_symbol))


def _upsample_axis(values, axis):
    "trigonometric interpolation onto a grid of twice the density along one axis"
    size = values.shape[axis]
    half = size // 2
    spectrum = np.fft.fft(values, axis=axis)
    spectrum = np.moveaxis(spectrum, axis, 0)
    padded = np.zeros((2 * size,) + spectrum.shape[1:], dtype=complex)
    padded[:half] = spectrum[:half]
    padded[-half + 1 :] = spectrum[half + 1 :]
    padded[half] = 0.5 * spectrum[half]
    padded[-half] = 0.5 * spectrum[half]
    return np.moveaxis(2.0 * np.fft.ifft(padded, axis=0), 0, axis)


def weyl_symbol(operator, phase_grid):
    """
    the Weyl symbol of a dense operator on the nodes of phase_grid:
    b(x, xi) = dx sum_m K(x + m dx/2, x - m dx/2) e^{-i m dx xi / hbar}, with
    the kernel K = A/dx interpolated onto the half-spaced grid. Momenta beyond
    pi hbar/dx are not resolved and are set to zero.
    """
    grid = operator.grid
    refinement = grid.refinement_over(phase_grid)
    dx = grid.spacing
    kernel = _upsample_axis(_upsample_axis(operator.matrix / dx, 0), 1)
    fine = 2 * grid.points
    centres = 2 * (2 ** refinement) * np.arange(phase_grid.points_per_axis)
    offsets = np.arange(-grid.points, grid.points)
    rows = (centres[:, None] + offsets[None, :]) % fine
    columns = (centres[:, None] - offsets[None, :]) % fine
    antidiagonals = kernel[rows, columns]
    xi = phase_grid.axis
    phases = np.exp(-1j * np.outer(offsets * dx, xi) / grid.hbar)
    values = dx * antidiagonals @ phases
    values[:, np.abs(xi) > grid.max_momentum] = 0.0
    return Symbol(grid=phase_grid, values=values, hbar=grid.hbar, label="weyl symbol")


def propagator(H, t):
    "U(t) = exp(i H t / hbar) from the cached eigendecomposition of H"
    if t == 0:
        return identity(H.grid)
    eigenvalues, eigenvectors = H.spectral_decomposition
    phases = np.exp(1j * eigenvalues * t / H.grid.hbar)
    return QuantumOperator((eigenvectors * phases[None, :]) @ eigenvectors.conj().T, H.grid)


def unitarity_defect(U):
    return float(np.max(np.abs(U.matrix.conj().T @ U.matrix - np.eye(U.grid.points))))


def heisenberg_evolve(B, H, t):
    "B_t = U(t) B U(-t)"
    B._check(H)
    if t == 0:
        return B
    U = propagator(H, t)
    matrix = U.matrix @ B.matrix @ U.matrix.conj().T
    if B.hermitian:
        matrix = 0.5 * (matrix + matrix.conj().T)
    return QuantumOperator(matrix, B.grid, hermitian=B.hermitian)


def operator_norm(A, tol=1e-9, max_iter=50000, seed=0):
    """
    largest singular value by power iteration on A^H A, stopped when the
    residual |A^H A x - lambda x| falls below tol * lambda or the Rayleigh
    quotient stagnates to tol^2, which happens when the top singular values
    cluster
    """
    matrix = A.matrix if isinstance(A, QuantumOperator) else np.asarray(A, dtype=complex)
    gram = matrix.conj().T @ matrix
    if not np.any(gram):
        return 0.0
    rng = np.random.default_rng(seed)
    vector = rng.normal(size=gram.shape[0]) + 1j * rng.normal(size=gram.shape[0])
    vector /= np.linalg.norm(vector)
    estimate = 0.0
    for iteration in range(max_iter):
        image = gram @ vector
        previous = estimate
        estimate = float(np.vdot(vector, image).real)
        residual = np.linalg.norm(image - estimate * vector)
        if residual <= tol * estimate or abs(estimate - previous) <= tol * tol * estimate:
            LOGGER.debug("power iteration converged after %s iterations", iteration + 1)
            return float(np.sqrt(estimate))
        norm = np.linalg.norm(image)
        if norm == 0:
            return 0.0
        vector = image / norm
    raise ConvergenceError(
        "power iteration did not converge in %s iterations, last estimate %s"
        % (max_iter, np.sqrt(max(estimate, 0.0)))
    )


def l1_fourier_norm_bound(r):
    """
    integral of |rhat(k)| dk / (2 pi)^n on the dual grid, the sum of the moduli
    of the trigonometric coefficients of r; bounds the norm of Op^W(r)
    """
    if r.has_quadratic():
        raise GridError("a quadratic part has no Fourier transform on the grid")
    return float(np.sum(np.abs(coefficients(r.values))))
