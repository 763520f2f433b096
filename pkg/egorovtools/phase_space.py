"""
Phase-space grids, symbols sampled on them, Fourier transforms of symbols and
the weighted strip norms |b|_{sigma,rho} of analytic symbols.

Fourier convention (unitary, angular frequency) used everywhere:

    bhat(k) = (2 pi)^(-n) * integral b(z) exp(-i <k, z>) dz,   z in R^(2n)
"""
from dataclasses import dataclass, replace
import numpy as np
from scipy import optimize
from egorovtools import LOGGER
from egorovtools.exceptions import (
    AnalyticExtensionError,
    GridError,
    SymbolMismatchError,
)


CONVENTION = "unitary-angular"

REAL_TOLERANCE = 1e-12

# coefficients below this multiple of machine precision times the peak are roundoff
ROUNDOFF_FLOOR = 1e3 * np.finfo(float).eps


def is_power_of_two(value):
    "True if value is a positive integer power of two"
    value = int(value)
    return value > 0 and (value & (value - 1)) == 0


@dataclass(frozen=True)
class DualGrid:
    "Fourier grid conjugate to a PhaseGrid"
    n: int
    points_per_axis: int
    spacing: float

    @property
    def nyquist(self):
        return self.spacing * self.points_per_axis / 2.0

    @property
    def frequencies(self):
        "angular frequencies per axis in numpy FFT order"
        return self.spacing * np.fft.fftfreq(self.points_per_axis, 1.0 / self.points_per_axis)

    def phase_grid(self):
        "the PhaseGrid this dual grid belongs to"
        return PhaseGrid(
            extent=np.pi / self.spacing, points_per_axis=self.points_per_axis, n=self.n
        )


@dataclass(frozen=True)
class PhaseGrid:
    """
    Rectangular grid on [-L, L)^(2n) with M points per axis. Node j of an axis
    sits at -L + j * 2L/M.
    """
    extent: float
    points_per_axis: int
    n: int = 1

    def __post_init__(self):
        if self.n != 1:
            raise GridError("only n = 1 (a two dimensional phase space) is supported")
        if not is_power_of_two(self.points_per_axis) or self.points_per_axis < 8:
            raise GridError(
                "points_per_axis must be a power of two >= 8, got %s" % self.points_per_axis
            )
        if not self.extent > 0:
            raise GridError("extent must be positive, got %s" % self.extent)

    @property
    def spacing(self):
        return 2.0 * self.extent / self.points_per_axis

    @property
    def shape(self):
        return (self.points_per_axis,) * (2 * self.n)

    @property
    def axis(self):
        "node coordinates of one axis"
        return -self.extent + self.spacing * np.arange(self.points_per_axis)

    @property
    def cell_measure(self):
        return self.spacing ** (2 * self.n)

    def mesh(self):
        "(x, xi) coordinate arrays of shape (M, M), x along axis 0"
        return np.meshgrid(self.axis, self.axis, indexing="ij")

    def dual(self):
        "the conjugate Fourier grid: spacing pi/L, Nyquist pi M/(2L)"
        return DualGrid(
            n=self.n, points_per_axis=self.points_per_axis, spacing=np.pi / self.extent
        )

    @property
    def frequencies(self):
        return self.dual().frequencies

    def contains(self, x, xi, margin=0.0):
        "mask of points inside the box enlarged by margin on every side"
        bound = self.extent + margin
        return (
            (x >= -bound) & (x < bound) & (xi >= -bound) & (xi < bound)
        )


@dataclass(frozen=True)
class QuadraticPart:
    """
    Exact polynomial part q(z) = c + <g, z> + <z, S z>/2 of a symbol, z = (x, xi).
    Kept in closed form because a periodic grid cannot carry it.
    """
    constant: complex = 0.0
    linear: tuple = (0.0, 0.0)
    hessian: tuple = ((0.0, 0.0), (0.0, 0.0))

    @property
    def gradient_vector(self):
        return np.array(self.linear) * 1.0

    @property
    def hessian_matrix(self):
        return np.array(self.hessian) * 1.0

    def is_zero(self):
        return (
            self.constant == 0
            and not np.any(self.gradient_vector)
            and not np.any(self.hessian_matrix)
        )

    def degree(self):
        if np.any(self.hessian_matrix):
            return 2
        if np.any(self.gradient_vector):
            return 1
        return 0

    def __call__(self, x, xi):
        g = self.gradient_vector
        s = self.hessian_matrix
        return (
            self.constant
            + g[0] * x
            + g[1] * xi
            + 0.5 * (s[0, 0] * x * x + 2.0 * s[0, 1] * x * xi + s[1, 1] * xi * xi)
        )

    def gradient(self, x, xi):
        "(d/dx q, d/dxi q) at the given points"
        g = self.gradient_vector
        s = self.hessian_matrix
        return (g[0] + s[0, 0] * x + s[0, 1] * xi, g[1] + s[1, 0] * x + s[1, 1] * xi)

    def __add__(self, other):
        return QuadraticPart(
            constant=self.constant + other.constant,
            linear=tuple(self.gradient_vector + other.gradient_vector),
            hessian=tuple(map(tuple, self.hessian_matrix + other.hessian_matrix)),
        )

    def scaled(self, factor):
        return QuadraticPart(
            constant=factor * self.constant,
            linear=tuple(factor * self.gradient_vector),
            hessian=tuple(map(tuple, factor * self.hessian_matrix)),
        )


@dataclass(frozen=True, eq=False)
class Symbol:
    """
    A phase-space function b(x, xi) carried as grid values of a decaying part
    plus an optional exact QuadraticPart, tagged with hbar.
    """
    grid: PhaseGrid
    values: np.ndarray
    hbar: float
    quadratic: QuadraticPart = None
    decaying: bool = True
    real_observable: bool = False
    label: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise GridError(
                "values of shape %s do not match grid shape %s"
                % (values.shape, self.grid.shape)
            )
        if not self.hbar > 0:
            raise ValueError("hbar must be positive, got %s" % self.hbar)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.real_observable:
            scale = max(np.max(np.abs(values)), 1.0)
            if np.max(np.abs(values.imag)) > REAL_TOLERANCE * scale:
                raise ValueError(
                    "symbol %r tagged real-observable has an imaginary part" % self.label
                )

    @property
    def size(self):
        return self.values.size

    def has_quadratic(self):
        return self.quadratic is not None and not self.quadratic.is_zero()

    def full_values(self):
        "grid part plus the quadratic part evaluated at the grid nodes"
        if not self.has_quadratic():
            return np.array(self.values)
        x, xi = self.grid.mesh()
        return self.values + self.quadratic(x, xi)

    def max_norm(self):
        return float(np.max(np.abs(self.full_values())))

    def with_values(self, values, **changes):
        "same grid and hbar, new grid values and no quadratic part unless given"
        changes.setdefault("quadratic", None)
        changes.setdefault("real_observable", False)
        return replace(self, values=values, **changes)

    def grid_part(self):
        return self.with_values(self.values, label=self.label)

    def _check_compatible(self, other):
        check_compatible(self, other)

    def __add__(self, other):
        self._check_compatible(other)
        return Symbol(
            grid=self.grid,
            values=self.values + other.values,
            hbar=self.hbar,
            quadratic=_sum_quadratic(self.quadratic, other.quadratic),
            decaying=self.decaying and other.decaying,
        )

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, factor):
        return Symbol(
            grid=self.grid,
            values=factor * self.values,
            hbar=self.hbar,
            quadratic=self.quadratic.scaled(factor) if self.quadratic else None,
            decaying=self.decaying,
        )

    def __mul__(self, factor):
        return self.scaled(factor)

    __rmul__ = __mul__


def _sum_quadratic(first, second):
    if first is None:
        return second
    if second is None:
        return first
    return first + second


def check_compatible(*symbols):
    "raise SymbolMismatchError unless all symbols share grid and hbar"
    first = symbols[0]
    for other in symbols[1:]:
        if other.grid != first.grid:
            raise SymbolMismatchError("symbols are defined on different grids")
        if not np.isclose(other.hbar, first.hbar, rtol=1e-14, atol=0.0):
            raise SymbolMismatchError(
                "symbols carry different hbar: %s and %s" % (first.hbar, other.hbar)
            )


def sample_symbol(grid, func, hbar, real_observable=False, decaying=True, label=""):
    "sample a closed-form function func(x, xi) on the grid nodes"
    x, xi = grid.mesh()
    values = np.asarray(func(x, xi), dtype=complex)
    if real_observable:
        values = values.real.astype(complex)
    return Symbol(
        grid=grid,
        values=values,
        hbar=hbar,
        decaying=decaying,
        real_observable=real_observable,
        label=label,
    )


def quadratic_symbol(grid, hbar, quadratic, label=""):
    "a symbol that is only an exact quadratic part"
    return Symbol(
        grid=grid,
        values=np.zeros(grid.shape, dtype=complex),
        hbar=hbar,
        quadratic=quadratic,
        label=label,
    )


def zero_symbol(grid, hbar):
    return Symbol(grid=grid, values=np.zeros(grid.shape, dtype=complex), hbar=hbar)


@dataclass(frozen=True, eq=False)
class FourierSymbol:
    "samples of bhat on the dual grid, numpy FFT ordering on both axes"
    grid: DualGrid
    values: np.ndarray
    hbar: float
    convention: str = CONVENTION

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def cell_measure(self):
        return self.grid.spacing ** (2 * self.grid.n)

    def shifted(self):
        "values with the zero frequency moved to the centre, for display"
        return np.fft.fftshift(self.values)


def _node_phase(grid):
    "exp(i k L) per axis, the phase between FFT indexing and centred nodes"
    return np.exp(1j * grid.frequencies * grid.extent)


def forward_transform(b):
    "Fourier transform of the grid part of b under the unitary-angular convention"
    if b.has_quadratic():
        raise GridError("a quadratic part has no Fourier transform on the grid")
    grid = b.grid
    phase = _node_phase(grid)
    prefactor = grid.cell_measure / (2.0 * np.pi) ** grid.n
    values = prefactor * np.outer(phase, phase) * np.fft.fft2(b.values)
    return FourierSymbol(grid=grid.dual(), values=values, hbar=b.hbar)


def inverse_transform(bhat, **symbol_kwargs):
    "inverse of forward_transform, returning a Symbol on the primal grid"
    grid = bhat.grid.phase_grid()
    phase = _node_phase(grid)
    prefactor = grid.cell_measure / (2.0 * np.pi) ** grid.n
    values = np.fft.ifft2(bhat.values / np.outer(phase, phase)) / prefactor
    return Symbol(grid=grid, values=values, hbar=bhat.hbar, **symbol_kwargs)


def coefficients(values):
    "trigonometric interpolation coefficients relative to the first node"
    values = np.asarray(values)
    return np.fft.fft2(values) / values.size


def l2_norm(b):
    "grid-weighted L2 norm of the grid part"
    return float(np.sqrt(b.grid.cell_measure * np.sum(np.abs(b.values) ** 2)))


def fourier_l2_norm(bhat):
    return float(np.sqrt(bhat.cell_measure * np.sum(np.abs(bhat.values) ** 2)))


def fourier_l1_norm(bhat):
    "integral of |bhat| dk over the dual grid"
    return float(bhat.cell_measure * np.sum(np.abs(bhat.values)))


def evaluation_matrix(grid, points):
    """
    Matrix E with E[p, a] = basis function a of the trigonometric interpolant
    evaluated at points[p]; the Nyquist column uses a cosine so real data
    interpolate to real values.
    """
    points = np.asarray(points, dtype=float)
    size = grid.points_per_axis
    freqs = grid.frequencies
    offset = points[:, None] - grid.axis[0]
    matrix = np.exp(1j * offset * freqs[None, :])
    nyquist = size // 2
    matrix[:, nyquist] = np.cos(offset[:, 0] * freqs[nyquist])
    return matrix


def evaluate_on_tensor(b, xs, xis, mask_outside=True):
    """
    Values of the grid interpolant of b on the tensor product xs x xis. Points
    outside the box are set to zero for decaying symbols. The quadratic part
    is evaluated exactly.
    """
    xs = np.asarray(xs, dtype=float)
    xis = np.asarray(xis, dtype=float)
    grid = b.grid
    coeffs = coefficients(b.values)
    values = evaluation_matrix(grid, xs) @ coeffs @ evaluation_matrix(grid, xis).T
    if mask_outside and b.decaying:
        inside_x = (xs >= -grid.extent) & (xs < grid.extent)
        inside_xi = (xis >= -grid.extent) & (xis < grid.extent)
        values = values * np.outer(inside_x, inside_xi)
    if b.has_quadratic():
        x, xi = np.meshgrid(xs, xis, indexing="ij")
        values = values + b.quadratic(x, xi)
    return values


def evaluate_at_points(b, x, xi, chunk_size=4096):
    """
    Values of the grid interpolant of b at scattered points (x, xi) of any
    common shape, by direct evaluation of the trigonometric series. Cost is
    O(P M) per point chunk after an O(P M^2) contraction. Decaying symbols
    vanish outside the box.
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    grid = b.grid
    coeffs = coefficients(b.values)
    flat_x = x.ravel()
    flat_xi = xi.ravel()
    values = np.empty(flat_x.shape, dtype=complex)
    for start in range(0, flat_x.size, chunk_size):
        stop = start + chunk_size
        basis_x = evaluation_matrix(grid, flat_x[start:stop])
        basis_xi = evaluation_matrix(grid, flat_xi[start:stop])
        values[start:stop] = np.einsum("pa,pa->p", basis_x, basis_xi @ coeffs.T)
    values = values.reshape(x.shape)
    if b.decaying:
        values = np.where(grid.contains(x, xi), values, 0.0)
    if b.has_quadratic():
        values = values + b.quadratic(x, xi)
    return values


def spectral_derivative(b, order_x, order_xi):
    "grid values of d^order_x/dx d^order_xi/dxi of the grid part of b"
    grid = b.grid
    kx = grid.frequencies
    multiplier = np.outer((1j * kx) ** order_x, (1j * kx) ** order_xi)
    # the Nyquist mode has no well defined odd derivative
    nyquist = grid.points_per_axis // 2
    if order_x % 2:
        multiplier[nyquist, :] = 0.0
    if order_xi % 2:
        multiplier[:, nyquist] = 0.0
    return np.fft.ifft2(np.fft.fft2(b.values) * multiplier)


def momentum_support(b, tol=1e-10):
    "largest |xi| at which the grid part exceeds tol times its peak"
    magnitude = np.max(np.abs(b.values), axis=0)
    peak = np.max(magnitude)
    if peak == 0:
        return 0.0
    significant = np.abs(b.grid.axis)[magnitude > tol * peak]
    return float(np.max(significant)) + b.grid.spacing


@dataclass(frozen=True)
class StripNorm:
    sigma: float
    rho: float
    value: float
    weight: str = "sup"
    tolerance: float = 0.0


@dataclass(frozen=True)
class StripSampling:
    "sampling control for strip_norm"
    points: int = 81
    extent: float = 8.0
    y_points: int = 5
    polish: bool = True
    tolerance: float = 1e-9


def phase_weight(x1, x2, weight):
    "|x| of the real part, sup of components or l1"
    if weight == "sup":
        return np.maximum(np.abs(x1), np.abs(x2))
    if weight == "l1":
        return np.abs(x1) + np.abs(x2)
    raise ValueError("unknown weight %r" % weight)


def strip_norm(b, sigma, rho, refinement=None, weight="sup"):
    """
    Estimate |b|_{sigma,rho} = sup over |Im z| <= sigma of |b(z)| exp(rho |Re z|)
    for a closed-form AnalyticSymbolSpec, by lattice sampling of the strip and
    a bounded local polish of the best sample. |Re z| is the sup of the
    component moduli, the norm the bound calculator consumes through
    BoundContext.Bbar; weight="l1" sums them instead.
    """
    refinement = refinement or StripSampling()
    func = getattr(b, "func", None)
    if func is None:
        raise AnalyticExtensionError("symbol %r has no registered complex extension" % b)
    if sigma < 0 or rho < 0:
        raise ValueError("sigma and rho must be nonnegative")
    if sigma >= b.analyticity_radius:
        raise AnalyticExtensionError(
            "sigma %s exceeds the analyticity radius %s of %s"
            % (sigma, b.analyticity_radius, b.name)
        )
    xs = np.linspace(-refinement.extent, refinement.extent, refinement.points)
    ys = np.linspace(-sigma, sigma, refinement.y_points) if sigma > 0 else np.zeros(1)

    def modulus(params):
        x1, x2, y1, y2 = params
        value = np.abs(func(x1 + 1j * y1, x2 + 1j * y2))
        return value * np.exp(rho * phase_weight(x1, x2, weight))

    x1, x2, y1, y2 = np.meshgrid(xs, xs, ys, ys, indexing="ij")
    sampled = modulus((x1, x2, y1, y2))
    best_index = np.unravel_index(np.argmax(sampled), sampled.shape)
    best = float(sampled[best_index])
    if refinement.polish and best > 0:
        start = np.array(
            [x1[best_index], x2[best_index], y1[best_index], y2[best_index]]
        )
        bounds = [
            (-refinement.extent, refinement.extent),
            (-refinement.extent, refinement.extent),
            (-sigma, sigma),
            (-sigma, sigma),
        ]
        result = optimize.minimize(
            lambda params: -float(modulus(params)),
            start,
            method="Nelder-Mead",
            bounds=bounds,
            options={"xatol": 1e-10, "fatol": refinement.tolerance * best},
        )
        best = max(best, -float(result.fun))
    LOGGER.debug("strip norm of %s at sigma=%s rho=%s: %s", b.name, sigma, rho, best)
    return StripNorm(
        sigma=sigma, rho=rho, value=best, weight=weight, tolerance=refinement.tolerance
    )


def real_slice_norm(b, rho, weight="sup"):
    "sup over the grid nodes of |b| exp(rho |x|), the y = 0 slice of the strip norm"
    x, xi = b.grid.mesh()
    return float(np.max(np.abs(b.full_values()) * np.exp(rho * phase_weight(x, xi, weight))))


def fourier_strip_norm(bhat, sigma, rho, delta, kappa_points=3, weight="sup"):
    """
    Measured |bhat|_{rho-delta,sigma}: sup of |bhat(k + i kappa)| exp(sigma |k|)
    over the dual grid and a lattice of |kappa| <= rho - delta. The shifted
    transform is the transform of b(z) exp(<kappa, z>).
    """
    if not 0 < delta < rho:
        raise ValueError("need 0 < delta < rho, got delta=%s rho=%s" % (delta, rho))
    b = inverse_transform(bhat)
    grid = b.grid
    x, xi = grid.mesh()
    kx, kxi = np.meshgrid(grid.frequencies, grid.frequencies, indexing="ij")
    k_weight = np.exp(sigma * phase_weight(kx, kxi, weight))
    radius = rho - delta
    kappas = np.linspace(-radius, radius, kappa_points)
    measured = 0.0
    for kappa_x in kappas:
        for kappa_xi in kappas:
            # kappa ranges over the dual ball of the phase weight
            if weight == "sup" and abs(kappa_x) + abs(kappa_xi) > radius * (1.0 + 1e-12):
                continue
            damped = b.with_values(b.values * np.exp(kappa_x * x + kappa_xi * xi))
            magnitude = np.abs(forward_transform(damped).values)
            peak = np.max(magnitude)
            if peak == 0:
                continue
            above_floor = magnitude > ROUNDOFF_FLOOR * peak
            measured = max(measured, float(np.max((magnitude * k_weight)[above_floor])))
    return measured


def fourier_norm_bound(norm, delta, n=1):
    "(2/pi)^n delta^(-2n) |b|_{sigma,rho}"
    return (2.0 / np.pi) ** n * delta ** (-2 * n) * norm.value
