"""
Hamiltonian models H(x, xi) = q(x, xi) + V(x): an exact quadratic part plus a
decaying Gaussian potential V(x) = amplitude * exp(-(x/width)^2).
"""
from dataclasses import dataclass, field
import numpy as np
from numpy.polynomial import hermite
from egorovtools import LOGGER
from egorovtools.classical import AlphaSampling, estimate_alpha
from egorovtools.exceptions import AnalyticExtensionError, ConfigError
from egorovtools.phase_space import QuadraticPart, Symbol


@dataclass(frozen=True)
class HamiltonianModel:
    name: str
    quadratic: QuadraticPart
    amplitude: float = 0.0
    width: float = 1.0
    declared_nu: float = np.inf
    declared_sigma: float = np.inf
    declared_rho: float = np.inf
    complex_extension: bool = True
    parameters: dict = field(default_factory=dict, compare=False)

    @property
    def key(self):
        "hashable identity used by flow caches"
        return (
            self.name,
            self.quadratic.constant,
            tuple(self.quadratic.linear),
            tuple(map(tuple, self.quadratic.hessian)),
            self.amplitude,
            self.width,
        )

    def is_quadratic(self):
        return self.amplitude == 0

    def is_separable(self):
        "H = T(xi) + W(x), the splitting a Stormer-Verlet scheme needs"
        return self.quadratic.hessian_matrix[0, 1] == 0

    def potential(self, x, derivative=0):
        """
        d^m/dx^m of amplitude * exp(-(x/w)^2), from the Hermite polynomial
        identity d^m/du^m exp(-u^2) = (-1)^m H_m(u) exp(-u^2). Accepts complex x.
        """
        if self.amplitude == 0:
            return np.zeros(np.shape(x), dtype=complex if np.iscomplexobj(x) else float)
        u = np.asarray(x) / self.width
        coefficients = np.zeros(derivative + 1)
        coefficients[derivative] = 1.0
        return (
            self.amplitude
            * (-1) ** derivative
            * hermite.hermval(u, coefficients)
            * np.exp(-u * u)
            / self.width ** derivative
        )

    def eval(self, x, xi):
        return self.quadratic(x, xi) + self.potential(x)

    __call__ = eval

    def gradient(self, x, xi):
        "(dH/dx, dH/dxi)"
        q_x, q_xi = self.quadratic.gradient(x, xi)
        return (q_x + self.potential(x, 1), q_xi)

    def hessian(self, x, xi):
        "array of shape x.shape + (2, 2)"
        x = np.asarray(x)
        s = self.quadratic.hessian_matrix
        v2 = self.potential(x, 2)
        result = np.empty(x.shape + (2, 2), dtype=np.result_type(v2, s.real))
        result[..., 0, 0] = s[0, 0].real + v2
        result[..., 0, 1] = s[0, 1].real
        result[..., 1, 0] = s[1, 0].real
        result[..., 1, 1] = s[1, 1].real
        return result

    def vector_field(self, x, xi):
        "J dH: (dH/dxi, -dH/dx)"
        h_x, h_xi = self.gradient(x, xi)
        return h_xi, -h_x

    def symbol(self, grid, hbar):
        "Symbol with the potential on the grid and q as its exact quadratic part"
        x, xi = grid.mesh()
        return Symbol(
            grid=grid,
            values=np.asarray(self.potential(x), dtype=complex) + 0 * xi,
            hbar=hbar,
            quadratic=self.quadratic,
            decaying=False,
            real_observable=True,
            label=self.name,
        )


def harmonic():
    "(x^2 + xi^2)/2"
    return HamiltonianModel(
        name="harmonic",
        quadratic=QuadraticPart(hessian=((1.0, 0.0), (0.0, 1.0))),
    )


def free():
    "xi^2/2"
    return HamiltonianModel(
        name="free",
        quadratic=QuadraticPart(hessian=((0.0, 0.0), (0.0, 1.0))),
    )


def gaussian_well(V0=1.0):
    "xi^2/2 + V0 exp(-x^2)"
    return HamiltonianModel(
        name="gaussian-well",
        quadratic=QuadraticPart(hessian=((0.0, 0.0), (0.0, 1.0))),
        amplitude=V0,
        width=1.0,
        parameters={"V0": V0},
    )


def pendulum_window(V0=-1.0, w=1.5):
    "xi^2/2 - V0 exp(-x^2/w^2); V0 < 0 puts a hyperbolic fixed point at the origin"
    return HamiltonianModel(
        name="pendulum-window",
        quadratic=QuadraticPart(hessian=((0.0, 0.0), (0.0, 1.0))),
        amplitude=-V0,
        width=w,
        parameters={"V0": V0, "w": w},
    )


MODEL_CATALOG = {
    "harmonic": harmonic,
    "free": free,
    "gaussian-well": gaussian_well,
    "pendulum-window": pendulum_window,
}


def model_names():
    return sorted(MODEL_CATALOG)


def get_model(name, **params):
    "build a catalog model by name"
    try:
        factory = MODEL_CATALOG[name]
    except KeyError:
        raise ConfigError(
            "unknown model %r, choose one of %s" % (name, ", ".join(model_names()))
        )
    return factory(**params)


@dataclass(frozen=True)
class AssumptionReport:
    "outcome of the sampled checks of the analyticity, growth and decay assumptions"
    model: str
    real_on_real_slice: bool
    growth_constants: tuple
    alpha: float
    third_derivative_norm: float
    passed: bool
    notes: tuple = ()


def strip_samples(sigma, extent=8.0, points=201, y_points=5):
    "x + iy lattice on the strip |y| <= sigma"
    xs = np.linspace(-extent, extent, points)
    ys = np.linspace(-sigma, sigma, y_points) if sigma > 0 else np.zeros(1)
    x, y = np.meshgrid(xs, ys, indexing="ij")
    return x, y


def check_assumptions(model, sigma, rho, extent=8.0, points=201, y_points=5):
    """
    sampled checks: H real on the real slice, |J dH(z + iy)| <= A1 + A2 |z| on
    the strip, the Hessian bound alpha and the weighted decay of the third
    derivatives of the potential
    """
    if sigma > model.declared_nu:
        raise AnalyticExtensionError(
            "sigma %s exceeds the declared analyticity radius %s of %s"
            % (sigma, model.declared_nu, model.name)
        )
    notes = []
    xs = np.linspace(-extent, extent, points)
    x_real, xi_real = np.meshgrid(xs, xs, indexing="ij")
    values = np.asarray(model.eval(x_real, xi_real), dtype=complex)
    real_on_slice = bool(np.max(np.abs(values.imag)) <= 1e-12 * max(1.0, np.max(np.abs(values))))
    if not real_on_slice:
        notes.append("H is not real on the real slice")

    x, y = strip_samples(sigma, extent, points // 4 + 1, y_points)
    z = (x + 1j * y).ravel()
    z_x, z_xi = np.meshgrid(z, z, indexing="ij")
    field_x, field_xi = model.vector_field(z_x, z_xi)
    magnitude = np.maximum(np.abs(field_x), np.abs(field_xi))
    modulus = np.maximum(np.abs(z_x.real), np.abs(z_xi.real))
    a2 = float(np.linalg.norm(model.quadratic.hessian_matrix.real, 2))
    a1 = max(float(np.max(magnitude - a2 * modulus)), 0.0)

    alpha = estimate_alpha(model, sigma, AlphaSampling(extent=extent)).value

    x, y = strip_samples(sigma, extent, points, y_points)
    third = np.abs(model.potential(x + 1j * y, 3)) * np.exp(rho * np.abs(x))
    third_norm = float(np.max(third))
    tail = float(np.max(third[[0, -1], :]))
    decays = tail <= 1e-6 * max(third_norm, 1e-300) or third_norm == 0
    if not decays:
        notes.append("third derivatives do not decay at rate rho=%s" % rho)
    passed = real_on_slice and np.isfinite(a1) and np.isfinite(alpha) and decays
    LOGGER.info(
        "assumption check for %s: A1=%s A2=%s alpha=%s passed=%s",
        model.name, a1, a2, alpha, passed,
    )
    return AssumptionReport(
        model=model.name,
        real_on_real_slice=real_on_slice,
        growth_constants=(a1, a2),
        alpha=alpha,
        third_derivative_norm=third_norm,
        passed=bool(passed),
        notes=tuple(notes),
    )
