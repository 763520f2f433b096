"""
The classical flow of a Hamiltonian model on the phase grid, its Jacobian,
pullbacks b o phi^t of symbols, and the Hessian rate alpha.
"""
from dataclasses import dataclass, replace
import math
import threading
import numpy as np
from scipy import integrate, linalg, ndimage
from egorovtools import LOGGER
from egorovtools.exceptions import (
    AnalyticExtensionError,
    FlowIntegrationError,
    PullbackError,
    SymbolMismatchError,
)
from egorovtools.phase_space import (
    QuadraticPart,
    Symbol,
    evaluate_at_points,
    phase_weight,
    strip_norm,
)


SYMPLECTIC_J = np.array([[0.0, 1.0], [-1.0, 0.0]])

DEFAULT_TOLERANCE = 1e-10

# fourth order composition of Stormer-Verlet
YOSHIDA_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
YOSHIDA_W0 = -(2.0 ** (1.0 / 3.0)) * YOSHIDA_W1
YOSHIDA_DRIFT = (
    YOSHIDA_W1 / 2,
    (YOSHIDA_W0 + YOSHIDA_W1) / 2,
    (YOSHIDA_W0 + YOSHIDA_W1) / 2,
    YOSHIDA_W1 / 2,
)
YOSHIDA_KICK = (YOSHIDA_W1, YOSHIDA_W0, YOSHIDA_W1)


@dataclass(frozen=True)
class IntegratorReport:
    method: str
    rtol: float
    atol: float
    steps: int
    energy_drift: float
    determinant_error: float
    message: str = ""


@dataclass(frozen=True, eq=False)
class FlowMap:
    """
    phi^t evaluated at every node of a PhaseGrid: images (x, xi) of shape
    (M, M) and the Jacobian of shape (M, M, 2, 2)
    """
    grid: object
    t: float
    x: np.ndarray
    xi: np.ndarray
    jacobian: np.ndarray
    integrator_report: IntegratorReport
    linear: bool = False

    def is_identity(self):
        return self.t == 0

    @property
    def images(self):
        return np.stack([self.x, self.xi])

    def determinant(self):
        return np.linalg.det(self.jacobian)

    def symplectic_defect(self):
        "max over nodes of |J^T Dphi^T J Dphi - I|"
        jac = self.jacobian
        product = SYMPLECTIC_J.T @ np.swapaxes(jac, -1, -2) @ SYMPLECTIC_J @ jac
        return float(np.max(np.abs(product - np.eye(2))))

    def affine_map(self):
        "(Phi, c) with phi^t(z) = Phi z + c, only for flows of quadratic models"
        if not self.linear:
            raise ValueError("flow at t=%s is not affine" % self.t)
        phi = np.array(self.jacobian[0, 0])
        node = np.array([self.grid.axis[0], self.grid.axis[0]])
        offset = np.array([self.x[0, 0], self.xi[0, 0]]) - phi @ node
        return phi, offset


def identity_flow(grid):
    x, xi = grid.mesh()
    jacobian = np.broadcast_to(np.eye(2), grid.shape + (2, 2)).copy()
    report = IntegratorReport(
        method="identity", rtol=0.0, atol=0.0, steps=0, energy_drift=0.0, determinant_error=0.0
    )
    return FlowMap(grid=grid, t=0.0, x=x, xi=xi, jacobian=jacobian, integrator_report=report, linear=True)


def _flow_rhs(model, size):
    "vectorized right hand side for the state and the variational equation"

    def rhs(_, state):
        x = state[:size]
        xi = state[size : 2 * size]
        jac = state[2 * size :].reshape(2, 2, size)
        dx, dxi = model.vector_field(x, xi)
        hess = model.hessian(x, xi)
        # J * Hessian
        a = np.empty((2, 2, size), dtype=hess.dtype)
        a[0, 0] = hess[:, 1, 0]
        a[0, 1] = hess[:, 1, 1]
        a[1, 0] = -hess[:, 0, 0]
        a[1, 1] = -hess[:, 0, 1]
        djac = np.einsum("iks,kjs->ijs", a, jac)
        return np.concatenate(
            [np.broadcast_to(dx, (size,)), np.broadcast_to(dxi, (size,)), djac.ravel()]
        )

    return rhs


def _initial_state(x0, xi0):
    size = x0.size
    jac = np.zeros((2, 2, size), dtype=np.result_type(x0, float))
    jac[0, 0] = 1.0
    jac[1, 1] = 1.0
    return np.concatenate([x0.ravel(), xi0.ravel(), jac.ravel()])


def _solve(model, x0, xi0, t, tol, method):
    size = x0.size
    return integrate.solve_ivp(
        _flow_rhs(model, size),
        (0.0, t),
        _initial_state(x0, xi0),
        method=method,
        rtol=tol,
        atol=tol,
    )


def _locate_failures(model, x0, xi0, t, tol, method, indices):
    "bisect the node set until the failing trajectories are isolated"
    result = _solve(model, x0[indices], xi0[indices], t, tol, method)
    if result.success and np.all(np.isfinite(result.y[:, -1])):
        return []
    if len(indices) == 1:
        return list(indices)
    half = len(indices) // 2
    return _locate_failures(model, x0, xi0, t, tol, method, indices[:half]) + _locate_failures(
        model, x0, xi0, t, tol, method, indices[half:]
    )


def affine_flow(model, t):
    "exact (Phi, c) of the flow of a quadratic model from the augmented matrix exponential"
    generator = np.zeros((3, 3))
    generator[:2, :2] = SYMPLECTIC_J @ model.quadratic.hessian_matrix.real
    generator[:2, 2] = SYMPLECTIC_J @ model.quadratic.gradient_vector.real
    propagator = linalg.expm(t * generator)
    return propagator[:2, :2], propagator[:2, 2]


def integrate_points(model, x0, xi0, t, tol=DEFAULT_TOLERANCE, method="DOP853"):
    """
    integrate the flow and its variational equation from arbitrary points;
    returns (x, xi, jacobian, steps) with the shapes of x0
    """
    x0 = np.asarray(x0, dtype=float)
    xi0 = np.asarray(xi0, dtype=float)
    shape = x0.shape
    flat_x = x0.ravel()
    flat_xi = xi0.ravel()
    size = flat_x.size
    if t == 0:
        jacobian = np.broadcast_to(np.eye(2), shape + (2, 2)).copy()
        return x0.copy(), xi0.copy(), jacobian, 0
    result = _solve(model, flat_x, flat_xi, t, tol, method)
    final = result.y[:, -1] if result.y.size else np.full(6 * size, np.nan)
    if not result.success or not np.all(np.isfinite(final)):
        failed = _locate_failures(model, flat_x, flat_xi, t, tol, method, np.arange(size))
        LOGGER.error("flow integration failed at t=%s for %s nodes: %s", t, len(failed), result.message)
        raise FlowIntegrationError(
            "flow integration failed at t=%s: %s" % (t, result.message), node_indices=failed
        )
    x = final[:size].reshape(shape)
    xi = final[size : 2 * size].reshape(shape)
    jacobian = np.moveaxis(final[2 * size :].reshape(2, 2, size), -1, 0).reshape(shape + (2, 2))
    return x, xi, jacobian, int(result.nfev)


def integrate_flow(model, grid, t, tol=DEFAULT_TOLERANCE, method="DOP853"):
    """
    phi^t from every node of the grid. Quadratic models use the exact affine
    flow; all others are integrated with an embedded Runge-Kutta method.
    """
    if not np.isfinite(t):
        raise ValueError("flow time must be finite, got %s" % t)
    if tol <= 0:
        raise ValueError("tolerance must be positive, got %s" % tol)
    if t == 0:
        return identity_flow(grid)
    x0, xi0 = grid.mesh()
    if model.is_quadratic():
        phi, offset = affine_flow(model, t)
        x = phi[0, 0] * x0 + phi[0, 1] * xi0 + offset[0]
        xi = phi[1, 0] * x0 + phi[1, 1] * xi0 + offset[1]
        jacobian = np.broadcast_to(phi, grid.shape + (2, 2)).copy()
        steps = 0
        method = "affine"
        linear = True
    else:
        x, xi, jacobian, steps = integrate_points(model, x0, xi0, t, tol, method)
        linear = False
    drift = float(np.max(np.abs(np.real(model.eval(x, xi)) - np.real(model.eval(x0, xi0)))))
    det_error = float(np.max(np.abs(np.linalg.det(jacobian) - 1.0)))
    report = IntegratorReport(
        method=method, rtol=tol, atol=tol, steps=steps, energy_drift=drift, determinant_error=det_error
    )
    LOGGER.info(
        "integrated %s flow to t=%s: %s evaluations, energy drift %.3e, det error %.3e",
        model.name, t, steps, drift, det_error,
    )
    return FlowMap(
        grid=grid, t=float(t), x=x, xi=xi, jacobian=jacobian, integrator_report=report, linear=linear
    )


def symplectic_flow(model, grid, t, step=1e-2):
    """
    fourth order Yoshida composition of Stormer-Verlet for a separable model,
    carrying the Jacobian alongside; a cross-check of integrate_flow
    """
    if not model.is_separable():
        raise ValueError("model %s is not separable" % model.name)
    if t == 0:
        return identity_flow(grid)
    steps = max(1, int(math.ceil(abs(t) / step)))
    dt = t / steps
    s = model.quadratic.hessian_matrix.real
    g = model.quadratic.gradient_vector.real
    x, xi = grid.mesh()
    x0, xi0 = x.copy(), xi.copy()
    j11 = np.ones(grid.shape)
    j12 = np.zeros(grid.shape)
    j21 = np.zeros(grid.shape)
    j22 = np.ones(grid.shape)
    for _ in range(steps):
        for stage in range(4):
            drift = YOSHIDA_DRIFT[stage] * dt
            x = x + drift * (s[1, 1] * xi + g[1])
            j11, j12 = j11 + drift * s[1, 1] * j21, j12 + drift * s[1, 1] * j22
            if stage < 3:
                kick = YOSHIDA_KICK[stage] * dt
                force = s[0, 0] * x + g[0] + model.potential(x, 1)
                stiffness = s[0, 0] + model.potential(x, 2)
                xi = xi - kick * force
                j21, j22 = j21 - kick * stiffness * j11, j22 - kick * stiffness * j12
    jacobian = np.stack([np.stack([j11, j12], -1), np.stack([j21, j22], -1)], -2)
    drift_energy = float(np.max(np.abs(model.eval(x, xi) - model.eval(x0, xi0))))
    report = IntegratorReport(
        method="yoshida4",
        rtol=0.0,
        atol=0.0,
        steps=steps,
        energy_drift=drift_energy,
        determinant_error=float(np.max(np.abs(np.linalg.det(jacobian) - 1.0))),
    )
    return FlowMap(grid=grid, t=float(t), x=x, xi=xi, jacobian=jacobian, integrator_report=report)


class FlowCache:
    "FlowMaps keyed by model, grid and time rounded to 1e-12; safe for concurrent use"

    def __init__(self, tol=DEFAULT_TOLERANCE, method="DOP853"):
        self.tol = tol
        self.method = method
        self._flows = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def key(self, model, grid, t):
        return (model.key, grid, round(float(t), 12))

    def get(self, model, grid, t):
        key = self.key(model, grid, t)
        with self._lock:
            flow = self._flows.get(key)
            if flow is not None:
                self.hits += 1
                return flow
        flow = integrate_flow(model, grid, round(float(t), 12), tol=self.tol, method=self.method)
        with self._lock:
            # keep the first insertion so every caller sees the same FlowMap
            flow = self._flows.setdefault(key, flow)
            self.misses += 1
        return flow

    def __len__(self):
        return len(self._flows)

    def clear(self):
        with self._lock:
            self._flows.clear()


def _compose_quadratic(quadratic, phi, offset):
    "q(Phi z + c) as a QuadraticPart"
    g = quadratic.gradient_vector
    s = quadratic.hessian_matrix
    constant = quadratic(offset[0], offset[1])
    linear = phi.T @ (g + s @ offset)
    hessian = phi.T @ s @ phi
    return QuadraticPart(
        constant=constant, linear=tuple(linear), hessian=tuple(map(tuple, hessian))
    )


def _spline_values(b, x, xi, order, mode):
    grid = b.grid
    coordinates = np.array([(x + grid.extent) / grid.spacing, (xi + grid.extent) / grid.spacing])
    real = ndimage.map_coordinates(b.values.real, coordinates, order=order, mode=mode)
    imag = ndimage.map_coordinates(b.values.imag, coordinates, order=order, mode=mode)
    return real + 1j * imag


def pullback(b, flow, method="spectral", order=5, margin=0.1):
    """
    (b o phi^t)(z) = b(phi^t(z)) at every node. The grid part is evaluated at
    the off-grid images by its trigonometric interpolant (method "spectral")
    or by B-splines of the given order (method "spline"); a quadratic part is
    composed exactly.
    """
    if b.grid != flow.grid:
        raise SymbolMismatchError("symbol and flow are defined on different grids")
    if flow.is_identity():
        return b
    if b.quadratic is None and not np.any(b.values):
        return b
    grid = b.grid
    x, xi = flow.x, flow.xi
    inside = grid.contains(x, xi)
    if not b.decaying and np.any(b.values) and not np.all(inside):
        padding = margin * 2.0 * grid.extent
        if not np.all(grid.contains(x, xi, padding)):
            raise PullbackError(
                "flow images leave the padded box for symbol %r with no decay tag" % b.label
            )
        upper = grid.extent - 1e-12 * grid.extent
        x = np.clip(x, -grid.extent, upper)
        xi = np.clip(xi, -grid.extent, upper)
    grid_part = b.with_values(b.values, decaying=b.decaying)
    if method == "spectral":
        values = evaluate_at_points(grid_part, x, xi)
    elif method == "spline":
        values = _spline_values(grid_part, x, xi, order, "constant" if b.decaying else "nearest")
        if b.decaying:
            values = np.where(inside, values, 0.0)
    else:
        raise ValueError("unknown pullback method %r" % method)

    quadratic = None
    decaying = b.decaying
    if b.has_quadratic():
        if flow.linear:
            phi, offset = flow.affine_map()
            quadratic = _compose_quadratic(b.quadratic, phi, offset)
        else:
            values = values + b.quadratic(flow.x, flow.xi)
            decaying = False
    return Symbol(
        grid=grid,
        values=values,
        hbar=b.hbar,
        quadratic=quadratic,
        decaying=decaying,
        label=b.label,
    )


@dataclass(frozen=True)
class AlphaSampling:
    "lattice control for estimate_alpha"
    points: int = 101
    extent: float = 8.0
    y_points: int = 5
    max_refinements: int = 6
    tolerance: float = 0.01


@dataclass(frozen=True)
class AlphaEstimate:
    value: float
    sigma: float
    lower_estimate: bool
    samples: int

    def __float__(self):
        return self.value


def _sampled_alpha(model, sigma, points, sampling):
    xs = np.linspace(-sampling.extent, sampling.extent, points)
    ys = np.linspace(-sigma, sigma, sampling.y_points) if sigma > 0 else np.zeros(1)
    x, y = np.meshgrid(xs, ys, indexing="ij")
    z = x + 1j * y if sigma > 0 else x
    hessians = model.hessian(z, np.zeros_like(z))
    norms = np.linalg.norm(SYMPLECTIC_J @ hessians, ord=2, axis=(-2, -1))
    return float(np.max(norms))


def estimate_alpha(model, sigma, samples=None):
    """
    alpha = sup of the operator norm of J d^2H over the strip |Im z| <= sigma,
    with the x lattice doubled until the estimate is stable to the tolerance.
    Without a complex extension the real slice is used and the result is
    labelled a lower estimate.
    """
    samples = samples or AlphaSampling()
    if sigma > model.declared_nu:
        raise AnalyticExtensionError(
            "sigma %s exceeds the declared analyticity radius %s of %s"
            % (sigma, model.declared_nu, model.name)
        )
    lower_estimate = not model.complex_extension
    if lower_estimate:
        LOGGER.warning("no complex extension for %s, alpha is a real-slice lower estimate", model.name)
        sigma_used = 0.0
    else:
        sigma_used = sigma
    points = samples.points
    value = _sampled_alpha(model, sigma_used, points, samples)
    for _ in range(samples.max_refinements):
        points = 2 * points - 1
        refined = _sampled_alpha(model, sigma_used, points, samples)
        stable = abs(refined - value) <= samples.tolerance * max(abs(refined), 1e-300)
        value = refined
        if stable:
            break
    else:
        LOGGER.warning("alpha for %s not stable to %s after refinement", model.name, samples.tolerance)
    LOGGER.debug("alpha for %s at sigma=%s: %s", model.name, sigma, value)
    return AlphaEstimate(value=value, sigma=sigma, lower_estimate=lower_estimate, samples=points)


@dataclass(frozen=True)
class GrowthReport:
    times: np.ndarray
    imaginary_norm: np.ndarray
    envelope: np.ndarray
    satisfied: bool


def imaginary_growth(model, x0, xi0, y, t, alpha, samples=11, tol=DEFAULT_TOLERANCE):
    """
    integrate complex initial data z0 + iy and compare sup |Im phi^tau| with
    the envelope |y| exp(alpha tau) for tau in [0, t]
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    size = x0.size
    y = np.asarray(y, dtype=float)
    start = np.concatenate([x0 + 1j * y[0], xi0 + 1j * y[1]])

    def rhs(_, state):
        dx, dxi = model.vector_field(state[:size], state[size:])
        return np.concatenate([np.broadcast_to(dx, (size,)), np.broadcast_to(dxi, (size,))])

    times = np.linspace(0.0, t, samples)
    result = integrate.solve_ivp(
        rhs, (0.0, t), start.astype(complex), method="DOP853", t_eval=times, rtol=tol, atol=tol
    )
    if not result.success:
        raise FlowIntegrationError("complex flow failed: %s" % result.message)
    imaginary = np.max(np.abs(result.y.imag), axis=0)
    envelope = np.max(np.abs(y)) * np.exp(alpha * times)
    satisfied = bool(np.all(imaginary <= envelope * (1.0 + 1e-8) + 1e-12))
    return GrowthReport(times=times, imaginary_norm=imaginary, envelope=envelope, satisfied=satisfied)


def contraction_ratio(b_spec, flow, sigma, rho, alpha, weight="sup"):
    """
    sup over the grid of |b o phi^t| exp(rho e^{-alpha t} |z|) divided by
    |b|_{sigma,rho}; at most 1 when the norm contracts along the flow
    """
    x, xi = flow.grid.mesh()
    composed = np.abs(b_spec(flow.x, flow.xi))
    rate = rho * math.exp(-alpha * abs(flow.t))
    measured = float(np.max(composed * np.exp(rate * phase_weight(x, xi, weight))))
    reference = strip_norm(b_spec, sigma, rho, weight=weight).value
    if reference == 0:
        return 0.0
    return measured / reference
