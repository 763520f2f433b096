"""
Tensor Gauss-Legendre rules mapped onto the simplex {s_1 + ... + s_d <= t, s_i >= 0}
by the collapsed (Duffy) coordinates s_i = t u_i prod_{l<i} (1 - u_l).
"""
from dataclasses import dataclass, field
from itertools import product
import numpy as np
from numpy.polynomial.legendre import leggauss
from egorovtools import LOGGER
from egorovtools.exceptions import OrderError, QuadratureError


DEFAULT_LEVELS = (8, 12, 16)


@dataclass(frozen=True)
class QuadratureControl:
    "node counts per axis tried in turn and the tolerance on successive differences"
    levels: tuple = DEFAULT_LEVELS
    tolerance: float = 1e-8
    strict: bool = False


@dataclass(frozen=True)
class QuadratureReport:
    nodes: int
    level: int
    error_estimate: float
    converged: bool
    history: tuple = field(default_factory=tuple)


def unit_rule(points):
    "Gauss-Legendre nodes and weights on [0, 1]"
    nodes, weights = leggauss(points)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def simplex_rule(dimension, t, points):
    """
    nodes (K, dimension) in the simplex of side t and their weights; the
    weights sum to t^dimension / dimension! up to rounding
    """
    if dimension < 1:
        raise OrderError("simplex dimension must be at least 1, got %s" % dimension)
    if t < 0:
        raise ValueError("simplex side must be nonnegative, got %s" % t)
    u, w = unit_rule(points)
    nodes = []
    weights = []
    for index in product(range(points), repeat=dimension):
        coords = u[list(index)]
        remaining = 1.0
        s = np.empty(dimension)
        weight = t ** dimension
        for i in range(dimension):
            s[i] = t * remaining * coords[i]
            weight *= w[index[i]] * remaining
            remaining *= 1.0 - coords[i]
        nodes.append(s)
        weights.append(weight)
    return np.array(nodes).reshape(-1, dimension), np.array(weights)


def simplex_volume(dimension, t, points=DEFAULT_LEVELS[0]):
    "I_N(t), the volume of the simplex, by the same rule the expansion uses"
    if dimension < 1:
        raise OrderError("simplex dimension must be at least 1, got %s" % dimension)
    if t < 0:
        raise ValueError("time must be nonnegative, got %s" % t)
    _, weights = simplex_rule(dimension, t, points)
    return float(np.sum(weights))


def integrate_simplex(func, dimension, t, control=None, executor=None):
    """
    integrate func(s) -> array over the simplex, raising the node count
    through control.levels until two successive levels agree in the max norm.
    With an executor the nodes are evaluated concurrently; the sum is always
    taken in node order.
    """
    control = control or QuadratureControl()
    previous = None
    history = []
    value = None
    nodes = 0
    level = control.levels[0]
    for level in control.levels:
        points, weights = simplex_rule(dimension, t, level)
        arguments = [tuple(s) for s in points]
        if executor is None:
            samples = [func(s) for s in arguments]
        else:
            samples = list(executor.map(func, arguments))
        value = None
        for sample, weight in zip(samples, weights):
            term = weight * np.asarray(sample)
            value = term if value is None else value + term
        nodes += len(weights)
        if previous is not None:
            scale = max(float(np.max(np.abs(value))), 1e-300)
            error = float(np.max(np.abs(value - previous)))
            history.append(error)
            if error <= control.tolerance * max(scale, 1.0):
                return value, QuadratureReport(
                    nodes=nodes, level=level, error_estimate=error, converged=True, history=tuple(history)
                )
        previous = value
    error = history[-1] if history else float("nan")
    message = "simplex quadrature of dimension %s did not reach %s, estimate %s" % (
        dimension, control.tolerance, error,
    )
    if control.strict:
        raise QuadratureError(message)
    LOGGER.warning(message)
    return value, QuadratureReport(
        nodes=nodes, level=level, error_estimate=error, converged=False, history=tuple(history)
    )
