"""
Closed-form test symbols with known complex extensions. These are the only
symbols whose strip norm |b|_{sigma,rho} can be evaluated.
"""
from dataclasses import dataclass
from typing import Callable
import numpy as np
from egorovtools.exceptions import ConfigError
from egorovtools.phase_space import sample_symbol


@dataclass(frozen=True)
class AnalyticSymbolSpec:
    "a closed-form symbol b(x, xi) that accepts complex arguments"
    name: str
    func: Callable
    analyticity_radius: float = np.inf
    decay_rate: float = np.inf
    real: bool = True

    def __call__(self, x, xi):
        return self.func(x, xi)

    def sample(self, grid, hbar, label=None):
        "Symbol with the values of the closed form at the grid nodes"
        return sample_symbol(
            grid,
            self.func,
            hbar,
            real_observable=self.real,
            label=label or self.name,
        )


def gaussian(amplitude=1.0, center=(0.0, 0.0), widths=(1.0, 1.0), name=None):
    "amplitude * exp(-((x - x0)/w_x)^2 - ((xi - xi0)/w_xi)^2)"
    x0, xi0 = center
    w_x, w_xi = widths

    def func(x, xi):
        return amplitude * np.exp(-(((x - x0) / w_x) ** 2) - ((xi - xi0) / w_xi) ** 2)

    if name is None:
        name = "gaussian(a=%g, c=(%g, %g), w=(%g, %g))" % (amplitude, x0, xi0, w_x, w_xi)
    return AnalyticSymbolSpec(name=name, func=func)


def modulated_gaussian(frequencies=(5.0, 0.0), amplitude=1.0, widths=(1.0, 1.0), name=None):
    "cos(w_1 x + w_2 xi) times a centred Gaussian"
    envelope = gaussian(amplitude=amplitude, widths=widths)
    omega_x, omega_xi = frequencies

    def func(x, xi):
        return np.cos(omega_x * x + omega_xi * xi) * envelope.func(x, xi)

    if name is None:
        name = "cos(%gx + %gxi) %s" % (omega_x, omega_xi, envelope.name)
    return AnalyticSymbolSpec(name=name, func=func)


def sech_product(scale=1.0, amplitude=1.0, name=None):
    """
    amplitude * sech(x/scale) sech(xi/scale): poles at Im z = pi scale/2 and
    exponential decay at rate 1/scale, so sigma and rho are both finite.
    """

    def func(x, xi):
        return amplitude / (np.cosh(x / scale) * np.cosh(xi / scale))

    return AnalyticSymbolSpec(
        name=name or "sech(x/%g) sech(xi/%g)" % (scale, scale),
        func=func,
        analyticity_radius=np.pi * scale / 2.0,
        decay_rate=1.0 / scale,
    )


def zero():
    def func(x, xi):
        return np.zeros(np.broadcast(x, xi).shape, dtype=complex)

    return AnalyticSymbolSpec(name="zero", func=func)


def constant(value=1.0):
    "the constant symbol, entire but not decaying"

    def func(x, xi):
        return np.full(np.broadcast(x, xi).shape, value, dtype=complex)

    return AnalyticSymbolSpec(name="constant(%g)" % value, func=func, decay_rate=0.0)


def reference_family():
    "the closed-form symbols the Fourier norm inequality is checked on"
    return [
        gaussian(),
        gaussian(center=(0.5, -0.3)),
        gaussian(widths=(0.7, 1.4)),
        modulated_gaussian(frequencies=(2.0, 1.0)),
        gaussian(widths=(0.2, 0.2), name="narrow gaussian"),
        sech_product(),
    ]


OBSERVABLE_CATALOG = {
    "gaussian": gaussian,
    "modulated-gaussian": modulated_gaussian,
    "sech-product": sech_product,
}


def get_observable(name, **params):
    "build a catalog observable by name"
    try:
        factory = OBSERVABLE_CATALOG[name]
    except KeyError:
        raise ConfigError(
            "unknown observable %r, choose one of %s" % (name, ", ".join(sorted(OBSERVABLE_CATALOG)))
        )
    return factory(**params)
