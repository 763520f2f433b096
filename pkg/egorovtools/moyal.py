"""
Symbol calculus: the star product f#g, Poisson and Moyal brackets, the
derivative expansion of the Moyal bracket and the defect
Delta_hbar b = ({b, H} - {b, H}_M) / hbar^2.

Plane waves compose as e^{i<u,z>} # e^{i<v,z>} = exp(-i hbar s(u, v)/2) e^{i<u+v,z>}
with s(u, v) = u_x v_xi - u_xi v_x, so that x # xi = x xi + i hbar/2.
"""
from math import comb, factorial
import numpy as np
from egorovtools import LOGGER
from egorovtools.exceptions import GridError, OrderError
from egorovtools.phase_space import (
    QuadraticPart,
    Symbol,
    check_compatible,
    coefficients,
    spectral_derivative,
    zero_symbol,
)


MAX_EXPANSION_ORDER = 6


def twisted_product(f_values, g_values, grid, hbar):
    """
    grid values of the twisted convolution of two periodic grid functions:
    hbar > 0 gives f#g and hbar < 0 gives g#f
    """
    size = grid.points_per_axis
    kx = grid.frequencies
    cf = coefficients(f_values)
    cg = coefficients(g_values)
    index = np.arange(size)
    right_phase = np.exp(0.5j * hbar * np.outer(kx, kx))
    out = np.empty((size, size), dtype=complex)
    for c in range(size):
        shifted = cf[(c - index) % size, :]
        weighted = cg * np.exp(-0.5j * hbar * kx[c] * kx)[None, :]
        convolved = np.fft.ifft(np.fft.fft(shifted, axis=1) * np.fft.fft(weighted, axis=1), axis=1)
        out[c, :] = (right_phase * convolved).sum(axis=0)
    return np.fft.ifft2(out) * out.size


def _derivative(values_symbol, order_x, order_xi):
    return spectral_derivative(values_symbol, order_x, order_xi)


def _grid_times_quadratic(f, q, hbar, left):
    """
    f#q (left=True) or q#f for a grid symbol f and an exact quadratic q; the
    Moyal series terminates after the second order term
    """
    x, xi = f.grid.mesh()
    q_x, q_xi = q.gradient(x, xi)
    s = q.hessian_matrix
    f_x = _derivative(f, 1, 0)
    f_xi = _derivative(f, 0, 1)
    poisson = f_x * q_xi - f_xi * q_x
    second = (
        _derivative(f, 2, 0) * s[1, 1]
        - 2.0 * _derivative(f, 1, 1) * s[0, 1]
        + _derivative(f, 0, 2) * s[0, 0]
    )
    sign = 1.0 if left else -1.0
    return f.values * q(x, xi) + sign * 0.5j * hbar * poisson + 0.5 * (0.5j * hbar) ** 2 * second


def star_product(f, g):
    "the symbol f#g of Op(f) Op(g)"
    check_compatible(f, g)
    if f.has_quadratic() and g.has_quadratic():
        raise GridError("the product of two quadratic parts is not representable on the grid")
    hbar = f.hbar
    values = twisted_product(f.values, g.values, f.grid, hbar)
    if g.has_quadratic():
        values = values + _grid_times_quadratic(f.with_values(f.values), g.quadratic, hbar, left=True)
    if f.has_quadratic():
        values = values + _grid_times_quadratic(g.with_values(g.values), f.quadratic, hbar, left=False)
    return Symbol(
        grid=f.grid,
        values=values,
        hbar=hbar,
        decaying=f.decaying and g.decaying,
    )


def _quadratic_poisson(p, q):
    "{p, q} for two quadratic parts, itself quadratic"
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    g1, s1 = p.gradient_vector, p.hessian_matrix
    g2, s2 = q.gradient_vector, q.hessian_matrix
    constant = g1 @ j @ g2
    linear = s1 @ j @ g2 - s2 @ j @ g1
    hessian = s1 @ j @ s2 - s2 @ j @ s1
    return QuadraticPart(constant=constant, linear=tuple(linear), hessian=tuple(map(tuple, hessian)))


def poisson_bracket(f, g):
    "{f, g} = d_x f d_xi g - d_xi f d_x g with spectral derivatives"
    check_compatible(f, g)
    x, xi = f.grid.mesh()
    f_grid = f.with_values(f.values)
    g_grid = g.with_values(g.values)
    f_x, f_xi = _derivative(f_grid, 1, 0), _derivative(f_grid, 0, 1)
    g_x, g_xi = _derivative(g_grid, 1, 0), _derivative(g_grid, 0, 1)
    values = f_x * g_xi - f_xi * g_x
    quadratic = None
    if g.has_quadratic():
        q_x, q_xi = g.quadratic.gradient(x, xi)
        values = values + f_x * q_xi - f_xi * q_x
    if f.has_quadratic():
        q_x, q_xi = f.quadratic.gradient(x, xi)
        values = values + q_x * g_xi - q_xi * g_x
        if g.has_quadratic():
            quadratic = _quadratic_poisson(f.quadratic, g.quadratic)
    return Symbol(
        grid=f.grid,
        values=values,
        hbar=f.hbar,
        quadratic=quadratic,
        decaying=f.decaying and g.decaying,
    )


def _grid_moyal(f, g):
    "Moyal bracket of the grid parts alone"
    hbar = f.hbar
    forward = twisted_product(f.values, g.values, f.grid, hbar)
    backward = twisted_product(f.values, g.values, f.grid, -hbar)
    return (forward - backward) / (1j * hbar)


def moyal_bracket(f, g):
    """
    {f, g}_M = (f#g - g#f) / (i hbar). Terms involving a quadratic part equal
    the Poisson bracket exactly.
    """
    check_compatible(f, g)
    values = _grid_moyal(f, g)
    exact = poisson_bracket(f.with_values(f.values), _quadratic_only(g))
    if f.has_quadratic():
        exact = exact + poisson_bracket(_quadratic_only(f), g)
    return Symbol(
        grid=f.grid,
        values=values + exact.values,
        hbar=f.hbar,
        quadratic=exact.quadratic,
        decaying=f.decaying and g.decaying,
    )


def _quadratic_only(symbol):
    return Symbol(
        grid=symbol.grid,
        values=np.zeros(symbol.grid.shape, dtype=complex),
        hbar=symbol.hbar,
        quadratic=symbol.quadratic,
        decaying=False,
    )


def bidifferential(f, g, order):
    """
    P^j(f, g) = sum_m C(j, m) (-1)^m d_x^{j-m} d_xi^m f  d_xi^{j-m} d_x^m g
    on the grid parts
    """
    f_grid = f.with_values(f.values)
    g_grid = g.with_values(g.values)
    total = np.zeros(f.grid.shape, dtype=complex)
    for m in range(order + 1):
        total += (
            comb(order, m)
            * (-1) ** m
            * _derivative(f_grid, order - m, m)
            * _derivative(g_grid, m, order - m)
        )
    return total


def moyal_expansion(f, g, order):
    """
    derivative expansion of {f, g}_M truncated at hbar^order:
    sum over odd j with j - 1 <= order of (-1)^((j-1)/2) (hbar/2)^(j-1) P^j(f, g)/j!
    """
    if not 0 <= order <= MAX_EXPANSION_ORDER:
        raise OrderError("expansion order must be in 0..%s, got %s" % (MAX_EXPANSION_ORDER, order))
    check_compatible(f, g)
    result = poisson_bracket(f, g)
    hbar = f.hbar
    values = np.array(result.values)
    for j in range(3, order + 2, 2):
        # third and higher derivatives of a quadratic part vanish
        values += (-1) ** ((j - 1) // 2) * (hbar / 2.0) ** (j - 1) * bidifferential(f, g, j) / factorial(j)
    return Symbol(
        grid=f.grid,
        values=values,
        hbar=hbar,
        quadratic=result.quadratic,
        decaying=result.decaying,
    )


def delta_h(b, H_symbol):
    """
    Delta_hbar b = ({b, H} - {b, H}_M) / hbar^2. Brackets with a quadratic part
    coincide, so only the two grid parts contribute.
    """
    check_compatible(b, H_symbol)
    hbar = b.hbar
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    if not np.any(b.values) or not np.any(H_symbol.values):
        return zero_symbol(b.grid, hbar)
    b_grid = b.with_values(b.values)
    h_grid = H_symbol.with_values(H_symbol.values)
    poisson = poisson_bracket(b_grid, h_grid).values
    moyal = _grid_moyal(b_grid, h_grid)
    values = (poisson - moyal) / hbar ** 2
    LOGGER.debug("defect of %r: max norm %.3e", b.label, np.max(np.abs(values)))
    return Symbol(grid=b.grid, values=values, hbar=hbar, decaying=True)


def leading_defect(b, H_symbol):
    "the hbar -> 0 limit of Delta_hbar b: P^3(b, H)/24 on the grid parts"
    check_compatible(b, H_symbol)
    values = bidifferential(b, H_symbol, 3) / 24.0
    return Symbol(grid=b.grid, values=values, hbar=b.hbar, decaying=True)
