"""
The order-N Egorov approximant. Remainder symbols are built by alternating
pullbacks and the defect,

    r_1 = Delta(b o phi^{s_1}),  r_{m+1} = Delta(r_m o phi^{s_{m+1}}),

and the expansion term of order k is (-1)^k times the integral of
r_k o phi^{t - s_1 - ... - s_k} over the simplex s_1 + ... + s_k <= t, so that
B_t = sum_j hbar^{2j} Op(b_j^t) + O(hbar^{2(N+1)}).
"""
from dataclasses import dataclass, field
from math import factorial
import threading
import numpy as np
from egorovtools import LOGGER
from egorovtools.classical import FlowCache, identity_flow, pullback
from egorovtools.exceptions import OrderError
from egorovtools.moyal import delta_h
from egorovtools.phase_space import zero_symbol
from egorovtools.quadrature import (
    QuadratureControl,
    integrate_simplex,
    simplex_rule,
)
from egorovtools.quantum import (
    DEFAULT_POINTS_PER_OSCILLATION,
    PositionGrid,
    heisenberg_evolve,
    operator_norm,
    required_refinement,
    weyl_quantize,
    weyl_symbol,
)


MAX_TERM_ORDER = 3

CONVENTIONS = ("theorem", "corollary")

TIME_DIGITS = 12


@dataclass(frozen=True)
class RemainderSymbol:
    "r_k after the flow durations (s_1, ..., s_k)"
    k: int
    times: tuple
    symbol: object


@dataclass(frozen=True)
class ExpansionTerm:
    j: int
    t: float
    symbol: object
    integral: object
    quadrature_report: object = None

    @property
    def sign(self):
        return (-1) ** self.j


@dataclass(frozen=True)
class Approximant:
    symbol: object
    operator: object
    N: int
    t: float
    convention: str
    terms: tuple = field(default_factory=tuple)


def _round_time(value):
    return round(float(value), TIME_DIGITS)


def _is_zero(symbol):
    return not symbol.has_quadratic() and not np.any(symbol.values)


def _check_durations(durations, t=None):
    if any(s < 0 for s in durations):
        raise ValueError("flow durations must be nonnegative, got %s" % (durations,))
    if t is not None and sum(durations) > t + 10.0 ** -TIME_DIGITS:
        raise ValueError("flow durations %s exceed the time window %s" % (durations, t))


class ExpansionEngine:
    """
    Remainder symbols and expansion terms for one observable and one model.
    FlowMaps come from a FlowCache and every r_k is memoized by its rounded
    duration tuple, so prefixes shared between quadrature nodes are computed
    once. Both caches accept concurrent insertion.
    """

    def __init__(
        self,
        b,
        model,
        flow_cache=None,
        quadrature=None,
        pullback_method="spectral",
        executor=None,
        cache=True,
    ):
        self.b = b
        self.model = model
        self.grid = b.grid
        self.hbar = b.hbar
        self.H = model.symbol(b.grid, b.hbar)
        self.quadratic_dynamics = not np.any(self.H.values)
        self.flows = flow_cache if flow_cache is not None else FlowCache()
        self.quadrature = quadrature or QuadratureControl()
        self.pullback_method = pullback_method
        self.executor = executor
        self.cache = cache
        self._remainders = {}
        self._terms = {}
        self._lock = threading.Lock()

    def flow(self, t):
        t = _round_time(t)
        if t == 0:
            return identity_flow(self.grid)
        return self.flows.get(self.model, self.grid, t)

    def pulled(self, symbol, t):
        return pullback(symbol, self.flow(t), method=self.pullback_method)

    def remainder(self, durations):
        "grid symbol r_k for the durations (s_1, ..., s_k)"
        durations = tuple(_round_time(s) for s in durations)
        if not durations:
            raise OrderError("a remainder needs at least one flow duration")
        _check_durations(durations)
        if self.cache:
            with self._lock:
                cached = self._remainders.get(durations)
            if cached is not None:
                return cached
        if len(durations) == 1:
            source = self.b
        else:
            source = self.remainder(durations[:-1])
        if self.quadratic_dynamics or _is_zero(source):
            # the defect of a quadratic Hamiltonian vanishes identically
            symbol = zero_symbol(self.grid, self.hbar)
        else:
            symbol = delta_h(self.pulled(source, durations[-1]), self.H)
        if self.cache:
            with self._lock:
                symbol = self._remainders.setdefault(durations, symbol)
        return symbol

    def term(self, j, t):
        if not 0 <= j <= MAX_TERM_ORDER:
            raise OrderError("expansion order must be in 0..%s, got %s" % (MAX_TERM_ORDER, j))
        if t < 0:
            raise ValueError("time must be nonnegative, got %s" % t)
        key = (j, _round_time(t))
        with self._lock:
            cached = self._terms.get(key)
        if cached is not None:
            return cached
        if j == 0:
            symbol = self.pulled(self.b, t)
            term = ExpansionTerm(j=0, t=t, symbol=symbol, integral=symbol)
        elif t == 0 or self.quadratic_dynamics:
            zero = zero_symbol(self.grid, self.hbar)
            term = ExpansionTerm(j=j, t=t, symbol=zero, integral=zero)
        else:
            term = self._integrated_term(j, t)
        with self._lock:
            return self._terms.setdefault(key, term)

    def _integrated_term(self, j, t):
        def integrand(durations):
            remainder = self.remainder(durations)
            if _is_zero(remainder):
                return remainder.values
            remaining = max(0.0, _round_time(t - sum(durations)))
            return self.pulled(remainder, remaining).values

        values, report = integrate_simplex(
            integrand, j, t, control=self.quadrature, executor=self.executor
        )
        integral = zero_symbol(self.grid, self.hbar).with_values(values)
        LOGGER.info(
            "expansion term j=%s t=%s: %s nodes, error estimate %.3e",
            j, t, report.nodes, report.error_estimate,
        )
        return ExpansionTerm(
            j=j,
            t=t,
            symbol=integral.scaled((-1) ** j),
            integral=integral,
            quadrature_report=report,
        )

    def approximant(self, N, t, convention="theorem", position_grid=None,
                    points_per_oscillation=DEFAULT_POINTS_PER_OSCILLATION):
        if convention not in CONVENTIONS:
            raise ValueError("unknown summation convention %r" % convention)
        if N < 0:
            raise OrderError("approximation order must be nonnegative, got %s" % N)
        upper = N if convention == "theorem" else N - 1
        if upper < 0:
            raise OrderError("the corollary convention sums j = 0..N-1 and needs N >= 1")
        if upper > MAX_TERM_ORDER:
            raise OrderError("approximation order above %s is not supported" % MAX_TERM_ORDER)
        terms = tuple(self.term(j, t) for j in range(upper + 1))
        values = np.zeros(self.grid.shape, dtype=complex)
        for term in terms:
            values = values + self.hbar ** (2 * term.j) * term.symbol.values
        quadratic = terms[0].symbol.quadratic
        real = self.b.real_observable
        if real:
            values = values.real
        symbol = self.b.with_values(
            values,
            quadratic=quadratic,
            decaying=terms[0].symbol.decaying,
            real_observable=real,
            label="%s approximant N=%s t=%s" % (self.b.label, N, t),
        )
        operator = None
        if position_grid is not None:
            operator = weyl_quantize(symbol, position_grid, points_per_oscillation)
        return Approximant(
            symbol=symbol, operator=operator, N=N, t=t, convention=convention, terms=terms
        )


def remainder_r(b, H, k, times, t=None, engine=None):
    "RemainderSymbol r_k after the flow durations times = (s_1, ..., s_k)"
    times = tuple(float(s) for s in times)
    if k < 1:
        raise OrderError("remainder order must be at least 1, got %s" % k)
    if len(times) != k:
        raise ValueError("r_%s needs %s flow durations, got %s" % (k, k, len(times)))
    _check_durations(times, t)
    engine = engine or ExpansionEngine(b, H)
    return RemainderSymbol(k=k, times=times, symbol=engine.remainder(times))


def expansion_term(b, H, j, t, quad=None, engine=None):
    "ExpansionTerm b_j^t, signed so that the terms sum to the Heisenberg symbol"
    engine = engine or ExpansionEngine(b, H, quadrature=quad)
    return engine.term(j, t)


def assemble_approximant(b, H, N, t, convention="theorem", position_grid=None, engine=None,
                         quad=None, points_per_oscillation=DEFAULT_POINTS_PER_OSCILLATION):
    """
    sum of hbar^{2j} b_j^t over j = 0..N ("theorem") or j = 0..N-1
    ("corollary"), with its Weyl quantization when a position grid is given
    """
    engine = engine or ExpansionEngine(b, H, quadrature=quad)
    return engine.approximant(N, t, convention, position_grid, points_per_oscillation)


@dataclass(frozen=True)
class DuhamelCheck:
    N: int
    t: float
    hbar: float
    measured: float
    bound: float
    sup_norm: float

    @property
    def satisfied(self):
        return self.measured <= self.bound


def exact_evolution(b, model, position_grid, t, points_per_oscillation=DEFAULT_POINTS_PER_OSCILLATION):
    "B_t from the dense Weyl quantizations of b and of the model"
    B = weyl_quantize(b, position_grid, points_per_oscillation)
    H = weyl_quantize(model.symbol(b.grid, b.hbar), position_grid)
    return heisenberg_evolve(B, H, t)


def duhamel_remainder(b, model, N, t, position_grid, engine=None, sup_points=4,
                      points_per_oscillation=DEFAULT_POINTS_PER_OSCILLATION):
    """
    |B_t - Op(sum_{j<=N} hbar^{2j} b_j^t)| against
    hbar^{2(N+1)} t^{N+1}/(N+1)! sup |Op(r_{N+1} o phi)|, the sup taken over a
    Gauss rule on the (N+1)-simplex
    """
    engine = engine or ExpansionEngine(b, model)
    approximant = engine.approximant(N, t, "theorem", position_grid, points_per_oscillation)
    exact = exact_evolution(b, model, position_grid, t, points_per_oscillation)
    measured = operator_norm(exact - approximant.operator)
    sup_norm = 0.0
    if t > 0:
        nodes, _ = simplex_rule(N + 1, t, sup_points)
        for durations in nodes:
            remaining = max(0.0, _round_time(t - sum(durations)))
            symbol = engine.pulled(engine.remainder(tuple(durations)), remaining)
            sup_norm = max(sup_norm, operator_norm(weyl_quantize(symbol, position_grid, points_per_oscillation)))
    hbar = b.hbar
    bound = hbar ** (2 * (N + 1)) * t ** (N + 1) / factorial(N + 1) * sup_norm
    LOGGER.info("duhamel check N=%s t=%s hbar=%s: measured %.3e bound %.3e", N, t, hbar, measured, bound)
    return DuhamelCheck(N=N, t=t, hbar=hbar, measured=measured, bound=bound, sup_norm=sup_norm)


@dataclass(frozen=True)
class RichardsonFit:
    coefficient: object
    hbars: tuple
    residual: float


def richardson_coefficient(spec, model, grid, t, hbars=(0.2, 0.1, 0.05), flow_cache=None,
                           points_per_oscillation=DEFAULT_POINTS_PER_OSCILLATION):
    """
    the hbar^2 coefficient of the Weyl symbol of the exact B_t: the differences
    (sigma(B_t) - b o phi^t)/hbar^2 are fitted by a + c hbar^2 node by node and
    a is returned
    """
    if len(hbars) < 2:
        raise ValueError("at least two values of hbar are needed, got %s" % (hbars,))
    flows = flow_cache if flow_cache is not None else FlowCache()
    flow = flows.get(model, grid, t) if t else identity_flow(grid)
    samples = []
    for hbar in hbars:
        b = spec.sample(grid, hbar)
        refinement = required_refinement(b, points_per_oscillation)
        position_grid = PositionGrid.from_phase_grid(grid, hbar, refinement)
        exact = exact_evolution(b, model, position_grid, t, points_per_oscillation)
        extracted = weyl_symbol(exact, grid)
        classical = pullback(b, flow)
        samples.append((extracted.values - classical.values) / hbar ** 2)
        LOGGER.debug("richardson sample hbar=%s refinement=%s", hbar, refinement)
    squares = np.array(hbars, dtype=float) ** 2
    design = np.column_stack([np.ones_like(squares), squares])
    stacked = np.stack([s.ravel() for s in samples])
    solution, residuals, _, _ = np.linalg.lstsq(design, stacked, rcond=None)
    residual = float(np.sqrt(np.sum(residuals))) if residuals.size else 0.0
    coefficient = zero_symbol(grid, hbars[-1]).with_values(
        solution[0].reshape(grid.shape), label="richardson hbar^2 coefficient"
    )
    return RichardsonFit(coefficient=coefficient, hbars=tuple(hbars), residual=residual)
