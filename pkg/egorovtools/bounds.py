"""
Explicit constants and estimates of the Egorov expansion: the strip
schedule e_k, Gamma_k, the term and remainder bounds, the Ehrenfest time,
the iterated-log order and the calibration of the existence-only constants
E, F and A against measured errors. All arithmetic is done on logarithms and
results overflowing double precision come back as +inf with a flag.
"""
from dataclasses import dataclass, replace
import math
import mpmath
import numpy as np
from egorovtools import LOGGER
from egorovtools.exceptions import (
    CalibrationError,
    ChainCollapseError,
    OrderError,
    StripExhaustionError,
)


LOG_MAX = math.log(np.finfo(float).max)

SCHEDULE_FORMS = ("recursion", "printed", "printed-t")

INTEGER_SNAP = 1e-12


@dataclass(frozen=True)
class BoundValue:
    value: float
    log_value: float
    overflow: bool = False
    label: str = ""
    in_stated_range: bool = True
    cross_check: float = None

    def __float__(self):
        return float(self.value)


def bound_from_log(log_value, label="", **kwargs):
    "BoundValue for exp(log_value), +inf with overflow set past the double range"
    log_value = float(log_value)
    if log_value == -math.inf:
        return BoundValue(value=0.0, log_value=log_value, label=label, **kwargs)
    if log_value > LOG_MAX:
        LOGGER.warning("%s overflows double precision, log value %.6g", label or "bound", log_value)
        return BoundValue(value=math.inf, log_value=log_value, overflow=True, label=label, **kwargs)
    return BoundValue(value=math.exp(log_value), log_value=log_value, label=label, **kwargs)


@dataclass(frozen=True)
class BoundContext:
    """
    n degrees of freedom, Hessian rate alpha, strip (sigma, rho), symbol
    bound Bbar, the constants A, E, F and optional shrinking increments
    """
    n: int = 1
    alpha: float = 0.0
    sigma: float = 1.0
    rho: float = 1.0
    Bbar: float = 1.0
    A: float = 1.0
    E: float = 1.0
    F: float = 1.0
    delta: float = None
    d: float = None
    calibrated: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1, got %s" % self.n)
        if self.alpha < 0 or not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite and nonnegative, got %s" % self.alpha)
        for name in ("sigma", "rho", "Bbar", "A", "E", "F"):
            value = getattr(self, name)
            if not value > 0 or not math.isfinite(value):
                raise ValueError("%s must be finite and positive, got %s" % (name, value))
        for name in ("delta", "d"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError("%s must be positive, got %s" % (name, value))

    def increments(self, N):
        "(delta, d), by default sigma/(2N) and rho/(2N)"
        if N < 1:
            raise OrderError("the shrinking schedule needs N >= 1, got %s" % N)
        delta = self.delta if self.delta is not None else self.sigma / (2.0 * N)
        d = self.d if self.d is not None else self.rho / (2.0 * N)
        if N * delta >= self.sigma or N * d >= self.rho:
            raise StripExhaustionError(
                "N=%s steps of (delta=%s, d=%s) exhaust the strip (sigma=%s, rho=%s)"
                % (N, delta, d, self.sigma, self.rho)
            )
        return delta, d


def _xlogx(value):
    return 0.0 if value == 0 else value * math.log(value)


def _time_growth(ctx, j, t):
    "(4n+2) alpha t + (6n+3) alpha j(j-1) t/2"
    n = ctx.n
    return (4 * n + 2) * ctx.alpha * t + (6 * n + 3) * ctx.alpha * j * (j - 1) * t / 2.0


def term_bound(ctx, j, t):
    "[e E e^{7 alpha t} j^{6n+3}]^j (Bbar F/j!) e^{(4n+2) alpha t} exp(alpha j(j-1) t/2)^{6n+3}"
    if j < 1:
        raise OrderError("term bounds start at j = 1, got %s" % j)
    if t < 0:
        raise ValueError("time must be nonnegative, got %s" % t)
    n = ctx.n
    log_value = (
        j * (1.0 + math.log(ctx.E) + 7.0 * ctx.alpha * t)
        + (6 * n + 3) * _xlogx(j)
        + math.log(ctx.Bbar)
        + math.log(ctx.F)
        - math.lgamma(j + 1)
        + _time_growth(ctx, j, t)
    )
    return bound_from_log(log_value, label="term j=%s" % j)


def remainder_bound(ctx, N, t):
    """
    [e E e^{7 alpha t} N^{6n+3} t]^N (Bbar F/N!) e^{(4n+2) alpha t} exp(alpha N(N-1) t/2)^{6n+3},
    to be multiplied by hbar^{2(N+1)}; the estimate is stated for N >= 2
    """
    if N < 0:
        raise OrderError("remainder order must be nonnegative, got %s" % N)
    if t < 0:
        raise ValueError("time must be nonnegative, got %s" % t)
    in_range = N >= 2
    label = "remainder N=%s" % N
    if N >= 1 and t == 0:
        return BoundValue(value=0.0, log_value=-math.inf, label=label, in_stated_range=in_range)
    n = ctx.n
    log_t = math.log(t) if N else 0.0
    log_value = (
        N * (1.0 + math.log(ctx.E) + 7.0 * ctx.alpha * t + log_t)
        + (6 * n + 3) * _xlogx(N)
        + math.log(ctx.Bbar)
        + math.log(ctx.F)
        - math.lgamma(N + 1)
        + _time_growth(ctx, N, t)
    )
    return bound_from_log(log_value, label=label, in_stated_range=in_range)


def scaled_remainder_bound(ctx, N, t, hbar):
    "remainder_bound times hbar^{2(N+1)}, the quantity compared with |B_t - B_t^N|"
    base = remainder_bound(ctx, N, t)
    if base.log_value == -math.inf:
        return base
    return bound_from_log(
        base.log_value + 2 * (N + 1) * math.log(hbar),
        label="scaled " + base.label,
        in_stated_range=base.in_stated_range,
    )


def operator_remainder_bound(ctx, N, t):
    "[E e^{7 alpha t} N^{6n+3}]^N Bbar F e^{(4n+2) alpha t} exp(alpha N(N-1) t/2)^{6n+3}"
    if N < 1:
        raise OrderError("operator remainder bounds start at N = 1, got %s" % N)
    n = ctx.n
    log_value = (
        N * (math.log(ctx.E) + 7.0 * ctx.alpha * t)
        + (6 * n + 3) * _xlogx(N)
        + math.log(ctx.Bbar)
        + math.log(ctx.F)
        + _time_growth(ctx, N, t)
    )
    return bound_from_log(log_value, label="operator remainder N=%s" % N)


@dataclass(frozen=True)
class StripSchedule:
    form: str
    delta: float
    d: float
    e: tuple
    log_gamma: tuple
    gamma: tuple


def _log_gamma_one(ctx, t, delta, d):
    n = ctx.n
    return (
        math.log(ctx.A)
        + math.log(ctx.Bbar)
        - 2 * n * math.log(delta)
        - (4 * n + 3) * math.log(d)
        + (6 * n + 3) * ctx.alpha * t
    )


def strip_schedule(ctx, N, t, form="recursion"):
    """
    e_k = e^{-alpha t k} and Gamma_k for k = 1..N. The "recursion" form is
    the closed form of Gamma_{k+1} = Gamma_k A/((e_k e^{-alpha t})^{6n+3} d^{4n+3} delta^{2n});
    "printed" and "printed-t" use (A e_1/(d^{4n+3} delta^{2n}))^{k-1} exp(alpha k(k-1)/2)^{6n+3}
    without and with the factor t in the exponent
    """
    if form not in SCHEDULE_FORMS:
        raise ValueError("unknown schedule form %r, expected one of %s" % (form, SCHEDULE_FORMS))
    delta, d = ctx.increments(N)
    n = ctx.n
    alpha = ctx.alpha
    e = tuple(math.exp(-alpha * t * k) for k in range(1, N + 1))
    log_one = _log_gamma_one(ctx, t, delta, d)
    log_step = math.log(ctx.A) - (4 * n + 3) * math.log(d) - 2 * n * math.log(delta)
    log_gamma = []
    for k in range(1, N + 1):
        if form == "recursion":
            growth = (6 * n + 3) * alpha * t * (k * (k + 1) / 2.0 - 1.0)
            log_gamma.append(log_one + (k - 1) * log_step + growth)
        else:
            scale = t if form == "printed-t" else 1.0
            growth = (6 * n + 3) * alpha * scale * k * (k - 1) / 2.0
            log_gamma.append(log_one + (k - 1) * (log_step - alpha * t) + growth)
    gamma = tuple(bound_from_log(value, label="Gamma_%s" % (k + 1)).value for k, value in enumerate(log_gamma))
    return StripSchedule(form=form, delta=delta, d=d, e=e, log_gamma=tuple(log_gamma), gamma=gamma)


def gamma_recursion(ctx, N, t):
    "log Gamma_k for k = 1..N by iterating the one-step recursion"
    delta, d = ctx.increments(N)
    n = ctx.n
    log_gamma = [_log_gamma_one(ctx, t, delta, d)]
    for k in range(1, N):
        log_e_k = -ctx.alpha * t * k
        log_gamma.append(
            log_gamma[-1]
            + math.log(ctx.A)
            - (6 * n + 3) * (log_e_k - ctx.alpha * t)
            - (4 * n + 3) * math.log(d)
            - 2 * n * math.log(delta)
        )
    return tuple(log_gamma)


def ehrenfest_time(hbar, N, alpha):
    "T_N(hbar) = -2 log(hbar) / (alpha (N - 1))"
    if not 0 < hbar < 1:
        raise ValueError("hbar must lie in (0, 1), got %s" % hbar)
    if N < 2:
        raise OrderError("the Ehrenfest time is defined for N >= 2, got %s" % N)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative, got %s" % alpha)
    if alpha == 0:
        return BoundValue(value=math.inf, log_value=math.inf, label="no-ehrenfest-restriction")
    value = -2.0 * math.log(hbar) / (alpha * (N - 1))
    return BoundValue(value=value, log_value=math.log(value), label="ehrenfest N=%s" % N)


def integrable_time(hbar, N, n=1):
    "the window e^{-1} N^{-6n-1} / hbar available when alpha = 0"
    if N < 1:
        raise OrderError("N must be at least 1, got %s" % N)
    if not hbar > 0:
        raise ValueError("hbar must be positive, got %s" % hbar)
    return math.exp(-1.0) * N ** (-(6 * n + 1)) / hbar


@dataclass(frozen=True)
class IteratedLogOrder:
    N: int
    t_max: float
    chain: tuple


def iterated_log_order(hbar, k=1):
    """
    N_k(hbar), the integer part of the k-fold logarithm of |log hbar|, and
    t_max = |log hbar| / log^[k](|log hbar|). Every value the logarithm is
    applied to must exceed 1.
    """
    if k < 1:
        raise OrderError("iteration depth must be at least 1, got %s" % k)
    value = mpmath.mpf(hbar)
    if not 0 < value < 1:
        raise ValueError("hbar must lie in (0, 1), got %s" % hbar)
    value = abs(mpmath.log(value))
    chain = [value]
    for level in range(k):
        if value <= 1:
            raise ChainCollapseError(
                "log chain of hbar=%s collapses at level %s (value %s <= 1)"
                % (hbar, level, mpmath.nstr(value, 8))
            )
        value = mpmath.log(value)
        chain.append(value)
    nearest = mpmath.nint(value)
    if abs(value - nearest) <= INTEGER_SNAP:
        order = int(nearest)
    else:
        order = int(mpmath.floor(value))
    if order < 1:
        raise ChainCollapseError(
            "log chain of hbar=%s ends at %s, below order 1" % (hbar, mpmath.nstr(value, 8))
        )
    t_max = float(chain[0] / value)
    return IteratedLogOrder(N=order, t_max=t_max, chain=tuple(float(v) for v in chain))


def stimaN_bound(ctx, N, hbar):
    """
    (2 e^2 E/alpha)^N N^{(6n+1)N} Bbar F hbar^{2 - 15/alpha - (8n+4)/(alpha N)} (-hbar log hbar)^N
    evaluated as written, in log space with a direct extended precision cross check
    """
    if ctx.alpha == 0:
        raise ValueError("this estimate needs alpha > 0")
    if N < 2:
        raise OrderError("this estimate is stated for N >= 2, got %s" % N)
    if not 0 < hbar < 1:
        raise ValueError("hbar must lie in (0, 1), got %s" % hbar)
    n = ctx.n
    alpha = ctx.alpha
    exponent = 2.0 - 15.0 / alpha - (8 * n + 4) / (alpha * N)
    log_hbar = math.log(hbar)
    log_value = (
        N * math.log(2.0 * math.e ** 2 * ctx.E / alpha)
        + (6 * n + 1) * N * math.log(N)
        + math.log(ctx.Bbar)
        + math.log(ctx.F)
        + exponent * log_hbar
        + N * math.log(-hbar * log_hbar)
    )
    with mpmath.workdps(40):
        h = mpmath.mpf(hbar)
        direct = (
            (2 * mpmath.e ** 2 * ctx.E / mpmath.mpf(alpha)) ** N
            * mpmath.mpf(N) ** ((6 * n + 1) * N)
            * mpmath.mpf(ctx.Bbar)
            * mpmath.mpf(ctx.F)
            * h ** (2 - mpmath.mpf(15) / alpha - mpmath.mpf(8 * n + 4) / (alpha * N))
            * (-h * mpmath.log(h)) ** N
        )
        cross_check = float(mpmath.log(direct))
    return bound_from_log(log_value, label="as-printed", cross_check=cross_check)


def first_order_bound(gamma, delta_rate, hbar, t):
    "Gamma hbar^2 t e^{Delta t}"
    return gamma * hbar ** 2 * t * math.exp(delta_rate * t)


@dataclass(frozen=True)
class DeltaMeasurement:
    "|Op(Delta b)| measured for a symbol of strip norm bbar on the strip shrunk by (delta, d)"
    measured: float
    bbar: float
    delta: float
    d: float


def _record_error(record):
    error = getattr(record, "error", None)
    if error is None:
        return None
    if not math.isfinite(error):
        raise CalibrationError(
            "non-finite measurement %s at N=%s t=%s hbar=%s" % (error, record.N, record.t, record.hbar)
        )
    return float(error)


def calibrate_constants(records, ctx, delta_measurements=None):
    """
    the smallest F >= 1 covering the N = 0 records, then the smallest E
    covering every N >= 1 record with that F, and the smallest A covering the
    defect measurements
    """
    usable = [(record, _record_error(record)) for record in records]
    usable = [(record, error) for record, error in usable if error is not None]
    delta_measurements = list(delta_measurements or [])
    if not usable and not delta_measurements:
        LOGGER.warning("no measurements supplied, bound context left uncalibrated")
        return ctx

    F = ctx.F
    required_F = [
        error / (record.hbar ** 2 * remainder_bound(replace(ctx, F=1.0), 0, record.t).value)
        for record, error in usable
        if record.N == 0 and record.t > 0
    ]
    if required_F:
        F = max([1.0] + required_F)

    E = ctx.E
    required_E = []
    base_ctx = replace(ctx, E=1.0, F=F)
    for record, error in usable:
        if record.N < 1:
            continue
        if record.t == 0:
            if error > 0:
                raise CalibrationError(
                    "measured remainder %s at t=0 for N=%s cannot be covered by any E"
                    % (error, record.N)
                )
            continue
        if error == 0:
            continue
        base = remainder_bound(base_ctx, record.N, record.t)
        needed = math.log(error) - 2 * (record.N + 1) * math.log(record.hbar)
        required_E.append(math.exp((needed - base.log_value) / record.N))
    if required_E:
        E = max(required_E)
        if not math.isfinite(E) or not E > 0:
            raise CalibrationError("calibration produced E=%s" % E)

    A = ctx.A
    if delta_measurements:
        n = ctx.n
        A = max(
            m.measured * m.delta ** (2 * n) * m.d ** (4 * n + 3) / m.bbar for m in delta_measurements
        )
        if not A > 0 or not math.isfinite(A):
            raise CalibrationError("calibration produced A=%s" % A)

    LOGGER.info("calibrated constants E=%.6g F=%.6g A=%.6g from %s records", E, F, A, len(usable))
    return replace(ctx, E=E, F=F, A=A, calibrated=True)


def record_within_bound(ctx, record, rtol=1e-9):
    "measured error <= hbar^{2(N+1)} remainder_bound, with a relative slack for rounding"
    bound = scaled_remainder_bound(ctx, record.N, record.t, record.hbar)
    if record.error == 0:
        return True
    if bound.log_value == -math.inf:
        return False
    return math.log(record.error) <= bound.log_value + rtol
