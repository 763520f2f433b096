"""
Sweeps of (hbar, N, t) cells: the dense Heisenberg observable against the
quantized Egorov approximant, the remainder bounds, scaling fits, the
acceptance checks and the CSV reports.
"""
import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
import math
import os
import threading
import numpy as np
from egorovtools import LOGGER
from egorovtools.analytic import gaussian, reference_family
from egorovtools.bounds import (
    BoundContext,
    calibrate_constants,
    ehrenfest_time,
    iterated_log_order,
    record_within_bound,
    remainder_bound,
    scaled_remainder_bound,
    strip_schedule,
)
from egorovtools.classical import FlowCache, estimate_alpha
from egorovtools.exceptions import (
    AdmissibilityError,
    ChainCollapseError,
    ConfigError,
    StripExhaustionError,
)
from egorovtools.expansion import MAX_TERM_ORDER, ExpansionEngine
from egorovtools.io import write_flow, write_quadrature_reports, write_symbol, write_symbol_csv
from egorovtools.models import get_model
from egorovtools.moyal import star_product
from egorovtools.phase_space import (
    PhaseGrid,
    forward_transform,
    fourier_norm_bound,
    fourier_strip_norm,
    strip_norm,
)
from egorovtools.quadrature import simplex_volume
from egorovtools.quantum import (
    PositionGrid,
    heisenberg_evolve,
    l1_fourier_norm_bound,
    operator_norm,
    required_refinement,
    weyl_quantize,
)


ERROR_FIELDS = ("model", "hbar", "N", "t", "error", "bound", "within_bound")

FAILURE_FIELDS = ("model", "hbar", "N", "t", "failure")

EXACTNESS_TOLERANCE = 1e-6

SLOPE_TOLERANCE = 0.15

# higher orders sit below the grid resolution at desk scale
ORDER_CHECK_MAX_N = 1

CONVENTION_LOCK_TOLERANCE = 1e-7


@dataclass(frozen=True)
class ErrorRecord:
    "one sweep cell: |B_t - B_t^N| and the scaled remainder bound"
    model: str
    hbar: float
    N: int
    t: float
    error: float = None
    bound: float = None
    within_bound: bool = None
    relative_error: float = None
    refinement: int = 0
    calibration: bool = False
    convention: str = "theorem"
    failure: str = None

    def __post_init__(self):
        if self.error is not None and not self.error >= 0:
            raise ValueError("measured error must be nonnegative, got %s" % self.error)

    @property
    def failed(self):
        return self.failure is not None


@dataclass(frozen=True)
class SweepResult:
    records: tuple
    context: BoundContext
    model: str


@dataclass(frozen=True)
class AcceptanceCheck:
    name: str
    passed: bool
    detail: str = ""


class HbarRun:
    "the operators shared by every cell at one value of hbar"

    def __init__(self, config, model, hbar, flows):
        self.hbar = hbar
        self.points_per_oscillation = config.points_per_oscillation
        self.b = config.sample_observable(hbar)
        self.grid = config.position_grid(hbar)
        self.refinement = self.grid.refinement_over(self.b.grid)
        self.B = weyl_quantize(self.b, self.grid, self.points_per_oscillation)
        self.H = weyl_quantize(model.symbol(self.b.grid, hbar), self.grid)
        self.norm_B = operator_norm(self.B)
        self.engine = ExpansionEngine(
            self.b, model, flow_cache=flows, quadrature=config.quadrature_control()
        )
        self._exact = {}
        self._lock = threading.Lock()

    def exact(self, t):
        with self._lock:
            evolved = self._exact.get(t)
        if evolved is None:
            evolved = heisenberg_evolve(self.B, self.H, t)
            with self._lock:
                evolved = self._exact.setdefault(t, evolved)
        return evolved

    def measure(self, N, t, convention):
        approximant = self.engine.approximant(
            N, t, convention, self.grid, self.points_per_oscillation
        )
        return operator_norm(self.exact(t) - approximant.operator)


def bound_context(config, model=None):
    "BoundContext from the configured strip, the model's alpha and the observable's strip norm"
    model = model or config.build_model()
    if config.alpha is not None:
        alpha = config.alpha
    else:
        alpha = estimate_alpha(model, config.sigma).value
    norm = strip_norm(config.build_observable(), config.sigma, config.rho)
    return BoundContext(
        n=config.n, alpha=alpha, sigma=config.sigma, rho=config.rho, Bbar=norm.value
    )


def _failure_record(model_name, hbar, N, t, convention, exception):
    return ErrorRecord(
        model=model_name,
        hbar=hbar,
        N=N,
        t=t,
        convention=convention,
        failure="%s: %s" % (exception.__class__.__name__, exception),
    )


def run_sweep(config, threads=None, context=None):
    """
    measure every cell of the configuration; cells are evaluated concurrently
    on up to threads workers and returned in sweep order, failures included
    """
    threads = threads or config.threads
    model = config.build_model()
    flows = FlowCache()
    cells = config.cells()
    runs = {}
    for hbar in dict.fromkeys(hbar for hbar, _, _ in cells):
        try:
            runs[hbar] = HbarRun(config, model, hbar, flows)
        except Exception as exception:
            LOGGER.exception("could not set up hbar=%s", hbar)
            runs[hbar] = exception

    def evaluate(cell):
        hbar, N, t = cell
        run = runs[hbar]
        if isinstance(run, Exception):
            return _failure_record(model.name, hbar, N, t, config.convention, run)
        try:
            error = run.measure(N, t, config.convention)
        except Exception as exception:
            LOGGER.exception("cell hbar=%s N=%s t=%s failed", hbar, N, t)
            return _failure_record(model.name, hbar, N, t, config.convention, exception)
        LOGGER.info("cell hbar=%s N=%s t=%s: error %.6e", hbar, N, t, error)
        return ErrorRecord(
            model=model.name,
            hbar=hbar,
            N=N,
            t=t,
            error=error,
            relative_error=error / run.norm_B if run.norm_B else error,
            refinement=run.refinement,
            calibration=config.is_calibration_cell(hbar, N, t),
            convention=config.convention,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            records = list(executor.map(evaluate, cells))
    else:
        records = [evaluate(cell) for cell in cells]
    context = context or bound_context(config, model)
    LOGGER.info(
        "sweep of %s cells for %s finished, %s failures, flow cache %s hits %s misses",
        len(records), model.name, sum(record.failed for record in records), flows.hits, flows.misses,
    )
    return SweepResult(records=tuple(apply_bounds(records, context)), context=context, model=model.name)


def apply_bounds(records, context):
    "records with the bound and within_bound columns recomputed for context"
    bounded = []
    for record in records:
        if record.failed:
            bounded.append(record)
            continue
        bound = scaled_remainder_bound(context, record.N, record.t, record.hbar)
        bounded.append(
            replace(record, bound=bound.value, within_bound=record_within_bound(context, record))
        )
    return bounded


def calibrate(result, config):
    "SweepResult with E, F fitted on the calibration cell and bounds re-applied"
    if config.calibration_cell is None:
        raise ConfigError("no calibration cell configured")
    calibration = [record for record in result.records if record.calibration and not record.failed]
    context = calibrate_constants(calibration, result.context)
    return SweepResult(
        records=tuple(apply_bounds(result.records, context)), context=context, model=result.model
    )


@dataclass(frozen=True)
class ScalingFit:
    axis: str
    slope: float
    intercept: float
    residual: float
    count: int
    bound_rate: float = None


def fit_scaling(records, axis="hbar", context=None):
    """
    least-squares slope of log(error) against log(hbar) or against t; for the
    time axis the slope of the log scaled bound over the same cells is
    reported as bound_rate when a context is given
    """
    if axis not in ("hbar", "time"):
        raise ValueError("axis must be 'hbar' or 'time', got %r" % axis)
    usable = [r for r in records if not r.failed and r.error is not None and r.error > 0]
    if len(usable) < 3:
        raise ValueError("a scaling fit needs at least 3 records with positive error, got %s" % len(usable))
    if axis == "hbar":
        x = np.log([r.hbar for r in usable])
    else:
        x = np.array([r.t for r in usable], dtype=float)
    if np.ptp(x) == 0:
        raise ValueError("records do not vary along the %s axis" % axis)
    y = np.log([r.error for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    bound_rate = None
    if axis == "time" and context is not None:
        logs = [scaled_remainder_bound(context, r.N, r.t, r.hbar).log_value for r in usable]
        if all(np.isfinite(logs)):
            bound_rate = float(np.polyfit(x, logs, 1)[0])
    return ScalingFit(
        axis=axis,
        slope=float(slope),
        intercept=float(intercept),
        residual=residual,
        count=len(usable),
        bound_rate=bound_rate,
    )


@dataclass(frozen=True)
class FirstOrderFit:
    gamma: float
    delta_rate: float
    count: int


def fit_first_order(records):
    """
    Gamma and Delta of the shape Gamma hbar^2 t e^{Delta t} from N = 0 records:
    Delta is the least-squares rate of log(error/(hbar^2 t)), Gamma the
    smallest constant covering every record at that rate
    """
    usable = [
        r for r in records if not r.failed and r.N == 0 and r.t > 0 and r.error is not None and r.error > 0
    ]
    if not usable:
        raise ValueError("no N = 0 records with positive error and time")
    t = np.array([r.t for r in usable], dtype=float)
    y = np.log([r.error / (r.hbar ** 2 * r.t) for r in usable])
    delta_rate = float(np.polyfit(t, y, 1)[0]) if np.ptp(t) > 0 else 0.0
    gamma = float(np.exp(np.max(y - delta_rate * t)))
    return FirstOrderFit(gamma=gamma, delta_rate=delta_rate, count=len(usable))


def _group(records, key):
    groups = {}
    for record in records:
        groups.setdefault(key(record), []).append(record)
    return groups


def sweep_checks(result, config):
    "acceptance checks that apply to the sweep in result"
    records = [r for r in result.records if not r.failed]
    failures = [r for r in result.records if r.failed]
    checks = [
        AcceptanceCheck(
            "no-failures", not failures, "%s of %s cells failed" % (len(failures), len(result.records))
        )
    ]
    if result.model == "harmonic":
        worst = max((r.relative_error for r in records), default=0.0)
        checks.append(
            AcceptanceCheck(
                "quadratic-exactness",
                worst <= EXACTNESS_TOLERANCE,
                "largest relative error %.3e" % worst,
            )
        )
        return checks

    if not config.ehrenfest_window:
        for (N, t), group in sorted(_group(records, lambda r: (r.N, r.t)).items()):
            if len({r.hbar for r in group}) < 3 or t == 0 or N > ORDER_CHECK_MAX_N:
                continue
            fit = fit_scaling(group, "hbar")
            expected = 2 * (N + 1)
            checks.append(
                AcceptanceCheck(
                    "hbar-order N=%s t=%s" % (N, t),
                    abs(fit.slope - expected) <= SLOPE_TOLERANCE * expected,
                    "slope %.4f expected %s" % (fit.slope, expected),
                )
            )
        if result.context.calibrated:
            for (hbar, N), group in sorted(_group(records, lambda r: (r.hbar, r.N)).items()):
                group = [r for r in group if r.t > 0]
                if len(group) < 3:
                    continue
                errors = [r.error for r in sorted(group, key=lambda r: r.t)]
                monotone = all(b >= a for a, b in zip(errors, errors[1:]))
                fit = fit_scaling(group, "time", result.context)
                within = fit.bound_rate is not None and fit.slope <= fit.bound_rate
                checks.append(
                    AcceptanceCheck(
                        "time-growth hbar=%s N=%s" % (hbar, N),
                        monotone and within,
                        "rate %.4f bound rate %s nondecreasing %s"
                        % (fit.slope, _format(fit.bound_rate), monotone),
                    )
                )
    else:
        ordered = sorted(records, key=lambda r: -r.hbar)
        errors = [r.error for r in ordered]
        checks.append(
            AcceptanceCheck(
                "ehrenfest-window",
                len(errors) == len(result.records) and all(b < a for a, b in zip(errors, errors[1:])),
                "errors %s" % ", ".join("%.3e" % e for e in errors),
            )
        )

    if result.context.calibrated:
        held_out = [r for r in records if not r.calibration and r.N >= 1]
        violations = [r for r in held_out if not r.within_bound]
        checks.append(
            AcceptanceCheck(
                "bound-dominance",
                not violations,
                "%s of %s held-out cells above the calibrated bound" % (len(violations), len(held_out)),
            )
        )
    return checks


def bound_rows(context, config):
    "one row per distinct (N, t, hbar) cell with e_k, Gamma_k, the remainder bound, T_N and N_k"
    depth = max([N for _, N, _ in config.cells()], default=0)
    header = (
        ["N", "t", "hbar", "alpha"]
        + ["e_%s" % k for k in range(1, depth + 1)]
        + ["Gamma_%s" % k for k in range(1, depth + 1)]
        + ["stimaresto", "TN", "Nk"]
    )
    rows = []
    for hbar, N, t in dict.fromkeys(config.cells()):
        e = [None] * depth
        gamma = [None] * depth
        if N >= 1:
            try:
                schedule = strip_schedule(context, N, t, config.schedule_form)
                e[:N] = schedule.e
                gamma[:N] = schedule.gamma
            except StripExhaustionError:
                LOGGER.exception("strip schedule for N=%s exhausted", N)
        TN = ehrenfest_time(hbar, N, context.alpha).value if N >= 2 else None
        try:
            Nk = iterated_log_order(hbar, config.log_depth).N
        except ChainCollapseError:
            Nk = "collapse"
        rows.append(
            [N, t, hbar, context.alpha]
            + e
            + gamma
            + [remainder_bound(context, N, t).value, TN, Nk]
        )
    return header, rows


def _format(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return "%.10g" % value
    return str(value)


def write_csv(path, header, rows):
    "header and rows with every value formatted deterministically"
    with open(path, "w", newline="", encoding="utf-8") as open_file:
        writer = csv.writer(open_file, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(value) for value in row])


def summary_lines(result, checks):
    context = result.context
    lines = [
        "model: %s" % result.model,
        "cells: %s" % len(result.records),
        "failures: %s" % sum(record.failed for record in result.records),
    ]
    if context.calibrated:
        lines.append(
            "calibrated: E=%s F=%s A=%s" % (_format(context.E), _format(context.F), _format(context.A))
        )
    else:
        lines.append("calibrated: no")
    for check in checks:
        lines.append(
            "%s %s%s" % ("PASS" if check.passed else "FAIL", check.name, ": " + check.detail if check.detail else "")
        )
    for record in result.records:
        cell = "cell hbar=%s N=%s t=%s" % (_format(record.hbar), record.N, _format(record.t))
        if record.failed:
            lines.append("%s: failed %s" % (cell, record.failure))
            continue
        lines.append(
            "%s: error=%s bound=%s within_bound=%s%s"
            % (
                cell,
                _format(record.error),
                _format(record.bound),
                _format(record.within_bound),
                " calibration" if record.calibration else "",
            )
        )
    return lines


def report(result, out, checks=(), bounds=None):
    """
    write errors.csv, failures.csv, bounds.csv when bound rows are given and
    summary.txt under out; identical inputs give identical files
    """
    try:
        os.makedirs(out, exist_ok=True)
        paths = {}
        paths["errors"] = os.path.join(out, "errors.csv")
        write_csv(
            paths["errors"],
            ERROR_FIELDS,
            [
                [r.model, r.hbar, r.N, r.t, r.error, r.bound, r.within_bound]
                for r in result.records
                if not r.failed
            ],
        )
        paths["failures"] = os.path.join(out, "failures.csv")
        write_csv(
            paths["failures"],
            FAILURE_FIELDS,
            [[r.model, r.hbar, r.N, r.t, r.failure] for r in result.records if r.failed],
        )
        if bounds is not None:
            header, rows = bounds
            paths["bounds"] = os.path.join(out, "bounds.csv")
            write_csv(paths["bounds"], header, rows)
        paths["summary"] = os.path.join(out, "summary.txt")
        with open(paths["summary"], "w", encoding="utf-8") as open_file:
            open_file.write("\n".join(summary_lines(result, checks)) + "\n")
    except OSError:
        LOGGER.exception("could not write the report to %s", out)
        raise
    LOGGER.info("report written to %s", out)
    return paths


def export_terms(config, hbar, N, t, out):
    """
    write b_j^t for j = 0..N as containers and CSV files, the flow map phi^t
    and the quadrature reports of the terms under out
    """
    model = config.build_model()
    b = config.sample_observable(hbar)
    flows = FlowCache()
    engine = ExpansionEngine(b, model, flow_cache=flows, quadrature=config.quadrature_control())
    terms = [engine.term(j, t) for j in range(N + 1)]
    os.makedirs(out, exist_ok=True)
    paths = []
    for term in terms:
        stem = os.path.join(out, "term-%s" % term.j)
        write_symbol(stem + ".npz", term.symbol)
        write_symbol_csv(stem + ".csv", term.symbol)
        paths.extend([stem + ".npz", stem + ".csv"])
    paths.append(os.path.join(out, "flow.npz"))
    write_flow(paths[-1], flows.get(model, b.grid, t))
    paths.append(os.path.join(out, "quadrature.csv"))
    write_quadrature_reports(paths[-1], terms)
    LOGGER.info("exported %s terms of %s at hbar=%s t=%s to %s", len(terms), model.name, hbar, t, out)
    return paths


def check_convention_lock(points=64, extent=8.0, hbars=(0.2, 0.1), pairs=5):
    """
    |Op(f#g) - Op(f) Op(g)| for Gaussian pairs; a failure here invalidates
    every other check
    """
    grid = PhaseGrid(extent=extent, points_per_axis=points)
    rng = np.random.default_rng(0)
    worst = 0.0
    count = 0
    for hbar in hbars:
        for _ in range(pairs):
            specs = [
                gaussian(
                    center=tuple(rng.uniform(-1.0, 1.0, 2)),
                    widths=tuple(rng.uniform(0.8, 1.4, 2)),
                )
                for _ in range(2)
            ]
            f, g = (spec.sample(grid, hbar) for spec in specs)
            product = star_product(f, g)
            refinement = max(required_refinement(s) for s in (f, g, product))
            position_grid = PositionGrid.from_phase_grid(grid, hbar, refinement)
            difference = weyl_quantize(product, position_grid) - (
                weyl_quantize(f, position_grid) @ weyl_quantize(g, position_grid)
            )
            worst = max(worst, operator_norm(difference))
            count += 1
    return AcceptanceCheck(
        "convention-lock",
        worst <= CONVENTION_LOCK_TOLERANCE,
        "%s pairs, largest deviation %.3e" % (count, worst),
    )


def check_quadratic_exactness(points=256, extent=8.0, hbars=(0.1, 0.05), times=(0.5, 1.0, np.pi, 2 * np.pi)):
    """
    for the harmonic oscillator B_t = Op(b o phi^t) and the correction terms
    b_1^t .. b_3^t vanish; also returns the symbols met on the way
    """
    grid = PhaseGrid(extent=extent, points_per_axis=points)
    model = get_model("harmonic")
    flows = FlowCache()
    worst_operator = 0.0
    worst_term = 0.0
    symbols = []
    for hbar in hbars:
        b = gaussian().sample(grid, hbar)
        position_grid = PositionGrid.from_phase_grid(grid, hbar, required_refinement(b))
        B = weyl_quantize(b, position_grid)
        H = weyl_quantize(model.symbol(grid, hbar), position_grid)
        scale = operator_norm(B)
        engine = ExpansionEngine(b, model, flow_cache=flows)
        for t in times:
            classical = engine.term(0, t).symbol
            symbols.append(classical)
            difference = heisenberg_evolve(B, H, t) - weyl_quantize(classical, position_grid)
            worst_operator = max(worst_operator, operator_norm(difference) / scale)
            for j in range(1, MAX_TERM_ORDER + 1):
                worst_term = max(worst_term, engine.term(j, t).symbol.max_norm())
    passed = worst_operator <= EXACTNESS_TOLERANCE and worst_term <= 1e-8
    check = AcceptanceCheck(
        "quadratic-exactness",
        passed,
        "relative operator deviation %.3e, largest correction %.3e" % (worst_operator, worst_term),
    )
    return check, symbols


def check_simplex_volume(orders=(1, 2, 3, 4, 5), times=(0.5, 1.0, 2.0, 4.0)):
    worst = 0.0
    for N in orders:
        for t in times:
            exact = t ** N / math.factorial(N)
            worst = max(worst, abs(simplex_volume(N, t) - exact) / exact)
    return AcceptanceCheck("simplex-volume", worst <= 1e-10, "largest relative error %.3e" % worst)


def check_fourier_bound(points=64, extent=8.0, lattice=(0.25, 0.5, 0.75)):
    "measured |bhat|_{rho-delta,sigma} <= (2/pi)^n delta^{-2n} |b|_{sigma,rho} on the reference family"
    grid = PhaseGrid(extent=extent, points_per_axis=points)
    violations = []
    count = 0
    for spec in reference_family():
        bhat = forward_transform(spec.sample(grid, 1.0))
        for sigma in lattice:
            for rho in lattice:
                norm = strip_norm(spec, sigma, rho)
                for delta in (rho / 4.0, rho / 2.0):
                    measured = fourier_strip_norm(bhat, sigma, rho, delta)
                    bound = fourier_norm_bound(norm, delta)
                    count += 1
                    if measured > bound:
                        violations.append("%s sigma=%s rho=%s delta=%s" % (spec.name, sigma, rho, delta))
    return AcceptanceCheck(
        "fourier-bound",
        not violations,
        "%s of %s cases violated%s" % (len(violations), count, (": " + "; ".join(violations)) if violations else ""),
    )


def check_norm_domination(symbols):
    """
    |Op(r)| <= sum of the moduli of the Fourier coefficients of r; symbols no
    position grid can quantize admissibly are counted as skipped
    """
    violations = 0
    skipped = 0
    for symbol in symbols:
        try:
            refinement = required_refinement(symbol)
        except AdmissibilityError:
            LOGGER.warning("norm domination skips %r at hbar=%s", symbol.label, symbol.hbar)
            skipped += 1
            continue
        position_grid = PositionGrid.from_phase_grid(symbol.grid, symbol.hbar, refinement)
        measured = operator_norm(weyl_quantize(symbol, position_grid))
        if measured > l1_fourier_norm_bound(symbol) * (1.0 + 1e-9):
            violations += 1
    return AcceptanceCheck(
        "norm-domination",
        not violations and skipped < len(symbols),
        "%s of %s symbols violated, %s skipped" % (violations, len(symbols), skipped),
    )


def defect_symbols(points=64, extent=8.0, hbar=0.1, durations=(0.0, 0.5, 1.0)):
    "r_1 for the Gaussian well after a few flow durations"
    grid = PhaseGrid(extent=extent, points_per_axis=points)
    engine = ExpansionEngine(gaussian().sample(grid, hbar), get_model("gaussian-well"))
    return [engine.remainder((s,)) for s in durations]


def well_approximant_symbols(points=64, extent=8.0, hbars=(0.2, 0.141421356, 0.1, 0.0707106781, 0.05),
                             orders=(0, 1), t=1.0, quadrature=None):
    "the Gaussian well approximants of the hbar-order sweep, one per (hbar, N)"
    grid = PhaseGrid(extent=extent, points_per_axis=points)
    model = get_model("gaussian-well")
    flows = FlowCache()
    symbols = []
    for hbar in hbars:
        engine = ExpansionEngine(
            gaussian().sample(grid, hbar), model, flow_cache=flows, quadrature=quadrature
        )
        symbols.extend(engine.approximant(N, t).symbol for N in orders)
    return symbols


def run_selftest(points=64, extent=8.0, exactness_points=256):
    """
    the desk-scale acceptance checks; the convention lock runs first and a
    failure there stops the suite. Quadratic exactness runs on a phase grid
    of exactness_points nodes per axis.
    """
    lock = check_convention_lock(points, extent)
    LOGGER.info("selftest %s: %s", lock.name, lock.detail)
    if not lock.passed:
        LOGGER.error("convention lock failed, remaining checks skipped")
        return [lock]
    exactness, symbols = check_quadratic_exactness(exactness_points, extent)
    checks = [lock, exactness, check_simplex_volume(), check_fourier_bound(points, extent)]
    symbols = symbols + well_approximant_symbols(points, extent) + defect_symbols(points, extent)
    checks.append(check_norm_domination(symbols))
    for check in checks[1:]:
        LOGGER.info("selftest %s: %s", check.name, check.detail)
    return checks
