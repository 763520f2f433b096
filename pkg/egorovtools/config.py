"""
Experiment configuration: a key-value file with section headers read by
configparser and validated into an ExperimentConfig.
"""
import configparser
import math
import os
from typing import Any, Dict, List, Optional, Tuple
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator
from egorovtools import LOGGER
from egorovtools.analytic import OBSERVABLE_CATALOG, get_observable
from egorovtools.bounds import SCHEDULE_FORMS, iterated_log_order
from egorovtools.exceptions import AdmissibilityError, ChainCollapseError, ConfigError
from egorovtools.expansion import CONVENTIONS, MAX_TERM_ORDER
from egorovtools.models import MODEL_CATALOG, get_model
from egorovtools.phase_space import PhaseGrid, is_power_of_two
from egorovtools.quadrature import QuadratureControl
from egorovtools.quantum import (
    DEFAULT_POINTS_PER_OSCILLATION,
    PositionGrid,
    check_admissible,
    required_refinement,
)


# section -> {key in the file: ExperimentConfig field}
SECTION_KEYS = {
    "experiment": {
        "model": "model",
        "observable": "observable",
        "convention": "convention",
        "output": "output",
        "threads": "threads",
    },
    "grid": {
        "points": "points",
        "extent": "extent",
        "refinement": "refinement",
        "max_refinement": "max_refinement",
        "points_per_oscillation": "points_per_oscillation",
    },
    "sweep": {
        "hbar": "hbars",
        "N": "orders",
        "t": "times",
        "ehrenfest_window": "ehrenfest_window",
    },
    "bounds": {
        "n": "n",
        "sigma": "sigma",
        "rho": "rho",
        "alpha": "alpha",
        "log_depth": "log_depth",
        "schedule_form": "schedule_form",
    },
    "quadrature": {
        "levels": "quadrature_levels",
        "tolerance": "quadrature_tolerance",
        "strict": "quadrature_strict",
    },
    "calibration": {
        "cell": "calibration_cell",
    },
}

LIST_FIELDS = ("hbars", "orders", "times", "quadrature_levels", "calibration_cell")

# a blank value is an empty list, which gives an empty sweep
SWEEP_LIST_FIELDS = ("hbars", "orders", "times")

PARAMETER_SECTIONS = {"model": "model_parameters", "observable": "observable_parameters"}


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, protected_namespaces=(), extra="forbid")

    model: str = "gaussian-well"
    model_parameters: Dict[str, Any] = {}
    observable: str = "gaussian"
    observable_parameters: Dict[str, Any] = {}
    convention: str = "theorem"
    output: str = "egorovtools-output"
    threads: int = 1

    points: int = 64
    extent: float = 8.0
    refinement: Optional[int] = None
    max_refinement: int = 5
    points_per_oscillation: float = DEFAULT_POINTS_PER_OSCILLATION

    hbars: List[float] = [0.2, 0.1]
    orders: List[int] = [0, 1]
    times: List[float] = [1.0]
    ehrenfest_window: bool = False

    n: int = 1
    sigma: float = 0.5
    rho: float = 0.5
    alpha: Optional[float] = None
    log_depth: int = 1
    schedule_form: str = "recursion"

    quadrature_levels: Tuple[int, ...] = (8, 12, 16)
    quadrature_tolerance: float = 1e-8
    quadrature_strict: bool = False

    calibration_cell: Optional[Tuple[int, float, float]] = None

    @field_validator("model")
    @classmethod
    def known_model(cls, value):
        if value not in MODEL_CATALOG:
            raise ValueError("unknown model %r, choose one of %s" % (value, ", ".join(sorted(MODEL_CATALOG))))
        return value

    @field_validator("observable")
    @classmethod
    def known_observable(cls, value):
        if value not in OBSERVABLE_CATALOG:
            raise ValueError(
                "unknown observable %r, choose one of %s" % (value, ", ".join(sorted(OBSERVABLE_CATALOG)))
            )
        return value

    @field_validator("convention")
    @classmethod
    def known_convention(cls, value):
        if value not in CONVENTIONS:
            raise ValueError("convention must be one of %s" % (CONVENTIONS,))
        return value

    @field_validator("schedule_form")
    @classmethod
    def known_form(cls, value):
        if value not in SCHEDULE_FORMS:
            raise ValueError("schedule_form must be one of %s" % (SCHEDULE_FORMS,))
        return value

    @field_validator("points")
    @classmethod
    def power_of_two(cls, value):
        if not is_power_of_two(value) or value < 8:
            raise ValueError("points must be a power of two >= 8, got %s" % value)
        return value

    @field_validator("threads", "log_depth", "n")
    @classmethod
    def at_least_one(cls, value):
        if value < 1:
            raise ValueError("must be at least 1, got %s" % value)
        return value

    @field_validator("extent", "sigma", "rho", "points_per_oscillation", "quadrature_tolerance")
    @classmethod
    def positive(cls, value):
        if not value > 0:
            raise ValueError("must be positive, got %s" % value)
        return value

    @field_validator("hbars")
    @classmethod
    def hbar_range(cls, value):
        for hbar in value:
            if not 0 < hbar < 1:
                raise ValueError("every hbar must lie in (0, 1), got %s" % hbar)
        return value

    @field_validator("orders")
    @classmethod
    def order_range(cls, value):
        for N in value:
            if not 0 <= N <= MAX_TERM_ORDER:
                raise ValueError("every N must lie in 0..%s, got %s" % (MAX_TERM_ORDER, N))
        return value

    @field_validator("times")
    @classmethod
    def sorted_times(cls, value):
        if any(t < 0 for t in value):
            raise ValueError("times must be nonnegative")
        if list(value) != sorted(value):
            raise ValueError("the t list must be sorted ascending, got %s" % (value,))
        return value

    @field_validator("quadrature_levels")
    @classmethod
    def increasing_levels(cls, value):
        if not value or list(value) != sorted(set(value)) or value[0] < 1:
            raise ValueError("quadrature levels must be increasing positive node counts, got %s" % (value,))
        return value

    @model_validator(mode="after")
    def calibration_cell_in_sweep(self):
        if self.calibration_cell is None:
            return self
        N, t, hbar = self.calibration_cell
        if (
            N not in self.orders
            or not any(math.isclose(t, value, rel_tol=1e-12) for value in self.times)
            or not any(math.isclose(hbar, value, rel_tol=1e-12) for value in self.hbars)
        ):
            raise ValueError("calibration cell %s is not a member of the sweep" % (self.calibration_cell,))
        return self

    @model_validator(mode="after")
    def window_orders(self):
        if not self.ehrenfest_window:
            return self
        for hbar in self.hbars:
            try:
                _, N, _ = self.window_cell(hbar)
            except ChainCollapseError as exception:
                raise ValueError(str(exception))
            if N > MAX_TERM_ORDER:
                raise ValueError("hbar=%s asks for order %s above %s" % (hbar, N, MAX_TERM_ORDER))
        return self

    @model_validator(mode="after")
    def admissible_hbars(self):
        for hbar in self.hbars:
            self.position_grid(hbar)
        return self

    def phase_grid(self):
        return PhaseGrid(extent=self.extent, points_per_axis=self.points)

    def build_model(self):
        return get_model(self.model, **self.model_parameters)

    def build_observable(self):
        return get_observable(self.observable, **self.observable_parameters)

    def sample_observable(self, hbar):
        return self.build_observable().sample(self.phase_grid(), hbar)

    def position_grid(self, hbar):
        "the position grid for hbar, refined as far as admissibility requires when refinement is unset"
        b = self.sample_observable(hbar)
        try:
            if self.refinement is None:
                refinement = required_refinement(b, self.points_per_oscillation, self.max_refinement)
            else:
                refinement = self.refinement
                check_admissible(
                    b,
                    PositionGrid.from_phase_grid(b.grid, hbar, refinement),
                    self.points_per_oscillation,
                )
        except AdmissibilityError as exception:
            raise ValueError("hbar=%s is not admissible: %s" % (hbar, exception))
        return PositionGrid.from_phase_grid(b.grid, hbar, refinement)

    def quadrature_control(self):
        return QuadratureControl(
            levels=tuple(self.quadrature_levels),
            tolerance=self.quadrature_tolerance,
            strict=self.quadrature_strict,
        )

    def window_cell(self, hbar):
        "(hbar, N_k(hbar), min(t cap, t_max)) with the t cap the last listed time, 2 by default"
        order = iterated_log_order(hbar, self.log_depth)
        cap = self.times[-1] if self.times else 2.0
        return hbar, order.N, min(cap, order.t_max)

    def cells(self):
        "(hbar, N, t) in sweep order"
        if self.ehrenfest_window:
            return [self.window_cell(hbar) for hbar in self.hbars]
        return [(hbar, N, t) for hbar in self.hbars for N in self.orders for t in self.times]

    def is_calibration_cell(self, hbar, N, t):
        if self.calibration_cell is None:
            return False
        cell_N, cell_t, cell_hbar = self.calibration_cell
        return (
            N == cell_N
            and math.isclose(t, cell_t, rel_tol=1e-12)
            and math.isclose(hbar, cell_hbar, rel_tol=1e-12)
        )


def _scalar(text):
    "int, float, bool or the stripped string"
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    for convert in (int, float):
        try:
            return convert(text)
        except ValueError:
            pass
    return text


def _value(text, as_list=False):
    text = text.strip()
    if as_list:
        return [_scalar(item) for item in text.split(",") if item.strip()]
    if "," in text:
        return tuple(_scalar(item) for item in text.split(","))
    return _scalar(text)


def parse_config(parser):
    "ExperimentConfig from a populated ConfigParser"
    values = {}
    for section in parser.sections():
        if section in PARAMETER_SECTIONS:
            values[PARAMETER_SECTIONS[section]] = {
                key: _value(text) for key, text in parser.items(section)
            }
            continue
        if section not in SECTION_KEYS:
            raise ConfigError("unknown section [%s]" % section)
        keys = SECTION_KEYS[section]
        for key, text in parser.items(section):
            if key not in keys:
                raise ConfigError("unknown key %r in section [%s]" % (key, section))
            field = keys[key]
            if not text.strip() and field in SWEEP_LIST_FIELDS:
                values[field] = []
                continue
            if not text.strip() or text.strip().lower() in ("none", "auto"):
                continue
            values[field] = _value(text, as_list=field in LIST_FIELDS)
    try:
        return ExperimentConfig(**values)
    except (ValidationError, TypeError) as exception:
        LOGGER.exception("invalid experiment configuration")
        raise ConfigError("invalid experiment configuration: %s" % exception)


def new_parser():
    parser = configparser.ConfigParser()
    # keys such as N are case sensitive
    parser.optionxform = str
    return parser


def parse_config_string(text):
    parser = new_parser()
    try:
        parser.read_string(text)
    except configparser.Error as exception:
        raise ConfigError("could not parse configuration: %s" % exception)
    return parse_config(parser)


def load_config(path):
    "read and validate the configuration file at path"
    if not os.path.isfile(path):
        raise ConfigError("configuration file %s does not exist" % path)
    LOGGER.info("reading configuration %s", path)
    with open(path, "r", encoding="utf-8") as open_file:
        return parse_config_string(open_file.read())
