"""
Binary containers for Symbols, FlowMaps and QuantumOperators and CSV export.
A container is a numpy archive holding the arrays of the object and a JSON
header with the grid parameters, hbar, the Fourier convention and the list
of channels.
"""
import csv
import json
import numpy as np
from egorovtools import LOGGER
from egorovtools.classical import FlowMap, IntegratorReport
from egorovtools.exceptions import GridError
from egorovtools.phase_space import CONVENTION, PhaseGrid, QuadraticPart, Symbol
from egorovtools.quantum import PositionGrid, QuantumOperator


FORMAT_VERSION = 1


def _write(path, header, arrays):
    header = dict(header, version=FORMAT_VERSION, channels=sorted(arrays))
    with open(path, "wb") as open_file:
        np.savez(open_file, header=np.array(json.dumps(header, sort_keys=True)), **arrays)
    LOGGER.info("wrote %s container %s", header["kind"], path)


def _read(path, kind):
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        if header.get("kind") != kind:
            raise GridError("%s holds a %r container, expected %r" % (path, header.get("kind"), kind))
        if header.get("version") != FORMAT_VERSION:
            raise GridError("unsupported container version %s in %s" % (header.get("version"), path))
        arrays = {name: np.array(data[name]) for name in header["channels"]}
    return header, arrays


def _phase_header(kind, grid, hbar):
    return {
        "kind": kind,
        "n": grid.n,
        "M": grid.points_per_axis,
        "L": grid.extent,
        "hbar": None if hbar is None else float(hbar),
        "convention": CONVENTION,
    }


def _phase_grid(header, path):
    if header.get("convention") != CONVENTION:
        raise GridError(
            "%s uses the %r Fourier convention, expected %r" % (path, header.get("convention"), CONVENTION)
        )
    return PhaseGrid(extent=header["L"], points_per_axis=header["M"], n=header["n"])


def write_symbol(path, symbol):
    header = _phase_header("symbol", symbol.grid, symbol.hbar)
    header.update(
        label=symbol.label,
        decaying=bool(symbol.decaying),
        real_observable=bool(symbol.real_observable),
    )
    arrays = {"values": symbol.values}
    if symbol.quadratic is not None:
        arrays["quadratic_constant"] = np.array(symbol.quadratic.constant)
        arrays["quadratic_linear"] = np.array(symbol.quadratic.linear)
        arrays["quadratic_hessian"] = np.array(symbol.quadratic.hessian)
    _write(path, header, arrays)


def read_symbol(path):
    header, arrays = _read(path, "symbol")
    quadratic = None
    if "quadratic_constant" in arrays:
        quadratic = QuadraticPart(
            constant=arrays["quadratic_constant"].item(),
            linear=tuple(arrays["quadratic_linear"].tolist()),
            hessian=tuple(map(tuple, arrays["quadratic_hessian"].tolist())),
        )
    return Symbol(
        grid=_phase_grid(header, path),
        values=arrays["values"],
        hbar=header["hbar"],
        quadratic=quadratic,
        decaying=header["decaying"],
        real_observable=header["real_observable"],
        label=header["label"],
    )


def write_flow(path, flow):
    header = _phase_header("flow", flow.grid, None)
    report = flow.integrator_report
    header.update(
        t=float(flow.t),
        linear=bool(flow.linear),
        method=report.method,
        rtol=float(report.rtol),
        atol=float(report.atol),
        steps=int(report.steps),
        energy_drift=float(report.energy_drift),
        determinant_error=float(report.determinant_error),
        message=report.message,
    )
    _write(path, header, {"x": flow.x, "xi": flow.xi, "jacobian": flow.jacobian})


def read_flow(path):
    header, arrays = _read(path, "flow")
    report = IntegratorReport(
        method=header["method"],
        rtol=header["rtol"],
        atol=header["atol"],
        steps=header["steps"],
        energy_drift=header["energy_drift"],
        determinant_error=header["determinant_error"],
        message=header.get("message", ""),
    )
    return FlowMap(
        grid=_phase_grid(header, path),
        t=header["t"],
        x=arrays["x"],
        xi=arrays["xi"],
        jacobian=arrays["jacobian"],
        integrator_report=report,
        linear=header["linear"],
    )


def write_operator(path, operator):
    grid = operator.grid
    header = {
        "kind": "operator",
        "M": grid.points,
        "L": grid.extent,
        "hbar": float(grid.hbar),
        "hermitian": bool(operator.hermitian),
    }
    _write(path, header, {"matrix": operator.matrix})


def read_operator(path):
    header, arrays = _read(path, "operator")
    grid = PositionGrid(extent=header["L"], points=header["M"], hbar=header["hbar"])
    return QuantumOperator(arrays["matrix"], grid, hermitian=header["hermitian"])


def write_symbol_csv(path, symbol):
    "x, xi, real and imaginary part of the full symbol at every node"
    x, xi = symbol.grid.mesh()
    values = symbol.full_values()
    with open(path, "w", newline="", encoding="utf-8") as open_file:
        writer = csv.writer(open_file, lineterminator="\n")
        writer.writerow(["x", "xi", "real", "imag"])
        for row in zip(x.ravel(), xi.ravel(), values.real.ravel(), values.imag.ravel()):
            writer.writerow(["%.17g" % value for value in row])


def write_quadrature_reports(path, terms):
    "one row per expansion term with its quadrature report"
    with open(path, "w", newline="", encoding="utf-8") as open_file:
        writer = csv.writer(open_file, lineterminator="\n")
        writer.writerow(["j", "t", "nodes", "level", "error_estimate", "converged"])
        for term in terms:
            report = term.quadrature_report
            if report is None:
                writer.writerow([term.j, "%.12g" % term.t, 0, "", "", ""])
                continue
            writer.writerow(
                [
                    term.j,
                    "%.12g" % term.t,
                    report.nodes,
                    report.level,
                    "%.6e" % report.error_estimate,
                    "true" if report.converged else "false",
                ]
            )
