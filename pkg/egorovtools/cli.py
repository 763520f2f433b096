"""
Command line entry point: egorovtools run|bounds|calibrate|terms|selftest. The
exit status is 0 when every enabled acceptance check passes, 1 when a check
fails and 2 for configuration or I/O errors.
"""
import argparse
import logging
import os
import sys
from egorovtools import LOGGER, __version__, configure_console_logging, configure_logging
from egorovtools import experiment
from egorovtools.config import load_config
from egorovtools.exceptions import EgorovToolsError


LOG_FILENAME = "egorovtools.log"

SELFTEST_OUTPUT = "egorovtools-selftest"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="egorovtools",
        description="Compare exact Heisenberg evolution with the Egorov expansion and its bounds.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory (default: the configured output)")
    common.add_argument("--threads", type=int, default=None, help="number of cells evaluated concurrently")
    common.add_argument("--verbose", action="store_true", help="log at DEBUG level to the console")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "run the sweep and write errors.csv, bounds.csv and summary.txt"),
        ("bounds", "evaluate the bound tables only"),
        ("calibrate", "run the sweep, calibrate E, F on the calibration cell and verify the other cells"),
    ):
        command = subparsers.add_parser(name, parents=[common], help=text)
        command.add_argument("config", help="experiment configuration file")
    terms = subparsers.add_parser(
        "terms", parents=[common], help="export the expansion terms, the flow map and the quadrature reports"
    )
    terms.add_argument("config", help="experiment configuration file")
    terms.add_argument("--hbar", type=float, required=True, help="semiclassical parameter")
    terms.add_argument("--N", type=int, default=1, help="highest term order")
    terms.add_argument("-t", "--time", type=float, default=1.0, help="evolution time")
    selftest = subparsers.add_parser("selftest", parents=[common], help="desk-scale acceptance checks")
    selftest.add_argument("--points", type=int, default=64, help="phase grid points per axis")
    selftest.add_argument(
        "--exactness-points", type=int, default=256, help="phase grid points per axis of the quadratic exactness check"
    )
    return parser


def _configure_logging(args, out):
    os.makedirs(out, exist_ok=True)
    if args.verbose:
        return configure_console_logging(logging.DEBUG)
    return configure_logging(os.path.join(out, LOG_FILENAME), logging.INFO)


def _exit_code(checks):
    return 0 if all(check.passed for check in checks) else 1


def run_command(args):
    config = load_config(args.config)
    out = args.out or config.output
    handler = _configure_logging(args, out)
    try:
        result = experiment.run_sweep(config, threads=args.threads)
        if args.command == "calibrate":
            result = experiment.calibrate(result, config)
        checks = experiment.sweep_checks(result, config)
        experiment.report(result, out, checks, experiment.bound_rows(result.context, config))
    finally:
        LOGGER.removeHandler(handler)
        handler.close()
    return _exit_code(checks)


def bounds_command(args):
    config = load_config(args.config)
    out = args.out or config.output
    handler = _configure_logging(args, out)
    try:
        context = experiment.bound_context(config)
        header, rows = experiment.bound_rows(context, config)
        experiment.write_csv(os.path.join(out, "bounds.csv"), header, rows)
    finally:
        LOGGER.removeHandler(handler)
        handler.close()
    return 0


def terms_command(args):
    config = load_config(args.config)
    out = args.out or os.path.join(config.output, "terms")
    handler = _configure_logging(args, out)
    try:
        experiment.export_terms(config, args.hbar, args.N, args.time, out)
    finally:
        LOGGER.removeHandler(handler)
        handler.close()
    return 0


def selftest_command(args):
    out = args.out or SELFTEST_OUTPUT
    handler = _configure_logging(args, out)
    try:
        checks = experiment.run_selftest(points=args.points, exactness_points=args.exactness_points)
        lines = [
            "%s %s: %s" % ("PASS" if check.passed else "FAIL", check.name, check.detail)
            for check in checks
        ]
        with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8") as open_file:
            open_file.write("\n".join(lines) + "\n")
    finally:
        LOGGER.removeHandler(handler)
        handler.close()
    for line in lines:
        print(line)
    return _exit_code(checks)


COMMANDS = {
    "run": run_command,
    "calibrate": run_command,
    "bounds": bounds_command,
    "terms": terms_command,
    "selftest": selftest_command,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (EgorovToolsError, OSError) as exception:
        LOGGER.exception("egorovtools %s failed", args.command)
        print("egorovtools %s: %s" % (args.command, exception), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
