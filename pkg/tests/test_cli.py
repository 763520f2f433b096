import io
import os
import unittest
from contextlib import redirect_stderr, redirect_stdout
from mock import patch
from egorovtools import __version__, cli
from egorovtools.experiment import AcceptanceCheck
from tests.helpers import delete_files_in_folder, fixture_path, read_log_file_lines


FIXTURE = fixture_path("tiny-harmonic.cfg")


class TestMain(unittest.TestCase):
    def setUp(self):
        self.temp_dir = "tests/tmp"
        self.out = os.path.join(self.temp_dir, "out")

    def tearDown(self):
        delete_files_in_folder(self.temp_dir, filter_out=[".keepme"])

    def test_version(self):
        stdout = io.StringIO()
        with redirect_stdout(stdout), self.assertRaises(SystemExit):
            cli.main(["--version"])
        self.assertEqual(stdout.getvalue().strip(), __version__)

    def test_bounds(self):
        self.assertEqual(cli.main(["bounds", FIXTURE, "--out", self.out]), 0)
        lines = read_log_file_lines(os.path.join(self.out, "bounds.csv"))
        self.assertEqual(lines[0], "N,t,hbar,alpha,e_1,Gamma_1,stimaresto,TN,Nk\n")
        self.assertEqual(len(lines), 7)
        self.assertTrue(os.path.exists(os.path.join(self.out, cli.LOG_FILENAME)))

    def test_run(self):
        self.assertEqual(cli.main(["run", FIXTURE, "--out", self.out, "--threads", "2"]), 0)
        for name in ("errors.csv", "failures.csv", "bounds.csv", "summary.txt"):
            self.assertTrue(os.path.exists(os.path.join(self.out, name)), name)
        summary = read_log_file_lines(os.path.join(self.out, "summary.txt"))
        self.assertIn("PASS quadratic-exactness", "".join(summary))

    def test_run_failing_check(self):
        failing = [AcceptanceCheck("no-failures", False, "1 of 6 cells failed")]
        with patch("egorovtools.experiment.sweep_checks", return_value=failing):
            self.assertEqual(cli.main(["run", FIXTURE, "--out", self.out]), 1)
        summary = read_log_file_lines(os.path.join(self.out, "summary.txt"))
        self.assertIn("FAIL no-failures: 1 of 6 cells failed\n", summary)

    def test_missing_config(self):
        stderr = io.StringIO()
        with redirect_stderr(stderr):
            self.assertEqual(cli.main(["run", fixture_path("not-there.cfg")]), 2)
        self.assertIn("does not exist", stderr.getvalue())

    def test_invalid_config(self):
        with redirect_stderr(io.StringIO()):
            self.assertEqual(cli.main(["bounds", fixture_path("invalid-section.cfg")]), 2)

    def test_calibrate_without_cell(self):
        stderr = io.StringIO()
        with patch("egorovtools.experiment.run_sweep") as run_sweep, redirect_stderr(stderr):
            self.assertEqual(cli.main(["calibrate", FIXTURE, "--out", self.out]), 2)
        run_sweep.assert_called_once()
        self.assertIn("no calibration cell", stderr.getvalue())

    def test_terms(self):
        arguments = ["terms", FIXTURE, "--hbar", "0.2", "--N", "1", "-t", "0.5", "--out", self.out]
        self.assertEqual(cli.main(arguments), 0)
        self.assertTrue(os.path.exists(os.path.join(self.out, "term-1.npz")))
        self.assertTrue(os.path.exists(os.path.join(self.out, "quadrature.csv")))

    def test_selftest(self):
        checks = [AcceptanceCheck("convention-lock", True, "ok"), AcceptanceCheck("simplex-volume", False, "bad")]
        stdout = io.StringIO()
        with patch("egorovtools.experiment.run_selftest", return_value=checks), redirect_stdout(stdout):
            self.assertEqual(cli.main(["selftest", "--out", self.out]), 1)
        self.assertEqual(stdout.getvalue(), "PASS convention-lock: ok\nFAIL simplex-volume: bad\n")
        summary = read_log_file_lines(os.path.join(self.out, "summary.txt"))
        self.assertEqual(summary, ["PASS convention-lock: ok\n", "FAIL simplex-volume: bad\n"])

    def test_selftest_exactness_points(self):
        checks = [AcceptanceCheck("convention-lock", True, "ok")]
        with patch("egorovtools.experiment.run_selftest", return_value=checks) as run_selftest, redirect_stdout(
            io.StringIO()
        ):
            self.assertEqual(cli.main(["selftest", "--out", self.out]), 0)
            run_selftest.assert_called_once_with(points=64, exactness_points=256)
            run_selftest.reset_mock()
            self.assertEqual(cli.main(["selftest", "--exactness-points", "64", "--out", self.out]), 0)
            run_selftest.assert_called_once_with(points=64, exactness_points=64)
