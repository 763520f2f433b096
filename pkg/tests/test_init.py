import logging
import os
import unittest
from egorovtools import configure_console_logging, configure_logging, LOGGER
from tests.helpers import delete_files_in_folder, read_log_file_lines


class TestInit(unittest.TestCase):
    def setUp(self):
        self.temp_dir = "tests/tmp"
        self.log_file = os.path.join(self.temp_dir, "test.log")

    def tearDown(self):
        delete_files_in_folder(self.temp_dir, filter_out=[".keepme"])

    def test_configure_logging(self):
        expected = "INFO egorovtools:test_init:test_configure_logging: test_configure_logging\n"
        handler = configure_logging(self.log_file)
        LOGGER.info("test_configure_logging")
        LOGGER.removeHandler(handler)
        handler.close()
        with open(self.log_file, "r") as open_file:
            self.assertEqual(open_file.read(), expected)

    def test_configure_logging_level(self):
        handler = configure_logging(self.log_file, logging.WARNING)
        LOGGER.info("not written")
        LOGGER.warning("written")
        LOGGER.removeHandler(handler)
        handler.close()
        self.assertEqual(
            read_log_file_lines(self.log_file),
            ["WARNING egorovtools:test_init:test_configure_logging_level: written\n"],
        )

    def test_configure_console_logging(self):
        handler = configure_console_logging()
        try:
            self.assertIsInstance(handler, logging.StreamHandler)
            self.assertIn(handler, LOGGER.handlers)
            self.assertEqual(LOGGER.level, logging.DEBUG)
        finally:
            LOGGER.removeHandler(handler)
