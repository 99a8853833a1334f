import unittest
import os
import tempfile
import sys
import logging

import numpy as np

# Add the parent directory to the path so we can import the utils module
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils import (
    derive_seed,
    dump_json,
    setup_logging,
    load_json,
    format_execution_time,
)


class TestUtils(unittest.TestCase):

    def test_derive_seed(self):
        """Child seeds are stable, label dependent and fit in 64 bits"""
        seed = derive_seed(7, "midpoint", 3)
        self.assertIsInstance(seed, int)
        self.assertEqual(seed, derive_seed(7, "midpoint", 3))
        self.assertLess(seed, 2 ** 64)

        self.assertNotEqual(seed, derive_seed(7, "midpoint", 4))
        self.assertNotEqual(seed, derive_seed(8, "midpoint", 3))
        self.assertNotEqual(seed, derive_seed(7, "dyadic", 3))
        # label boundaries matter
        self.assertNotEqual(derive_seed(1, "ab", "c"), derive_seed(1, "a", "bc"))

    def test_dump_json(self):
        """Output has sorted keys, a trailing newline and plain numbers"""
        text = dump_json({"b": np.float64(0.5), "a": np.int64(2), "c": np.array([1.0, 2.0])})
        self.assertTrue(text.endswith("}\n"))
        self.assertLess(text.index('"a"'), text.index('"b"'))
        self.assertEqual(dump_json({"b": 0.5, "a": 2, "c": [1.0, 2.0]}), text)

    def test_load_json(self):
        """load_json reads back what dump_json wrote"""
        with tempfile.NamedTemporaryFile(delete=False, suffix='.json') as temp_file:
            temp_path = temp_file.name

        try:
            test_data = [{"label": "born-0", "residual": 1e-15, "pass": True, "details": {"closed_form": 0.0}}]
            with open(temp_path, 'w') as f:
                f.write(dump_json(test_data))
            self.assertEqual(load_json(temp_path), test_data)
        finally:
            if os.path.exists(temp_path):
                os.unlink(temp_path)

    def test_format_execution_time(self):
        """Test the format_execution_time function"""
        self.assertEqual(format_execution_time(0.5), "500.00ms")
        self.assertEqual(format_execution_time(5.25), "5.25s")
        self.assertEqual(format_execution_time(125.5), "2m 5.50s")

    def test_setup_logging(self):
        """Test the setup_logging function"""
        old_basicConfig = logging.basicConfig
        try:
            captured = {}

            def mock_basicConfig(**kwargs):
                captured.update(kwargs)
                return old_basicConfig(**kwargs)

            logging.basicConfig = mock_basicConfig

            setup_logging()
            self.assertEqual(captured['level'], logging.INFO)
            self.assertEqual(len(captured['handlers']), 1)

            with tempfile.TemporaryDirectory() as tmp:
                log_file = os.path.join(tmp, "rho-lab.log")
                setup_logging(log_level="debug", log_file=log_file)
                self.assertEqual(captured['level'], logging.DEBUG)
                self.assertEqual(len(captured['handlers']), 2)
                logging.getLogger("rho-lab.test").debug("written")
                for handler in captured['handlers']:
                    handler.flush()
                with open(log_file, 'r') as f:
                    self.assertIn("written", f.read())
                # release the file handler before the directory goes away
                setup_logging(log_level="WARNING")
        finally:
            logging.basicConfig = old_basicConfig


if __name__ == '__main__':
    unittest.main()
