"""Tests for the run configuration parser"""

import json
import shutil
import tempfile
import unittest
from pathlib import Path

import yaml

from ..core.errors import ConfigError
from ..file_io.input_parser import InputParser, RunConfig

MODEL = {
    "C0": 2.23606797749979, "E0": 1.0,
    "C1": 1.7320508075688772, "E1": 1.0,
    "C2": 1.4142135623730951, "E2": 1.0,
    "omega1": 0.45, "omega2": 0.75,
    "gamma": 0.01, "theta2_in": 3.141592653589793, "theta2_out": 3.141592653589793,
}


class TestInputParser(unittest.TestCase):
    """Test reading JSON and YAML run configurations"""

    def setUp(self):
        self.parser = InputParser()
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def write(self, name: str, text: str) -> str:
        path = Path(self.temp_dir) / name
        path.write_text(text)
        return str(path)

    def test_file_not_found(self):
        with self.assertRaises(FileNotFoundError):
            self.parser.read_input("nonexistent_file.json")

    def test_preset(self):
        config = self.parser.get_default_config()
        self.assertIsInstance(config, RunConfig)
        self.assertEqual(config.model.omega1, 0.45)
        self.assertEqual(config.model.gamma, 0.01)
        self.assertEqual(config.flow.p12, 3.0)
        self.assertEqual(set(config.diophantine), {0, 1, 2})
        self.assertEqual(config.command_options("connections")["n_range"], [10, 15])
        self.assertEqual(config.seed, 0)
        self.assertEqual(config.tol, 1e-10)

    def test_json_input(self):
        data = {"model": MODEL, "seed": 3, "tol": 1e-9, "output_dir": "runs/a",
                "options": {"switch": {"n": 7, "word": "121"}}}
        config = self.parser.read_input(self.write("run.json", json.dumps(data)))
        self.assertEqual(config.model.C0, MODEL["C0"])
        self.assertEqual(config.seed, 3)
        self.assertEqual(config.tol, 1e-9)
        self.assertEqual(config.output_dir, "runs/a")
        self.assertEqual(config.command_options("switch"), {"n": 7, "word": "121"})
        self.assertEqual(config.command_options("horseshoe"), {})

    def test_yaml_input(self):
        data = {"model": MODEL, "flow": {"mu1": -2e-3, "mu2": 1e-3}}
        for suffix in (".yaml", ".yml"):
            config = self.parser.read_input(self.write("run" + suffix, yaml.safe_dump(data)))
            self.assertEqual(config.flow.mu1, -2e-3)
            self.assertEqual(config.flow.p11, 1.0)

    def test_bare_model(self):
        config = self.parser.read_input(self.write("model.json", json.dumps(MODEL)))
        self.assertEqual(config.model.omega2, 0.75)
        self.assertEqual(config.diophantine, {})
        self.assertEqual(config.options, {})

    def test_unsupported_suffix(self):
        with self.assertRaises(ConfigError):
            self.parser.read_input(self.write("run.txt", json.dumps(MODEL)))

    def test_malformed_documents(self):
        with self.assertRaises(ConfigError):
            self.parser.read_input(self.write("bad.json", "{\"model\": "))
        with self.assertRaises(ConfigError):
            self.parser.read_input(self.write("bad.yaml", "model: [1, 2"))
        with self.assertRaises(ConfigError):
            self.parser.read_input(self.write("list.json", "[1, 2, 3]"))

    def test_unknown_keys(self):
        with self.assertRaises(ConfigError):
            self.parser.parse_config({"model": MODEL, "colour": "red"})
        with self.assertRaises(ConfigError):
            self.parser.parse_config({"model": dict(MODEL, kappa=1.0)})
        with self.assertRaises(ConfigError):
            self.parser.parse_config({"model": MODEL, "flow": {"p33": 1.0}})

    def test_incomplete_and_invalid_model(self):
        incomplete = {k: v for k, v in MODEL.items() if k != "C0"}
        with self.assertRaises(ConfigError):
            self.parser.parse_config({"model": incomplete})
        with self.assertRaises(ConfigError):
            self.parser.parse_config({"model": dict(MODEL, C0=float("nan"))})

    def test_shared_diophantine_block(self):
        config = self.parser.parse_config({"model": MODEL, "diophantine": {"d1": 0.02, "bound": 50}})
        self.assertEqual(set(config.diophantine), {0, 1, 2})
        self.assertEqual(config.diophantine[1].d1, 0.02)
        self.assertEqual(config.diophantine[2].bound, 50)

    def test_per_node_diophantine(self):
        config = self.parser.parse_config({"model": MODEL, "diophantine": {"1": {"d1": 0.05}}})
        self.assertEqual(list(config.diophantine), [1])
        self.assertEqual(config.diophantine[1].d1, 0.05)
        with self.assertRaises(ConfigError):
            self.parser.parse_config({"model": MODEL, "diophantine": {"3": {"d1": 0.05}}})

    def test_options(self):
        with self.assertRaises(ConfigError):
            self.parser.parse_config({"model": MODEL, "options": {"plot": {}}})
        with self.assertRaises(ConfigError):
            self.parser.parse_config({"model": MODEL, "options": {"switch": {"depth": 3}}})
        with self.assertRaises(ConfigError):
            self.parser.parse_config({"model": MODEL, "options": {"switch": [1, 2]}})

    def test_seed_and_tol_types(self):
        with self.assertRaises(ConfigError):
            self.parser.parse_config({"model": MODEL, "seed": "zero"})
        with self.assertRaises(ConfigError):
            self.parser.parse_config({"model": MODEL, "seed": True})
        with self.assertRaises(ConfigError):
            self.parser.parse_config({"model": MODEL, "tol": "small"})

    def test_to_dict_reloads(self):
        config = self.parser.get_default_config()
        again = self.parser.parse_config(json.loads(json.dumps(config.to_dict())))
        self.assertEqual(again.model, config.model)
        self.assertEqual(again.flow, config.flow)
        self.assertEqual(again.options, config.options)


class TestValidateConfig(unittest.TestCase):
    """Test the logged validation of a parsed configuration"""

    def setUp(self):
        self.parser = InputParser()

    def test_preset_is_valid(self):
        self.assertTrue(self.parser.validate_config(self.parser.get_default_config()))

    def test_resonant_rates_rejected(self):
        config = self.parser.parse_config({"model": dict(MODEL, C0=2.0)})
        with self.assertLogs(level="ERROR"):
            self.assertFalse(self.parser.validate_config(config))

    def test_flow_conditions_rejected(self):
        config = self.parser.parse_config({"model": MODEL, "flow": {"p12": -3.0}})
        with self.assertLogs(level="ERROR") as logs:
            self.assertFalse(self.parser.validate_config(config))
        self.assertTrue(any("Flow coefficients" in line for line in logs.output))

    def test_negative_seed_rejected(self):
        config = self.parser.parse_config({"model": MODEL, "seed": -1})
        with self.assertLogs(level="ERROR"):
            self.assertFalse(self.parser.validate_config(config))


if __name__ == '__main__':
    unittest.main()
