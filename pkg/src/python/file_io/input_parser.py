"""Run configuration parser for heteronet"""

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Mapping

import yaml

from ..core.constants import DEFAULT_INTEGRATION_TOL
from ..core.errors import ConfigError, HeteronetError
from ..core.model import DiophantineConfig, ModelParams, validate_hypotheses
from ..models.flow import HHCoefficients

PRESET = Path(__file__).resolve().parent.parent / "config" / "preset_irrational.json"

TOP_LEVEL_KEYS = {"model", "flow", "diophantine", "options", "output_dir", "seed", "tol"}

OPTION_KEYS = {
    "validate": set(),
    "return-map": {"gamma", "samples"},
    "spirals": {"profile", "slices", "gaps", "rays"},
    "connections": {"gamma", "n_range", "sheet", "rays"},
    "horseshoe": {"gamma", "n_range", "grid", "cover_depth", "relate"},
    "switch": {"gamma", "n", "word", "all_words", "past"},
    "flow": {"scenario", "samples", "t_end", "gamma", "node"},
}


@dataclass
class RunConfig:
    """Everything a command needs; fully determines its outputs together with the seed"""
    model: ModelParams
    flow: HHCoefficients = field(default_factory=HHCoefficients)
    diophantine: Dict[int, DiophantineConfig] = field(default_factory=dict)
    options: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    output_dir: str = "output"
    seed: int = 0
    tol: float = DEFAULT_INTEGRATION_TOL

    def command_options(self, command: str) -> Dict[str, Any]:
        return dict(self.options.get(command, {}))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model.to_dict(),
            "flow": self.flow.to_dict(),
            "diophantine": {str(node): asdict(cfg) for node, cfg in sorted(self.diophantine.items())},
            "options": self.options,
            "output_dir": self.output_dir,
            "seed": self.seed,
            "tol": self.tol,
        }


def _build(cls, data: Mapping[str, Any], where: str):
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where} must be a mapping, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigError(f"incomplete {where}: {e}") from e
    except HeteronetError as e:
        raise ConfigError(f"invalid {where}: {e}") from e


class InputParser:
    """Parser for heteronet run configurations (JSON or YAML)"""

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def read_input(self, filename: str) -> RunConfig:
        """
        Read a run configuration from file.

        Args:
            filename: Path to a .json, .yaml or .yml file

        Returns:
            RunConfig with parsed values

        Raises:
            FileNotFoundError: the file does not exist
            ConfigError: unsupported suffix, malformed document or unknown keys
        """
        file_path = Path(filename)

        if not file_path.exists():
            raise FileNotFoundError(f"Input file not found: {filename}")

        if file_path.suffix == '.json':
            data = self._read_json_input(file_path)
        elif file_path.suffix in ('.yaml', '.yml'):
            data = self._read_yaml_input(file_path)
        else:
            raise ConfigError(f"unsupported config format: {file_path.suffix or file_path.name}")

        return self.parse_config(data)

    def _read_json_input(self, file_path: Path) -> Dict[str, Any]:
        try:
            with open(file_path, 'r') as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed JSON in {file_path}: {e}") from e

    def _read_yaml_input(self, file_path: Path) -> Dict[str, Any]:
        try:
            with open(file_path, 'r') as f:
                return yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"malformed YAML in {file_path}: {e}") from e

    def parse_config(self, data: Mapping[str, Any]) -> RunConfig:
        """
        Build a RunConfig from a parsed document.

        A document without a "model" key is read as bare model parameters.
        """
        if not isinstance(data, Mapping):
            raise ConfigError("config document must be a mapping")
        if "model" not in data:
            return RunConfig(model=_build(ModelParams, data, "model"))

        unknown = sorted(set(data) - TOP_LEVEL_KEYS)
        if unknown:
            raise ConfigError(f"unknown key(s) in config: {', '.join(unknown)}")

        config = RunConfig(model=_build(ModelParams, data["model"], "model"))
        if "flow" in data:
            config.flow = _build(HHCoefficients, data["flow"], "flow")
        if "diophantine" in data:
            config.diophantine = self._parse_diophantine(data["diophantine"])
        if "options" in data:
            config.options = self._parse_options(data["options"])
        if "output_dir" in data:
            config.output_dir = str(data["output_dir"])
        if "seed" in data:
            if not isinstance(data["seed"], int) or isinstance(data["seed"], bool):
                raise ConfigError(f"seed must be an integer, got {data['seed']!r}")
            config.seed = data["seed"]
        if "tol" in data:
            if not isinstance(data["tol"], (int, float)) or isinstance(data["tol"], bool):
                raise ConfigError(f"tol must be a number, got {data['tol']!r}")
            config.tol = float(data["tol"])
        return config

    def _parse_diophantine(self, data: Mapping[str, Any]) -> Dict[int, DiophantineConfig]:
        if not isinstance(data, Mapping):
            raise ConfigError("diophantine must be a mapping")
        # one block for every node, or one block per node "0", "1", "2"
        if set(data) <= {"d1", "d2", "bound"}:
            shared = _build(DiophantineConfig, data, "diophantine")
            return {node: shared for node in range(3)}
        configs = {}
        for key, block in data.items():
            if str(key) not in ("0", "1", "2"):
                raise ConfigError(f"unknown key in diophantine: {key}")
            configs[int(key)] = _build(DiophantineConfig, block, f"diophantine.{key}")
        return configs

    def _parse_options(self, data: Mapping[str, Any]) -> Dict[str, Dict[str, Any]]:
        if not isinstance(data, Mapping):
            raise ConfigError("options must be a mapping")
        options = {}
        for command, block in data.items():
            if command not in OPTION_KEYS:
                raise ConfigError(f"unknown command in options: {command}")
            if not isinstance(block, Mapping):
                raise ConfigError(f"options.{command} must be a mapping")
            unknown = sorted(set(block) - OPTION_KEYS[command])
            if unknown:
                raise ConfigError(f"unknown key(s) in options.{command}: {', '.join(unknown)}")
            options[command] = dict(block)
        return options

    def validate_config(self, config: RunConfig) -> bool:
        """
        Validate a run configuration.

        Args:
            config: RunConfig to validate

        Returns:
            True if valid, False otherwise
        """
        valid = True

        for problem in config.model.invariant_violations():
            self.logger.error(problem)
            valid = False

        report = validate_hypotheses(config.model, config.diophantine or None)
        for name, verdict in report.hypotheses.items():
            if not verdict.passed:
                self.logger.error(f"Hypothesis {name} fails: {verdict.witness}")
                valid = False

        for problem in config.flow.condition_violations():
            self.logger.error(f"Flow coefficients: {problem}")
            valid = False

        if config.seed < 0:
            self.logger.error("Seed must be nonnegative")
            valid = False

        return valid

    def get_default_config(self) -> RunConfig:
        """Get the shipped irrational preset"""
        return self.read_input(str(PRESET))
