"""Artifact writer for heteronet runs"""

import json
import logging
import zipfile
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List

import numpy as np
import pandas as pd

from ..core.sections import SectionPoint, points_to_frame
from ..utils.utilities import file_digest

INDEX_NAME = "index.json"
CONFIG_NAME = "config.json"


def _json_default(value: Any):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


class OutputWriter:
    """Writer for heteronet artifacts; every file written is listed in the run index"""

    def __init__(self, output_dir: str = None):
        self.logger = logging.getLogger(__name__)
        self.output_dir = Path(output_dir) if output_dir else Path("output")
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: List[Path] = []

    def _register(self, path: Path) -> Path:
        if path not in self.artifacts:
            self.artifacts.append(path)
        return path

    def write_json(self, name: str, data: Any) -> Path:
        """Write data as sorted, indented JSON"""
        output_file = self.output_dir / name
        with open(output_file, 'w') as f:
            json.dump(data, f, indent=2, sort_keys=True, default=_json_default)
            f.write("\n")
        self.logger.info(f"JSON written to: {output_file}")
        return self._register(output_file)

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        """Write a table with full float precision"""
        output_file = self.output_dir / name
        frame.to_csv(output_file, index=False, float_format="%.17g")
        self.logger.info(f"CSV written to: {output_file}")
        return self._register(output_file)

    def write_points(self, name: str, points: Iterable[SectionPoint]) -> Path:
        return self.write_csv(name, points_to_frame(points))

    def write_trajectory(self, stem: str, trajectory) -> List[Path]:
        """Samples as <stem>.csv (t, x1..x4) and events as <stem>_events.json"""
        return [
            self.write_csv(f"{stem}.csv", trajectory.to_frame()),
            self.write_json(f"{stem}_events.json", trajectory.events_to_list()),
        ]

    def write_config(self, config: Dict[str, Any]) -> Path:
        return self.write_json(CONFIG_NAME, config)

    def write_index(self, command: str, passed: bool, summary: Dict[str, Any] = None) -> Path:
        """
        Write index.json naming every artifact with its SHA-256 digest.

        The timestamp is the only field that changes between identical runs and is
        not part of any digest.
        """
        index = {
            "command": command,
            "pass": passed,
            "summary": summary or {},
            "artifacts": [
                {"file": path.name, "sha256": file_digest(path)}
                for path in sorted(self.artifacts, key=lambda p: p.name)
            ],
            "timestamp": datetime.now().isoformat(),
        }
        output_file = self.output_dir / INDEX_NAME
        with open(output_file, 'w') as f:
            json.dump(index, f, indent=2, sort_keys=True, default=_json_default)
            f.write("\n")
        self.logger.info(f"Run index written to: {output_file}")
        return output_file

    def bundle(self, name: str = "bundle.zip") -> Path:
        """Zip every artifact and the index for external plotting"""
        output_file = self.output_dir / name
        members = sorted(self.artifacts, key=lambda p: p.name)
        index = self.output_dir / INDEX_NAME
        if index.exists():
            members.append(index)
        with zipfile.ZipFile(output_file, 'w', compression=zipfile.ZIP_DEFLATED) as archive:
            for path in members:
                # fixed member dates keep the archive reproducible
                info = zipfile.ZipInfo(path.name, date_time=(1980, 1, 1, 0, 0, 0))
                info.compress_type = zipfile.ZIP_DEFLATED
                archive.writestr(info, path.read_bytes())
        self.logger.info(f"Plot bundle written to: {output_file}")
        return output_file
