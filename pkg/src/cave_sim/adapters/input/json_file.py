"""JSON file reading adapter.

This module implements the ConfigSource protocol for JSON files and turns
their contents into scenario and sweep definitions. File errors and format
errors are kept apart so the CLI can map them to different exit codes.
"""

import json
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from result import Err, Ok

from cave_sim.domain.config import ScenarioConfig, scenario_from_mapping
from cave_sim.domain.sweep import SweepSpec, sweep_from_mapping
from cave_sim.domain.types import BoundaryResult, Failure, FailureKind
from cave_sim.ports.config_source import ConfigSource
from cave_sim.utils.railway import bind, map_error


def _invalid(message: str) -> Failure:
    return Failure(FailureKind.INVALID, message)


@dataclass(frozen=True, slots=True)
class JsonFileSource:
    """Adapter reading one JSON object from a file.

    Handles common file errors:
    - File not found
    - Permission denied
    - Path is a directory
    - Undecodable or malformed content

    Attributes:
        path: Path to the JSON file

    Examples:
        >>> source = JsonFileSource(Path("scenario.json"))
        >>> # source.read() -> Ok({...}) or Err(Failure(...))
    """

    path: Path

    def read(self) -> BoundaryResult[Mapping[str, Any]]:
        try:
            text = self.path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return Err(Failure(FailureKind.IO, f"File not found: {self.path}"))
        except PermissionError:
            return Err(Failure(FailureKind.IO, f"Permission denied: {self.path}"))
        except IsADirectoryError:
            return Err(Failure(FailureKind.IO, f"Is a directory: {self.path}"))
        except UnicodeDecodeError as e:
            return Err(_invalid(f"Encoding error in {self.path}: {e}"))
        except OSError as e:
            return Err(Failure(FailureKind.IO, f"Read error: {e}"))

        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            return Err(_invalid(f"{self.path}: invalid JSON: {e}"))
        if not isinstance(data, dict):
            return Err(_invalid(f"{self.path}: expected a JSON object, got {type(data).__name__}"))
        return Ok(data)


def load_scenario(source: ConfigSource) -> BoundaryResult[ScenarioConfig]:
    """Read and validate a scenario; every field is optional."""
    to_scenario = bind(lambda data: map_error(_invalid)(scenario_from_mapping(data)))
    return to_scenario(source.read())


def load_sweep(source: ConfigSource) -> BoundaryResult[SweepSpec]:
    """Read and validate a sweep definition."""
    to_sweep = bind(lambda data: map_error(_invalid)(sweep_from_mapping(data)))
    return to_sweep(source.read())
