"""Config source port (interface).

Scenario and sweep definitions arrive as parsed JSON objects. Adapters read
them from wherever they live and classify what went wrong, so the CLI can tell
an unreadable file from a malformed one.
"""

from collections.abc import Mapping
from typing import Any, Protocol

from cave_sim.domain.types import BoundaryResult


class ConfigSource(Protocol):
    """Protocol for reading one JSON object.

    Examples:
        >>> from result import Ok
        >>>
        >>> class Inline:
        ...     def read(self):
        ...         return Ok({"duration": 1.0})
        >>>
        >>> source: ConfigSource = Inline()
        >>> source.read().ok_value["duration"]
        1.0
    """

    def read(self) -> BoundaryResult[Mapping[str, Any]]:
        """Read the object.

        Returns:
            Ok(mapping), Err(Failure(IO, ...)) when the source cannot be read,
            Err(Failure(INVALID, ...)) when it is not a JSON object

        Note:
            Should not raise exceptions - all errors are returned as Err.
        """
        ...
