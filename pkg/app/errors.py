"""
Exception hierarchy for the simulator.

Library code raises these; the CLI and API translate them into exit codes and
JSON error payloads.
"""
from typing import Optional


class SimulationError(RuntimeError):
    """Base class for every error raised by the simulator."""


class LinearityError(SimulationError):
    """A two-qubit operation was applied to non-adjacent line positions."""


class CircuitError(SimulationError):
    """A circuit could not be constructed or combined."""


class CircuitParseError(CircuitError):
    """Canonical circuit text could not be parsed."""

    def __init__(self, message: str, line: int, column: int, location_id: Optional[int] = None):
        self.line = line
        self.column = column
        self.location_id = location_id
        where = f"line {line}, column {column}"
        if location_id is not None:
            where += f", location {location_id}"
        super().__init__(f"{where}: {message}")


class DecoderInconsistencyError(SimulationError):
    """Odd syndrome observed while every candidate bin is empty."""


class ResourceLimitError(SimulationError):
    """Requested construction exceeds the configured size limits."""


class AnalysisError(SimulationError):
    """Failure-rate tables or curves are incomplete or inconsistent."""
