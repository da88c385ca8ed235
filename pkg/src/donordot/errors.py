"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so error classes carry enough
context (offending key, failing grid cell) for a single-line diagnosis.
"""


class DonordotError(Exception):
    """Base class for all package errors."""


class ConfigError(DonordotError):
    """Invalid device or sweep configuration (schema violation, bad value)."""

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f"key '{key}': {message}"
        super().__init__(message)


class StateSpaceError(ConfigError):
    """Occupancy windows enumerate more states than the configured cap."""


class SolverError(DonordotError):
    """Steady-state solve failed (singular or disconnected rate matrix)."""

    def __init__(self, message, grid_index=None, axis_values=None):
        self.grid_index = grid_index
        self.axis_values = axis_values
        if grid_index is not None:
            message = f"{message} [cell {grid_index}"
            if axis_values is not None:
                message += " at " + ", ".join(f"{v:g}" for v in axis_values)
            message += "]"
        super().__init__(message)


class MapFormatError(DonordotError):
    """A map file could not be parsed back into a sweep result."""


class ExtractionError(DonordotError):
    """Parameter extraction failed (no peaks, no vertex, bad map kind)."""
