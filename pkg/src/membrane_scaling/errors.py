"""
Error types raised by the membrane lab.

Every error derives from ValueError so callers that only care about
"bad input" can keep catching that.
"""
from pathlib import Path
from typing import Optional


class MembraneError(ValueError):
    """Base class for all lab errors."""


class AdmissibilityError(MembraneError):
    """Field violates the box or mean constraint of the admissible set."""


class ResolutionError(MembraneError):
    """Grid too coarse for the requested profile."""


class DegenerateParametersError(MembraneError):
    """Parameters for which the requested quantity does not exist."""


class WellError(MembraneError):
    """Unknown or broken double-well potential."""


class ReportError(MembraneError):
    """Output could not be written."""


class InvariantViolation(MembraneError):
    """A proven bound failed numerically; this is a solver bug."""


class ConfigError(MembraneError):
    """Invalid sweep configuration."""

    def __init__(
        self,
        message: str,
        path: Optional[Path] = None,
        key: Optional[str] = None,
        line: Optional[int] = None,
    ):
        self.path = path
        self.key = key
        self.line = line
        location = ""
        if path is not None:
            location = str(path)
            if line is not None:
                location += f":{line}"
            location += ": "
        if key is not None:
            location += f"{key}: "
        super().__init__(location + message)
