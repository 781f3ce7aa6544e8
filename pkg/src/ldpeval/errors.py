"""Error taxonomy shared across modules.

The CLI maps these onto process exit codes: configuration problems exit 1,
data validation problems exit 2, provider failures exit 3.
"""

from __future__ import annotations


class ConfigError(Exception):
    """Bad or contradictory configuration."""


class DataValidationError(Exception):
    """Input records violate the domain invariants."""

    def __init__(self, message: str, problems: list[str] | None = None):
        super().__init__(message)
        self.problems = problems or []


class IntegrityError(DataValidationError):
    """Stored artifact bytes no longer match their recorded digest."""


class MissingRunError(DataValidationError):
    """The requested run directory does not exist."""


class ProviderError(Exception):
    """A remote model or embedding endpoint failed."""


class AuthenticationError(ProviderError):
    """The provider rejected our credentials; retrying will not help."""
