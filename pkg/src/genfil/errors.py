"""Exception types shared across the package."""


class GenfilError(Exception):
    """Base class for all genfil errors."""


class ResolutionError(GenfilError):
    """Two grid times with different resolutions were mixed."""


class TimeOrderError(GenfilError):
    """An operation required s <= t and got s > t."""


class EnumerationCapError(GenfilError):
    """A path space would exceed the configured bit cap."""


class NullPreservationError(GenfilError):
    """A map fails null-preservation; carries a witness outcome."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class MartingaleBoundError(GenfilError):
    """|mu - r| >= 2**(N/2) * sigma: no sibling weights in (0, 1) exist."""


class FactorizationError(GenfilError):
    """A one-step map does not factor through the plain restriction map."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ScenarioError(GenfilError):
    """A scenario document is malformed; carries the offending field path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
