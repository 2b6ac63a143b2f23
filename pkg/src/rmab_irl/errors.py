"""Exception types shared across the package."""


class RmabError(Exception):
    """Base class for all library errors."""


class ParameterError(RmabError, ValueError):
    """Invalid argument to a constructor or operation."""


class ValidationError(RmabError, ValueError):
    """Loaded or constructed data violates a structural invariant."""


class IngestionError(RmabError, ValueError):
    """Raw log data cannot be turned into transition estimates."""


class FeatureError(RmabError, KeyError):
    """A predicate or score references a feature that does not exist."""


class BracketingError(RmabError, RuntimeError):
    """Index bisection could not bracket a sign change."""


class SolverError(RmabError, RuntimeError):
    """A linear system or fixed-point solve failed."""


class DegenerateInputError(RmabError, ValueError):
    """Inputs are too extreme for a numerically meaningful answer."""


class SizeError(RmabError, ValueError):
    """A joint-MDP construction would exceed the configured size cap."""
