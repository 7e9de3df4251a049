"""Exception hierarchy."""


class SyzcertError(Exception):
    """Base class for all library errors."""


class InvalidClassError(SyzcertError, ValueError):
    pass


class DomainError(SyzcertError, ValueError):
    pass


class HypothesisError(SyzcertError):
    """A precondition the mathematics relies on does not hold."""


class ConfigurationError(SyzcertError, ValueError):
    pass


class InvalidPolarizationError(SyzcertError, ValueError):
    pass


class DegenerateError(SyzcertError):
    pass


class UnsupportedError(SyzcertError):
    pass


class InternalConsistencyError(SyzcertError, AssertionError):
    """An enumeration produced something outside its own contract."""
