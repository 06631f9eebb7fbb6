"""Exceptions raised by qfwalk.

Every error is a ``ValueError`` so callers that only guard against bad values keep working.
"""

from typing import Optional


class QfwalkError(ValueError):
    """Base class for all qfwalk errors."""


class InvalidInputError(QfwalkError):
    """Shape, dimension, finiteness or positivity violation."""


class InvalidTripleError(QfwalkError):
    """A (V, C, P) triple that does not parameterise a symplectic operator."""


class InvalidGeneratorError(QfwalkError):
    """Generator data violating a structure relation."""


class NotFaithfulError(QfwalkError):
    """A density matrix with a zero eigenvalue."""


class ClusteringError(QfwalkError):
    """Eigenvalue clusters that cannot be separated at the requested tolerance."""


class HypothesisError(QfwalkError):
    """The interaction Hamiltonian has a diagonal block in the state's eigenbasis."""

    def __init__(self, message: str, alpha: Optional[int] = None):
        super().__init__(message)
        self.alpha = alpha


class ConfigError(QfwalkError):
    """Malformed experiment configuration."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field
