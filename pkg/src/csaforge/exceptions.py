"""Custom exception classes for csaforge."""

from collections.abc import Mapping
from typing import Any


class CsaForgeError(Exception):
    """Base exception class for all csaforge errors."""

    def __init__(self, message: str, *, context: Mapping[str, Any] | None = None):
        """Initializes the base exception.

        Args:
            message: The error message.
            context: Optional mapping with the offending values (qubits, layer
                index, parameters) for diagnostics.
        """
        super().__init__(message)
        self.message = message
        self.context = dict(context) if context else {}

    def __str__(self) -> str:
        if self.context:
            details = ", ".join(f"{k}={v!r}" for k, v in self.context.items())
            return f"{self.message} ({details})"
        return self.message


class CircuitError(CsaForgeError):
    """Represents a malformed gate, layer or circuit."""

    # No additional methods needed currently


class GateArityError(CircuitError):
    """A gate was given the wrong number of qubits or a misplaced record slot."""


class ConcurrencyViolation(CircuitError):
    """Two gates of one layer act on a common qubit."""


class TimestepKindViolation(CircuitError):
    """A layer mixes Teleport gates with intra-module gates."""


class AdjacencyError(CircuitError):
    """A builder was asked to interact qubits that are not nearest neighbors."""


class ParameterDomainError(CsaForgeError):
    """Represents a parameter outside the domain of a builder or formula.

    Raised for bit-lengths that are too small, chain lengths below the
    minimum and similar precondition failures.
    """

    # No additional methods needed currently


class UnsupportedLength(ParameterDomainError):
    """A communication primitive was requested for a length it is not defined on."""


class ModulusError(ParameterDomainError):
    """The modulus is even or outside the n-bit range."""


class SimulationError(CsaForgeError):
    """Represents a failure while simulating a circuit."""

    # No additional methods needed currently


class ImpossibleOutcome(SimulationError):
    """A forced measurement outcome has zero probability."""


class NotSeparable(SimulationError):
    """The requested qubit subset is entangled with the rest of the register."""


class SparsityExceeded(SimulationError):
    """The amplitude collection grew beyond the configured cap."""


class UnregisteredSemantic(SimulationError):
    """A hierarchical block has no registered classical semantic."""


class SchemaError(CsaForgeError):
    """Represents a malformed circuit file."""

    # No additional methods needed currently


class SchemaVersionError(SchemaError):
    """The circuit file declares an unsupported major schema version."""


class ConfigurationError(CsaForgeError):
    """Represents an error in the library's configuration."""

    def __init__(self, message: str):
        super().__init__(message, context=None)
