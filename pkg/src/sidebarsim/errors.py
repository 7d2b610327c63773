"""Exception types shared across the simulator."""


class ConfigurationError(Exception):
    """A model, layer, or configuration parameter is missing or inconsistent."""


class UsageError(Exception):
    """A request-level input is invalid (unknown scenario, activation, mode)."""


class SimulationError(Exception):
    """The simulation reached an invalid state (correctness failure)."""


class ProtocolError(SimulationError):
    """Base class for shared-buffer protocol violations."""


class NotOwnerError(ProtocolError):
    """A party touched the buffer without holding ownership."""


class OutOfBoundsError(ProtocolError):
    """A buffer access fell outside the mapped capacity."""


class UnknownFunctionError(ProtocolError):
    """An invocation named a function id absent from the table."""


class FenceViolationError(ProtocolError):
    """A data write completed after the flag that publishes it."""


class FlagNotRaisedError(ProtocolError):
    """The host tried to service an invocation with the flag low."""


class CapacityExceededError(ProtocolError):
    """A staged payload does not fit the buffer data region."""


class NoFeasiblePointError(Exception):
    """The calibration search exhausted its grid with no config in band."""
