"""Errors raised by the simulated control system."""


class SimError(Exception):
    """Base class for simulator errors. `code` is the wire-protocol error name."""

    code = "SimError"


class UnknownAddress(SimError):
    code = "UnknownAddress"


class ReadOnly(SimError):
    code = "ReadOnly"


class OutOfLimits(SimError):
    code = "OutOfLimits"


class InvalidValue(SimError):
    code = "InvalidValue"


class NegativeDt(SimError):
    code = "NegativeDt"


class Busy(SimError):
    code = "Busy"


class NotAMagnet(SimError):
    code = "NotAMagnet"


class MalformedPattern(SimError):
    code = "MalformedPattern"


class MalformedAddress(SimError):
    code = "MalformedAddress"
