"""Exception hierarchy.

Validation problems derive from ``ValueError`` and runtime/statistical
problems from ``RuntimeError`` so callers can catch either family without
importing this module.
"""


class FtlsimError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(FtlsimError, ValueError):
    """A value violates a type invariant or an operation precondition."""


class SingularGeometry(ValidationError):
    """leg_i == leg_s: both beam splitters work independently, no signal."""


class ReversedGeometry(ValidationError):
    """leg_i > leg_s: information would travel from the detector to BS2."""


class InvalidBoost(ValidationError):
    """|beta| >= 1."""


class NoParadoxError(ValidationError):
    """The signal speed does not exceed c, so no order-reversing frame exists."""


class ConfigurationError(ValidationError):
    """Hypothesis, geometry and schedule blocks are mutually inconsistent."""


class EstimationError(FtlsimError, RuntimeError):
    """A statistical estimate cannot be formed from the available data."""


class UndefinedRatioError(EstimationError):
    """p11 == 0: the device never delivers a sent signal."""


class UndefinedReliabilityError(EstimationError):
    """The mean Q0 count is zero, so R(V) has no denominator."""


class WindowError(EstimationError):
    """The probe window r/V does not fit inside the cycle."""
