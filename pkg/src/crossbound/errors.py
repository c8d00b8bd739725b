"""Exception types shared across the package."""


class CrossboundError(Exception):
    """Base class for all crossbound errors."""


class InvalidParameter(CrossboundError):
    """A constructor or operation received an out-of-range parameter."""


class DomainViolation(CrossboundError):
    """An evaluation point lies outside the permitted (open) domain."""


class UnsupportedSide(CrossboundError):
    """The requested tail side is not defined for this log-MGF bound."""


class MonotonicityViolation(CrossboundError):
    """phi(s)/|s| failed the monotonicity probe required for slope roots."""


class NotUnimodal(CrossboundError):
    """The scalar minimizer detected a lower value outside its bracket."""


class InvalidSpec(CrossboundError):
    """A process specification is malformed."""


class EmptyPath(CrossboundError):
    """A path with no grid points was passed where samples are required."""


class ConfigError(CrossboundError):
    """CLI configuration is malformed (unknown or missing keys)."""
