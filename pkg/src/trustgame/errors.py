"""Exception types raised by trustgame."""


class TrustGameError(Exception):
    """Base class for all package errors."""


class DegenerateDirection(TrustGameError, ValueError):
    """A direction vector (or a line's two defining points) is numerically zero."""


class AlphaSaturated(TrustGameError, ValueError):
    """The attacker best response was requested at a fusion weight of (nearly) one."""


class SamplingExhausted(TrustGameError, RuntimeError):
    """Rejection sampling could not find a non-trivial initial condition."""


class DegenerateGame(TrustGameError, ValueError):
    """The sensor estimate coincides with the attacker-side mean."""


class PreconditionViolated(TrustGameError, ValueError):
    pass


class ParamsMismatch(TrustGameError, ValueError):
    """An equal-means routine was called with distinct means."""


class ConfigError(TrustGameError, ValueError):
    """Malformed or inconsistent JSON configuration."""
