"""Exception types shared across the simulator."""


class QuadsimError(Exception):
    """Base class for all simulator errors."""


class NonFiniteState(QuadsimError):
    """A physics step produced NaN/inf components.

    Carries the offending batch state and a per-agent boolean mask so the
    caller can reset only the agents that blew up.
    """

    def __init__(self, state, mask):
        self.state = state
        self.mask = mask
        bad = [int(i) for i in mask.nonzero()[0]] if hasattr(mask, "nonzero") else mask
        super().__init__(f"non-finite state components for agents {bad}")


class EmptyScene(QuadsimError):
    """Spatial query against a scene with no objects."""


class ParseError(QuadsimError):
    """Malformed mesh or config file; message carries line diagnostics."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        loc = ""
        if path is not None:
            loc += str(path)
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)


class ConfigError(QuadsimError):
    """Invalid or unknown configuration key/value."""


class SpawnFailure(QuadsimError):
    """Initial-condition sampling could not satisfy the clearance constraint."""


class NotReset(QuadsimError):
    """step() called before reset()."""


class ActionShapeMismatch(QuadsimError):
    """Action batch does not match the configured agent count."""


class InvalidNoiseForSensor(QuadsimError):
    """Noise kind is not defined for the given sensor data type."""


class DegenerateAttitude(QuadsimError):
    """Commanded acceleration cancels gravity; no attitude is defined."""
