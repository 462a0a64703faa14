"""Exception types raised across the package."""


class RtMotError(Exception):
    """Base class for all rtmot errors."""


class DegenerateState(RtMotError, ValueError):
    """A state cannot be turned into a valid box (non-positive area or ratio)."""


class ParseError(RtMotError, ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ConfigError(RtMotError, ValueError):
    """Invalid tracker, cost, sweep or sequence configuration."""


class OutOfOrderFrame(RtMotError, ValueError):
    """Frame indices fed to a tracker must strictly increase."""


class EmptyGroundTruth(RtMotError, ValueError):
    """MOTA is undefined without any ground-truth boxes."""
