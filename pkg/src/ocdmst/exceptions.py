"""Exception hierarchy shared by the library and the command line."""


class OcdmstError(Exception):
    """Base class for every error raised by this package."""


class InputError(OcdmstError, ValueError):
    """Malformed arguments: shape mismatches, empty inputs, bad indices."""


class DegenerateRangeError(InputError):
    """Feature range collapses to a single value, so sigma cannot be normalized."""


class ConfigurationError(OcdmstError, ValueError):
    """A classifier or protocol configuration that cannot be satisfied by the data."""


class DataError(OcdmstError):
    """A dataset file that cannot be parsed or fails its declared shape."""
