"""Exception hierarchy shared by every viewmix module."""


class ViewMixError(Exception):
    """Base class for all errors raised by viewmix."""


class ParameterError(ViewMixError, ValueError):
    """An argument or configuration value is out of its valid range."""


class ShapeError(ViewMixError, ValueError):
    """Images, masks or views do not share the required geometry."""


class FormatError(ViewMixError, ValueError):
    """An input file does not follow its documented binary layout."""


class ConfigError(ViewMixError, ValueError):
    """A configuration file or override is malformed or has unknown keys."""
