"""Exception types used across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(ToolkitError):
    """An argument value lies outside its documented domain."""


class IntegrityError(ToolkitError):
    """Inputs are individually valid but mutually inconsistent."""


class ConfigurationError(ToolkitError):
    """A configuration file or lookup key is missing or malformed."""


class UndefinedMetricError(ToolkitError):
    """The requested metric is undefined for the given inputs."""


class FormatError(ToolkitError):
    """A file does not conform to its expected on-disk format."""
