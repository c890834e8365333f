class ReactError(Exception):
    """Base class for errors raised by reactrisk."""


class ConfigurationError(ReactError):
    """Invalid or inconsistent configuration (grid cap, unknown keys, bad values)."""


class InputError(ReactError):
    """Malformed or missing input data (trace files, labels, ids)."""


class CalibrationError(ConfigurationError):
    """The calibration scene produced no usable reference energy."""
