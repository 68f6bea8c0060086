"""Exception types shared across the flight stack and simulator."""


class TvcSimError(Exception):
    """Base class for all tvcsim errors."""


# --- attitude ---------------------------------------------------------------

class NonFiniteInput(TvcSimError):
    """An input contained NaN or Inf."""


class TooFewSamples(TvcSimError):
    """Bias calibration received fewer samples than the configured minimum."""


class MotionDetected(TvcSimError):
    """Gyro variance during calibration exceeded the stationarity threshold."""


# --- control / tuning -------------------------------------------------------

class NonPositiveInput(TvcSimError):
    """A strictly positive quantity was zero or negative."""


class NoSustainedOscillation(TvcSimError):
    """The closed loop decays even at the maximum proportional gain."""


class UnstableAtMinimum(TvcSimError):
    """The closed loop already diverges at the minimum proportional gain."""


# --- motor files ------------------------------------------------------------

class MotorFileError(TvcSimError):
    """Base class for RASP .eng parse failures."""


class MalformedHeader(MotorFileError):
    """Header line missing, incomplete, or with invalid field values."""


class NonMonotonicTime(MotorFileError):
    """Thrust sample times are not strictly increasing."""


class NegativeThrust(MotorFileError):
    """A thrust sample is negative."""


class MissingZeroTerminator(MotorFileError):
    """The curve does not end at zero thrust (or has no data points)."""


# --- dynamics ---------------------------------------------------------------

class NonFiniteState(TvcSimError):
    """Integration produced NaN or Inf (blow-up)."""


# --- telemetry --------------------------------------------------------------

class ColumnCountMismatch(TvcSimError):
    """A CSV line or header has the wrong number of columns."""


class UnparsableField(TvcSimError):
    """A CSV field could not be converted to its expected type."""


class EmptyWindow(TvcSimError):
    """No log records fall inside the metrics evaluation window."""


# --- configuration ----------------------------------------------------------

class ConfigInvalid(TvcSimError):
    """The run configuration failed validation."""
