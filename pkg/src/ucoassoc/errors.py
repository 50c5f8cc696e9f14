"""Exception classes shared across the package.

The CLI prints ``<class name>: <message>`` on failure, so class names are
part of the machine-readable surface.
"""


class UcoError(Exception):
    """Base class for all package errors."""


class ConfigError(UcoError):
    """Invalid or inconsistent configuration."""


class KeplerConvergenceError(UcoError):
    """Kepler equation solver failed to converge within the iteration cap."""


class VisibilityError(UcoError):
    """Target below the sensor elevation mask; caller should resample."""


class SamplingExhaustedError(UcoError):
    """Not enough distinct observation pairs to satisfy a sampling request."""


class ShapeError(UcoError):
    """Array dimensions do not match the declared contract."""


class StateError(UcoError):
    """Operation called in the wrong model state (mode or missing cache)."""


class TrainingDivergenceError(UcoError):
    """Loss or gradients became non-finite during training."""


class FormatError(UcoError):
    """Persisted file has a bad magic, version, or is truncated."""


class EvalModeError(UcoError):
    """Evaluation-only operation invoked without the data it needs."""
