"""Shared exception types."""

from __future__ import annotations


class ActNasError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(ActNasError):
    """Invalid configuration, missing input file, or malformed file content."""


class EstimatorError(ActNasError):
    """A cost estimator failed while benchmarking a candidate model."""

    def __init__(self, message: str, layer_index: int | None = None,
                 activation: object | None = None) -> None:
        super().__init__(message)
        self.layer_index = layer_index
        self.activation = activation


class NoFeasibleSolutionError(ActNasError):
    """No assignment satisfies the active budget constraint."""
