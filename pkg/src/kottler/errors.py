"""Shared exception types for solver aborts and violated hypotheses."""

__all__ = ["SolverFailure", "HypothesisViolation", "ConfigError"]


class SolverFailure(RuntimeError):
    """A numerical solve became untrustworthy (bound violated, NaN, degenerate map)."""


class HypothesisViolation(ValueError):
    """Input data violates a hypothesis of the underlying theorems (reported by name)."""


class ConfigError(ValueError):
    """A run configuration is malformed; the message names the offending field."""
