"""
Error hierarchy for frontlab.

Every exception carries the process exit code the CLI maps it to:
2 for invalid input (config, spec validation, preconditions), 3 for
numerical failures.
"""

from __future__ import annotations


class FrontLabError(Exception):
    exit_code = 3


# --- invalid input (exit 2) ---

class ConfigError(FrontLabError, ValueError):
    exit_code = 2


class ParameterError(ConfigError):
    pass


class ValidationError(FrontLabError, ValueError):
    exit_code = 2

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class NonFiniteEvaluation(ValidationError):
    pass


class PreconditionError(FrontLabError, ValueError):
    exit_code = 2


class DomainError(PreconditionError):
    pass


class RegimeError(PreconditionError):
    pass


class GridError(PreconditionError):
    pass


class BranchCutError(PreconditionError):
    pass


# --- numerical failures (exit 3) ---

class NumericalError(FrontLabError, RuntimeError):
    exit_code = 3


class QuadratureFailure(NumericalError):
    pass


class NoFoldFound(NumericalError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ContinuationStall(NumericalError):
    pass


class OrderingBreakdown(NumericalError):
    pass


class NearMinusTwo(NumericalError):
    pass


class StiffnessFailure(NumericalError):
    pass


class PrecisionLoss(NumericalError):
    pass


class ContourTooCoarse(NumericalError):
    pass


class SolverFailure(NumericalError):
    pass
