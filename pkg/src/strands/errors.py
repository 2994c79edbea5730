"""Failure modes shared across the package.

Every error here corresponds to a condition the caller can reason about:
bad input shape, a column with no variance, a penalty grid that cannot be
built, an ensemble that never produced a usable sub-fit, and so on.
"""


class DimensionMismatch(ValueError):
    """Shapes of predictors and response disagree."""


class ConstantColumn(ValueError):
    """A predictor column has zero variance and cannot be standardized."""

    def __init__(self, column, label=None):
        self.column = column
        name = label if label is not None else f"column {column}"
        super().__init__(f"{name} is constant (zero variance)")


class DegenerateGrid(ValueError):
    """No valid lambda grid exists (e.g. X'y = 0, or all adaptive weights infinite)."""


class NonConvergence(RuntimeError):
    """Coordinate descent exhausted its sweep budget before meeting tolerance."""

    def __init__(self, max_sweeps, lam=None):
        self.max_sweeps = max_sweeps
        self.lam = lam
        at = f" at lambda={lam:g}" if lam is not None else ""
        super().__init__(f"coordinate descent did not converge within {max_sweeps} sweeps{at}")


class EmptyEnsemble(RuntimeError):
    """Every ensemble iteration produced an empty candidate set."""


class DegenerateWeights(ValueError):
    """Sampling weights carry no mass where mass is required."""


class DegenerateBootstrap(RuntimeError):
    """Bootstrap redraws kept producing constant columns."""


class UnknownScenario(ValueError):
    """Scenario name is not one of the built-in simulation designs."""
