"""Exception types shared across the solver stack."""


class SolverError(Exception):
    """Base class for numerical-failure exceptions."""


class NonConvergence(SolverError):
    """An inner elliptic solve missed its residual target.

    Attributes:
        iterations: iterations performed before giving up.
        residual: final (relative) residual.
        step: time-step index when raised inside a marching solver, else None.
    """

    def __init__(self, iterations, residual, step=None, context=""):
        self.iterations = iterations
        self.residual = residual
        self.step = step
        msg = f"elliptic solve did not converge: {iterations} iterations, residual {residual:.3e}"
        if step is not None:
            msg += f" (time step {step})"
        if context:
            msg += f" [{context}]"
        super().__init__(msg)


class IncompatibleRHS(SolverError):
    """Neumann Poisson right-hand side has a non-removable mean component."""

    def __init__(self, mean, bound):
        self.mean = mean
        self.bound = bound
        super().__init__(
            f"Neumann solvability violated: |mean(rhs)| = {abs(mean):.3e} exceeds {bound:.3e}"
        )


class DivergenceResidualExceeded(SolverError):
    """Post-projection divergence residual breached its threshold."""

    def __init__(self, step, residual, threshold):
        self.step = step
        self.residual = residual
        self.threshold = threshold
        super().__init__(
            f"divergence residual {residual:.3e} exceeds {threshold:.3e} at step {step}"
        )


class BlowUp(SolverError):
    """A field max-norm crossed the blow-up cap; reported instead of overflowing."""

    def __init__(self, step, max_norm=None):
        self.step = step
        self.max_norm = max_norm
        msg = f"field blow-up detected at step {step}"
        if max_norm is not None:
            msg += f" (max-norm {max_norm:.3e})"
        super().__init__(msg)


class NoConvergence(SolverError):
    """Picard sweeps stopped contracting within the sweep budget.

    Carries the full trace so callers can inspect the DH history; typically a
    sign the time horizon is too large for the sweep map to contract.
    """

    def __init__(self, trace, message="Picard iteration did not converge"):
        self.trace = trace
        super().__init__(f"{message} after {trace.sweeps_used} sweeps")


class InvalidScenario(ValueError):
    """Unknown scenario id or inconsistent scenario parameters."""


class TraceIncompatibility(ValueError):
    """Initial data disagrees with prescribed boundary data on boundary nodes."""

    def __init__(self, mismatch, tolerance, what="field"):
        self.mismatch = mismatch
        self.tolerance = tolerance
        super().__init__(
            f"{what}: boundary trace mismatch {mismatch:.3e} exceeds {tolerance:.3e}"
        )


class ConfigError(ValueError):
    """Run configuration could not be parsed or validated."""
