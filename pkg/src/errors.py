"""Exceptions shared across the solver, oracle and simulation layers."""

from typing import Optional


class SwiptError(Exception):
    """Base class for every error raised by this package."""
    pass


class InfeasibleRateError(SwiptError):
    """The rate requirement cannot be met under the given constraints."""

    def __init__(self, rate_req: float, max_rate: float, context: str = ""):
        self.rate_req = rate_req
        self.max_rate = max_rate
        self.context = context
        where = f" ({context})" if context else ""
        super().__init__(
            f"Rate requirement {rate_req:.6g} bps/Hz exceeds the maximum "
            f"attainable {max_rate:.6g} bps/Hz{where}"
        )


class EbInfeasibleError(InfeasibleRateError):
    """Energy beamforming cannot reach the rate; the SM branch must be used."""
    pass


class EigensolverError(SwiptError):
    """Jacobi iteration hit its sweep cap before the off-diagonal norm vanished."""

    def __init__(self, residual: float, sweeps: int):
        self.residual = residual
        self.sweeps = sweeps
        super().__init__(
            f"Jacobi eigensolver did not converge after {sweeps} sweeps "
            f"(relative off-diagonal norm {residual:.3e})"
        )


class DimensionMismatchError(SwiptError, ValueError):
    """Covariance and decomposition disagree on shape."""
    pass


class OracleSizeError(SwiptError):
    """Exhaustive grid search requested for too many eigenchannels."""
    pass


class KktToleranceError(SwiptError):
    """A solution failed the KKT acceptance threshold in strict mode."""

    def __init__(self, residual: float, threshold: float, branch: Optional[str] = None):
        self.residual = residual
        self.threshold = threshold
        self.branch = branch
        super().__init__(
            f"KKT residual {residual:.3e} above {threshold:.1e}"
            + (f" on {branch} branch" if branch else "")
        )


class ConfigError(SwiptError):
    """Configuration file missing, unreadable or invalid."""
    pass
