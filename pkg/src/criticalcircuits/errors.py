"""Exception types shared across the package."""


class NonSquare(ValueError):
    """Matrix argument is not square."""


class TooLarge(ValueError):
    """Problem size exceeds the supported range."""


class NotHermitian(ValueError):
    """Matrix expected to be Hermitian is not."""


class NotUnitary(ValueError):
    """Matrix expected to be unitary is not."""


class ConvergenceFailure(RuntimeError):
    """Eigendecomposition failed to reach the residual bound."""


class DegenerateDominantEigenvalue(RuntimeError):
    """Top two eigenvalue moduli are too close to separate reliably."""


class EchoTooSmall(RuntimeError):
    """Echo probability too small for a reliable rescaled ratio."""


class PostselectionStarved(RuntimeError):
    """Conditioned event has too few effective shots."""


class NotConverged(RuntimeError):
    """Optimization stopped above tolerance; carries the best found value."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class SingularConfusion(ValueError):
    """Confusion matrix is not invertible."""


class IncompleteBasis(ValueError):
    """Calibration preparations do not cover the full basis."""


class InvalidDistribution(ValueError):
    """Probability vector is malformed."""


class DimensionMismatch(ValueError):
    """Array dimensions are inconsistent."""


class ConfigError(ValueError):
    """Run configuration is invalid or incomplete."""
