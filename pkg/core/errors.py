"""SIMULATOR ERRORS AND WARNINGS.

Every failure the pipeline can report derives from `QTRError`, so the
command-line front end can map numerical failures and configuration
problems to distinct exit codes. Warnings use their own categories so
callers (and tests) can filter or assert them.
"""

from typing import Optional

import numpy as np


class QTRError(Exception):
    """Base class of all simulator errors."""


class ConfigError(QTRError):
    """Invalid, unknown or missing configuration values."""


class SingularConfigurationError(QTRError):
    """Two or more ions occupy the same position."""


class ConvergenceError(QTRError):
    """The Newton minimizer ran out of iterations.

    Attributes:
        last_iterate: Coordinates at the final iteration.
        grad_norm: Max-norm of the gradient at the final iteration.
    """

    def __init__(self, message: str, last_iterate: np.ndarray, grad_norm: float):
        super().__init__(f"{message} (|grad|_max = {grad_norm:.3e})")
        self.last_iterate = last_iterate
        self.grad_norm = grad_norm


class SaddlePointError(QTRError):
    """The minimizer converged to a stationary point that is not a minimum."""

    def __init__(self, min_eigenvalue: float):
        super().__init__(
            f"stationary point is a saddle: smallest Hessian eigenvalue {min_eigenvalue:.3e}"
        )
        self.min_eigenvalue = min_eigenvalue


class UnstableEquilibriumError(QTRError):
    """Normal-mode analysis found a negative Hessian eigenvalue."""

    def __init__(self, min_eigenvalue: float):
        super().__init__(
            f"equilibrium is unstable: smallest Hessian eigenvalue {min_eigenvalue:.3e}"
        )
        self.min_eigenvalue = min_eigenvalue


class ConstrainedMinimizationError(QTRError):
    """Relaxation at a fixed rotor angle failed."""

    def __init__(self, theta: float, cause: QTRError):
        super().__init__(f"relaxation failed at theta = {theta:.6f} rad: {cause}")
        self.theta = theta
        self.cause = cause


class RampError(QTRError):
    """An anisotropy ramp reaches the isotropic point."""


class NormalizationError(QTRError):
    """A quantum state is not normalized."""


class RatioError(QTRError):
    """A solver error raised at one point of an anisotropy scan."""

    def __init__(self, ratio: float, cause: QTRError):
        super().__init__(f"at anisotropy {ratio:.6f}: {cause}")
        self.ratio = ratio
        self.cause = cause


class RegimeWarning(UserWarning):
    """The rotor potential does not have exactly two wells per period."""


class ResolutionWarning(UserWarning):
    """The tunneling splitting changed by more than 1% under resolution doubling."""


def check_normalized(norm_sq: float, tol: float = 1e-12, what: Optional[str] = None) -> None:
    """Raises NormalizationError unless `norm_sq` is 1 within `tol`."""
    if not np.isfinite(norm_sq) or abs(norm_sq - 1.0) > tol:
        label = what or "state"
        raise NormalizationError(f"{label} has squared norm {norm_sq!r}, expected 1")
