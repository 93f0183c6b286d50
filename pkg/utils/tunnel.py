"""ROTOR TUNNELING DOUBLET.

Solves H = −(ħ²/2I) d²/dθ² + V(θ) on the reduced ring [0, 2π/N) with
periodic boundary conditions and extracts the two lowest eigenstates, their
splitting, the tunneling rate and the orientation states
ψ_up/ψ_down = (ψ0 ± ψ1)/√2.

Energies are handled in units of the rotor constant B = ħ²/2I, so the
operator becomes −d²/dθ² + V/B. Two discretizations share the same
band-limited potential: a plane-wave basis e^{imNθ} and a second-order
periodic finite-difference stencil.
"""

import logging
import math
import warnings
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import eigh

from core.errors import ConfigError, ResolutionWarning
from core.physcore import CONSTANTS, TrapConfig
from utils.crystal import find_equilibrium
from utils.rotor import RotorPotential, effective_potential

logger = logging.getLogger(__name__)

Solver = Literal["fourier", "finite_difference"]

MIN_RESOLUTION = 128
# Relative splitting change under resolution doubling that triggers a warning.
RESOLUTION_TOLERANCE = 0.01
# Number of lowest levels kept in TunnelDoublet.levels.
N_LEVELS = 5
# Tunneling rate as a fraction of the doublet splitting: the coupling Δ/2
# between the localized states ψ_up and ψ_down.
RATE_PER_SPLITTING = 0.5


# --- Result types ---

class TunnelDoublet(BaseModel):
    """The two lowest rotor eigenstates and the derived tunneling rate.

    Energies are in joules measured from the well bottom of the potential.
    Wavefunctions are real, sampled on `theta_grid` and normalized with the
    periodic trapezoidal rule.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    method: Solver
    resolution: int
    e0: float
    e1: float
    levels: np.ndarray = Field(..., description="Lowest eigenvalues, J")
    theta_grid: np.ndarray
    psi0: np.ndarray
    psi1: np.ndarray
    resolution_change: Optional[float] = Field(
        None, description="Relative splitting change at doubled resolution"
    )

    @property
    def splitting(self) -> float:
        return self.e1 - self.e0

    @property
    def splitting_hz(self) -> float:
        """Splitting over h."""
        return self.splitting / CONSTANTS.planck

    @property
    def rate_hz(self) -> float:
        """Tunneling rate in Hz, splitting / 2h."""
        return RATE_PER_SPLITTING * self.splitting_hz

    @property
    def rate_j(self) -> float:
        """Tunneling rate j = splitting / 2ħ in rad/s (2π · rate_hz)."""
        return RATE_PER_SPLITTING * self.splitting / CONSTANTS.hbar

    @property
    def psi_up(self) -> np.ndarray:
        return (self.psi0 + self.psi1) / math.sqrt(2.0)

    @property
    def psi_down(self) -> np.ndarray:
        return (self.psi0 - self.psi1) / math.sqrt(2.0)


class TunnelingReport(BaseModel):
    """Both potential methods through the same solver."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    relaxed: TunnelDoublet
    rigid: TunnelDoublet
    relaxed_potential: RotorPotential
    rigid_potential: RotorPotential

    @property
    def rate_hz(self) -> float:
        return self.relaxed.rate_hz


# --- Discretizations ---

def _potential_coefficients(values: np.ndarray) -> np.ndarray:
    """Fourier coefficients c_q of V = Σ c_q e^{iqNθ}, Nyquist term dropped."""
    coeffs = np.fft.fft(values) / len(values)
    coeffs[len(values) // 2] = 0.0 if len(values) % 2 == 0 else coeffs[len(values) // 2]
    return coeffs


def _coefficient(coeffs: np.ndarray, q: np.ndarray) -> np.ndarray:
    """c_q for integer q, zero outside the sampled band."""
    g = len(coeffs)
    inside = np.abs(q) < (g + 1) // 2
    out = np.zeros(q.shape, dtype=complex)
    out[inside] = coeffs[q[inside] % g]
    return out


def _interpolate(coeffs: np.ndarray, n_ions: int, thetas: np.ndarray) -> np.ndarray:
    g = len(coeffs)
    q = np.arange(-((g - 1) // 2), (g - 1) // 2 + 1)
    phases = np.exp(1j * n_ions * np.outer(thetas, q))
    return np.real(phases @ _coefficient(coeffs, q))


def _solve_fourier(u: np.ndarray, n_ions: int, resolution: int, thetas: np.ndarray):
    """Lowest levels and states of −d²/dθ² + u in the basis e^{imNθ}, |m| ≤ M."""
    # Plane waves e^{imNθ} are periodic on the reduced ring.
    m_max = resolution // 2
    m = np.arange(-m_max, m_max + 1)

    # Build the Hermitian matrix: potential couples m and m' through c_{m−m'},
    # kinetic energy (mN)² sits on the diagonal.
    coeffs = _potential_coefficients(u)
    h = _coefficient(coeffs, m[:, None] - m[None, :])
    h[np.diag_indices_from(h)] += (m * n_ions) ** 2

    # Only the lowest few levels are needed.
    n_keep = min(N_LEVELS, len(m))
    energies, vecs = eigh(h, subset_by_index=[0, n_keep - 1])

    # Sample the two lowest states back on the potential grid.
    period = 2.0 * math.pi / n_ions
    basis = np.exp(1j * n_ions * np.outer(thetas, m)) / math.sqrt(period)
    states = basis @ vecs[:, :2]
    # Real up to a global phase; rotate it away at the largest sample.
    for k in range(2):
        peak = states[np.argmax(np.abs(states[:, k])), k]
        states[:, k] *= np.conj(peak) / abs(peak)
    return energies, np.real(states)


def _solve_finite_difference(u_coeffs: np.ndarray, n_ions: int, resolution: int):
    """Lowest levels and states of the periodic three-point stencil."""
    # Load the band-limited potential onto the stencil grid.
    period = 2.0 * math.pi / n_ions
    step = period / resolution
    thetas = step * np.arange(resolution)
    u = _interpolate(u_coeffs, n_ions, thetas)

    # Create the three-point Laplacian with wrap-around neighbours.
    h = np.diag(2.0 / step**2 + u)
    off = -1.0 / step**2
    idx = np.arange(resolution)
    h[idx, (idx + 1) % resolution] += off
    h[(idx + 1) % resolution, idx] += off
    energies, vecs = eigh(h, subset_by_index=[0, N_LEVELS - 1])
    return energies, vecs[:, :2], thetas


def _normalize_doublet(thetas: np.ndarray, states: np.ndarray, period: float):
    """Trapezoidal normalization, Gram–Schmidt and the sign convention."""
    step = period / len(thetas)
    psi0, psi1 = states[:, 0].copy(), states[:, 1].copy()
    psi0 /= math.sqrt(step * np.sum(psi0**2))
    psi1 -= step * np.sum(psi0 * psi1) * psi0
    psi1 /= math.sqrt(step * np.sum(psi1**2))

    # ψ0 positive; ψ1 positive in the θ = 0 well so ψ_up sits there.
    if psi0[np.argmax(np.abs(psi0))] < 0.0:
        psi0 = -psi0
    if psi1[0] < 0.0:
        psi1 = -psi1
    return psi0, psi1


def _splitting(potential: RotorPotential, resolution: int, method: Solver) -> float:
    return _solve(potential, resolution, method)[0]


def _solve(potential: RotorPotential, resolution: int, method: Solver):
    rotor_b = CONSTANTS.hbar**2 / (2.0 * potential.inertia)
    u = potential.values / rotor_b
    n = potential.n_ions
    if method == "fourier":
        thetas = potential.theta_grid
        energies, states = _solve_fourier(u, n, resolution, thetas)
    elif method == "finite_difference":
        energies, states, thetas = _solve_finite_difference(_potential_coefficients(u), n, resolution)
    else:
        raise ConfigError(f"unknown solver {method!r}")
    energies = energies * rotor_b
    return energies[1] - energies[0], energies, states, thetas


# --- Public operations ---

def solve_ring(
    potential: RotorPotential,
    resolution: int = 256,
    method: Solver = "fourier",
    check_resolution: bool = True,
) -> TunnelDoublet:
    """Tunneling doublet of the rotor on the reduced ring.

    Args:
        potential: The effective potential and moment of inertia.
        resolution: Plane waves (|m| ≤ resolution/2) or stencil points.
        method: "fourier" or "finite_difference".
        check_resolution: Repeat the solve at twice the resolution and warn
            when the splitting moves by more than 1%.

    Returns:
        The TunnelDoublet.

    Raises:
        ConfigError: Non-positive inertia, resolution below 128 or an
            unknown method.
    """
    if not potential.inertia > 0.0:
        raise ConfigError(f"moment of inertia must be positive, got {potential.inertia!r}")
    if resolution < MIN_RESOLUTION:
        raise ConfigError(f"resolution must be at least {MIN_RESOLUTION}, got {resolution}")

    splitting, energies, states, thetas = _solve(potential, resolution, method)
    psi0, psi1 = _normalize_doublet(thetas, states, potential.period)

    change = None
    if check_resolution:
        refined = _splitting(potential, 2 * resolution, method)
        scale = max(abs(refined), abs(splitting))
        change = abs(refined - splitting) / scale if scale > 0.0 else 0.0
        if change > RESOLUTION_TOLERANCE:
            message = (
                f"{method} splitting changed by {100 * change:.2f}% when the resolution "
                f"doubled from {resolution}"
            )
            logger.warning(message)
            warnings.warn(message, ResolutionWarning, stacklevel=2)

    doublet = TunnelDoublet(
        method=method,
        resolution=resolution,
        e0=float(energies[0]),
        e1=float(energies[1]),
        levels=energies,
        theta_grid=thetas,
        psi0=psi0,
        psi1=psi1,
        resolution_change=change,
    )
    logger.info(
        "%s doublet (%s potential): splitting %.6e J, rate %.6g Hz",
        method, potential.method, doublet.splitting, doublet.rate_hz,
    )
    return doublet


def tunneling_report(
    config: TrapConfig,
    grid_size: int = 256,
    resolution: int = 256,
    method: Solver = "fourier",
    seed: str = "ring-up",
) -> TunnelingReport:
    """Runs equilibrium, both potentials and the ring solver for one scenario."""
    eq = find_equilibrium(config, seed)
    relaxed = effective_potential(config, "relaxed", grid_size, equilibrium=eq)
    rigid = effective_potential(config, "rigid", grid_size, equilibrium=eq)
    return TunnelingReport(
        relaxed=solve_ring(relaxed, resolution, method),
        rigid=solve_ring(rigid, resolution, method),
        relaxed_potential=relaxed,
        rigid_potential=rigid,
    )


def tunneling_rate(config: TrapConfig) -> float:
    """Tunneling rate (splitting / 2h, Hz) of the relaxed rotor potential."""
    eq = find_equilibrium(config, "ring-up")
    potential = effective_potential(config, "relaxed", equilibrium=eq)
    return solve_ring(potential).rate_hz


def well_localization(doublet: TunnelDoublet) -> float:
    """Probability of ψ_up within the half-period centred on θ = 0."""
    thetas = doublet.theta_grid
    period = len(thetas) * (thetas[1] - thetas[0])
    distance = np.minimum(thetas, period - thetas)
    weights = np.where(np.isclose(distance, period / 4.0), 0.5, (distance < period / 4.0).astype(float))
    step = period / len(thetas)
    return float(step * np.sum(weights * doublet.psi_up**2))
