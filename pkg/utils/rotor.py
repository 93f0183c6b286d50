"""ROTOR REDUCTION.

Reduces the crystal to its collective orientation θ: the effective
rotational potential V(θ) on the reduced ring [0, 2π/N), its barrier, the
moment of inertia of the rotor and the well structure that marks the
tunneling regime.

Two potentials are available. "rigid" rotates the up equilibrium without
letting it deform. "relaxed" minimizes the energy over all shapes whose
collective angle is held at θ: the displacement from the regular polygon
aligned with the equilibrium, rotated by θ, is kept orthogonal to that
polygon's rotation generator.
"""

import logging
import math
import warnings
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.errors import ConfigError, ConstrainedMinimizationError, QTRError, RegimeWarning
from core.physcore import TrapConfig, characteristic_length, energy_unit
from core.settings import parallel_map
from utils.crystal import (
    SADDLE_TOL,
    IonConfiguration,
    alignment_angle,
    find_equilibrium,
    opposite_orientation,
    regular_polygon,
    relax_orientation,
    rotate,
)

logger = logging.getLogger(__name__)

Method = Literal["rigid", "relaxed"]

MIN_GRID = 64
# Potentials whose span is below this (dimensionless) are flat.
FLAT_TOL = 1e-13
# Minima rising less than this fraction of the span are rounding artefacts.
WELL_PROMINENCE = 1e-3


class RotorPotential(BaseModel):
    """Effective potential on a uniform θ grid, measured from the well bottom."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_ions: int
    method: Method
    theta_grid: np.ndarray = Field(..., description="Uniform grid, rad")
    values_dimensionless: np.ndarray = Field(..., description="V(θ) in units of e²/4πε₀l")
    energy_unit: float = Field(..., description="Joules per dimensionless energy unit")
    inertia: float = Field(..., description="Moment of inertia of the equilibrium, kg m²")
    inertia_trace: Optional[np.ndarray] = Field(None, description="I(θ) of the relaxed shapes, kg m²")
    equilibrium: Optional[IonConfiguration] = None

    @property
    def values(self) -> np.ndarray:
        """V(θ) in joules."""
        return self.values_dimensionless * self.energy_unit

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.n_ions

    @property
    def barrier(self) -> float:
        return barrier_height(self)


# --- Rotor observables ---

def moment_of_inertia(config: TrapConfig, equilibrium: IonConfiguration) -> float:
    """I = m Σ (x_i² + z_i²) in kg m² for a crystal centred on the trap axis."""
    length = characteristic_length(config)
    r2 = np.sum(equilibrium.positions**2)
    return float(config.ion_mass * length**2 * r2)


def barrier_height(potential: RotorPotential) -> float:
    """max − min of V over the period, in joules."""
    v = potential.values_dimensionless
    return float((v.max() - v.min()) * potential.energy_unit)


def _arc_max(values: np.ndarray, start: int, stop: int) -> float:
    if start <= stop:
        return float(values[start:stop + 1].max())
    return float(max(values[start:].max(), values[:stop + 1].max()))


def find_wells(potential: RotorPotential) -> List[int]:
    """Grid indices of the distinct minima of V on the periodic grid.

    Minima whose rise to the neighbouring maxima is below a small fraction
    of the span are merged away; a flat potential has no wells.
    """
    v = potential.values_dimensionless
    span = float(v.max() - v.min())
    if span <= FLAT_TOL:
        return []
    n = len(v)
    wells = [i for i in range(n) if v[i] <= v[i - 1] and v[i] < v[(i + 1) % n]]
    prominence = WELL_PROMINENCE * span

    merged = True
    while merged and len(wells) > 1:
        merged = False
        for k, i in enumerate(wells):
            left, right = wells[k - 1], wells[(k + 1) % len(wells)]
            rise = min(_arc_max(v, left, i), _arc_max(v, i, right)) - v[i]
            if rise < prominence:
                wells.pop(k)
                merged = True
                break
    return wells


def fold_potential(values: np.ndarray, n_ions: int) -> np.ndarray:
    """Folds a full-circle sampling into rows of one reduced period each.

    Args:
        values: V sampled on N·m uniform points of [0, 2π).
        n_ions: The symmetry order N.

    Returns:
        Array of shape (N, m); identical rows for a C_N-symmetric crystal.
    """
    values = np.asarray(values)
    if len(values) % n_ions:
        raise ValueError(f"{len(values)} samples do not fold into {n_ions} periods")
    return values.reshape(n_ions, -1)


# --- Potential construction ---

def _energy_change(rho: float, x: np.ndarray, theta: float, reference: np.ndarray) -> float:
    """E(x) − E(reference) for a crystal x close to `reference` turned by θ.

    The isotropic part of the energy does not change under rotation, so x is
    turned back by θ and only the small displacement d from `reference`
    enters the Coulomb and isotropic trap terms.
    """
    n = len(x) // 2
    c, s = math.cos(theta), math.sin(theta)
    back_x = c * x[:n] + s * x[n:]
    back_z = -s * x[:n] + c * x[n:]
    ref_x, ref_z = reference[:n], reference[n:]
    dx, dz = back_x - ref_x, back_z - ref_z

    # Isotropic trap: Σ|ref + d|²/2 − Σ|ref|²/2.
    isotropic = np.sum(dx * (ref_x + 0.5 * dx) + dz * (ref_z + 0.5 * dz))

    # Coulomb: Δ(1/r) = −Δ(r²) / (r r' (r + r')) with Δ(r²) = b·(2a + b).
    iu = np.triu_indices(n, k=1)
    ax = (ref_x[:, None] - ref_x[None, :])[iu]
    az = (ref_z[:, None] - ref_z[None, :])[iu]
    bx = (dx[:, None] - dx[None, :])[iu]
    bz = (dz[:, None] - dz[None, :])[iu]
    dr2 = bx * (2.0 * ax + bx) + bz * (2.0 * az + bz)
    r_ref = np.hypot(ax, az)
    r_new = np.sqrt(r_ref**2 + dr2)
    coulomb = -np.sum(dr2 / (r_new * r_ref * (r_new + r_ref)))

    # The anisotropic excess (ρ² − 1)x²/2 is not rotation invariant.
    anisotropic = 0.5 * (rho - 1.0) * (rho + 1.0) * (np.sum(x[:n] ** 2) - np.sum(ref_x**2))
    return float(isotropic + coulomb + anisotropic)


def _relaxed_shape(
    config: TrapConfig,
    equilibrium: np.ndarray,
    reference: np.ndarray,
    theta: float,
) -> np.ndarray:
    """Constrained minimum at orientation θ (flat coordinates)."""
    start = rotate(IonConfiguration.from_flat(equilibrium), theta).flat
    ref = rotate(IonConfiguration.from_flat(reference), theta).flat
    try:
        result = relax_orientation(config, start, ref)
    except QTRError as exc:
        raise ConstrainedMinimizationError(theta, exc) from exc
    lowest = result.min_eigenvalue
    if lowest < -SADDLE_TOL:
        raise ConstrainedMinimizationError(
            theta, QTRError(f"constrained Hessian eigenvalue {lowest:.3e}")
        )
    return result.x


def _sample(
    config: TrapConfig,
    equilibrium: IonConfiguration,
    method: Method,
    thetas: np.ndarray,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Dimensionless V(θ), zero at θ = 0, and for relaxed the Σr²(θ) trace."""
    rho = config.anisotropy
    x_eq = equilibrium.flat
    if method == "rigid":
        values = np.array(
            [_energy_change(rho, rotate(equilibrium, t).flat, t, x_eq) for t in thetas]
        )
        return values, None
    if method != "relaxed":
        raise ConfigError(f"unknown potential method {method!r}")

    # The orientation is measured against the regular polygon best aligned
    # with the equilibrium; the relaxed crystal at θ = 0 is the zero of V.
    polygon = regular_polygon(equilibrium.n_ions)
    reference = rotate(
        IonConfiguration.from_flat(polygon), alignment_angle(polygon, x_eq)
    ).flat
    origin = _relaxed_shape(config, x_eq, reference, 0.0)
    shapes = parallel_map(lambda t: _relaxed_shape(config, x_eq, reference, t), list(thetas))
    values = np.array([_energy_change(rho, x, t, origin) for x, t in zip(shapes, thetas)])
    radii = np.array([float(np.sum(x**2)) for x in shapes])
    return values, radii


def _check_regime(potential: RotorPotential) -> None:
    wells = find_wells(potential)
    if len(wells) != 2:
        message = (
            f"{potential.method} potential for N={potential.n_ions} has {len(wells)} "
            "minima per period; expected two orientations"
        )
        logger.warning(message)
        warnings.warn(message, RegimeWarning, stacklevel=3)


def effective_potential(
    config: TrapConfig,
    method: Method = "relaxed",
    grid_size: int = 256,
    seed: str = "ring-up",
    equilibrium: Optional[IonConfiguration] = None,
) -> RotorPotential:
    """Effective rotational potential on the reduced ring [0, 2π/N).

    Args:
        config: Trap scenario.
        method: "relaxed" (shape minimized at fixed orientation) or "rigid".
        grid_size: Number of θ samples; a multiple of 4 puts a grid point on
            the barrier at π/(2N).
        seed: Seed of the up equilibrium when none is given.
        equilibrium: A precomputed up equilibrium.

    Returns:
        The RotorPotential, zero at the up equilibrium.

    Raises:
        ConfigError: grid_size below 64 or an unknown method.
        ConstrainedMinimizationError: Relaxation failed at some θ.
    """
    if grid_size < MIN_GRID:
        raise ConfigError(f"grid_size must be at least {MIN_GRID}, got {grid_size}")
    eq = equilibrium if equilibrium is not None else find_equilibrium(config, seed)
    thetas = 2.0 * math.pi / config.n_ions * np.arange(grid_size) / grid_size
    values, radii = _sample(config, eq, method, thetas)

    inertia = moment_of_inertia(config, eq)
    trace = None
    if radii is not None:
        trace = config.ion_mass * characteristic_length(config) ** 2 * radii

    potential = RotorPotential(
        n_ions=config.n_ions,
        method=method,
        theta_grid=thetas,
        values_dimensionless=values,
        energy_unit=energy_unit(config),
        inertia=inertia,
        inertia_trace=trace,
        equilibrium=eq,
    )
    logger.info(
        "%s potential N=%d rho=%.6f: barrier %.6e J, I = %.6e kg m^2",
        method, config.n_ions, config.anisotropy, potential.barrier, inertia,
    )
    _check_regime(potential)
    return potential


def full_circle_potential(
    config: TrapConfig,
    method: Method = "relaxed",
    grid_size: int = 256,
    seed: str = "ring-up",
    equilibrium: Optional[IonConfiguration] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """V(θ) sampled on N·grid_size points of the full circle [0, 2π).

    Returns:
        (thetas, dimensionless values, zero at θ = 0).
    """
    eq = equilibrium if equilibrium is not None else find_equilibrium(config, seed)
    n = config.n_ions * grid_size
    thetas = 2.0 * math.pi * np.arange(n) / n
    values, _ = _sample(config, eq, method, thetas)
    return thetas, values


def orientation_geometries(config: TrapConfig) -> Tuple[IonConfiguration, IonConfiguration]:
    """The up and down equilibria; the down crystal is the mirror partner of the up one."""
    up = find_equilibrium(config, "ring-up")
    return up, opposite_orientation(up)
