"""PHYSICAL CONSTANTS, TRAP CONFIGURATION AND UNITS.

Shared by every pipeline module: CODATA constants, the validated trap
scenario, the ion-trap nondimensionalization (lengths in units of
l = (e²/4πε₀mω_z²)^(1/3), energies in units of e²/4πε₀l, frequencies in
units of ω_z) and the conversion of a threading magnetic flux into the
Aharonov–Bohm hopping phase.
"""

import math

from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import constants

from core.errors import ConfigError

# --- Constants ---

# Mass of 171Yb+ in atomic mass units.
YB171_MASS_AMU = 170.936

TWO_PI = 2.0 * math.pi


class PhysicalConstants(BaseModel):
    """CODATA values used throughout the simulator (SI units)."""

    model_config = ConfigDict(frozen=True)

    hbar: float = Field(..., gt=0, description="Reduced Planck constant, J s")
    elementary_charge: float = Field(..., gt=0, description="Elementary charge, C")
    vacuum_permittivity: float = Field(..., gt=0, description="Vacuum permittivity, F/m")
    atomic_mass_unit: float = Field(..., gt=0, description="Atomic mass constant, kg")

    @property
    def coulomb_constant(self) -> float:
        """e²/(4πε₀) in J m."""
        return self.elementary_charge**2 / (4.0 * math.pi * self.vacuum_permittivity)

    @property
    def planck(self) -> float:
        return TWO_PI * self.hbar

    @property
    def flux_quantum(self) -> float:
        """φ₀ = ħ/e, the convention of the AB phase formula θ_AB = πΦ/φ₀."""
        return self.hbar / self.elementary_charge


# Loaded once; every module reads this instance.
CONSTANTS = PhysicalConstants(
    hbar=constants.hbar,
    elementary_charge=constants.e,
    vacuum_permittivity=constants.epsilon_0,
    atomic_mass_unit=constants.atomic_mass,
)


# --- Trap scenario ---

class TrapConfig(BaseModel):
    """Planar trap with N identical ions; the y motion is frozen out."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_ions: int = Field(..., ge=2, description="Number of ions")
    omega_z: float = Field(..., gt=0, description="Trap angular frequency along z, rad/s")
    anisotropy: float = Field(..., gt=0, description="Ratio omega_x / omega_z")
    ion_mass: float = Field(..., gt=0, description="Ion mass, kg")

    @field_validator("omega_z", "anisotropy", "ion_mass")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @property
    def omega_x(self) -> float:
        return self.anisotropy * self.omega_z

    @classmethod
    def from_hz(
        cls,
        n_ions: int,
        f_z_hz: float,
        anisotropy: float,
        mass_amu: float = YB171_MASS_AMU,
    ) -> "TrapConfig":
        """Builds a config from an ordinary frequency and a mass in u."""
        return cls(
            n_ions=n_ions,
            omega_z=TWO_PI * f_z_hz,
            anisotropy=anisotropy,
            ion_mass=mass_amu * CONSTANTS.atomic_mass_unit,
        )

    def with_anisotropy(self, anisotropy: float) -> "TrapConfig":
        return self.model_copy(update={"anisotropy": float(anisotropy)})


# --- Units ---

def characteristic_length(config: TrapConfig) -> float:
    """Returns the ion-trap length scale l in metres.

    l = (e² / (4πε₀ m ω_z²))^(1/3) is the distance at which the Coulomb
    force between two ions equals the axial restoring force.

    Args:
        config: The trap scenario.

    Returns:
        The characteristic length in metres.
    """
    return (CONSTANTS.coulomb_constant / (config.ion_mass * config.omega_z**2)) ** (1.0 / 3.0)


def energy_unit(config: TrapConfig) -> float:
    """Energy unit e²/(4πε₀ l) in joules (equal to m ω_z² l²)."""
    return CONSTANTS.coulomb_constant / characteristic_length(config)


def normalized_from_time(t_seconds: float, rate_j: float) -> float:
    """Converts SI time to the dimensionless time j·t used by all traces."""
    return t_seconds * rate_j


def time_from_normalized(t_normalized: float, rate_j: float) -> float:
    if rate_j <= 0:
        raise ConfigError("tunneling rate must be positive to convert normalized time")
    return t_normalized / rate_j


# --- Aharonov–Bohm phase ---

class ABPhase(BaseModel):
    """AB hopping phase, stored reduced to [0, 2π)."""

    model_config = ConfigDict(frozen=True)

    theta_ab: float = Field(..., ge=0.0, lt=TWO_PI, description="Phase, rad")

    @classmethod
    def of(cls, theta: float) -> "ABPhase":
        """Reduces an arbitrary finite angle into [0, 2π)."""
        if not math.isfinite(theta):
            raise ConfigError(f"AB phase must be finite, got {theta!r}")
        reduced = math.fmod(theta, TWO_PI)
        if reduced < 0.0:
            reduced += TWO_PI
        # fmod of a value just below 0 can round up to exactly 2π.
        if reduced >= TWO_PI:
            reduced = 0.0
        return cls(theta_ab=reduced)


def flux_to_phase(flux: float) -> ABPhase:
    """Converts a threading flux into the AB phase θ_AB = πΦ/φ₀ with φ₀ = ħ/e.

    The flux-quantum convention is the single place to change if h/e is
    wanted instead.

    Args:
        flux: Magnetic flux Φ = S·B in webers.

    Returns:
        The reduced ABPhase.
    """
    if not math.isfinite(flux):
        raise ConfigError(f"flux must be finite, got {flux!r}")
    return ABPhase.of(math.pi * flux / CONSTANTS.flux_quantum)


def phase_to_flux(phase: ABPhase) -> float:
    """Returns the smallest non-negative flux producing `phase`."""
    return phase.theta_ab * CONSTANTS.flux_quantum / math.pi
