import math

import pytest
from pydantic import ValidationError

from core.errors import ConfigError
from core.physcore import (
    CONSTANTS,
    YB171_MASS_AMU,
    ABPhase,
    TrapConfig,
    characteristic_length,
    energy_unit,
    flux_to_phase,
    normalized_from_time,
    phase_to_flux,
    time_from_normalized,
)


def test_from_hz_builds_angular_frequencies():
    trap = TrapConfig.from_hz(3, 1.5e6, 1.001)
    assert trap.omega_z == pytest.approx(2 * math.pi * 1.5e6, rel=1e-15)
    assert trap.omega_x == pytest.approx(1.001 * trap.omega_z, rel=1e-15)
    assert trap.ion_mass == pytest.approx(YB171_MASS_AMU * CONSTANTS.atomic_mass_unit)


def test_characteristic_length_balances_coulomb_and_trap_force(trap3):
    length = characteristic_length(trap3)
    coulomb = CONSTANTS.coulomb_constant / length**2
    restoring = trap3.ion_mass * trap3.omega_z**2 * length
    assert coulomb == pytest.approx(restoring, rel=1e-12)
    # A few micrometres for Yb+ at 1.5 MHz.
    assert 1e-6 < length < 5e-6


def test_energy_unit_equals_m_omega_squared_l_squared(trap3):
    length = characteristic_length(trap3)
    assert energy_unit(trap3) == pytest.approx(trap3.ion_mass * trap3.omega_z**2 * length**2, rel=1e-12)


def test_yb171_length_scale_at_one_and_a_half_megahertz(trap3):
    assert characteristic_length(trap3) == pytest.approx(2.09160e-6, rel=1e-5)
    assert energy_unit(trap3) == pytest.approx(1.10302e-22, rel=1e-4)


@pytest.mark.parametrize("field", ["ion_mass", "omega_z"])
def test_units_scale_with_m_omega_squared(trap3, field):
    # m → 4m and ω_z → 2ω_z both multiply m ω_z² by four.
    factor = 4.0 if field == "ion_mass" else 2.0
    scaled = trap3.model_copy(update={field: factor * getattr(trap3, field)})
    shrink = 4.0 ** (-1.0 / 3.0)
    assert characteristic_length(scaled) == pytest.approx(shrink * characteristic_length(trap3), rel=1e-12)
    assert energy_unit(scaled) == pytest.approx(energy_unit(trap3) / shrink, rel=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_ions": 1, "omega_z": 1.0, "anisotropy": 1.0, "ion_mass": 1.0},
        {"n_ions": 3, "omega_z": 0.0, "anisotropy": 1.0, "ion_mass": 1.0},
        {"n_ions": 3, "omega_z": 1.0, "anisotropy": -1.0, "ion_mass": 1.0},
        {"n_ions": 3, "omega_z": float("nan"), "anisotropy": 1.0, "ion_mass": 1.0},
        {"n_ions": 3, "omega_z": 1.0, "anisotropy": float("inf"), "ion_mass": 1.0},
        {"n_ions": 3, "omega_z": 1.0, "anisotropy": 1.0, "ion_mass": 1.0, "spin": 1},
    ],
)
def test_trap_config_rejects_invalid_values(kwargs):
    with pytest.raises(ValidationError):
        TrapConfig(**kwargs)


def test_with_anisotropy_keeps_other_fields(trap3):
    other = trap3.with_anisotropy(1.2)
    assert other.anisotropy == 1.2
    assert other.omega_z == trap3.omega_z
    assert trap3.anisotropy == 1.001


def test_zero_flux_gives_zero_phase():
    assert flux_to_phase(0.0).theta_ab == 0.0


def test_one_flux_quantum_gives_pi():
    assert flux_to_phase(CONSTANTS.flux_quantum).theta_ab == pytest.approx(math.pi, rel=1e-14)


def test_half_flux_quantum_gives_a_quarter_turn():
    assert flux_to_phase(0.5 * CONSTANTS.flux_quantum).theta_ab == pytest.approx(math.pi / 2, rel=1e-14)


def test_phase_is_reduced_into_one_turn():
    phase = flux_to_phase(2.0 * CONSTANTS.flux_quantum).theta_ab
    assert min(phase, 2 * math.pi - phase) < 1e-12
    negative = flux_to_phase(-0.5 * CONSTANTS.flux_quantum).theta_ab
    assert negative == pytest.approx(1.5 * math.pi, rel=1e-14)


def test_non_finite_flux_is_rejected():
    with pytest.raises(ConfigError):
        flux_to_phase(float("nan"))
    with pytest.raises(ConfigError):
        ABPhase.of(float("inf"))


def test_phase_to_flux_inverts_flux_to_phase():
    phase = ABPhase.of(math.pi / 6)
    flux = phase_to_flux(phase)
    assert flux >= 0.0
    assert flux_to_phase(flux).theta_ab == pytest.approx(math.pi / 6, rel=1e-14)


def test_ab_phase_model_rejects_unreduced_values():
    with pytest.raises(ValidationError):
        ABPhase(theta_ab=7.0)


def test_time_conversions_round_trip():
    rate_j = 31.1
    assert time_from_normalized(normalized_from_time(0.25, rate_j), rate_j) == pytest.approx(0.25)
    with pytest.raises(ConfigError):
        time_from_normalized(1.0, 0.0)
