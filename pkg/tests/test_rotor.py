import math

import numpy as np
import pytest

from core.errors import ConfigError, RegimeWarning
from core.physcore import CONSTANTS, TrapConfig, characteristic_length
from tests.conftest import cosine_well
from utils.crystal import IonConfiguration, find_equilibrium, rotate, same_sites
from utils.rotor import (
    RotorPotential,
    barrier_height,
    effective_potential,
    find_wells,
    fold_potential,
    full_circle_potential,
    moment_of_inertia,
    orientation_geometries,
)


@pytest.fixture(scope="module")
def relaxed3():
    trap = TrapConfig.from_hz(3, 1.5e6, 1.001)
    return effective_potential(trap, "relaxed", 256)


# --- Moment of inertia ---

def test_single_ion_inertia_is_m_l_squared():
    trap = TrapConfig.from_hz(2, 1.5e6, 1.001)
    ion = IonConfiguration(positions=[[1.0, 0.0]])
    expected = trap.ion_mass * characteristic_length(trap) ** 2
    assert moment_of_inertia(trap, ion) == pytest.approx(expected, rel=1e-14)


def test_inertia_scales_with_radius_squared():
    trap = TrapConfig.from_hz(3, 1.5e6, 1.001)
    ions = IonConfiguration(positions=[[0.0, 1.0], [0.8, -0.5], [-0.8, -0.5]])
    doubled = IonConfiguration(positions=2.0 * ions.positions)
    assert moment_of_inertia(trap, doubled) == pytest.approx(4.0 * moment_of_inertia(trap, ions), rel=1e-14)


def test_relaxed_trace_starts_at_the_equilibrium_inertia(relaxed3):
    assert relaxed3.inertia_trace[0] == pytest.approx(relaxed3.inertia, rel=1e-9)
    assert np.all(relaxed3.inertia_trace > 0.0)


def test_three_ion_inertia_matches_the_perturbed_ring(relaxed3):
    # To first order in ε = ρ² − 1 the ring only feels the mean stiffness
    # 1 + ε/2, which shrinks Σr² = 3^(2/3) by (1 + ε/2)^(-2/3).
    assert relaxed3.inertia == pytest.approx(2.58126e-36, rel=1e-4)


def test_inertia_scales_with_mass_and_trap_frequency():
    trap = TrapConfig.from_hz(3, 1.5e6, 1.001)
    ions = IonConfiguration(positions=[[0.0, 1.0], [0.8, -0.5], [-0.8, -0.5]])
    base = moment_of_inertia(trap, ions)
    heavier = trap.model_copy(update={"ion_mass": 4.0 * trap.ion_mass})
    stiffer = trap.model_copy(update={"omega_z": 2.0 * trap.omega_z})
    # I = m l² Σr² with l ∝ (m ω_z²)^(-1/3).
    assert moment_of_inertia(heavier, ions) == pytest.approx(4.0 ** (1.0 / 3.0) * base, rel=1e-12)
    assert moment_of_inertia(stiffer, ions) == pytest.approx(2.0 ** (-4.0 / 3.0) * base, rel=1e-12)


# --- Potential shape ---

@pytest.mark.parametrize("method", ["relaxed", "rigid"])
def test_isotropic_trap_gives_a_flat_potential(method):
    trap = TrapConfig.from_hz(3, 1.5e6, 1.0)
    with pytest.warns(RegimeWarning):
        potential = effective_potential(trap, method, 64)
    assert find_wells(potential) == []
    assert np.ptp(potential.values_dimensionless) <= 1e-13


def test_three_ion_relaxed_potential_has_two_degenerate_wells(relaxed3):
    v = relaxed3.values_dimensionless
    assert find_wells(relaxed3) == [0, 128]
    assert v[0] == 0.0
    span = v.max() - v.min()
    assert span > 0.0
    assert v[128] == pytest.approx(v[0], abs=1e-8 * span)
    assert int(np.argmax(v)) in (64, 192)
    assert v[64] == pytest.approx(span, rel=1e-8)


def test_relaxed_potential_is_mirror_symmetric(relaxed3):
    v = relaxed3.values_dimensionless
    span = v.max() - v.min()
    mirrored = v[(-np.arange(len(v))) % len(v)]
    np.testing.assert_allclose(v, mirrored, rtol=0.0, atol=1e-8 * span)


def test_relaxation_never_raises_the_energy(relaxed3):
    trap = TrapConfig.from_hz(3, 1.5e6, 1.001)
    with pytest.warns(RegimeWarning):
        rigid = effective_potential(trap, "rigid", 256, equilibrium=relaxed3.equilibrium)
    assert np.all(relaxed3.values_dimensionless <= rigid.values_dimensionless + 1e-14)
    assert rigid.barrier > relaxed3.barrier


def test_full_circle_folds_into_identical_periods():
    trap = TrapConfig.from_hz(3, 1.5e6, 1.005)
    thetas, values = full_circle_potential(trap, "relaxed", 64)
    assert len(thetas) == 3 * 64
    rows = fold_potential(values, 3)
    span = values.max() - values.min()
    for row in rows[1:]:
        np.testing.assert_allclose(row, rows[0], rtol=0.0, atol=1e-8 * span)


@pytest.mark.filterwarnings("ignore::core.errors.RegimeWarning")
def test_even_ion_number_barrier_is_much_larger():
    # Even N keeps a second-order barrier; odd N only a third-order one.
    three = effective_potential(TrapConfig.from_hz(3, 1.5e6, 1.005), "relaxed", 64)
    four = effective_potential(TrapConfig.from_hz(4, 1.5e6, 1.005), "relaxed", 64)
    assert four.barrier / three.barrier > 10.0


def test_barrier_grows_with_anisotropy():
    barriers = [
        effective_potential(TrapConfig.from_hz(3, 1.5e6, rho), "relaxed", 64).barrier
        for rho in (1.0005, 1.001, 1.005, 1.01)
    ]
    assert np.all(np.diff(barriers) > 0.0)


def test_barrier_is_converged_in_the_grid_size():
    trap = TrapConfig.from_hz(3, 1.5e6, 1.01)
    eq = find_equilibrium(trap, "ring-up")
    coarse = effective_potential(trap, "relaxed", 256, equilibrium=eq)
    fine = effective_potential(trap, "relaxed", 512, equilibrium=eq)
    assert fine.barrier == pytest.approx(coarse.barrier, rel=1e-6)


# --- Wells and folding ---

def test_find_wells_on_a_synthetic_double_well():
    assert find_wells(cosine_well(3, 10.0)) == [0, 128]


def test_find_wells_on_a_single_well():
    thetas = 2.0 * math.pi / 3 * np.arange(128) / 128
    potential = RotorPotential(
        n_ions=3,
        method="rigid",
        theta_grid=thetas,
        values_dimensionless=1.0 - np.cos(3 * thetas),
        energy_unit=1.0,
        inertia=1.0,
    )
    assert find_wells(potential) == [0]


def test_find_wells_merges_rounding_ripples():
    thetas = 2.0 * math.pi / 3 * np.arange(128) / 128
    values = 0.5 * (1.0 - np.cos(6 * thetas))
    values[40] = values[41] - 1e-9
    potential = RotorPotential(
        n_ions=3,
        method="relaxed",
        theta_grid=thetas,
        values_dimensionless=values,
        energy_unit=1.0,
        inertia=1.0,
    )
    assert find_wells(potential) == [0, 64]


def test_fold_potential_rejects_incommensurate_lengths():
    with pytest.raises(ValueError):
        fold_potential(np.zeros(10), 3)


def test_grid_below_minimum_is_a_config_error(trap3):
    with pytest.raises(ConfigError):
        effective_potential(trap3, "relaxed", 32)


def test_orientation_geometries_are_mirror_images(trap3):
    up, down = orientation_geometries(trap3)
    # Three ions point a vertex along x, so the partner is the x mirror image.
    np.testing.assert_array_equal(down.positions[:, 0], -up.positions[:, 0])
    np.testing.assert_array_equal(down.positions[:, 1], up.positions[:, 1])


def test_orientation_geometries_sit_a_well_apart(relaxed3):
    up = relaxed3.equilibrium
    _, down = orientation_geometries(TrapConfig.from_hz(3, 1.5e6, 1.001))
    # Turning the up crystal by π/3 lands on the down sites.
    assert same_sites(rotate(up, math.pi / 3), down, tol=1e-2)
    assert not same_sites(up, down, tol=1e-2)


def test_barrier_height_is_the_well_depth_in_joules():
    potential = cosine_well(3, 10.0)
    rotor_b = CONSTANTS.hbar**2 / (2.0 * potential.inertia)
    assert barrier_height(potential) == pytest.approx(10.0 * rotor_b, rel=1e-12)
    assert potential.barrier == barrier_height(potential)
