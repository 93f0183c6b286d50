"""Shared fixtures."""

import math

import numpy as np
import pytest

from core.physcore import TrapConfig
from utils.rotor import RotorPotential


@pytest.fixture
def trap3() -> TrapConfig:
    return TrapConfig.from_hz(3, 1.5e6, 1.001)


@pytest.fixture
def trap5() -> TrapConfig:
    return TrapConfig.from_hz(5, 1.5e6, 1.01)


def cosine_well(n_ions: int, depth_in_b: float, grid: int = 256, inertia: float = 1e-36) -> RotorPotential:
    """V = depth·B·(1 − cos 2Nθ)/2: two equal wells per period at 0 and π/N."""
    from core.physcore import CONSTANTS

    rotor_b = CONSTANTS.hbar**2 / (2.0 * inertia)
    unit = 1e-22
    thetas = 2.0 * math.pi / n_ions * np.arange(grid) / grid
    values = depth_in_b * rotor_b * 0.5 * (1.0 - np.cos(2 * n_ions * thetas)) / unit
    return RotorPotential(
        n_ions=n_ions,
        method="relaxed",
        theta_grid=thetas,
        values_dimensionless=values,
        energy_unit=unit,
        inertia=inertia,
    )
