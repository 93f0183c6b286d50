"""ORIENTATION DYNAMICS AND AHARONOV–BOHM INTERFERENCE.

Tight-binding dynamics of the rotor. With all spins identical the two
orientations form a two-level system whose clockwise and counter-clockwise
hops interfere, H = 2ħj cos(θ_AB) σ_x. Flipping one ion's spin makes the N
rotated crystals distinguishable and the orientation space becomes a cycle
of 2N sites, walked with the Peierls-phased hopping
H_{n+1,n} = ħj e^{iθ_AB}.

Site n = 2k−1 is the up orientation with the flipped ion at position k,
n = 2k the down orientation. Times passed in are in the same unit system as
the rate j; traces report normalized time j·t.
"""

import logging
import math
from typing import Literal, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.errors import NormalizationError, check_normalized
from core.physcore import CONSTANTS, ABPhase
from core.settings import parallel_map

logger = logging.getLogger(__name__)

Orientation = Literal["up", "down"]
PhaseLike = Union[float, ABPhase]

NORM_TOL = 1e-12


def _phase(theta_ab: PhaseLike) -> ABPhase:
    return theta_ab if isinstance(theta_ab, ABPhase) else ABPhase.of(float(theta_ab))


# --- States ---

class TwoLevelState(BaseModel):
    """α|ψ_up⟩ + β|ψ_down⟩."""

    model_config = ConfigDict(frozen=True)

    alpha: complex
    beta: complex

    @model_validator(mode="after")
    def _normalized(self):
        check_normalized(abs(self.alpha) ** 2 + abs(self.beta) ** 2, NORM_TOL, "two-level state")
        return self

    @classmethod
    def up(cls) -> "TwoLevelState":
        return cls(alpha=1.0, beta=0.0)

    @classmethod
    def down(cls) -> "TwoLevelState":
        return cls(alpha=0.0, beta=1.0)


class CycleState(BaseModel):
    """Amplitudes γ_1..γ_2N of the spin-flipped walker."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    amplitudes: np.ndarray

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _check(cls, value) -> np.ndarray:
        arr = np.array(value, dtype=complex)
        if arr.ndim != 1 or len(arr) < 2 or len(arr) % 2:
            raise ValueError(f"a cycle state needs an even number of sites, got shape {arr.shape}")
        check_normalized(float(np.sum(np.abs(arr) ** 2)), NORM_TOL, "cycle state")
        arr.setflags(write=False)
        return arr

    @classmethod
    def at_site(cls, size: int, site: int) -> "CycleState":
        """The walker localized on `site` (1-based)."""
        if not 1 <= site <= size:
            raise ValueError(f"site must be in [1, {size}], got {site}")
        amplitudes = np.zeros(size, dtype=complex)
        amplitudes[site - 1] = 1.0
        return cls(amplitudes=amplitudes)

    @property
    def size(self) -> int:
        return len(self.amplitudes)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


class WalkHamiltonian(BaseModel):
    """Cyclic hopping Hamiltonian on 2N sites with a uniform Peierls phase.

    A single ion (two sites) is accepted: both bonds then join the same pair
    and the coupling is 2ħj cos θ_AB, the identical-spin two-level element.
    """

    model_config = ConfigDict(frozen=True)

    n_ions: int = Field(..., ge=1)
    rate_j: float = Field(..., gt=0, description="Hopping rate j, rad/s (or 1 in normalized units)")
    theta_ab: ABPhase

    @property
    def size(self) -> int:
        return 2 * self.n_ions

    def hopping_matrix(self) -> np.ndarray:
        """H / ħj: e^{iθ} on (n+1, n) and e^{−iθ} on (n, n+1), cyclic."""
        shift = np.roll(np.eye(self.size), 1, axis=0)
        phase = np.exp(1j * self.theta_ab.theta_ab)
        return phase * shift + np.conj(phase) * shift.T

    def matrix(self) -> np.ndarray:
        """The Hamiltonian in joules."""
        return CONSTANTS.hbar * self.rate_j * self.hopping_matrix()

    def eigenvalues(self) -> np.ndarray:
        """Closed-form spectrum 2ħj cos(2πm/2N − θ_AB), m = 0..2N−1, in joules."""
        return CONSTANTS.hbar * self.rate_j * self._band()

    def _band(self) -> np.ndarray:
        k = np.arange(self.size)
        return 2.0 * np.cos(2.0 * math.pi * k / self.size - self.theta_ab.theta_ab)


class InterferenceTable(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    theta_ab: np.ndarray
    t_normalized: np.ndarray
    p_up: np.ndarray = Field(..., description="Shape (n_theta, n_t)")


class WalkTable(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    theta_ab: float
    initial_site: int
    t_normalized: np.ndarray
    probabilities: np.ndarray = Field(..., description="Shape (n_t, 2N); column n-1 is site n")


class FilterTrace(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    theta_ab: float
    t_normalized: np.ndarray
    p_stay_identical: np.ndarray
    p_stay_flipped: np.ndarray


class SuperpositionResult(BaseModel):
    """Orientation probabilities when one ion's spin is c_up|↑⟩ + c_down|↓⟩."""

    model_config = ConfigDict(frozen=True)

    p_up_identical: float = Field(..., description="Branch with all spins identical")
    p_up_flipped: float = Field(..., description="Branch with the one ion flipped")
    p_up: float = Field(..., description="Weighted total")


# --- Identical spins: two-level sector ---

def evolve_two_level(
    state: TwoLevelState,
    rate_j: float,
    theta_ab: PhaseLike,
    t: float,
) -> TwoLevelState:
    """Applies exp(−iHt/ħ) with H = 2ħj cos(θ_AB) σ_x.

    Args:
        state: Normalized starting state.
        rate_j: Hopping rate j.
        theta_ab: AB phase in radians or as an ABPhase.
        t: Non-negative time in units matching rate_j.

    Returns:
        The evolved state.
    """
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    angle = 2.0 * rate_j * t * math.cos(_phase(theta_ab).theta_ab)
    c, s = math.cos(angle), math.sin(angle)
    return TwoLevelState(
        alpha=c * state.alpha - 1j * s * state.beta,
        beta=c * state.beta - 1j * s * state.alpha,
    )


def probability_up(state: Union[TwoLevelState, CycleState]) -> float:
    """Probability of the up orientation."""
    if isinstance(state, CycleState):
        return orientation_probability(state)
    return abs(state.alpha) ** 2


def interference_scan(
    rate_j: float,
    theta_list: Sequence[PhaseLike],
    t_grid: Sequence[float],
) -> InterferenceTable:
    """P_up(t) from |ψ_up⟩ for each AB phase.

    Args:
        rate_j: Hopping rate j; pass 1 to give t_grid in units of 1/j.
        theta_list: AB phases.
        t_grid: Non-negative times.

    Returns:
        InterferenceTable with one trace per phase.
    """
    times = np.asarray(t_grid, dtype=float)
    start = TwoLevelState.up()

    def _trace(theta: PhaseLike) -> np.ndarray:
        return np.array([probability_up(evolve_two_level(start, rate_j, theta, t)) for t in times])

    traces = parallel_map(_trace, list(theta_list))
    return InterferenceTable(
        theta_ab=np.array([float(t.theta_ab if isinstance(t, ABPhase) else t) for t in theta_list]),
        t_normalized=times * rate_j,
        p_up=np.array(traces),
    )


# --- One flipped spin: cyclic walk ---

def build_cycle_hamiltonian(n_ions: int, rate_j: float, theta_ab: PhaseLike) -> WalkHamiltonian:
    """The 2N-site cyclic walk Hamiltonian; θ_AB = 0 gives plain nearest-neighbour hopping."""
    return WalkHamiltonian(n_ions=n_ions, rate_j=rate_j, theta_ab=_phase(theta_ab))


def _propagate(h: WalkHamiltonian, amplitudes: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Amplitudes at each time, shape (n_t, 2N), via the discrete Fourier eigenbasis."""
    spectrum = np.fft.fft(amplitudes)
    phases = np.exp(-1j * h.rate_j * np.outer(times, h._band()))
    return np.fft.ifft(phases * spectrum[None, :], axis=1)


def evolve_cycle(h: WalkHamiltonian, state: CycleState, t: float) -> CycleState:
    """exp(−iHt/ħ) applied to a normalized cycle state."""
    if state.size != h.size:
        raise ValueError(f"state has {state.size} sites, Hamiltonian has {h.size}")
    amplitudes = _propagate(h, state.amplitudes, np.array([float(t)]))[0]
    return CycleState(amplitudes=amplitudes)


def walk_distribution(h: WalkHamiltonian, initial_site: int, t_grid: Sequence[float]) -> WalkTable:
    """Site probabilities p_n(t) of a walker started on `initial_site` (1-based)."""
    start = CycleState.at_site(h.size, initial_site)
    times = np.asarray(t_grid, dtype=float)
    probabilities = np.abs(_propagate(h, start.amplitudes, times)) ** 2
    return WalkTable(
        theta_ab=h.theta_ab.theta_ab,
        initial_site=initial_site,
        t_normalized=times * h.rate_j,
        probabilities=probabilities,
    )


def spin_site_label(orientation: Orientation, position_index: int, n_ions: int) -> int:
    """Cycle site of an orientation with the flipped ion at `position_index`."""
    if not 1 <= position_index <= n_ions:
        raise ValueError(f"position_index must be in [1, {n_ions}], got {position_index}")
    if orientation == "up":
        return 2 * position_index - 1
    if orientation == "down":
        return 2 * position_index
    raise ValueError(f"orientation must be 'up' or 'down', got {orientation!r}")


def site_orientation(site: int, n_ions: int) -> Tuple[Orientation, int]:
    """Inverse of spin_site_label."""
    if not 1 <= site <= 2 * n_ions:
        raise ValueError(f"site must be in [1, {2 * n_ions}], got {site}")
    return ("up" if site % 2 else "down"), (site + 1) // 2


def orientation_probability(state: CycleState) -> float:
    """Weight of the up orientation, Σ over odd sites of |γ_n|²."""
    return float(np.sum(state.probabilities()[0::2]))


# --- Spin-dependent filtering ---

def spin_filter_trace(
    n_ions: int,
    theta_ab: PhaseLike,
    t_grid: Sequence[float],
    rate_j: float = 1.0,
) -> FilterTrace:
    """Probability that the crystal keeps its initial up orientation.

    Identical spins evolve in the two-level sector; with one flipped spin
    the walker starts on site 1 and the up weight is summed over odd sites.
    At θ_AB = π/2 the identical crystal is frozen while the flipped one
    still rotates.
    """
    phase = _phase(theta_ab)
    times = np.asarray(t_grid, dtype=float)
    identical = np.array(
        [probability_up(evolve_two_level(TwoLevelState.up(), rate_j, phase, t)) for t in times]
    )
    walk = walk_distribution(build_cycle_hamiltonian(n_ions, rate_j, phase), 1, times)
    flipped = walk.probabilities[:, 0::2].sum(axis=1)
    return FilterTrace(
        theta_ab=phase.theta_ab,
        t_normalized=times * rate_j,
        p_stay_identical=identical,
        p_stay_flipped=flipped,
    )


def evolve_spin_superposition(
    n_ions: int,
    rate_j: float,
    theta_ab: PhaseLike,
    t: float,
    c_up: complex,
    c_down: complex,
) -> SuperpositionResult:
    """Orientation of an up crystal whose first ion is in c_up|↑⟩ + c_down|↓⟩.

    The two spin branches never mix: the ↓ branch is the identical-spin
    two-level rotor, the ↑ branch the spin-flipped cycle walk from site 1.
    """
    weight_up, weight_down = abs(c_up) ** 2, abs(c_down) ** 2
    try:
        check_normalized(weight_up + weight_down, NORM_TOL, "spin superposition")
    except NormalizationError:
        logger.error("spin amplitudes (%r, %r) are not normalized", c_up, c_down)
        raise

    identical = probability_up(evolve_two_level(TwoLevelState.up(), rate_j, theta_ab, t))
    h = build_cycle_hamiltonian(n_ions, rate_j, theta_ab)
    flipped = orientation_probability(evolve_cycle(h, CycleState.at_site(h.size, 1), t))
    return SuperpositionResult(
        p_up_identical=identical,
        p_up_flipped=flipped,
        p_up=weight_down * identical + weight_up * flipped,
    )


def mirror_sites(probabilities: np.ndarray, initial_site: int) -> np.ndarray:
    """Reflects site columns about `initial_site`: column n0+k ↔ n0−k (mod 2N)."""
    size = probabilities.shape[-1]
    n0 = initial_site - 1
    order = [(2 * n0 - k) % size for k in range(size)]
    return probabilities[..., order]
