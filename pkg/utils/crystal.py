"""WIGNER CRYSTAL EQUILIBRIA AND NORMAL MODES.

Classical potential energy surface of N identical ions in a planar
anisotropic harmonic trap, a trust-region Newton minimizer on the analytic
Hessian, normal-mode analysis, anisotropy scans with mode tracking and the
adiabaticity of an anisotropy ramp.

All quantities are dimensionless: lengths in units of the characteristic
length l, energies in units of e²/(4πε₀l) and frequencies in units of ω_z.
Coordinates are handled as flat vectors [x_1..x_N, z_1..z_N].

The Coulomb term is 1/r_ij. The printed trap Hamiltonian this simulator
follows shows e²/(4πε₀ r_ij²), which is not an energy; every physical
result it quotes requires the ordinary Coulomb energy.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.linalg import eigh, null_space
from scipy.optimize import linear_sum_assignment

from core.errors import (
    ConvergenceError,
    QTRError,
    RampError,
    RatioError,
    SaddlePointError,
    SingularConfigurationError,
    UnstableEquilibriumError,
)
from core.physcore import TrapConfig
from core.settings import parallel_map

logger = logging.getLogger(__name__)

# --- Solver constants ---

GRAD_TOL = 1e-10
# Orientation-constrained relaxations feed energy differences of order 1e-10.
RELAX_GRAD_TOL = 1e-12
MAX_ITER = 500
# Smallest Hessian eigenvalue tolerated at a minimum.
SADDLE_TOL = 1e-8
# Hessian eigenvalues of smaller magnitude carry no usable curvature.
CURVATURE_FLOOR = 1e-14
# Gradient components below this are rounding noise; no step is taken along them.
GRAD_NOISE = 1e-13
# Predicted decreases below this (relative to |E|) are not resolved by the energy.
ENERGY_NOISE = 1e-13
INITIAL_TRUST_RADIUS = 0.1
MAX_TRUST_RADIUS = 1.0
# Positions closer than this count as the same ion site.
SAME_SITE_TOL = 1e-6

SEED_NAMES = ("chain", "ring-up", "ring-down")


# --- Domain types ---

class IonConfiguration(BaseModel):
    """Ion positions (x_i, z_i) in units of the characteristic length."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    positions: np.ndarray = Field(..., description="Array of shape (N, 2), columns x and z")

    @field_validator("positions", mode="before")
    @classmethod
    def _check_positions(cls, value) -> np.ndarray:
        arr = np.array(value, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
            raise ValueError(f"positions must have shape (N, 2), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("positions must be finite")
        _pair_geometry(np.concatenate([arr[:, 0], arr[:, 1]]))
        arr.setflags(write=False)
        return arr

    @classmethod
    def from_flat(cls, flat: np.ndarray) -> "IonConfiguration":
        n = len(flat) // 2
        return cls(positions=np.column_stack([flat[:n], flat[n:]]))

    @property
    def n_ions(self) -> int:
        return self.positions.shape[0]

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.positions[:, 0], self.positions[:, 1]])


class ModeSpectrum(BaseModel):
    """Collective modes of an equilibrium crystal, sorted by frequency.

    `eigenvectors[k]` is the displacement pattern of mode k as an (N, 2)
    array of per-ion (δx, δz); the flattened patterns are orthonormal.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    anisotropy: float
    frequencies: np.ndarray = Field(..., description="omega_k / omega_z, ascending")
    eigenvectors: np.ndarray = Field(..., description="Shape (2N, N, 2)")
    labels: Tuple[str, ...] = ()

    @property
    def rotational_index(self) -> int:
        return self.labels.index("rotational")

    @property
    def rotational_frequency(self) -> float:
        return float(self.frequencies[self.rotational_index])

    def flat_vectors(self) -> np.ndarray:
        """Eigenvectors as columns of a (2N, 2N) matrix in flat coordinates."""
        return np.column_stack(
            [np.concatenate([v[:, 0], v[:, 1]]) for v in self.eigenvectors]
        )


class ModeScan(BaseModel):
    """Spectra along an anisotropy grid with tracked mode identities.

    `tracks[r, k]` is the identity of the k-th sorted mode at ratio r; the
    identities are the sorted indices at the first grid point.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    ratios: np.ndarray
    spectra: List[ModeSpectrum]
    tracks: np.ndarray
    equilibria: List[IonConfiguration]


class AdiabaticityResult(BaseModel):
    """Adiabaticity η(t) = |dω_Rot/dt| / ω_Rot² along a sampled ramp."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    omega_rot: np.ndarray = Field(..., description="Rotational mode frequency, rad/s")
    eta: np.ndarray
    eta_max: float


# --- Potential energy surface ---

def _pair_geometry(flat: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pair differences and distances; raises on coincident ions."""
    n = len(flat) // 2
    x, z = flat[:n], flat[n:]
    dx = x[:, None] - x[None, :]
    dz = z[:, None] - z[None, :]
    r = np.hypot(dx, dz)
    off = ~np.eye(n, dtype=bool)
    if np.any(r[off] == 0.0):
        raise SingularConfigurationError("two ions occupy the same position")
    # Unit diagonal keeps the inverse powers finite; masked below.
    np.fill_diagonal(r, 1.0)
    return dx, dz, r


def _energy(flat: np.ndarray, rho: float) -> float:
    n = len(flat) // 2
    x, z = flat[:n], flat[n:]
    harmonic = 0.5 * np.sum(rho**2 * x**2 + z**2)
    if n == 1:
        return float(harmonic)
    _, _, r = _pair_geometry(flat)
    iu = np.triu_indices(n, k=1)
    return float(harmonic + np.sum(1.0 / r[iu]))


def _gradient(flat: np.ndarray, rho: float) -> np.ndarray:
    n = len(flat) // 2
    x, z = flat[:n], flat[n:]
    dx, dz, r = _pair_geometry(flat)
    inv_r3 = r**-3
    np.fill_diagonal(inv_r3, 0.0)
    gx = rho**2 * x - np.sum(dx * inv_r3, axis=1)
    gz = z - np.sum(dz * inv_r3, axis=1)
    return np.concatenate([gx, gz])


def _hessian(flat: np.ndarray, rho: float) -> np.ndarray:
    n = len(flat) // 2
    dx, dz, r = _pair_geometry(flat)
    inv_r5 = r**-5
    np.fill_diagonal(inv_r5, 0.0)
    r2 = r**2

    # Pair tensors (3 d_a d_b - r² δ_ab) / r⁵ for i != j.
    txx = (3.0 * dx * dx - r2) * inv_r5
    tzz = (3.0 * dz * dz - r2) * inv_r5
    txz = 3.0 * dx * dz * inv_r5

    hxx = np.diag(np.sum(txx, axis=1) + rho**2) - txx
    hzz = np.diag(np.sum(tzz, axis=1) + 1.0) - tzz
    hxz = np.diag(np.sum(txz, axis=1)) - txz
    return np.block([[hxx, hxz], [hxz, hzz]])


def potential_energy(config: TrapConfig, ions: IonConfiguration) -> float:
    """Dimensionless potential energy Σ(ρ²x² + z²)/2 + Σ_{i>j} 1/r_ij.

    The ion count is taken from `ions`; `config` supplies the anisotropy.

    Args:
        config: The trap scenario.
        ions: Positions in units of the characteristic length.

    Returns:
        The energy in units of e²/(4πε₀l).
    """
    return _energy(ions.flat, config.anisotropy)


def gradient(config: TrapConfig, ions: IonConfiguration) -> np.ndarray:
    """Analytic gradient of potential_energy as a flat 2N-vector."""
    return _gradient(ions.flat, config.anisotropy)


def hessian(config: TrapConfig, ions: IonConfiguration) -> np.ndarray:
    """Analytic 2N×2N Hessian of potential_energy (symmetric by construction)."""
    return _hessian(ions.flat, config.anisotropy)


# --- Geometry helpers ---

def rotation_generator(flat: np.ndarray) -> np.ndarray:
    """Rigid-rotation direction (−z_i, x_i) in flat coordinates."""
    n = len(flat) // 2
    return np.concatenate([-flat[n:], flat[:n]])


def rotate(ions: IonConfiguration, theta: float) -> IonConfiguration:
    """Rotates all ions rigidly by `theta` in the x–z plane."""
    c, s = math.cos(theta), math.sin(theta)
    x, z = ions.positions[:, 0], ions.positions[:, 1]
    return IonConfiguration(positions=np.column_stack([c * x - s * z, s * x + c * z]))


def mirror_z(ions: IonConfiguration) -> IonConfiguration:
    """Reflects the crystal through the x axis (z → −z)."""
    return IonConfiguration(positions=ions.positions * np.array([1.0, -1.0]))


def mirror_x(ions: IonConfiguration) -> IonConfiguration:
    """Reflects the crystal through the z axis (x → −x)."""
    return IonConfiguration(positions=ions.positions * np.array([-1.0, 1.0]))


def same_sites(a: IonConfiguration, b: IonConfiguration, tol: float = SAME_SITE_TOL) -> bool:
    """True when two crystals occupy the same sites up to ion relabeling."""
    if a.n_ions != b.n_ions:
        return False
    distance = np.hypot(
        a.positions[:, None, 0] - b.positions[None, :, 0],
        a.positions[:, None, 1] - b.positions[None, :, 1],
    )
    rows, cols = linear_sum_assignment(distance)
    return bool(np.max(distance[rows, cols]) < tol)


def opposite_orientation(ions: IonConfiguration) -> IonConfiguration:
    """The degenerate partner of an equilibrium under the trap reflections.

    Both reflections leave the energy unchanged. A crystal symmetric under
    z → −z (for three ions, a vertex on the x axis) is paired with its x
    mirror image, any other with its z mirror image. A crystal symmetric
    under both comes back as its own z mirror image.

    Args:
        ions: An equilibrium configuration.

    Returns:
        The reflected configuration.
    """
    flipped = mirror_z(ions)
    if not same_sites(flipped, ions):
        return flipped
    other = mirror_x(ions)
    return flipped if same_sites(other, ions) else other


def ring_radius(n_ions: int) -> float:
    """Radius of the regular N-gon balancing Coulomb and isotropic trap forces."""
    k = np.arange(1, n_ions)
    return float((0.25 * np.sum(1.0 / np.sin(np.pi * k / n_ions))) ** (1.0 / 3.0))


def regular_polygon(n_ions: int, radius: Optional[float] = None) -> np.ndarray:
    """Flat coordinates of the regular N-gon with ion 1 on +z."""
    r = ring_radius(n_ions) if radius is None else radius
    phi = 2.0 * np.pi * np.arange(n_ions) / n_ions
    return np.concatenate([r * np.sin(phi), r * np.cos(phi)])


def alignment_angle(reference: np.ndarray, target: np.ndarray) -> float:
    """Rotation angle α minimizing |rotate(reference, α) − target|.

    At the optimum the residual is orthogonal to the rotation generator of
    the rotated reference.
    """
    n = len(reference) // 2
    c = reference[n:] + 1j * reference[:n]
    u = target[n:] + 1j * target[:n]
    return float(np.angle(np.sum(c * np.conj(u))))


def symmetric_orientations(n_ions: int) -> Tuple[float, float]:
    """Rotations of the vertex-on-+z polygon onto its two mirror-symmetric families.

    The first keeps a vertex on the z axis. The second puts a vertex on the
    x axis for odd N and turns the polygon by half a vertex spacing for
    even N. Only these orientations are stationary for the relaxed crystal.
    """
    return 0.0, (-0.5 * math.pi if n_ions % 2 else math.pi / n_ions)


def seed_configuration(n_ions: int, name: str) -> IonConfiguration:
    """Builds a named starting configuration.

    Args:
        n_ions: Number of ions.
        name: "chain" (equispaced along z), "ring-up" or "ring-down"
            (the exact regular N-gon with a vertex on +z or −z).
            find_equilibrium settles the orientation of ring seeds itself.

    Returns:
        The seed configuration.
    """
    if name == "chain":
        z = np.arange(n_ions, dtype=float) - 0.5 * (n_ions - 1)
        spacing = 2.0 * ring_radius(2) if n_ions == 2 else 1.0
        return IonConfiguration(positions=np.column_stack([np.zeros(n_ions), spacing * z]))

    if name not in ("ring-up", "ring-down"):
        raise ValueError(f"unknown seed {name!r}; expected one of {SEED_NAMES}")

    up = IonConfiguration.from_flat(regular_polygon(n_ions))
    return up if name == "ring-up" else mirror_z(up)


# --- Trust-region Newton ---

class MinimizeResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: np.ndarray
    energy: float
    grad_norm: float
    iterations: int
    min_eigenvalue: float


def _trust_step(lam: np.ndarray, gv: np.ndarray, radius: float) -> Tuple[np.ndarray, float]:
    """Minimizes the quadratic model inside the trust radius (eigenbasis).

    Args:
        lam: Hessian eigenvalues, ascending.
        gv: Gradient components along the matching eigenvectors.
        radius: Trust radius.

    Returns:
        The step in the eigenbasis and the decrease the model predicts.
    """
    # Freeze directions without curvature and directions whose gradient is
    # rounding noise. The rotational direction of a mirror-symmetric crystal
    # is both, and stepping along it only walks the crystal around the ring.
    active = (np.abs(lam) > CURVATURE_FLOOR) & (np.abs(gv) > GRAD_NOISE)
    step = np.zeros_like(gv)
    if not np.any(active):
        return step, 0.0
    la, ga = lam[active], gv[active]

    # Plain Newton step when the model is convex and the step fits.
    lam_min = la.min()
    if lam_min > 0.0:
        newton = -ga / la
        if np.linalg.norm(newton) <= radius:
            step[active] = newton
            return step, float(0.5 * np.sum(ga**2 / la))

    # Otherwise bisect the Levenberg shift mu so that |s(mu)| = radius;
    # mu above -lam_min keeps every shifted curvature positive.
    lo = max(0.0, -lam_min) * (1.0 + 1e-12) + 1e-300
    hi = lo + np.linalg.norm(ga) / radius + abs(lam_min)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.linalg.norm(ga / (la + mid)) > radius:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    shifted = -ga / (la + hi)
    step[active] = shifted
    predicted = -(ga @ shifted + 0.5 * np.sum(la * shifted**2))
    return step, float(predicted)


def minimize(
    config: TrapConfig,
    x0: np.ndarray,
    basis: Optional[np.ndarray] = None,
    grad_tol: float = GRAD_TOL,
    max_iter: int = MAX_ITER,
) -> MinimizeResult:
    """Trust-region Newton minimization of the crystal energy.

    The search is restricted to the affine subspace x0 + span(basis) when a
    basis with orthonormal columns is given; that is how the rotor module
    relaxes the crystal at a fixed orientation.

    Iteration stops as soon as the max-norm of the (projected) gradient is
    below `grad_tol`, so a converged start comes back unchanged. A step is
    accepted when the energy falls by a sizeable share of the predicted
    decrease. Once the predicted decrease is below what the energy resolves,
    a step is accepted only if it lowers the gradient norm.

    Args:
        config: Trap scenario (anisotropy).
        x0: Flat starting coordinates.
        basis: Optional (2N, k) matrix of allowed directions.
        grad_tol: Max-norm tolerance on the (projected) gradient.
        max_iter: Iteration limit.

    Returns:
        MinimizeResult with the converged coordinates and the smallest
        eigenvalue of the (projected) Hessian there.

    Raises:
        ConvergenceError: The iteration limit is reached or the trust
            region collapses.
    """
    rho = config.anisotropy
    q = np.eye(len(x0)) if basis is None else basis
    x = np.array(x0, dtype=float)
    energy = _energy(x, rho)
    radius = INITIAL_TRUST_RADIUS
    scale = max(1.0, abs(energy))
    grad_norm = math.inf

    for iteration in range(max_iter):
        # Project gradient and Hessian onto the allowed subspace.
        g_red = q.T @ _gradient(x, rho)
        h_red = q.T @ _hessian(x, rho) @ q
        lam, vecs = eigh(h_red)
        grad_norm = float(np.max(np.abs(q @ g_red)))
        if grad_norm < grad_tol:
            return MinimizeResult(
                x=x, energy=energy, grad_norm=grad_norm,
                iterations=iteration, min_eigenvalue=float(lam[0]),
            )

        # Solve the trust-region subproblem in the Hessian eigenbasis.
        gv = vecs.T @ g_red
        step_v, predicted = _trust_step(lam, gv, radius)
        logger.debug(
            "newton iter %d: E=%.16g |g|=%.3e pred=%.3e radius=%.3e",
            iteration, energy, grad_norm, predicted, radius,
        )
        step_norm = float(np.linalg.norm(step_v))
        if step_norm == 0.0:
            break
        step = q @ (vecs @ step_v)
        trial = x + step
        try:
            trial_energy = _energy(trial, rho)
        except SingularConfigurationError:
            radius = 0.25 * step_norm
            continue

        # Judge the step against the model.
        actual = energy - trial_energy
        if predicted > ENERGY_NOISE * scale:
            ratio = actual / predicted
            if ratio < 0.25:
                radius = 0.25 * step_norm
            elif ratio > 0.75 and step_norm >= 0.99 * radius:
                radius = min(2.0 * radius, MAX_TRUST_RADIUS)
            accept = ratio > 1e-4
        else:
            trial_norm = float(np.max(np.abs(q @ (q.T @ _gradient(trial, rho)))))
            accept = trial_norm < grad_norm
            if not accept:
                radius = 0.25 * step_norm
        if accept:
            x = trial
            energy = trial_energy
        if radius < 1e-14:
            break

    raise ConvergenceError("Newton minimization did not converge", x, grad_norm)


# --- Equilibria ---

def relax_orientation(
    config: TrapConfig,
    x0: np.ndarray,
    reference: np.ndarray,
    grad_tol: float = RELAX_GRAD_TOL,
) -> MinimizeResult:
    """Minimizes the energy with the collective angle of `reference` held fixed.

    Displacements are restricted to the complement of the rigid-rotation
    generator of `reference`.
    """
    gen = rotation_generator(reference)
    return minimize(config, x0, basis=null_space(gen[None, :]), grad_tol=grad_tol)


def _ring_equilibrium(config: TrapConfig) -> np.ndarray:
    # Relax each mirror-symmetric orientation with its angle held fixed and
    # keep the lower one; the other is the top of the rotor barrier.
    polygon = IonConfiguration.from_flat(regular_polygon(config.n_ions))
    best: Optional[MinimizeResult] = None
    for alpha in symmetric_orientations(config.n_ions):
        start = rotate(polygon, alpha).flat
        result = relax_orientation(config, start, start)
        logger.debug("orientation %.6f: E=%.16g", alpha, result.energy)
        if best is None or result.energy < best.energy:
            best = result
    return best.x


def find_equilibrium(
    config: TrapConfig,
    seed: Union[IonConfiguration, str],
) -> IonConfiguration:
    """Finds a local minimum of the crystal energy.

    Ring seeds do not fix the orientation. Both mirror-symmetric
    orientations of the polygon are relaxed with the collective angle held
    fixed and the lower one is kept: "ring-up" returns it and "ring-down"
    its degenerate mirror partner (see opposite_orientation). For three
    ions above isotropy the up crystal has a vertex on +x. The result is
    then polished without constraint.

    Args:
        config: Trap scenario.
        seed: A starting IonConfiguration or one of "chain", "ring-up",
            "ring-down".

    Returns:
        The equilibrium configuration.

    Raises:
        ConvergenceError: The minimizer did not converge.
        SaddlePointError: The stationary point found is not a minimum.
    """
    named = isinstance(seed, str)
    if named and seed != "chain":
        if seed not in SEED_NAMES:
            raise ValueError(f"unknown seed {seed!r}; expected one of {SEED_NAMES}")
        x = _ring_equilibrium(config)
    else:
        x = (seed_configuration(config.n_ions, seed) if named else seed).flat

    result = minimize(config, x)
    if result.min_eigenvalue < -SADDLE_TOL:
        raise SaddlePointError(result.min_eigenvalue)
    logger.info(
        "equilibrium (N=%d, rho=%.6f) after %d iterations, |grad|=%.2e, E=%.12f",
        len(x) // 2, config.anisotropy, result.iterations, result.grad_norm, result.energy,
    )
    eq = IonConfiguration.from_flat(result.x)
    return opposite_orientation(eq) if seed == "ring-down" else eq


# --- Normal modes ---

def _label_modes(vectors: np.ndarray, equilibrium: np.ndarray) -> Tuple[str, ...]:
    n2 = vectors.shape[0]
    n = n2 // 2
    labels = [f"mode{k + 1}" for k in range(n2)]

    com_x = np.concatenate([np.ones(n), np.zeros(n)]) / math.sqrt(n)
    com_z = np.concatenate([np.zeros(n), np.ones(n)]) / math.sqrt(n)
    targets: List[Tuple[str, np.ndarray]] = [("com-x", com_x), ("com-z", com_z)]
    gen = rotation_generator(equilibrium)
    gen_norm = np.linalg.norm(gen)
    if gen_norm > 0.0:
        targets.insert(0, ("rotational", gen / gen_norm))

    taken = set()
    for name, target in targets:
        overlaps = np.abs(target @ vectors)
        overlaps[list(taken)] = -1.0
        k = int(np.argmax(overlaps))
        taken.add(k)
        labels[k] = name
    return tuple(labels)


def normal_modes(config: TrapConfig, equilibrium: IonConfiguration) -> ModeSpectrum:
    """Collective modes of an equilibrium crystal.

    Frequencies are ω_k/ω_z = sqrt(λ_k) with λ_k the dimensionless Hessian
    eigenvalues; the rotational mode is the one with the largest overlap
    with the rigid-rotation generator (−z_i, x_i).

    Args:
        config: Trap scenario (anisotropy).
        equilibrium: A converged equilibrium.

    Returns:
        The ModeSpectrum sorted by frequency.

    Raises:
        UnstableEquilibriumError: A Hessian eigenvalue is below −1e-8.
    """
    flat = equilibrium.flat
    lam, vecs = eigh(_hessian(flat, config.anisotropy))
    if lam[0] < -SADDLE_TOL:
        raise UnstableEquilibriumError(float(lam[0]))

    # Rounding can leave a zero mode slightly negative.
    frequencies = np.sqrt(np.clip(lam, 0.0, None))
    n = equilibrium.n_ions
    patterns = np.stack([np.column_stack([v[:n], v[n:]]) for v in vecs.T])
    return ModeSpectrum(
        anisotropy=config.anisotropy,
        frequencies=frequencies,
        eigenvectors=patterns,
        labels=_label_modes(vecs, flat),
    )


def rotational_mode(spectrum: ModeSpectrum) -> int:
    """Index of the rotational mode in a spectrum."""
    return spectrum.rotational_index


def _match_modes(previous: ModeSpectrum, current: ModeSpectrum) -> np.ndarray:
    """For each current mode, the index of the previous mode it continues."""
    overlap = np.abs(previous.flat_vectors().T @ current.flat_vectors())
    gap = np.abs(previous.frequencies[:, None] - current.frequencies[None, :])
    # Overlap decides; frequency proximity only breaks ties.
    cost = -overlap + 1e-6 * gap
    rows, cols = linear_sum_assignment(cost)
    order = np.empty(len(cols), dtype=int)
    order[cols] = rows
    return order


def scan_modes(
    config: TrapConfig,
    ratio_grid: Sequence[float],
    seed: Union[IonConfiguration, str] = "ring-up",
) -> ModeScan:
    """Normal-mode spectra along an anisotropy grid.

    Named seeds are solved afresh at every grid point, so each spectrum
    belongs to the lowest orientation at that ratio; both steps then run on
    the worker pool. A configuration seed is followed by continuation
    instead, each grid point seeded with the previous equilibrium.

    Args:
        config: Trap scenario; its anisotropy is replaced by each grid value.
        ratio_grid: Anisotropy values in scan order.
        seed: A seed name, or the configuration for the first grid point.

    Returns:
        A ModeScan with tracked mode identities.

    Raises:
        RatioError: A solver error at one grid point, with the ratio attached.
    """
    ratios = [float(r) for r in ratio_grid]
    if not ratios:
        raise ValueError("ratio_grid is empty")

    def _solve(ratio: float, start: Union[IonConfiguration, str]) -> Tuple[IonConfiguration, ModeSpectrum]:
        trap = config.with_anisotropy(ratio)
        try:
            eq = find_equilibrium(trap, start)
            return eq, normal_modes(trap, eq)
        except QTRError as exc:
            raise RatioError(ratio, exc) from exc

    if isinstance(seed, str):
        solved = parallel_map(lambda ratio: _solve(ratio, seed), ratios)
    else:
        solved = []
        current = seed
        for ratio in ratios:
            solved.append(_solve(ratio, current))
            current = solved[-1][0]
    equilibria = [eq for eq, _ in solved]
    spectra = [spectrum for _, spectrum in solved]

    tracks = np.zeros((len(ratios), 2 * config.n_ions), dtype=int)
    tracks[0] = np.arange(2 * config.n_ions)
    for k in range(1, len(spectra)):
        tracks[k] = tracks[k - 1][_match_modes(spectra[k - 1], spectra[k])]

    return ModeScan(ratios=np.array(ratios), spectra=spectra, tracks=tracks, equilibria=equilibria)


# --- Adiabatic ramp ---

def linear_ramp(
    config: TrapConfig,
    ratio_start: float,
    ratio_stop: float,
    duration: float,
    samples: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Times (s) and ω_x values (rad/s) of a linear anisotropy ramp."""
    times = np.linspace(0.0, duration, samples)
    ratios = np.linspace(ratio_start, ratio_stop, samples)
    return times, ratios * config.omega_z


def adiabaticity(
    config: TrapConfig,
    times: np.ndarray,
    omega_x: np.ndarray,
    seed: Union[IonConfiguration, str] = "ring-up",
) -> AdiabaticityResult:
    """Adiabaticity of an ω_x(t) ramp.

    Computes ω_Rot(t) at every ramp sample and returns
    η(t) = |dω_Rot/dt| / ω_Rot², the dimensionless form of the slow-ramp
    condition, together with its maximum.

    Args:
        config: Trap scenario (ω_z, N, mass).
        times: Strictly increasing sample times in seconds.
        omega_x: ω_x at each sample in rad/s.
        seed: A seed name solved at every sample, or a configuration
            followed by continuation.

    Returns:
        AdiabaticityResult with the full trace.

    Raises:
        RampError: Non-monotone times or a sample with ω_x ≤ ω_z.
    """
    times = np.asarray(times, dtype=float)
    omega_x = np.asarray(omega_x, dtype=float)
    if times.shape != omega_x.shape or times.ndim != 1 or len(times) < 2:
        raise RampError("ramp needs matching 1-D arrays of at least two samples")
    if np.any(np.diff(times) <= 0.0):
        raise RampError("ramp time samples must be strictly increasing")
    ratios = omega_x / config.omega_z
    if np.any(ratios <= 1.0):
        raise RampError(
            f"ramp reaches omega_x/omega_z = {ratios.min():.6f} <= 1 where the rotational mode vanishes"
        )

    # Named seeds are solved afresh per sample, configurations by
    # continuation; a repeated ratio reuses the previous frequency.
    omega_rot = np.empty(len(times))
    current = seed
    for k, ratio in enumerate(ratios):
        if k > 0 and ratio == ratios[k - 1]:
            omega_rot[k] = omega_rot[k - 1]
            continue
        trap = config.with_anisotropy(ratio)
        eq = find_equilibrium(trap, current)
        if not isinstance(seed, str):
            current = eq
        omega_rot[k] = normal_modes(trap, eq).rotational_frequency * config.omega_z

    eta = np.abs(np.gradient(omega_rot, times)) / omega_rot**2
    return AdiabaticityResult(times=times, omega_rot=omega_rot, eta=eta, eta_max=float(eta.max()))


def spectrum_table(scan: ModeScan) -> List[Dict[str, object]]:
    """Rows (ratio, mode_index, freq_over_omega_z, label) of a scan."""
    rows = []
    for ratio, spectrum, track in zip(scan.ratios, scan.spectra, scan.tracks):
        for k, freq in enumerate(spectrum.frequencies):
            label = spectrum.labels[k]
            if label.startswith("mode"):
                label = f"mode{track[k] + 1}"
            rows.append(
                {"ratio": float(ratio), "mode_index": k, "freq_over_omega_z": float(freq), "label": label}
            )
    return rows
