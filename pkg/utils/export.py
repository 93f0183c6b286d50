"""CSV AND SVG OUTPUT.

Every table is written with the same dialect: comma separated, `\\n` line
endings, a mandatory header row and floats printed with 17 significant
digits, so identical inputs give byte-identical files. Optional `# key=value`
lines before the header carry run metadata. SVG figures are rendered with
the Agg backend, a fixed hash salt and no date stamp.
"""

import csv
import logging
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from utils.crystal import AdiabaticityResult, IonConfiguration, ModeScan, spectrum_table  # noqa: E402
from utils.cyclewalk import FilterTrace, InterferenceTable, WalkTable  # noqa: E402
from utils.rotor import RotorPotential  # noqa: E402
from utils.tunnel import TunnelDoublet  # noqa: E402

logger = logging.getLogger(__name__)

plt.rcParams["svg.hashsalt"] = "qtr-sim"
plt.rcParams["svg.fonttype"] = "none"


# --- CSV ---

def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence],
    comments: Optional[Mapping[str, object]] = None,
) -> Path:
    """Writes one table in the fixed CSV dialect.

    Args:
        path: Destination file.
        header: Column names.
        rows: Row values; floats are printed with 17 significant digits.
        comments: Metadata written as `# key=value` lines before the header.

    Returns:
        The path written.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        for key, value in (comments or {}).items():
            handle.write(f"# {key}={format_value(value)}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    logger.info("wrote %s", path)
    return path


def write_modes_csv(path: Path, scan: ModeScan) -> Path:
    rows = [
        (r["ratio"], r["mode_index"], r["freq_over_omega_z"], r["label"])
        for r in spectrum_table(scan)
    ]
    return write_csv(path, ["ratio", "mode_index", "freq_over_omega_z", "label"], rows)


def write_eigenvectors_csv(path: Path, scan: ModeScan) -> Path:
    rows = []
    for ratio, spectrum in zip(scan.ratios, scan.spectra):
        for k, pattern in enumerate(spectrum.eigenvectors):
            for i, (dx, dz) in enumerate(pattern):
                rows.append((ratio, k, i + 1, dx, dz))
    return write_csv(path, ["ratio", "mode_index", "ion_index", "dx", "dz"], rows)


def write_potential_csv(path: Path, potential: RotorPotential, config_hash: str) -> Path:
    comments = {
        "method": potential.method,
        "n_ions": potential.n_ions,
        "inertia_kg_m2": potential.inertia,
        "barrier_J": potential.barrier,
        "config_hash": config_hash,
    }
    rows = zip(potential.theta_grid, potential.values, potential.values_dimensionless)
    return write_csv(path, ["theta_rad", "V_joule", "V_dimensionless"], rows, comments)


def write_inertia_csv(path: Path, potential: RotorPotential) -> Path:
    trace = potential.inertia_trace
    if trace is None:
        trace = np.full(len(potential.theta_grid), potential.inertia)
    return write_csv(path, ["theta_rad", "inertia_kg_m2"], zip(potential.theta_grid, trace))


def write_geometries_csv(path: Path, up: IonConfiguration, down: IonConfiguration) -> Path:
    rows = []
    for name, ions in (("up", up), ("down", down)):
        for i, (x, z) in enumerate(ions.positions):
            rows.append((name, i + 1, x, z))
    return write_csv(path, ["orientation", "ion_index", "x", "z"], rows)


def write_wavefunctions_csv(path: Path, doublet: TunnelDoublet) -> Path:
    rows = zip(doublet.theta_grid, doublet.psi0, doublet.psi1, doublet.psi_up, doublet.psi_down)
    return write_csv(path, ["theta_rad", "psi0", "psi1", "psi_up", "psi_down"], rows)


def write_doublets_csv(path: Path, doublets: Mapping[str, TunnelDoublet]) -> Path:
    header = [
        "e0_J", "e1_J", "splitting_J", "rate_hz", "method", "resolution",
        "rate_j_rad_s", "solver", "splitting_hz",
    ]
    rows = [
        (d.e0, d.e1, d.splitting, d.rate_hz, method, d.resolution, d.rate_j, d.method, d.splitting_hz)
        for method, d in doublets.items()
    ]
    return write_csv(path, header, rows)


def write_walk_csv(path: Path, table: WalkTable, n_ions: int) -> Path:
    rows = []
    for t, probs in zip(table.t_normalized, table.probabilities):
        for site, p in enumerate(probs, start=1):
            rows.append((t, site, p))
    comments = {"n_ions": n_ions, "theta_ab": table.theta_ab, "initial_site": table.initial_site}
    return write_csv(path, ["t_normalized", "site", "probability"], rows, comments)


def write_interference_csv(path: Path, table: InterferenceTable) -> Path:
    rows = []
    for t_index, t in enumerate(table.t_normalized):
        for k, theta in enumerate(table.theta_ab):
            rows.append((t, theta, table.p_up[k, t_index]))
    return write_csv(path, ["t_normalized", "theta_ab", "p_up"], rows)


def write_filter_csv(path: Path, trace: FilterTrace) -> Path:
    rows = zip(trace.t_normalized, trace.p_stay_identical, trace.p_stay_flipped)
    return write_csv(
        path,
        ["t_normalized", "p_stay_identical", "p_stay_flipped"],
        rows,
        {"theta_ab": trace.theta_ab},
    )


def write_adiabat_csv(path: Path, result: AdiabaticityResult, omega_x: np.ndarray) -> Path:
    rows = zip(result.times, omega_x, result.omega_rot, result.eta)
    return write_csv(
        path,
        ["t_s", "omega_x_rad_s", "omega_rot_rad_s", "eta"],
        rows,
        {"eta_max": result.eta_max},
    )


# --- SVG ---

def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("wrote %s", path)
    return Path(path)


def plot_modes(path: Path, scan: ModeScan) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    freqs = np.array([s.frequencies for s in scan.spectra])
    for k in range(freqs.shape[1]):
        ax.plot(scan.ratios, freqs[:, k], color="0.5", linewidth=1.0)
    rot = [s.rotational_frequency for s in scan.spectra]
    ax.plot(scan.ratios, rot, color="tab:red", linewidth=1.5, label="rotational")
    ax.set_xlabel(r"$\omega_x/\omega_z$")
    ax.set_ylabel(r"$\omega/\omega_z$")
    ax.legend(loc="best")
    return _save(fig, path)


def plot_potential(
    path: Path,
    potentials: Dict[str, RotorPotential],
    doublet: Optional[TunnelDoublet] = None,
) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for method, potential in potentials.items():
        ax.plot(potential.theta_grid, potential.values / 1.0e-30, label=method)
    ax.set_xlabel(r"$\theta$ (rad)")
    ax.set_ylabel(r"$V(\theta)$ ($10^{-30}$ J)")
    if doublet is not None:
        twin = ax.twinx()
        twin.plot(doublet.theta_grid, doublet.psi_up**2, "--", color="tab:blue", label=r"$|\psi_{up}|^2$")
        twin.plot(doublet.theta_grid, doublet.psi_down**2, "--", color="tab:orange", label=r"$|\psi_{down}|^2$")
        twin.set_ylabel("probability density")
        twin.legend(loc="upper right")
    ax.legend(loc="upper left")
    return _save(fig, path)


def plot_walk(path: Path, table: WalkTable) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    size = table.probabilities.shape[1]
    extent = [0.5, size + 0.5, table.t_normalized[0], table.t_normalized[-1]]
    image = ax.imshow(
        table.probabilities, aspect="auto", origin="lower", extent=extent, vmin=0.0, vmax=1.0
    )
    fig.colorbar(image, ax=ax, label="probability")
    ax.set_xlabel("site")
    ax.set_ylabel(r"$j t$")
    ax.set_title(rf"$\theta_{{AB}}$ = {table.theta_ab:.4f}")
    return _save(fig, path)


def plot_interference(path: Path, table: InterferenceTable) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for theta, trace in zip(table.theta_ab, table.p_up):
        ax.plot(table.t_normalized, trace, label=rf"$\theta_{{AB}}$={theta:.4f}")
    ax.set_xlabel(r"$j t$")
    ax.set_ylabel(r"$P_{up}$")
    ax.legend(loc="best")
    return _save(fig, path)


def plot_filter(path: Path, trace: FilterTrace) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(trace.t_normalized, trace.p_stay_identical, label="identical spins")
    ax.plot(trace.t_normalized, trace.p_stay_flipped, label="one spin flipped")
    ax.set_xlabel(r"$j t$")
    ax.set_ylabel("probability of initial orientation")
    ax.legend(loc="best")
    return _save(fig, path)


def plot_adiabat(path: Path, result: AdiabaticityResult) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(result.times * 1e3, result.eta)
    ax.set_xlabel("t (ms)")
    ax.set_ylabel(r"$|\dot\omega_{Rot}|/\omega_{Rot}^2$")
    return _save(fig, path)
