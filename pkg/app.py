"""QUANTUM TUNNELING ROTOR SIMULATOR.

Command-line front end. Each command reads an INI run configuration, runs
one pipeline (mode scan, rotor potential, tunneling doublet, cyclic walk,
AB interference, spin filter or ramp adiabaticity) and writes CSV tables
and/or SVG figures into the output directory.

Exit codes: 0 on success, 1 on a numerical failure, 2 on a usage or
configuration error.
"""

import argparse
import hashlib
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from core.errors import ConfigError, QTRError, RampError
from core.settings import (
    AdiabatSection,
    PotentialSection,
    RunConfig,
    TunnelSection,
    load_settings,
    parse_config_text,
)
from utils import export
from utils.crystal import adiabaticity, find_equilibrium, linear_ramp, opposite_orientation, scan_modes
from utils.cyclewalk import build_cycle_hamiltonian, interference_scan, spin_filter_trace, walk_distribution
from utils.rotor import effective_potential
from utils.tunnel import solve_ring, tunneling_report

logger = logging.getLogger(__name__)

FORMATS = ("csv", "svg", "both")
SEEDS = ("chain", "ring-up", "ring-down")


class CommandContext(BaseModel):
    """Everything a command needs besides the physics."""

    model_config = ConfigDict(frozen=True)

    config: RunConfig
    config_hash: str
    out_dir: Path
    fmt: str = "csv"
    seed: Optional[str] = None

    @property
    def csv(self) -> bool:
        return self.fmt in ("csv", "both")

    @property
    def svg(self) -> bool:
        return self.fmt in ("svg", "both")

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def seed_or(self, default: str) -> str:
        return self.seed or default


# --- Helper Functions ---

def _time_grid(ctx: CommandContext, section) -> np.ndarray:
    """Normalized time grid j·t of a walk-type section."""
    if section.t_max is not None:
        return np.linspace(0.0, section.t_max, section.t_steps)
    # SI time needs the tunneling rate of the configured trap.
    trap = ctx.config.trap.to_trap()
    rate_j = tunneling_report(trap, seed=ctx.seed_or("ring-up")).relaxed.rate_j
    logger.info("converting %.6g s with j = %.6g rad/s", section.t_max_seconds, rate_j)
    return np.linspace(0.0, section.t_max_seconds * rate_j, section.t_steps)


def _print_doublet(name: str, doublet) -> None:
    print(
        f"{name}: e0={doublet.e0:.6e} J e1={doublet.e1:.6e} J "
        f"splitting={doublet.splitting:.6e} J ({doublet.splitting_hz:.6g} Hz) "
        f"rate={doublet.rate_hz:.6g} Hz (splitting/2h) j={doublet.rate_j:.6g} rad/s (splitting/2hbar)"
    )


# --- Commands ---

def cmd_modes(ctx: CommandContext) -> int:
    section = ctx.config.section("modes")
    trap = ctx.config.trap.to_trap()
    scan = scan_modes(trap, section.ratio_grid, ctx.seed_or(section.seed))
    if ctx.csv:
        export.write_modes_csv(ctx.path("modes.csv"), scan)
        if section.eigenvectors:
            export.write_eigenvectors_csv(ctx.path("eigenvectors.csv"), scan)
    if ctx.svg:
        export.plot_modes(ctx.path("modes.svg"), scan)
    return 0


def cmd_potential(ctx: CommandContext) -> int:
    section = ctx.config.potential or PotentialSection()
    trap = ctx.config.trap.to_trap()
    eq = find_equilibrium(trap, ctx.seed_or(section.seed))
    potentials = {
        method: effective_potential(trap, method, section.grid_size, equilibrium=eq)
        for method in section.methods
    }

    doublet = None
    if section.with_wavefunctions:
        doublet = solve_ring(potentials[section.methods[0]], section.resolution)

    if ctx.csv:
        for method, potential in potentials.items():
            export.write_potential_csv(ctx.path(f"potential_{method}.csv"), potential, ctx.config_hash)
        if "relaxed" in potentials:
            export.write_inertia_csv(ctx.path("inertia.csv"), potentials["relaxed"])
        export.write_geometries_csv(ctx.path("geometries.csv"), eq, opposite_orientation(eq))
        if doublet is not None:
            export.write_wavefunctions_csv(ctx.path("wavefunctions.csv"), doublet)
    if ctx.svg:
        export.plot_potential(ctx.path("potential.svg"), potentials, doublet)
    return 0


def cmd_tunnel(ctx: CommandContext) -> int:
    section = ctx.config.tunnel or TunnelSection()
    trap = ctx.config.trap.to_trap()
    report = tunneling_report(
        trap, section.grid_size, section.resolution, section.solver, ctx.seed_or("ring-up")
    )
    _print_doublet("relaxed", report.relaxed)
    _print_doublet("rigid", report.rigid)
    if ctx.csv:
        export.write_doublets_csv(
            ctx.path("tunnel.csv"), {"relaxed": report.relaxed, "rigid": report.rigid}
        )
        export.write_wavefunctions_csv(ctx.path("wavefunctions.csv"), report.relaxed)
    if ctx.svg:
        potentials = {"relaxed": report.relaxed_potential, "rigid": report.rigid_potential}
        export.plot_potential(ctx.path("tunnel.svg"), potentials, report.relaxed)
    return 0


def cmd_walk(ctx: CommandContext) -> int:
    section = ctx.config.section("walk")
    n_ions = ctx.config.trap.n_ions
    if section.initial_site > 2 * n_ions:
        raise ConfigError(f"initial_site must be in [1, {2 * n_ions}], got {section.initial_site}")
    times = _time_grid(ctx, section)
    for k, theta in enumerate(section.theta_ab):
        table = walk_distribution(build_cycle_hamiltonian(n_ions, 1.0, theta), section.initial_site, times)
        if ctx.csv:
            export.write_walk_csv(ctx.path(f"walk_{k}.csv"), table, n_ions)
        if ctx.svg:
            export.plot_walk(ctx.path(f"walk_{k}.svg"), table)
    return 0


def cmd_interfere(ctx: CommandContext) -> int:
    section = ctx.config.section("interfere")
    table = interference_scan(1.0, section.theta_ab, _time_grid(ctx, section))
    if ctx.csv:
        export.write_interference_csv(ctx.path("interfere.csv"), table)
    if ctx.svg:
        export.plot_interference(ctx.path("interfere.svg"), table)
    return 0


def cmd_filter(ctx: CommandContext) -> int:
    section = ctx.config.section("filter")
    times = _time_grid(ctx, section)
    for k, theta in enumerate(section.theta_ab):
        trace = spin_filter_trace(ctx.config.trap.n_ions, theta, times)
        if ctx.csv:
            export.write_filter_csv(ctx.path(f"filter_{k}.csv"), trace)
        if ctx.svg:
            export.plot_filter(ctx.path(f"filter_{k}.svg"), trace)
    return 0


def cmd_adiabat(ctx: CommandContext) -> int:
    section: AdiabatSection = ctx.config.section("adiabat")
    trap = ctx.config.trap.to_trap()
    times, omega_x = linear_ramp(
        trap, section.ratio_start, section.ratio_stop, section.duration_s, section.samples
    )
    try:
        result = adiabaticity(trap, times, omega_x, ctx.seed_or(section.seed))
    except RampError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"eta_max={result.eta_max:.6e}")
    if ctx.csv:
        export.write_adiabat_csv(ctx.path("adiabat.csv"), result, omega_x)
    if ctx.svg:
        export.plot_adiabat(ctx.path("adiabat.svg"), result)
    return 0


COMMANDS: Dict[str, Callable[[CommandContext], int]] = {
    "modes": cmd_modes,
    "potential": cmd_potential,
    "tunnel": cmd_tunnel,
    "walk": cmd_walk,
    "interfere": cmd_interfere,
    "filter": cmd_filter,
    "adiabat": cmd_adiabat,
}

HELP = {
    "modes": "normal-mode spectra along an anisotropy grid",
    "potential": "effective rotor potential V(theta)",
    "tunnel": "tunneling doublet and rate for both potentials",
    "walk": "spin-flipped cyclic walk distributions",
    "interfere": "AB interference of the identical-spin rotor",
    "filter": "orientation persistence with and without a flipped spin",
    "adiabat": "adiabaticity of an anisotropy ramp",
}


# --- Entry point ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtr",
        description="Trapped-ion quantum tunneling rotor simulator",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=HELP[name])
        cmd.add_argument("--config", required=True, type=Path, help="INI run configuration")
        cmd.add_argument("--out", type=Path, default=Path("."), help="output directory")
        cmd.add_argument("--format", choices=FORMATS, default="csv", dest="fmt")
        cmd.add_argument("--seed", choices=SEEDS, default=None, help="equilibrium seed override")
    return parser


def _configure_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, load_settings().log_level, logging.WARNING)
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        _configure_logging(args.verbose)
        raw = args.config.read_bytes()
    except OSError as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        config = parse_config_text(raw.decode("utf-8"))
        args.out.mkdir(parents=True, exist_ok=True)
        ctx = CommandContext(
            config=config,
            config_hash=hashlib.sha256(raw).hexdigest()[:16],
            out_dir=args.out,
            fmt=args.fmt,
            seed=args.seed,
        )
        return COMMANDS[args.command](ctx)
    except (ConfigError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QTRError as exc:
        logger.debug("numerical failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
