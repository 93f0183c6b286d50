"""RUNTIME SETTINGS AND RUN CONFIGURATION.

Environment-driven settings (worker threads, log level) are loaded from the
process environment and an optional `.env` file. Run configurations are
INI files with a `[trap]` section and one section per command; every
section is validated into a strict pydantic model so unknown keys and
unphysical values are rejected before any computation starts.
"""

import configparser
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Annotated, Callable, Iterable, List, Literal, Optional, TypeVar

from dotenv import load_dotenv
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from core.errors import ConfigError
from core.physcore import YB171_MASS_AMU, TrapConfig

# Load environment variables from a .env file.
load_dotenv()

T = TypeVar("T")
R = TypeVar("R")


# --- Process settings ---

class Settings(BaseModel):
    """Settings read from the environment (QTR_THREADS, QTR_LOG_LEVEL)."""

    model_config = ConfigDict(frozen=True)

    threads: int = Field(..., ge=1, description="Upper bound on worker threads")
    log_level: str = Field("WARNING", description="Default logging level")


def load_settings() -> Settings:
    raw_threads = os.getenv("QTR_THREADS")
    try:
        threads = int(raw_threads) if raw_threads else min(4, os.cpu_count() or 1)
    except ValueError as exc:
        raise ConfigError(f"QTR_THREADS must be an integer, got {raw_threads!r}") from exc
    try:
        return Settings(threads=threads, log_level=os.getenv("QTR_LOG_LEVEL", "WARNING").upper())
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Maps `fn` over `items` on the worker pool, keeping input order."""
    items = list(items)
    threads = load_settings().threads
    if threads == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as executor:
        return list(executor.map(fn, items))


# --- Value parsing ---

_PI_EXPR = re.compile(
    r"^\s*(?:(?P<coef>[+-]?\d*\.?\d+(?:[eE][+-]?\d+)?)\s*\*\s*)?(?P<sign>[+-]?)pi"
    r"(?:\s*/\s*(?P<den>\d*\.?\d+(?:[eE][+-]?\d+)?))?\s*$"
)
_LINSPACE = re.compile(r"^\s*linspace\((?P<args>[^)]*)\)\s*$")


def parse_number(text: str) -> float:
    """Parses a float, also accepting multiples of pi such as `pi/6` or `3*pi/4`."""
    text = text.strip()
    match = _PI_EXPR.match(text)
    if match:
        value = math.pi
        if match.group("coef"):
            value *= float(match.group("coef"))
        if match.group("sign") == "-":
            value = -value
        if match.group("den"):
            value /= float(match.group("den"))
        return value
    try:
        return float(text)
    except ValueError as exc:
        raise ValueError(f"not a number: {text!r}") from exc


def parse_list(text: str) -> List[float]:
    """Parses a comma-separated list or `linspace(start, stop, count)`."""
    match = _LINSPACE.match(text)
    if match:
        parts = [p.strip() for p in match.group("args").split(",")]
        if len(parts) != 3:
            raise ValueError("linspace takes exactly three arguments")
        start, stop, count = parse_number(parts[0]), parse_number(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError("linspace count must be positive")
        if count == 1:
            return [start]
        step = (stop - start) / (count - 1)
        return [start + k * step for k in range(count)]
    return [parse_number(p) for p in text.split(",") if p.strip()]


def _as_list(value):
    if isinstance(value, str):
        return parse_list(value)
    return value


def _as_number(value):
    if isinstance(value, str):
        return parse_number(value)
    return value


Number = Annotated[float, BeforeValidator(_as_number)]
NumberList = Annotated[List[float], BeforeValidator(_as_list)]


# --- Section schemas ---

class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class TrapSection(_Section):
    """The `[trap]` section: the physical scenario."""

    n_ions: int = Field(..., ge=2)
    f_z_hz: Number = Field(1.5e6, gt=0, description="Axial trap frequency, Hz")
    anisotropy: Number = Field(..., gt=0)
    mass_amu: Number = Field(YB171_MASS_AMU, gt=0)

    def to_trap(self) -> TrapConfig:
        return TrapConfig.from_hz(self.n_ions, self.f_z_hz, self.anisotropy, self.mass_amu)


SeedName = Literal["chain", "ring-up", "ring-down"]
PotentialMethod = Literal["rigid", "relaxed"]


class ModesSection(_Section):
    ratio_grid: NumberList = Field(..., description="Anisotropy values to scan")
    seed: SeedName = "ring-up"
    eigenvectors: bool = False

    @field_validator("ratio_grid")
    @classmethod
    def _non_empty(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("ratio_grid is empty")
        if any(r <= 0 or not math.isfinite(r) for r in value):
            raise ValueError("ratio_grid values must be positive")
        return value


class PotentialSection(_Section):
    methods: List[PotentialMethod] = ["relaxed", "rigid"]
    grid_size: int = Field(256, ge=64)
    resolution: int = Field(256, ge=128)
    with_wavefunctions: bool = False
    seed: SeedName = "ring-up"

    @field_validator("methods", mode="before")
    @classmethod
    def _split(cls, value):
        if isinstance(value, str):
            return [v.strip() for v in value.split(",") if v.strip()]
        return value


class TunnelSection(_Section):
    grid_size: int = Field(256, ge=64)
    resolution: int = Field(256, ge=128)
    solver: Literal["fourier", "finite_difference"] = "fourier"


class _TimeGrid(_Section):
    t_max: Optional[Number] = Field(None, gt=0, description="Final time in units of 1/j")
    t_max_seconds: Optional[Number] = Field(None, gt=0, description="Final time in seconds")
    t_steps: int = Field(201, ge=2)

    @model_validator(mode="after")
    def _one_time(self):
        if (self.t_max is None) == (self.t_max_seconds is None):
            raise ValueError("give exactly one of t_max (normalized) or t_max_seconds")
        return self


class WalkSection(_TimeGrid):
    theta_ab: NumberList = [0.0]
    initial_site: int = Field(1, ge=1)


class InterfereSection(_TimeGrid):
    theta_ab: NumberList = [0.0, math.pi / 24, math.pi / 12, math.pi / 6, math.pi / 2]


class FilterSection(_TimeGrid):
    theta_ab: NumberList = [math.pi / 2]


class AdiabatSection(_Section):
    ratio_start: Number = Field(..., gt=0)
    ratio_stop: Number = Field(..., gt=0)
    duration_s: Number = Field(..., gt=0)
    samples: int = Field(101, ge=2)
    seed: SeedName = "ring-up"


class RunConfig(_Section):
    """A whole configuration file; command sections are optional."""

    trap: TrapSection
    modes: Optional[ModesSection] = None
    potential: Optional[PotentialSection] = None
    tunnel: Optional[TunnelSection] = None
    walk: Optional[WalkSection] = None
    interfere: Optional[InterfereSection] = None
    filter: Optional[FilterSection] = None
    adiabat: Optional[AdiabatSection] = None

    def section(self, name: str) -> BaseModel:
        """Returns a command section, raising ConfigError when it is absent."""
        value = getattr(self, name, None)
        if value is None:
            raise ConfigError(f"config has no [{name}] section")
        return value


def parse_config_text(text: str) -> RunConfig:
    """Parses INI text into a validated RunConfig.

    Args:
        text: Contents of a configuration file.

    Returns:
        The validated RunConfig.

    Raises:
        ConfigError: On syntax errors, unknown sections or keys, and invalid values.
    """
    parser = configparser.ConfigParser(
        interpolation=None, default_section="__none__", inline_comment_prefixes=(";", "#")
    )
    # Keys are case sensitive, like the schema fields.
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc

    raw = {name: dict(parser.items(name)) for name in parser.sections()}
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def load_config(path: Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)
