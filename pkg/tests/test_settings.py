import math
from pathlib import Path

import pytest

from core.errors import ConfigError
from core.settings import load_config, load_settings, parallel_map, parse_config_text, parse_list, parse_number


@pytest.mark.parametrize(
    "text, expected",
    [
        ("2.5", 2.5),
        ("pi", math.pi),
        ("pi/6", math.pi / 6),
        ("3*pi/4", 3 * math.pi / 4),
        ("-pi", -math.pi),
        ("1e-3", 1e-3),
    ],
)
def test_parse_number(text, expected):
    assert parse_number(text) == pytest.approx(expected, rel=1e-15)


def test_parse_number_rejects_garbage():
    with pytest.raises(ValueError):
        parse_number("pie")


def test_parse_list_forms():
    assert parse_list("0, pi/2") == pytest.approx([0.0, math.pi / 2])
    grid = parse_list("linspace(1.0, 2.0, 5)")
    assert grid == pytest.approx([1.0, 1.25, 1.5, 1.75, 2.0])
    assert parse_list("") == []


TRAP = "[trap]\nn_ions = 3\nanisotropy = 1.001\n"


def test_config_with_defaults():
    config = parse_config_text(TRAP + "[interfere]\nt_max = 3\n")
    assert config.trap.f_z_hz == 1.5e6
    assert config.interfere.theta_ab[-1] == pytest.approx(math.pi / 2)
    trap = config.trap.to_trap()
    assert trap.n_ions == 3


@pytest.mark.parametrize(
    "text",
    [
        TRAP + "[modes]\nratio_grid =\n",
        TRAP + "[modes]\nratio_grid = 1.0, -1.0\n",
        TRAP + "[modes]\nratio_grid = 1.1\ncolour = red\n",
        TRAP + "[telescope]\nzoom = 2\n",
        TRAP + "[walk]\nt_max = 1\nt_max_seconds = 1\n",
        TRAP + "[walk]\ntheta_ab = 0\n",
        TRAP + "[potential]\nmethods = relaxed, exact\n",
        TRAP + "[tunnel]\nresolution = 64\n",
        "[trap]\nn_ions = 1\nanisotropy = 1.0\n",
        "[trap]\nn_ions = 3\nanisotropy = 0\n",
        "no section header\n",
    ],
)
def test_invalid_configs_raise_config_error(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_missing_command_section():
    config = parse_config_text(TRAP)
    with pytest.raises(ConfigError):
        config.section("walk")


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("QTR_THREADS", "3")
    monkeypatch.setenv("QTR_LOG_LEVEL", "info")
    settings = load_settings()
    assert settings.threads == 3
    assert settings.log_level == "INFO"
    monkeypatch.setenv("QTR_THREADS", "many")
    with pytest.raises(ConfigError):
        load_settings()
    monkeypatch.setenv("QTR_THREADS", "0")
    with pytest.raises(ConfigError):
        load_settings()


@pytest.mark.parametrize("threads", ["1", "4"])
def test_parallel_map_keeps_order(monkeypatch, threads):
    monkeypatch.setenv("QTR_THREADS", threads)
    assert parallel_map(lambda x: x * x, range(10)) == [x * x for x in range(10)]


@pytest.mark.parametrize("path", sorted((Path(__file__).parent.parent / "data").glob("*.ini")), ids=lambda p: p.stem)
def test_shipped_configs_are_valid(path):
    config = load_config(path)
    assert config.trap.n_ions >= 2


def _readme_config() -> str:
    readme = (Path(__file__).parent.parent / "README.md").read_text(encoding="utf-8")
    section = readme.split("### Configuration", 1)[1]
    return section.split("```ini", 1)[1].split("```", 1)[0]


def test_readme_configuration_example_parses():
    config = parse_config_text(_readme_config())
    assert config.trap.n_ions == 3
    assert config.trap.anisotropy == 1.001
    assert config.trap.mass_amu == 170.936
    assert len(config.modes.ratio_grid) == 40
    assert config.tunnel.solver == "fourier"
    assert config.walk.theta_ab[-1] == pytest.approx(math.pi / 6)
    assert config.walk.t_max == 20


def test_inline_comments_are_stripped():
    config = parse_config_text("[trap]\nn_ions = 5 ; five ions\nanisotropy = 1.01 # ratio\n")
    assert config.trap.n_ions == 5
    assert config.trap.anisotropy == 1.01
