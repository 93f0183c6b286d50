import csv
import math
from pathlib import Path

import pytest

from app import main

TRAP3 = "[trap]\nn_ions = 3\nf_z_hz = 1.5e6\nanisotropy = 1.001\n"


def _write(tmp_path: Path, text: str, name: str = "run.ini") -> Path:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def _rows(path: Path):
    with path.open(encoding="utf-8", newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.DictReader(lines))


def _run(command: str, config: Path, out: Path, *extra: str) -> int:
    return main([command, "--config", str(config), "--out", str(out), *extra])


# --- Walk and interference ---

def test_walk_writes_one_table_per_phase(tmp_path):
    config = _write(tmp_path, TRAP3 + "[walk]\ntheta_ab = 0, pi/6\nt_max = 20\nt_steps = 201\n")
    assert _run("walk", config, tmp_path / "out") == 0

    rows = _rows(tmp_path / "out" / "walk_1.csv")
    assert len(rows) == 201 * 6
    site4 = [float(r["probability"]) for r in rows if r["site"] == "4"]
    assert max(site4) < 1e-10
    first = [float(r["probability"]) for r in rows[:6]]
    assert first == pytest.approx([1.0, 0.0, 0.0, 0.0, 0.0, 0.0], abs=1e-15)
    assert (tmp_path / "out" / "walk_0.csv").exists()


def test_five_ion_walk_has_ten_sites(tmp_path):
    config = _write(
        tmp_path,
        "[trap]\nn_ions = 5\nanisotropy = 1.01\n[walk]\ntheta_ab = 0\nt_max = 5\nt_steps = 11\n",
    )
    assert _run("walk", config, tmp_path) == 0
    rows = _rows(tmp_path / "walk_0.csv")
    assert sorted({int(r["site"]) for r in rows}) == list(range(1, 11))


def test_outputs_are_byte_identical_across_runs(tmp_path):
    config = _write(tmp_path, TRAP3 + "[walk]\ntheta_ab = pi/24\nt_max = 10\nt_steps = 51\n")
    assert _run("walk", config, tmp_path / "a", "--format", "both") == 0
    assert _run("walk", config, tmp_path / "b", "--format", "both") == 0
    for name in ("walk_0.csv", "walk_0.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_svg_output(tmp_path):
    config = _write(tmp_path, TRAP3 + "[interfere]\ntheta_ab = 0, pi/2\nt_max = 3\nt_steps = 31\n")
    assert _run("interfere", config, tmp_path, "--format", "svg") == 0
    assert (tmp_path / "interfere.svg").read_text(encoding="utf-8").startswith("<?xml")
    assert not (tmp_path / "interfere.csv").exists()


def test_interference_table(tmp_path):
    config = _write(tmp_path, TRAP3 + "[interfere]\ntheta_ab = 0, pi/2\nt_max = 3\nt_steps = 31\n")
    assert _run("interfere", config, tmp_path) == 0
    rows = _rows(tmp_path / "interfere.csv")
    assert len(rows) == 31 * 2
    frozen = [float(r["p_up"]) for r in rows if float(r["theta_ab"]) == pytest.approx(math.pi / 2)]
    assert min(frozen) > 1.0 - 1e-12


def test_filter_tables(tmp_path):
    config = _write(tmp_path, TRAP3 + "[filter]\ntheta_ab = pi/2, pi/6\nt_max = 5\nt_steps = 21\n")
    assert _run("filter", config, tmp_path) == 0
    rows = _rows(tmp_path / "filter_0.csv")
    assert len(rows) == 21
    assert all(float(r["p_stay_identical"]) > 1.0 - 1e-12 for r in rows)
    assert (tmp_path / "filter_1.csv").exists()


# --- Crystal commands ---

def test_modes_rows_per_ratio(tmp_path):
    config = _write(tmp_path, TRAP3 + "[modes]\nratio_grid = 1.01, 1.05, 1.1\neigenvectors = true\n")
    assert _run("modes", config, tmp_path) == 0
    rows = _rows(tmp_path / "modes.csv")
    assert len(rows) == 3 * 6
    assert [r["label"] for r in rows[:6]].count("rotational") == 1
    assert len(_rows(tmp_path / "eigenvectors.csv")) == 3 * 6 * 3


def test_small_potential_with_wavefunctions(tmp_path):
    config = _write(
        tmp_path,
        TRAP3 + "[potential]\nmethods = relaxed\ngrid_size = 64\nresolution = 128\nwith_wavefunctions = true\n",
    )
    assert _run("potential", config, tmp_path) == 0
    text = (tmp_path / "potential_relaxed.csv").read_text(encoding="utf-8")
    assert "# method=relaxed" in text
    assert "# config_hash=" in text
    assert len(_rows(tmp_path / "potential_relaxed.csv")) == 64
    assert len(_rows(tmp_path / "geometries.csv")) == 6
    assert len(_rows(tmp_path / "wavefunctions.csv")) == 64
    assert (tmp_path / "inertia.csv").exists()


@pytest.mark.slow
@pytest.mark.filterwarnings("ignore::core.errors.RegimeWarning")
def test_tunnel_reports_both_potentials(tmp_path, capsys):
    config = _write(tmp_path, TRAP3 + "[tunnel]\ngrid_size = 64\nresolution = 128\n")
    assert _run("tunnel", config, tmp_path) == 0
    rows = _rows(tmp_path / "tunnel.csv")
    assert [r["method"] for r in rows] == ["relaxed", "rigid"]
    assert float(rows[0]["rate_hz"]) > 0.0
    assert float(rows[0]["splitting_hz"]) == pytest.approx(2.0 * float(rows[0]["rate_hz"]), rel=1e-5)
    out = capsys.readouterr().out
    assert "relaxed:" in out and "rigid:" in out


def test_static_ramp_prints_zero_eta(tmp_path, capsys):
    config = _write(
        tmp_path,
        "[trap]\nn_ions = 3\nanisotropy = 1.1\n"
        "[adiabat]\nratio_start = 1.1\nratio_stop = 1.1\nduration_s = 0.01\nsamples = 5\n",
    )
    assert _run("adiabat", config, tmp_path) == 0
    assert "eta_max=0.000000e+00" in capsys.readouterr().out
    assert len(_rows(tmp_path / "adiabat.csv")) == 5


# --- Exit codes ---

def test_ramp_through_isotropy_is_a_config_error(tmp_path):
    config = _write(
        tmp_path,
        "[trap]\nn_ions = 3\nanisotropy = 1.1\n"
        "[adiabat]\nratio_start = 1.1\nratio_stop = 0.99\nduration_s = 0.01\nsamples = 5\n",
    )
    assert _run("adiabat", config, tmp_path) == 2


def test_saddle_seed_is_a_numerical_failure(tmp_path, capsys):
    config = _write(
        tmp_path,
        "[trap]\nn_ions = 3\nanisotropy = 1.2\n[modes]\nratio_grid = 1.2\nseed = chain\n",
    )
    assert _run("modes", config, tmp_path) == 1
    assert "error:" in capsys.readouterr().err


@pytest.mark.parametrize(
    "text",
    [
        TRAP3 + "[modes]\nratio_grid =\n",
        TRAP3 + "[modes]\nratio_grid = 1.01\nspin = up\n",
        "[trap]\nn_ions = 3\nanisotropy = -1\n[modes]\nratio_grid = 1.01\n",
        "ratio_grid = 1.01\n",
        TRAP3,
    ],
)
def test_invalid_configs_exit_with_two(tmp_path, text):
    config = _write(tmp_path, text)
    assert _run("modes", config, tmp_path) == 2


def test_initial_site_outside_the_cycle(tmp_path):
    config = _write(tmp_path, TRAP3 + "[walk]\ninitial_site = 7\nt_max = 1\n")
    assert _run("walk", config, tmp_path) == 2


def test_missing_config_file(tmp_path):
    assert _run("walk", tmp_path / "absent.ini", tmp_path) == 2


def test_bad_arguments(tmp_path):
    assert main(["walk"]) == 2
    assert main(["orbit", "--config", "x.ini"]) == 2
    config = _write(tmp_path, TRAP3 + "[walk]\nt_max = 1\n")
    assert _run("walk", config, tmp_path, "--format", "pdf") == 2
