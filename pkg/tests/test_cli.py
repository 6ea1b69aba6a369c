import logging

import pytest
from click.testing import CliRunner

from spinres.main import cli
from spinres.models.cavity import CavityParams
from spinres.services import fitting
from spinres.services.sweep_file_service import read_sweep
from spinres.services.thermal import g_coll_at_temperature
from spinres.utils import settings
from spinres.utils.constants import MU_B_OVER_H_MHZ_PER_T

SITE1 = """\
cavity.f_r = 4.4 GHz
cavity.kappa = 7.746 MHz
sites.1a.g = 8.37
sites.1a.gamma = 74.9 MHz
sites.1a.g_coll = 4.02 MHz
sites.1b.g = 7.25
sites.1b.gamma = 96.6 MHz
sites.1b.g_coll = 4.98 MHz
"""
DENSE_SWEEP = "sweep.B_start = 30 mT\nsweep.B_stop = 50 mT\nsweep.B_step = 2 uT\n"
COARSE_SWEEP = ("sweep.B_start = 30 mT\nsweep.B_stop = 45 mT\nsweep.B_step = 1 mT\n"
                "sweep.probe_span = 200 MHz\nsweep.probe_points = 801\n")


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)


def write_config(tmp_path, text, name="experiment.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def report_values(text):
    values = {}
    for row in text.splitlines():
        name, sep, rest = row.partition(" = ")
        if sep and not name.startswith("#"):
            values[name] = rest
    return values


def test_spectrum_matches_cavity_near_resonance_field(runner):
    result = runner.invoke(cli, ["spectrum", "--field", "37.7 mT"])
    assert result.exit_code == 0, result.stderr

    rows = result.stdout.splitlines()
    header = next(k for k, row in enumerate(rows) if row.startswith("[1a]"))
    level_i, level_j, frequency = rows[header + 2].split()[:3]
    assert (level_i, level_j) == ("0", "1")
    assert float(frequency) == pytest.approx(4400.0, abs=8.37 * MU_B_OVER_H_MHZ_PER_T * 2e-4)
    assert "1a: 37.56 mT" in result.stdout
    assert "coupling (kappa = 7.74648 MHz)" in result.stdout


def test_spectrum_at_zero_field(runner, tmp_path):
    result = runner.invoke(cli, ["spectrum", "--field", "0", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.stderr
    assert "0.000000" in result.stdout
    assert (tmp_path / "spectrum.txt").read_text() == result.stdout


def test_spectrum_of_tensor_config(runner, tensor_config_path):
    result = runner.invoke(cli, ["spectrum", "--config", str(tensor_config_path), "--field", "40 mT"])
    assert result.exit_code == 0, result.stderr
    for label in ("[1a]", "[1b]", "[2a]", "[2b]"):
        assert label in result.stdout


def test_spectrum_rejects_bad_field(runner):
    result = runner.invoke(cli, ["spectrum", "--field", "37.7 GHz"])
    assert result.exit_code == 3
    assert result.stderr.startswith("DATA: --field")


def test_config_without_sites(runner, tmp_path):
    config = write_config(tmp_path, "cavity.f_r = 4.4 GHz\ncavity.Q = 568\n")
    result = runner.invoke(cli, ["sweep", "--config", config, "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert result.stderr.strip() == "CONFIG: Missing section 'sites'"


def test_config_error_names_line(runner, tmp_path):
    config = write_config(tmp_path, SITE1.replace("74.9 MHz", "74.9"))
    result = runner.invoke(cli, ["sweep", "--config", config])
    assert result.exit_code == 2
    assert result.stderr.startswith("CONFIG: line 4, column 18:")
    assert len(result.stderr.strip().splitlines()) == 1


def test_missing_config_file(runner, tmp_path):
    result = runner.invoke(cli, ["sweep", "--config", str(tmp_path / "absent.cfg")])
    assert result.exit_code == 5
    assert result.stderr.startswith("IO: ")


def test_sweep_writes_outputs(runner, tmp_path):
    result = runner.invoke(cli, ["sweep", "--out", str(tmp_path), "--gnuplot"])
    assert result.exit_code == 0, result.stderr

    sweep = read_sweep(tmp_path / "sweep.csv")
    assert len(sweep) == 1001
    assert sweep.f_r == 4.4
    assert (tmp_path / "sweep.svg").read_text().startswith("<svg")
    assert "using ($1*1000):2" in (tmp_path / "sweep.gp").read_text()
    for label, field in (("1a", "37.56"), ("1b", "43.36"), ("2a", "125.2"), ("2b", "154.1")):
        assert f"{label}: {field} mT" in result.stdout


def test_sweep_with_single_field(runner, tmp_path):
    config = write_config(tmp_path, SITE1 + "sweep.B_start = 37.7 mT\nsweep.B_stop = 37.7 mT\n")
    result = runner.invoke(cli, ["sweep", "--config", config, "--out", str(tmp_path)])
    assert result.exit_code == 0, result.stderr
    assert len(read_sweep(tmp_path / "sweep.csv")) == 1
    assert "<circle" in (tmp_path / "sweep.svg").read_text()


def test_synth_is_reproducible(runner, tmp_path):
    args = ["synth", "--noise", "0.01", "--seed", "7", "--out"]
    assert runner.invoke(cli, args + [str(tmp_path / "a")]).exit_code == 0
    assert runner.invoke(cli, args + [str(tmp_path / "b")]).exit_code == 0
    first = (tmp_path / "a" / "synth.csv").read_bytes()
    assert first == (tmp_path / "b" / "synth.csv").read_bytes()
    assert b"# seed=7\n" in first


def test_synth_rejects_negative_noise(runner, tmp_path):
    result = runner.invoke(cli, ["synth", "--noise=-0.01", "--out", str(tmp_path)])
    assert result.exit_code == 3
    assert result.stderr.startswith("DATA: ")


def test_fit_recovers_synthetic_parameters(runner, tmp_path):
    config = write_config(tmp_path, SITE1 + DENSE_SWEEP)
    synth = runner.invoke(cli, ["synth", "--config", config, "--noise", "0.01", "--seed", "42",
                                "--out", str(tmp_path)])
    assert synth.exit_code == 0, synth.stderr

    result = runner.invoke(cli, ["fit", str(tmp_path / "synth.csv"), "--config", config,
                                 "--out", str(tmp_path / "fit")])
    assert result.exit_code == 0, result.stderr

    values = report_values(result.stdout)
    assert values["converged"] == "true"
    assert float(values["kappa"].split()[0]) == pytest.approx(7.746, rel=0.01)
    assert float(values["1a.g_factor"].split()[0]) == pytest.approx(8.37, rel=0.005)
    assert float(values["1b.gamma"].split()[0]) == pytest.approx(96.6, rel=0.05)
    assert float(values["1b.g_coll"].split()[0]) == pytest.approx(4.98, rel=0.05)

    written = (tmp_path / "fit" / "synth.fit.txt").read_text()
    assert written.startswith("# source=synth.csv\n")
    assert (tmp_path / "fit" / "synth.fit.svg").exists()


def test_fit_with_fixed_kappa(runner, tmp_path):
    config = write_config(tmp_path, SITE1 + DENSE_SWEEP)
    runner.invoke(cli, ["synth", "--config", config, "--noise", "0.01", "--seed", "5", "--out", str(tmp_path)])

    result = runner.invoke(cli, ["fit", str(tmp_path / "synth.csv"), "--config", config,
                                 "--fix", "kappa=7.746", "--gnuplot", "--out", str(tmp_path / "fit")])
    assert result.exit_code == 0, result.stderr
    assert "kappa = 7.746 (fixed)" in result.stdout

    model = read_sweep(tmp_path / "fit" / "synth.fit.model.csv")
    assert len(model) == 2000
    assert model.fwhm.min() == pytest.approx(7.746, rel=2e-3)
    script = (tmp_path / "fit" / "synth.fit.gp").read_text()
    assert "'synth.fit.model.csv' using ($1*1000):2 with lines title 'fit'" in script


def test_fit_rejects_unknown_fix(runner, tmp_path):
    config = write_config(tmp_path, SITE1 + DENSE_SWEEP)
    runner.invoke(cli, ["synth", "--config", config, "--out", str(tmp_path)])

    result = runner.invoke(cli, ["fit", str(tmp_path / "synth.csv"), "--config", config,
                                 "--fix", "3a.gamma=10", "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert result.stderr.startswith("CONFIG: Unknown parameter '3a.gamma'")


def test_fit_rejects_s21_sweep(runner, tmp_path):
    config = write_config(tmp_path, SITE1 + COARSE_SWEEP)
    runner.invoke(cli, ["synth", "--config", config, "--schema", "s21", "--out", str(tmp_path)])

    result = runner.invoke(cli, ["fit", str(tmp_path / "synth.csv"), "--config", config, "--out", str(tmp_path)])
    assert result.exit_code == 3
    assert result.stderr.startswith("SCHEMA: synth.csv:")


def test_fit_rejects_nonpositive_header_frequency(runner, tmp_path):
    rows = "".join(f"{0.03 + 0.001 * k!r},7.746\n" for k in range(20))
    (tmp_path / "s.csv").write_text("# schema=fwhm\n# f_r=-4.4 GHz\n" + rows)

    result = runner.invoke(cli, ["fit", str(tmp_path / "s.csv"), "--peaks", "1", "--out", str(tmp_path)])
    assert result.exit_code == 3
    assert result.stderr.startswith("DATA: s.csv: Sweep header: f_r must be positive")
    assert len(result.stderr.strip().splitlines()) == 1


def test_fit_reports_invalid_model_values(runner, tmp_path, monkeypatch):
    config = write_config(tmp_path, SITE1 + COARSE_SWEEP)
    runner.invoke(cli, ["synth", "--config", config, "--out", str(tmp_path)])

    def invalid_guess(*args, **kwargs):
        return CavityParams(f_r=-4.4, kappa=1.0)

    monkeypatch.setattr(fitting, "initial_guess", invalid_guess)
    result = runner.invoke(cli, ["fit", str(tmp_path / "synth.csv"), "--config", config, "--out", str(tmp_path)])
    assert result.exit_code == 3
    assert result.stderr.startswith("DATA: synth.csv: f_r: ")


def test_fit_iteration_cap(runner, tmp_path, monkeypatch):
    config = write_config(tmp_path, SITE1 + DENSE_SWEEP)
    runner.invoke(cli, ["synth", "--config", config, "--noise", "0.01", "--seed", "42", "--out", str(tmp_path)])
    monkeypatch.setattr(settings, "MAX_ITERATIONS", 1)
    args = ["fit", str(tmp_path / "synth.csv"), "--config", config, "--out", str(tmp_path)]

    stalled = runner.invoke(cli, args)
    assert stalled.exit_code == 4
    assert stalled.stderr.strip().endswith("FIT: Fit did not converge for " + str(tmp_path / "synth.csv"))
    assert "converged = false" in stalled.stdout

    allowed = runner.invoke(cli, args + ["--allow-nonconverged"])
    assert allowed.exit_code == 0
    assert "not converged" in allowed.stderr


def test_extract_then_fit(runner, tmp_path):
    config = write_config(tmp_path, SITE1 + COARSE_SWEEP)
    synth = runner.invoke(cli, ["synth", "--config", config, "--schema", "s21", "--out", str(tmp_path)])
    assert synth.exit_code == 0, synth.stderr

    result = runner.invoke(cli, ["extract", str(tmp_path / "synth.csv"), "--out", str(tmp_path / "x")])
    assert result.exit_code == 0, result.stderr

    extracted = read_sweep(tmp_path / "x" / "synth.fwhm.csv")
    assert len(extracted) == 16
    assert extracted.fwhm.min() == pytest.approx(7.746, rel=0.02)


def test_extract_rejects_fwhm_sweep(runner, tmp_path):
    runner.invoke(cli, ["synth", "--out", str(tmp_path)])
    result = runner.invoke(cli, ["extract", str(tmp_path / "synth.csv"), "--out", str(tmp_path)])
    assert result.exit_code == 3
    assert result.stderr.startswith("SCHEMA: ")


def test_polarization_single_temperature(runner):
    result = runner.invoke(cli, ["polarization", "-T", "0.07"])
    assert result.exit_code == 0, result.stderr
    header, row = result.stdout.splitlines()
    assert header == "T_K,polarization"
    assert float(row.split(",")[1]) == pytest.approx(0.907, abs=1e-3)


def test_polarization_default_grid_with_coupling(runner, tmp_path):
    result = runner.invoke(cli, ["polarization", "--g0", "4.02", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.stderr
    rows = result.stdout.splitlines()
    assert rows[0] == "T_K,polarization,g_coll_MHz"
    assert len(rows) == 45
    assert rows[-1].startswith("0.5,")
    assert (tmp_path / "polarization.csv").read_text() == result.stdout
    assert (tmp_path / "polarization.svg").exists()


def test_polarization_rejects_zero_temperature(runner):
    result = runner.invoke(cli, ["polarization", "-T", "0"])
    assert result.exit_code == 3
    assert result.stderr.startswith("DATA: Temperature must be > 0 K")


def test_polarization_extrapolates_measured_points(runner, tmp_path):
    temperatures = (0.07, 0.15, 0.3, 0.5)
    points = tmp_path / "points.csv"
    points.write_text("".join(f"{T},{g_coll_at_temperature(4.02, 4.4, T)!r}\n" for T in temperatures))

    result = runner.invoke(cli, ["polarization", "--points", str(points)])
    assert result.exit_code == 0, result.stderr
    values = report_values(result.stdout)
    assert float(values["g0"].split()[0]) == pytest.approx(4.02, abs=1e-6)
    assert float(values["rms_residual"]) < 1e-9
    assert len(result.stdout.splitlines()) == 2 + 1 + len(temperatures)


def test_no_color_flag(runner, tmp_path):
    coloured = runner.invoke(cli, ["sweep", "--out", str(tmp_path)], color=True)
    assert "\x1b[" in coloured.stderr

    plain = runner.invoke(cli, ["--no-color", "sweep", "--out", str(tmp_path)], color=True)
    assert plain.exit_code == 0
    assert "\x1b[" not in plain.stderr
    assert "wrote" in plain.stderr


def test_verbose_logging(runner, tmp_path):
    result = runner.invoke(cli, ["-v", "sweep", "--out", str(tmp_path)])
    assert result.exit_code == 0
    assert "INFO spinres.services.synth_service: Simulated 1001 fields" in result.stderr
