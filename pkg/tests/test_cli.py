import json
import math

import numpy as np
import pytest

from bridging_heat.cli import (
    MODES,
    OUT_ENV,
    build_config,
    main,
    parse_config_file,
    parse_datum,
)
from bridging_heat.exceptions import ConfigError
from bridging_heat.heat_kernel import heat_kernel

MANIFEST_KEYS = {"timestamp", "version", "mode", "figure", "config", "resolved", "defaults",
                 "diagnostics", "checks", "warnings", "outputs"}


def _manifest(out, stem):
    return json.loads((out / f"{stem}_manifest.json").read_text())


def _csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


class TestModes:
    def test_kernel(self, tmp_path):
        assert main(["kernel", "--out", str(tmp_path), "-q", "--t", "0.5,1",
                     "--x", "1,2", "--y=-1,0.5"]) == 0
        data = _csv(tmp_path / "kernel.csv")
        assert data.shape == (8, 4)
        for t, x, y, k in data:
            ref = math.exp(-((x - y) ** 2) / (4 * t)) / math.sqrt(4 * math.pi * t)
            assert k == pytest.approx(ref, rel=1e-4)
        man = _manifest(tmp_path, "kernel")
        assert MANIFEST_KEYS <= set(man)
        assert man["outputs"].keys() == {"kernel.csv"}
        assert set(man["defaults"]) >= {"special_functions", "resolvent", "grid", "heat_kernel",
                                        "evolve", "scattering", "dispersive", "cli"}

    def test_kernel_bridging(self, tmp_path):
        assert main(["kernel", "--out", str(tmp_path), "-q", "--alpha", "0.5",
                     "--x", "2", "--y=-1"]) == 0
        (_, _, _, k), = _csv(tmp_path / "kernel.csv")
        assert k == pytest.approx(heat_kernel(0.5, 0.5, 2.0, -1.0), rel=1e-12)
        ratio = _manifest(tmp_path, "kernel")["diagnostics"]["kappa_over_kappa0"]
        assert ratio == pytest.approx([2.0, 0.0], abs=1e-12)

    def test_scatter(self, tmp_path):
        assert main(["scatter", "--out", str(tmp_path), "-q", "--alpha", "0.3", "--a", "1",
                     "--gamma", "2", "--energies", "1"]) == 0
        (_, e, t, r), = _csv(tmp_path / "scatter.csv")
        assert (e, t, r) == pytest.approx((1.0, 0.82068912030910158, 0.17931087969089842), rel=1e-13)

    def test_scatter_bridging_example(self, tmp_path):
        assert main(["scatter", "--out", str(tmp_path), "-q", "--alpha", "0.5", "--a", "1",
                     "--gamma", "0", "--energies", "0.1,1,10"]) == 0
        assert np.allclose(_csv(tmp_path / "scatter.csv")[:, 2], 0.5, atol=1e-15)

    def test_scatter_complex_parameter(self, tmp_path):
        assert main(["scatter", "--out", str(tmp_path), "-q", "--a", "0.6+0.8i"]) == 0
        data = _csv(tmp_path / "scatter.csv")
        assert np.allclose(data[:, 2], 0.5, atol=1e-12)

    def test_evolve_and_bc_check(self, tmp_path):
        assert main(["bc-check", "--out", str(tmp_path), "-q"]) == 0
        man = _manifest(tmp_path, "bc_check")
        assert man["checks"]["bridging_conditions"] is True
        assert man["resolved"]["alpha"] == 0.5
        assert {"kappa", "kappa_over_kappa0", "kernel_blocks", "grid"} <= set(man["diagnostics"])
        row = _csv(tmp_path / "bc_check.csv")[0]
        assert row[0] == 0.5 and row[-2] <= 1e-3 and row[-1] <= 1e-3
        assert (tmp_path / "bc_check_t0.5.csv").exists()

    def test_evolve_columns(self, tmp_path):
        assert main(["evolve", "--out", str(tmp_path), "-q", "--t", "0.5", "--alpha", "0.5"]) == 0
        path = tmp_path / "evolve_t0.5.csv"
        assert path.read_text().splitlines()[0] == "x,Re u,Im u,|u|"
        data = _csv(path)
        assert np.allclose(np.hypot(data[:, 1], data[:, 2]), data[:, 3])

    def test_decay_classical(self, tmp_path):
        assert main(["decay", "--out", str(tmp_path), "-q", "--flow", "classical",
                     "--datum", "gaussian:0,1"]) == 0
        fit = _manifest(tmp_path, "decay")["diagnostics"]["decay"]
        assert fit["exponent"] == pytest.approx(-0.46453958688, abs=1e-9)
        assert fit["target_exponent"] == -0.5
        assert _csv(tmp_path / "decay.csv").shape == (8, 2)

    def test_selftest(self, tmp_path, capsys):
        assert main(["selftest", "--out", str(tmp_path), "-q"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 4 and all(line.startswith("PASS") for line in lines)


class TestConfig:
    def test_file_and_override(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("# preset\nalpha = 0.25\nt = 0.5, 1  # two times\ngrid-h = 0.05\n")
        cfg, quiet = build_config(["evolve", "--config", str(cfg_file), "--alpha", "0.75", "-q"])
        assert quiet and cfg.alpha == 0.75 and cfg.times == (0.5, 1.0) and cfg.grid_h == 0.05

    def test_file_errors_name_the_line(self, tmp_path):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("alpha = 0.5\ncolour = red\n")
        with pytest.raises(ConfigError, match=r"bad.cfg:2 \(colour\)"):
            parse_config_file(cfg_file)
        cfg_file.write_text("alpha = 1.5\n")
        with pytest.raises(ConfigError, match=r"bad.cfg:1 \(alpha\)"):
            build_config(["evolve", "--config", str(cfg_file)])

    @pytest.mark.parametrize(
        "argv",
        [
            ["evolve", "--alpha", "1"],
            ["evolve", "--t", "-1"],
            ["evolve", "--datum", "square:1,2"],
            ["evolve", "--contour", "spiral"],
            ["evolve", "--nodes", "3"],
            ["kernel", "--x", "0"],
            ["decay", "--p", "1", "--r", "2"],
            ["evolve", "--alpha", "abc"],
            ["evolve", "--config", "/nonexistent/file.cfg"],
        ],
    )
    def test_bad_values_exit_2(self, argv, tmp_path, capsys):
        assert main(argv + ["--out", str(tmp_path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_mode(self):
        with pytest.raises(SystemExit) as exc:
            main(["dance"])
        assert exc.value.code == 2

    def test_parse_datum(self):
        assert parse_datum("gaussian:2,1").params == (2.0, 1.0, 0.0)
        assert parse_datum("gaussian:2,1,-3").params == (2.0, 1.0, -3.0)
        assert parse_datum("indicator:0.5,1.5").params == (0.5, 1.5)
        with pytest.raises(ValueError):
            parse_datum("gaussian:1")

    def test_every_mode_parses(self):
        for mode in MODES:
            argv = [mode, "fig2"] if mode == "figure" else [mode]
            assert build_config(argv)[0].mode == mode


class TestRuns:
    def test_numerical_failure_exit_3(self, tmp_path):
        assert main(["evolve", "--out", str(tmp_path), "-q", "--datum", "gaussian:11.5,1"]) == 3
        failure = _manifest(tmp_path, "evolve")["diagnostics"]["failure"]
        assert "TruncationError" in failure["error"] and failure["stage"].startswith("evolution")

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
        assert main(["scatter", "-q"]) == 0
        assert (tmp_path / "env" / "scatter.csv").exists()

    def test_determinism(self, tmp_path):
        argv = ["kernel", "-q", "--alpha", "0.9", "--t", "0.5"]
        assert main(argv + ["--out", str(tmp_path / "a")]) == 0
        assert main(argv + ["--out", str(tmp_path / "b")]) == 0
        a = (tmp_path / "a" / "kernel.csv").read_bytes()
        assert a == (tmp_path / "b" / "kernel.csv").read_bytes()
        ha = _manifest(tmp_path / "a", "kernel")["outputs"]
        assert ha == _manifest(tmp_path / "b", "kernel")["outputs"]
