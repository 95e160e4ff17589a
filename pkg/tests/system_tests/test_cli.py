import argparse
import json

import pandas as pd
import pytest

import robin_plaplacian as rp
from robin_plaplacian import cli

COARSE_DISK = ["--domain", "disk:1", "--h", "0.25"]


class _ViolatedReport:
    domain, p, beta = "disk:1", 2.0, 1.0
    all_satisfied = False

    def summary(self):
        return "disk:1 p=2 beta=1 [VIOLATED upper_torsion]"

    def to_dict(self):
        return {"domain": self.domain, "all_satisfied": False}


class TestMain:
    def test_eig_json(self, tmp_path):
        """Test that the eig command writes one record per combination.

        Args:
            tmp_path: output directory

        """
        code = cli.main(["eig", *COARSE_DISK, "--p", "2", "--beta", "1", "inf", "--out", str(tmp_path)])

        assert code == cli.EXIT_OK
        records = json.loads((tmp_path / "eigenvalues.json").read_text())
        assert [r["boundary"] for r in records] == ["robin", "dirichlet"]
        assert records[1]["beta"] is None
        assert records[0]["lambda"] == pytest.approx(1.5769927308, rel=0.05)

    def test_eig_csv_header(self, tmp_path):
        """Test the column order of the CSV table.

        Args:
            tmp_path: output directory

        """
        code = cli.main(["eig", *COARSE_DISK, "--p", "2", "--beta", "1", "--format", "csv", "--out", str(tmp_path)])

        assert code == cli.EXIT_OK
        header = (tmp_path / "eigenvalues.csv").read_text().splitlines()[0]
        assert header == ",".join(rp.EIGEN_COLUMNS)

    def test_eig_zero_beta(self, tmp_path):
        """Test that beta = 0 gives the eigenvalue zero.

        Args:
            tmp_path: output directory

        """
        code = cli.main(["eig", "--domain", "square:1", "--h", "0.25", "--p", "2", "--beta", "0", "--out", str(tmp_path)])

        assert code == cli.EXIT_OK
        records = json.loads((tmp_path / "eigenvalues.json").read_text())
        assert records[0]["lambda"] == pytest.approx(0.0, abs=1e-12)

    def test_not_converged(self, tmp_path):
        """Test that a capped iteration count gives exit status 3 and still writes the results.

        Args:
            tmp_path: output directory

        """
        code = cli.main(["eig", *COARSE_DISK, "--p", "2", "--beta", "1", "--max-iter", "1", "--out", str(tmp_path)])

        assert code == cli.EXIT_NOT_CONVERGED
        assert (tmp_path / "eigenvalues.json").exists()

    def test_solver_failure(self, tmp_path):
        """Test that a beta far below the quotient floor gives exit status 3.

        Args:
            tmp_path: output directory

        """
        code = cli.main(["eig", *COARSE_DISK, "--p", "2", "--beta", "-1000", "--out", str(tmp_path)])

        assert code == cli.EXIT_NOT_CONVERGED

    @pytest.mark.parametrize(
        "argv",
        [
            ["eig", "--domain", "disk:1", "--beta", "1"],
            ["eig", "--domain", "disk:1", "--p", "2", "--beta", "1", "--h", "-1"],
            ["eig", "--domain", "blob:1", "--p", "2", "--beta", "1"],
            ["eig", "--domain", "disk:1", "--p", "20", "--beta", "1", "--h", "0.25"],
            ["sweep", "--domain", "disk:1", "--p", "2"],
            ["unknown"],
        ],
    )
    def test_invalid_arguments(self, tmp_path, argv):
        """Test that invalid arguments give exit status 2.

        Args:
            tmp_path: output directory
            argv: command line

        """
        assert cli.main([*argv, "--out", str(tmp_path)]) == cli.EXIT_CONFIG

    def test_help(self, capsys):
        """Test that --help exits with status 0.

        Args:
            capsys: output capture

        """
        assert cli.main(["--help"]) == cli.EXIT_OK
        assert "robin-plaplacian" in capsys.readouterr().out

    def test_verify_violation(self, tmp_path, monkeypatch):
        """Test that a violated bound gives exit status 4.

        Args:
            tmp_path: output directory
            monkeypatch: replaces the bound suite

        """
        monkeypatch.setattr(cli.functional_verification, "verifyBounds", lambda *args, **kwargs: [_ViolatedReport()])

        code = cli.main(["verify", "--suite", "default", "--out", str(tmp_path)])

        assert code == cli.EXIT_VIOLATED
        assert json.loads((tmp_path / "bounds.json").read_text())[0]["all_satisfied"] is False

    @pytest.mark.parametrize("switches,certificates,checks", [([], True, True), (["--no-checks", "--no-certificates"], False, False)])
    def test_verify_switches(self, tmp_path, monkeypatch, switches, certificates, checks):
        """Test that the verify switches reach the bound suite.

        Args:
            tmp_path: output directory
            monkeypatch: replaces the bound suite
            switches: extra flags
            certificates: expected certificates argument
            checks: expected checks argument

        """
        calls = []

        def _record(*args, **kwargs):
            calls.append(kwargs)
            return []

        monkeypatch.setattr(cli.functional_verification, "verifyBounds", _record)

        code = cli.main(["verify", *COARSE_DISK, "--p", "2", "--beta", "1", *switches, "--out", str(tmp_path)])

        assert code == cli.EXIT_OK
        assert calls == [{"certificates": certificates, "checks": checks}]

    def test_verify_csv(self, tmp_path):
        """Test the bound table of the coarse disk.

        Args:
            tmp_path: output directory

        """
        code = cli.main(["verify", *COARSE_DISK, "--p", "2", "--beta", "1", "--format", "csv", "--out", str(tmp_path)])

        assert code == cli.EXIT_OK
        df = pd.read_csv(tmp_path / "bounds.csv")
        assert list(df.columns) == rp.bounds.CSV_COLUMNS
        assert df.loc[0, "all_satisfied"]

    def test_sweep(self, tmp_path):
        """Test that the sweep command writes the points and the summary rows.

        Args:
            tmp_path: output directory

        """
        code = cli.main(["sweep", *COARSE_DISK, "--p", "2", "--beta-grid", "0.01:1:log", "--out", str(tmp_path)])

        assert code == cli.EXIT_OK
        df = pd.read_csv(tmp_path / "sweep.csv")
        assert list(df["kind"]) == ["point"] * 3 + ["limit_slope", "final_gap"]

    def test_sweep_json(self, tmp_path):
        """Test that the sweep table is written as JSON records on request.

        Args:
            tmp_path: output directory

        """
        code = cli.main(
            ["sweep", *COARSE_DISK, "--p", "2", "--beta", "1", "--format", "json", "--out", str(tmp_path)]
        )

        assert code == cli.EXIT_OK
        assert not (tmp_path / "sweep.csv").exists()
        records = json.loads((tmp_path / "sweep.json").read_text())
        assert [r["kind"] for r in records] == ["point", "limit_slope", "final_gap"]

    def test_mesh(self, tmp_path):
        """Test that the mesh command writes the mesh and its geometry.

        Args:
            tmp_path: output directory

        """
        code = cli.main(["mesh", *COARSE_DISK, "--domain", "square:1", "--out", str(tmp_path)])

        assert code == cli.EXIT_OK
        assert (tmp_path / "disk_1.mesh").exists()
        geometry = json.loads((tmp_path / "square_1.json").read_text())
        assert geometry["vertices"] == 25
        assert geometry["area"] == pytest.approx(1.0)


class TestRunConfig:
    def test_flags_override_file(self, tmp_path):
        """Test that the config file fills in flags and the command line wins.

        Args:
            tmp_path: config and output directory

        """
        config = tmp_path / "run.cfg"
        config.write_text("# coarse disk\ndomain = disk:1\np = 2, 3\nbeta = 1 5\nh = 0.25\nformat = csv\n")

        args = cli.parse_args(["eig", "--config", str(config), "--beta", "10", "--out", str(tmp_path)])

        assert args.domain == ["disk:1"]
        assert args.p == [2.0, 3.0]
        assert args.beta == [10.0]
        assert args.h == 0.25
        assert args.format == "csv"
        assert args.out == str(tmp_path)

    @pytest.mark.parametrize("command,expected", [("eig", "json"), ("verify", "json"), ("sweep", "csv")])
    def test_default_format(self, command, expected):
        """Test that sweeps default to CSV and the other commands to JSON.

        Args:
            command: subcommand
            expected: default report format

        """
        assert cli.parse_args([command]).format == expected

    def test_sweep_format_from_file(self, tmp_path):
        """Test that a config file can switch the sweep back to JSON.

        Args:
            tmp_path: config directory

        """
        config = tmp_path / "run.cfg"
        config.write_text("format = json\n")

        assert cli.parse_args(["sweep", "--config", str(config)]).format == "json"

    @pytest.mark.parametrize("content", ["domain disk:1\n", "colour = blue\n"])
    def test_bad_config(self, tmp_path, content):
        """Test that malformed lines and unknown keys give exit status 2.

        Args:
            tmp_path: config directory
            content: config file text

        """
        config = tmp_path / "run.cfg"
        config.write_text(content)

        assert cli.main(["eig", "--config", str(config)]) == cli.EXIT_CONFIG

    def test_missing_config(self, tmp_path):
        """Test that an unreadable config file gives exit status 2.

        Args:
            tmp_path: directory without the config file

        """
        assert cli.main(["eig", "--config", str(tmp_path / "missing.cfg")]) == cli.EXIT_CONFIG


class TestParseBetaGrid:
    def test_log(self):
        """Test one point per decade."""
        grid = cli.parse_beta_grid("1e-3:1e4:log")

        assert len(grid) == 8
        assert grid[0] == pytest.approx(1e-3)
        assert grid[-1] == pytest.approx(1e4)

    def test_lin(self):
        """Test the default and explicit point counts."""
        assert len(cli.parse_beta_grid("0:1:lin")) == 11
        assert cli.parse_beta_grid("0:1:lin:3") == [0.0, 0.5, 1.0]

    @pytest.mark.parametrize("text", ["1:0:log", "0:1:log", "1:10", "1:10:cubic", "a:b:lin", "0:1:lin:0"])
    def test_invalid(self, text):
        """Test malformed grids.

        Args:
            text: grid description

        """
        with pytest.raises(argparse.ArgumentTypeError):
            cli.parse_beta_grid(text)
