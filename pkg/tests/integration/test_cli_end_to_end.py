import json

import pytest

from frontlab.bin.frontlab_cli import main
from frontlab.reports import read_table


@pytest.fixture
def cli(tmp_path, monkeypatch):
    """Run main() in an empty working directory and return its exit status."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("FRONTLAB_CONFIG_FILE", raising=False)
    monkeypatch.delenv("FRONTLAB_OUTPUT_DIR", raising=False)
    monkeypatch.setenv("FRONTLAB_WORKERS", "1")

    def _main(*argv):
        with pytest.raises(SystemExit) as exc:
            main(list(argv))
        return exc.value.code

    return _main


class TestFold:
    """Test the fold command end to end."""

    def test_writes_results_and_provenance(self, cli, write_config, superslow_descriptor, tmp_path):
        assert cli("fold", "--config", str(write_config(superslow_descriptor)), "--output-dir", "a") == 0
        fold = json.loads((tmp_path / "a" / "fold.json").read_text())
        assert fold["gamma_double"] == pytest.approx(1.5, abs=1e-5)
        assert fold["v_fold"] == pytest.approx(2.0, abs=1e-4)
        provenance = json.loads((tmp_path / "a" / "provenance.json").read_text())
        assert provenance["deterministic"] is True

    def test_reruns_are_identical(self, cli, write_config, superslow_descriptor, tmp_path):
        path = str(write_config(superslow_descriptor))
        assert cli("fold", "--config", path, "--output-dir", "a") == 0
        assert cli("fold", "--config", path, "--output-dir", "b") == 0
        assert (tmp_path / "a" / "fold.json").read_bytes() == (tmp_path / "b" / "fold.json").read_bytes()

    def test_default_output_dir(self, cli, write_config, superslow_descriptor, tmp_path):
        assert cli("fold", "--config", str(write_config(superslow_descriptor))) == 0
        assert (tmp_path / "frontlab-out" / "fold.json").exists()

    def test_environment_settings(self, cli, write_config, superslow_descriptor, tmp_path, monkeypatch):
        monkeypatch.setenv("FRONTLAB_CONFIG_FILE", str(write_config(superslow_descriptor)))
        monkeypatch.setenv("FRONTLAB_OUTPUT_DIR", str(tmp_path / "env"))
        assert cli("fold") == 0
        assert (tmp_path / "env" / "fold.json").exists()


class TestDecompose:
    def test_valid_reaction(self, cli, write_config, superslow_descriptor, tmp_path):
        assert cli("decompose", "--config", str(write_config(superslow_descriptor)), "--output-dir", "out") == 0
        probes = read_table(tmp_path / "out" / "probes.csv")
        assert list(probes.columns) == ["u_sq", "v", "H", "G", "F"]

    def test_reaction_with_nonzero_g0(self, cli, write_config, tmp_path, capsys):
        # G(v) = F(1 + v, v) = 0.5 - v
        descriptor = {
            "epsilon": 0.1,
            "tau": 1.0,
            "regime": {"regular": {"g1": -1.0}},
            "F": {"kind": "polynomial", "coefficients": [[0.5, -1.0], [1.0, 1.0], [-1.0, 0.0]]},
        }
        assert cli("decompose", "--config", str(write_config(descriptor)), "--output-dir", "out") == 2
        assert "ValidationError" in capsys.readouterr().err
        validation = json.loads((tmp_path / "out" / "validation.json").read_text())
        assert validation["passed"] is False


class TestSpectrum:
    def test_merged_band(self, cli, write_config, regular_descriptor, tmp_path):
        assert cli("spectrum", "--config", str(write_config(regular_descriptor)), "--output-dir", "out") == 0
        spectrum = json.loads((tmp_path / "out" / "spectrum.json").read_text())
        assert spectrum["stable"] is True
        assert spectrum["regime"] == "MergedComplexBand"
        dispersion = read_table(tmp_path / "out" / "dispersion.csv")
        assert len(dispersion) > 0

    def test_unstable_background_is_a_result(self, cli, write_config, regular_descriptor, tmp_path, capsys):
        regular_descriptor["H"]["h0"] = 3.5
        assert cli("spectrum", "--config", str(write_config(regular_descriptor)), "--output-dir", "out") == 0
        assert "background states are unstable" in capsys.readouterr().out
        spectrum = json.loads((tmp_path / "out" / "spectrum.json").read_text())
        assert spectrum["stable"] is False
        assert spectrum["report"] is None


class TestBranches:
    def test_two_branches(self, cli, write_config, superslow_descriptor, tmp_path, capsys):
        assert cli("branches", "--config", str(write_config(superslow_descriptor)), "--output-dir", "out") == 0
        assert "2 branch(es)" in capsys.readouterr().out
        branches = read_table(tmp_path / "out" / "branches.csv")
        assert list(branches["branch_index"]) == [1, 2]
        assert branches["v0"].iloc[1] == pytest.approx(5.409653, abs=1e-5)
        assert (tmp_path / "out" / "takeoff.csv").exists()


class TestSimulate:
    def test_short_run(self, cli, write_config, superslow_descriptor, tmp_path):
        path = str(write_config(superslow_descriptor))
        assert cli("simulate", "--config", path, "--output-dir", "out", "--T", "0.2", "--snapshot-every", "10") == 0
        summary = json.loads((tmp_path / "out" / "simulate.json").read_text())
        assert summary["verdict"] == "Persists"
        assert summary["config"]["T_final"] == 0.2
        assert len(list((tmp_path / "out" / "snapshots").glob("*.csv"))) == 2
        assert len(read_table(tmp_path / "out" / "series.csv")) == 3


class TestSweep:
    def test_gamma_sweep(self, cli, write_config, superslow_descriptor, tmp_path, capsys):
        grid = {"analysis": "branches", "base": superslow_descriptor, "axes": {"gamma": {"values": [1.4, 1.6, 2.0]}}}
        assert cli("sweep", "--config", str(write_config(grid, name="grid.yaml")), "--output-dir", "out") == 0
        assert "3 point(s), 0 failed" in capsys.readouterr().out
        frame = read_table(tmp_path / "out" / "sweep.csv")
        assert list(frame["n_branches"]) == [0, 2, 2]
        provenance = json.loads((tmp_path / "out" / "provenance.json").read_text())
        assert provenance["config_sha256"] is None
