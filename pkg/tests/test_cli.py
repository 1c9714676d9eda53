"""Tests for the evcs-attack command line."""

import json

import pytest
from click.testing import CliRunner

from evcs_attack import __version__
from evcs_attack.cli import cli
from evcs_attack.cli.commands import parse_targets
from evcs_attack.cli.config import RunConfig
from tests.conftest import FIXTURES

WEAK_GRID = str(FIXTURES / "weak_grid.json")
FAST = ["--dt", "0.01"]


@pytest.fixture
def runner():
    return CliRunner()


def _weak(*args):
    return [*args, "--grid", WEAK_GRID, "--node", "L1", *FAST]


class TestModelCommand:
    """Test the pre-attack report."""

    def test_bundled_grid(self, runner, tmp_path):
        """Test the bundled grid reports twelve states and rank 2 at B4."""
        result = runner.invoke(cli, ["model", "--out", str(tmp_path)])
        assert result.exit_code == 0, result.output
        assert "States: 12" in result.output
        assert "rank(Mc): 2" in result.output
        for name in ("spectrum.csv", "model.json", "summary.txt", "manifest.json"):
            assert (tmp_path / name).exists()

        model = json.loads((tmp_path / "model.json").read_text(encoding="utf-8"))
        assert model["stable"] is True
        assert model["state_names"][0] == "delta_B7"

    def test_manifest_is_reproducible(self, runner, tmp_path):
        """Test the same run writes the same manifest."""
        runner.invoke(cli, ["model", "--out", str(tmp_path)])
        first = (tmp_path / "manifest.json").read_text(encoding="utf-8")
        runner.invoke(cli, ["model", "--out", str(tmp_path)])
        assert (tmp_path / "manifest.json").read_text(encoding="utf-8") == first

        manifest = json.loads(first)
        assert manifest["tool_version"] == __version__
        assert "spectrum.csv" in manifest["files"]
        assert len(manifest["config_hash"]) == 64

    def test_missing_grid(self, runner, tmp_path):
        """Test a missing grid file is a load error with status 1."""
        result = runner.invoke(cli, ["model", "--grid", str(tmp_path / "none.json"), "--out", str(tmp_path)])
        assert result.exit_code == 1
        assert "[load]" in result.output

    def test_unknown_node(self, runner, tmp_path):
        """Test attacking a node that is not a load."""
        result = runner.invoke(cli, ["model", "--node", "B99", "--out", str(tmp_path)])
        assert result.exit_code == 1
        assert "[model]" in result.output

    def test_hour_out_of_range(self, runner, tmp_path):
        """Test the hour of week is checked."""
        result = runner.invoke(cli, ["model", "--hour", "200", "--out", str(tmp_path)])
        assert result.exit_code == 1
        assert "[config]" in result.output

    def test_usage_error_exits_one(self, runner):
        """Test unknown options do not collide with the infeasible status."""
        result = runner.invoke(cli, ["model", "--no-such-option"])
        assert result.exit_code == 1

    def test_version(self, runner):
        """Test --version."""
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output


class TestSimulateCommand:
    """Test the generator-trip scenario."""

    def test_trip_scenario(self, runner, tmp_path):
        """Test the trace, trips and operating state are written."""
        result = runner.invoke(cli, _weak("simulate", "--trip-node", "G", "--out", str(tmp_path)))
        assert result.exit_code == 0, result.output
        for name in ("trace.csv", "trips.json", "operating_state.json", "manifest.json"):
            assert (tmp_path / name).exists()

        header = (tmp_path / "trace.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header.startswith("t,delta_R,delta_G,omega_R")
        assert header.endswith("f_R,f_G,u")

        state = json.loads((tmp_path / "operating_state.json").read_text(encoding="utf-8"))
        assert state["trip_node"] == "G"
        assert state["capture_time_s"] > 0
        assert set(state["x"]) >= {"delta_R", "theta_L2"}

    def test_unknown_trip_node(self, runner, tmp_path):
        """Test a load node cannot trip."""
        result = runner.invoke(cli, _weak("simulate", "--trip-node", "L2", "--out", str(tmp_path)))
        assert result.exit_code == 1
        assert "[simulation]" in result.output


class TestAttackCommand:
    """Test attack synthesis from the command line."""

    def test_attack_writes_plan(self, runner, tmp_path):
        """Test a plan and the achieved spectrum are written."""
        result = runner.invoke(cli, _weak("attack", "--trip-node", "G", "--out", str(tmp_path)))
        assert result.exit_code in (0, 2), result.output
        plan = json.loads((tmp_path / "plan.json").read_text(encoding="utf-8"))
        assert plan["attack_node"] == "L1"
        assert sorted(plan["targets"]) == [[0.5, -5.0], [0.5, 5.0]]
        assert (tmp_path / "achieved_spectrum.csv").exists()
        assert (tmp_path / "manifest.json").exists()

    def test_cap_not_above_margin(self, runner, tmp_path):
        """Test a zero cap is a synthesis error."""
        result = runner.invoke(
            cli, _weak("attack", "--trip-node", "G", "--cap-mw", "0", "--out", str(tmp_path))
        )
        assert result.exit_code == 1
        assert "[synthesis]" in result.output

    def test_conflicting_stdev_options(self, runner, tmp_path):
        """Test --stdev and --stdev-from-profile exclude each other."""
        args = _weak("attack", "--eta", "0.01", "--stdev", "1", "--stdev-from-profile", "--out", str(tmp_path))
        result = runner.invoke(cli, args)
        assert result.exit_code == 1
        assert "[config]" in result.output

    def test_bundled_evcs_peak_is_infeasible(self, runner, tmp_path):
        """Test the 600 kW peak at B4 cannot pay for the default attack."""
        result = runner.invoke(cli, ["attack", "--out", str(tmp_path)])
        assert result.exit_code == 2, result.output
        assert "demand exceeds the cap" in result.output
        plan = json.loads((tmp_path / "plan.json").read_text(encoding="utf-8"))
        assert plan["feasible"] is False
        assert plan["reason"] == "demand"
        assert plan["cap_pu"] == pytest.approx(0.006)

    def test_missed_targets_exit_infeasible(self, runner, tmp_path, monkeypatch):
        """Test a gain that misses the targets exits 2 and says so."""
        import evcs_attack.attack.synthesis as synthesis_module

        exact = synthesis_module.target_equations

        def off_target(*args, **kwargs):
            v, h = exact(*args, **kwargs)
            return v, 1.5 * h

        monkeypatch.setattr(synthesis_module, "target_equations", off_target)
        result = runner.invoke(
            cli, _weak("attack", "--trip-node", "G", "--cap-mw", "1e9", "--out", str(tmp_path))
        )
        assert result.exit_code == 2, result.output
        assert "targets missed" in result.output


class TestSweepCommand:
    """Test the region sweep from the command line."""

    def test_small_region(self, runner, tmp_path):
        """Test a 3 x 3 sweep writes the table, long form and metadata."""
        args = _weak(
            "sweep",
            "--trip-node", "G",
            "--xi-min", "0", "--xi-max", "0.03", "--xi-step", "0.015",
            "--omega-min", "5", "--omega-max", "5.2", "--omega-step", "0.1",
            "--out", str(tmp_path),
        )
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        assert "Cells: 9" in result.output

        matrix = (tmp_path / "sweep_matrix.csv").read_text(encoding="utf-8").splitlines()
        assert matrix[0] == "omega_n,0,0.015,0.03"
        assert len(matrix) == 4
        meta = json.loads((tmp_path / "sweep_meta.json").read_text(encoding="utf-8"))
        assert meta["cells"] == 9

    def test_bad_region(self, runner, tmp_path):
        """Test a zero step over a span is rejected."""
        result = runner.invoke(cli, _weak("sweep", "--xi-step", "0", "--out", str(tmp_path)))
        assert result.exit_code == 1
        assert "[sweep]" in result.output

    def test_repeat_runs_are_byte_identical(self, runner, tmp_path):
        """Test two runs with the same options write the same numeric files, with two workers."""
        outputs = []
        for run in ("first", "second"):
            args = _weak(
                "sweep",
                "--trip-node", "G",
                "--xi-min", "0", "--xi-max", "0.03", "--xi-step", "0.015",
                "--omega-min", "5", "--omega-max", "5.2", "--omega-step", "0.1",
                "--workers", "2",
                "--out", str(tmp_path / run),
            )
            result = runner.invoke(cli, args)
            assert result.exit_code == 0, result.output
            outputs.append(tmp_path / run)

        for name in ("sweep_matrix.csv", "sweep_long.csv", "sweep_meta.json"):
            assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes(), name


class TestSensitivityCommand:
    """Test the parameter-error study from the command line."""

    def test_empty_error_list(self, runner, tmp_path):
        """Test an empty list writes only the header."""
        result = runner.invoke(
            cli, _weak("sensitivity", "--trip-node", "G", "--errors", "", "--out", str(tmp_path))
        )
        assert result.exit_code == 0, result.output
        lines = (tmp_path / "sensitivity.csv").read_text(encoding="utf-8").splitlines()
        assert lines == ["error_pct,delta_p_mw,xi,omega_n,epsilon,feasible,not_available"]

    def test_rows_per_error(self, runner, tmp_path):
        """Test one row per requested error."""
        result = runner.invoke(
            cli, _weak("sensitivity", "--trip-node", "G", "--errors=-10,10", "--out", str(tmp_path))
        )
        assert result.exit_code == 0, result.output
        lines = (tmp_path / "sensitivity.csv").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 3
        assert lines[1].startswith("-10,")


class TestParsing:
    """Test option parsing helpers."""

    def test_explicit_targets_get_conjugates(self):
        """Test a single complex target is completed with its conjugate."""
        targets = parse_targets(("0.5+5j",), None, None)
        assert sorted((t.real, t.imag) for t in targets) == [(0.5, -5.0), (0.5, 5.0)]

    def test_cell_targets(self):
        """Test --xi and --omega give the cell pair."""
        targets = parse_targets((), 0.0, 5.0)
        assert targets[0] == pytest.approx(5.0j)

    def test_xi_needs_omega(self):
        """Test half a cell is an error."""
        with pytest.raises(ValueError):
            parse_targets((), 0.03, None)

    def test_default_targets(self):
        """Test the default right-half-plane pair."""
        assert list(parse_targets((), None, None)) == [0.5 + 5.0j, 0.5 - 5.0j]

    def test_config_hash_ignores_output_location(self):
        """Test the hash covers inputs, not where reports go."""
        a = RunConfig(command="model", grid_path="g.json", out_dir="a")
        b = RunConfig(command="model", grid_path="g.json", out_dir="b", workers=4)
        c = RunConfig(command="model", grid_path="g.json", scale=2.0)
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != c.config_hash()
