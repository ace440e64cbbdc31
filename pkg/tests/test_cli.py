"""Integration tests for the command-line front end.

Runs the subcommands end to end through ``main`` and checks exit codes,
stdout summaries and written files.
"""

import json
import logging

import numpy as np
import pandas as pd
import pytest

from src.core.spectral_cost import momentum_from_control
from src.main import main
from src.models.params import CostParams
from src.storage.trajectory_store import read_records


@pytest.fixture
def problem_path(tmp_path, problem_payload):
    """Commuting-instance problem file on disk."""
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(problem_payload))
    return path


@pytest.fixture
def solved(tmp_path, problem_path, capsys):
    """Trajectory file produced by a successful solve."""
    out = tmp_path / "traj.jsonl"
    assert main(["solve", "--input", str(problem_path), "--output", str(out)]) == 0
    capsys.readouterr()
    return out


class TestSolveCommand:
    """Test cases for the solve subcommand."""

    def test_commuting_solve(self, tmp_path, problem_path, capsys):
        """Test exit 0 and a summary whose cost equals the baseline."""
        out = tmp_path / "traj.jsonl"
        code = main(["solve", "--input", str(problem_path), "--output", str(out)])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["cost"] == pytest.approx(summary["baseline_cost"], abs=1e-8)
        assert summary["residual_norm"] < 1e-8
        assert summary["verification_passed"] is True
        assert set(summary["drift"]) == {"drift_a", "drift_m", "drift_l", "worst_node_a"}
        assert len(read_records(out)) == 201

    def test_identity_solve(self, tmp_path, capsys):
        """Test Sigma_0 = Sigma_1 costs ((2/theta) ln n)^2."""
        path = tmp_path / "identity.json"
        path.write_text(json.dumps({"theta": 5.0, "sigma0": [[1, 0], [0, 1]], "sigma1": [[1, 0], [0, 1]], "steps": 20}))
        assert main(["solve", "--input", str(path), "--output", str(tmp_path / "t.jsonl")]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["cost"] == pytest.approx((2.0 / 5.0 * np.log(2.0)) ** 2, rel=1e-10)

    def test_steps_and_theta_flags(self, tmp_path, problem_path, capsys):
        """Test that flags override file values."""
        out = tmp_path / "traj.jsonl"
        code = main(["solve", "--input", str(problem_path), "--output", str(out), "--steps", "60", "--theta", "2"])
        assert code == 0
        records = read_records(out)
        assert len(records) == 61
        assert records[0].theta == 2.0

    def test_svg_written(self, tmp_path, problem_path, capsys):
        """Test the optional figure output."""
        svg = tmp_path / "fig.svg"
        assert main(["solve", "--input", str(problem_path), "--output", str(tmp_path / "t.jsonl"), "--svg", str(svg)]) == 0
        assert svg.read_text().lstrip().startswith("<?xml")

    def test_deterministic_outputs(self, tmp_path, problem_path, capsys):
        """Test byte-identical trajectory and SVG across runs."""
        outputs = []
        for run in ("a", "b"):
            traj, svg = tmp_path / f"{run}.jsonl", tmp_path / f"{run}.svg"
            assert main(["solve", "--input", str(problem_path), "--output", str(traj), "--svg", str(svg)]) == 0
            outputs.append((traj.read_bytes(), svg.read_bytes()))
        assert outputs[0] == outputs[1]

    @pytest.mark.parametrize(
        "flag, value", [("--theta", "0"), ("--steps", "0"), ("--theta", "-1"), ("--restarts", "-1")]
    )
    def test_invalid_overrides(self, tmp_path, problem_path, flag, value):
        """Test exit 2 for zero or negative overrides instead of silently using the file value."""
        out = tmp_path / "traj.jsonl"
        assert main(["solve", "--input", str(problem_path), "--output", str(out), flag, value]) == 2
        assert not out.exists()

    def test_determinant_mismatch(self, tmp_path, problem_payload, caplog):
        """Test exit 2 with a message naming the determinant invariant."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({**problem_payload, "sigma1": [[1.0, 0.0], [0.0, 2.0]]}))
        with caplog.at_level(logging.ERROR, logger="covsteer"):
            code = main(["solve", "--input", str(path), "--output", str(tmp_path / "t.jsonl")])
        assert code == 2
        assert "determinant" in caplog.text

    def test_malformed_json(self, tmp_path):
        """Test exit 2 on a parse error."""
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["solve", "--input", str(path), "--output", str(tmp_path / "t.jsonl")]) == 2

    def test_missing_file(self, tmp_path):
        """Test exit 2 when the input does not exist."""
        assert main(["solve", "--input", str(tmp_path / "nope.json"), "--output", str(tmp_path / "t.jsonl")]) == 2

    def test_non_convergence(self, tmp_path, capsys):
        """Test exit 3 when the iteration budget is exhausted."""
        path = tmp_path / "planar.json"
        payload = {
            "theta": 5.0,
            "sigma0": [[2.0, 0.5], [0.5, 1.0]],
            "sigma1": [[1.0, -0.3], [-0.3, 1.84]],
            "steps": 40,
            "shooting": {"max_outer_iter": 1, "residual_tol": 1e-15},
        }
        path.write_text(json.dumps(payload))
        assert main(["solve", "--input", str(path), "--output", str(tmp_path / "t.jsonl")]) == 3


class TestBaselineCommand:
    """Test cases for the baseline subcommand."""

    def test_commuting_baseline(self, problem_path, capsys):
        """Test A_const = diag(-ln 2, ln 2) and cost 3.358355 for theta = 1."""
        assert main(["baseline", "--input", str(problem_path)]) == 0
        result = json.loads(capsys.readouterr().out)
        assert np.allclose(result["a_const"], np.diag([-0.693147, 0.693147]), atol=1e-6)
        assert result["cost"] == pytest.approx(3.358355, abs=1e-6)
        assert result["feasibility_residual"] < 1e-12
        assert np.allclose(result["phi"], np.diag([0.5, 2.0]))

    def test_baseline_output(self, tmp_path, problem_path, capsys):
        """Test that --output writes the constant-control trajectory."""
        out = tmp_path / "baseline.jsonl"
        assert main(["baseline", "--input", str(problem_path), "--output", str(out)]) == 0
        records = read_records(out)
        assert len(records) == 201
        assert np.allclose(records[-1].matrix("sigma"), np.diag([0.5, 2.0]))


class TestSimulateCommand:
    """Test cases for the simulate subcommand."""

    def test_zero_costate(self, tmp_path, capsys):
        """Test that Lambda_0 = 0 gives a constant trajectory."""
        path = tmp_path / "init.json"
        path.write_text(json.dumps({"theta": 2.0, "sigma0": [[1.5, 0.2], [0.2, 1.0]], "lambda0": [[0, 0], [0, 0]], "steps": 10}))
        out = tmp_path / "sim.jsonl"
        assert main(["simulate", "--input", str(path), "--output", str(out)]) == 0
        drift = json.loads(capsys.readouterr().out)
        assert drift["drift_a"] == 0.0
        records = read_records(out)
        assert all(np.allclose(r.matrix("sigma"), [[1.5, 0.2], [0.2, 1.0]]) for r in records)

    def test_generic_costate_is_isospectral(self, tmp_path, capsys):
        """Test drift_a < 1e-8 for a generic initial costate."""
        path = tmp_path / "init.json"
        payload = {"theta": 2.0, "sigma0": [[1.5, 0.2], [0.2, 1.0]], "lambda0": [[0.3, -0.2], [-0.2, -0.4]], "steps": 200}
        path.write_text(json.dumps(payload))
        assert main(["simulate", "--input", str(path), "--output", str(tmp_path / "sim.jsonl")]) == 0
        assert json.loads(capsys.readouterr().out)["drift_a"] < 1e-8

    def test_spd_loss(self, tmp_path, caplog):
        """Test exit 5 and the failure time when Sigma leaves the SPD cone."""
        m0 = np.array(momentum_from_control(np.diag([1.0, -1.0]), CostParams(theta=1.0)))
        lam0 = m0 @ np.diag([1.0, 1e11])
        path = tmp_path / "init.json"
        path.write_text(json.dumps({"theta": 1.0, "sigma0": [[1.0, 0.0], [0.0, 1e-11]], "lambda0": lam0.tolist(), "steps": 10}))
        with caplog.at_level(logging.ERROR, logger="covsteer"):
            code = main(["simulate", "--input", str(path), "--output", str(tmp_path / "sim.jsonl")])
        assert code == 5
        assert "t=0.6" in caplog.text


class TestVerifyCommand:
    """Test cases for the verify subcommand."""

    def test_round_trip(self, solved, capsys):
        """Test that a solve output verifies with default tolerances."""
        assert main(["verify", "--trajectory", str(solved)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"] is True

    def test_corrupted_record(self, solved, capsys):
        """Test exit 4 naming the failing check and node."""
        lines = solved.read_text().splitlines()
        record = json.loads(lines[10])
        record["det_sigma"] *= 1.01
        lines[10] = json.dumps(record)
        solved.write_text("\n".join(lines) + "\n")
        assert main(["verify", "--trajectory", str(solved)]) == 4
        report = json.loads(capsys.readouterr().out)
        failing = {c["name"]: c["node"] for c in report["checks"] if not c["passed"]}
        assert failing["record_consistency"] == 10

    def test_tolerance_flag(self, solved, capsys):
        """Test that --tol 1e-2 accepts a mildly drifted file."""
        lines = solved.read_text().splitlines()
        record = json.loads(lines[10])
        record["det_sigma"] *= 1 + 1e-5
        lines[10] = json.dumps(record)
        solved.write_text("\n".join(lines) + "\n")
        assert main(["verify", "--trajectory", str(solved)]) == 4
        assert main(["verify", "--trajectory", str(solved), "--tol", "1e-2"]) == 0

    @pytest.mark.parametrize("det_sigma", [0.0, -1.0])
    def test_non_positive_determinant(self, tmp_path, problem_path, capsys, caplog, det_sigma):
        """Test exit 2 when a baseline trajectory file stores a non-positive determinant."""
        out = tmp_path / "baseline.jsonl"
        assert main(["baseline", "--input", str(problem_path), "--output", str(out)]) == 0
        capsys.readouterr()
        lines = out.read_text().splitlines()
        record = json.loads(lines[0])
        record["det_sigma"] = det_sigma
        lines[0] = json.dumps(record)
        out.write_text("\n".join(lines) + "\n")
        with caplog.at_level(logging.ERROR, logger="covsteer"):
            assert main(["verify", "--trajectory", str(out)]) == 2
        assert "det_sigma" in caplog.text

    def test_diagnostics_table(self, tmp_path, solved, capsys):
        """Test that --table writes one CSV row per node with the drift and stationarity columns."""
        table_path = tmp_path / "diag" / "table.csv"
        assert main(["verify", "--trajectory", str(solved), "--table", str(table_path)]) == 0
        table = pd.read_csv(table_path, index_col="node")
        assert len(table) == 201
        assert {"t", "det_sigma", "g_theta", "eig_a_0", "eig_a_1", "det_drift", "stationarity"} <= set(table.columns)
        assert table["t"].iloc[-1] == pytest.approx(1.0)
        assert table["det_drift"].max() < 1e-8
        assert table["stationarity"].max() < 1e-9

    def test_malformed_file(self, tmp_path):
        """Test exit 2 on an unreadable trajectory."""
        path = tmp_path / "bad.jsonl"
        path.write_text("garbage\n")
        assert main(["verify", "--trajectory", str(path)]) == 2


class TestFigureCommand:
    """Test cases for the figure subcommand."""

    def test_commuting_figure(self, tmp_path, solved):
        """Test the SVG and flat eigenvalue traces at +-ln 2 read from the trajectory."""
        svg = tmp_path / "fig.svg"
        assert main(["figure", "--trajectory", str(solved), "--svg", str(svg), "--frames", "8"]) == 0
        assert "<svg" in svg.read_text()
        eigs = np.array([r.eigs_a for r in read_records(solved)])
        assert np.allclose(eigs, [-0.693147, 0.693147], atol=1e-6)

    def test_non_planar(self, tmp_path, capsys):
        """Test exit 2 for n != 2."""
        path = tmp_path / "p3.json"
        eye3 = np.eye(3).tolist()
        path.write_text(json.dumps({"theta": 1.0, "sigma0": eye3, "sigma1": eye3, "steps": 4}))
        traj = tmp_path / "t3.jsonl"
        assert main(["baseline", "--input", str(path), "--output", str(traj)]) == 0
        assert main(["figure", "--trajectory", str(traj), "--svg", str(tmp_path / "f.svg")]) == 2
