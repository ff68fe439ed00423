"""End-to-end CLI behavior: files, formats, and exit codes."""

import json

import numpy as np
import pytest

from nashseek import parse_config
from nashseek.cli import main

BASE = {
    "game": {"type": "ring", "n": 2},
    "graph": {"type": "cycle", "n": 2},
    "players": {"order": 1, "theta": 0.3, "delta": 1.0},
    "sim": {"step_size": 2e-3, "t_end": 2.0, "log_every": 4, "conv_window": 1.0},
}


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestRun:
    def test_writes_contracted_files(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, BASE)
        out = tmp_path / "out"
        assert main(["run", cfg_path, "--out", str(out)]) == 0
        lines = (out / "trajectory.csv").read_text().splitlines()
        assert lines[0] == "t,y_1,y_2,u_1,u_2,err,tilde_norm,z_residual,xbar_tail_max"
        steps = round(2.0 / 2e-3)
        assert len(lines) == 1 + steps // 4
        data = np.loadtxt(out / "trajectory.csv", delimiter=",", skiprows=1)
        assert data.shape == (steps // 4, 9)
        np.testing.assert_allclose(data[:, 0], np.arange(1, steps // 4 + 1) * 4 * 2e-3)
        # 17 significant digits round-trip doubles exactly: rewriting the
        # parsed values must reproduce the file
        rewritten = "\n".join(
            ",".join(f"{v:.17g}" for v in row) for row in data
        )
        assert rewritten == "\n".join(lines[1:])

    def test_summary_is_self_contained(self, tmp_path):
        cfg_path = write_config(tmp_path, BASE)
        out = tmp_path / "out"
        assert main(["run", cfg_path, "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert set(summary) == {
            "converged",
            "t_converge",
            "final_err",
            "max_abs_u",
            "certified_bounds",
            "bound_violated",
            "c_final_range",
            "c_monotone",
            "unsaturated_entry_time",
            "c_trailing_drift",
            "resolved_config",
        }
        # the embedded config re-parses to the identical scenario
        assert parse_config(summary["resolved_config"]) == parse_config(BASE)
        assert summary["certified_bounds"] == [1.0, 1.0]

    def test_replicates_fan_out(self, tmp_path, capsys):
        data = dict(BASE, init={"z0": {"random": {"low": -0.5, "high": 0.5}}}, seed=9)
        cfg_path = write_config(tmp_path, data)
        out = tmp_path / "reps"
        assert main(["run", cfg_path, "--out", str(out), "--replicates", "2"]) == 0
        for r in range(2):
            assert (out / f"replicate_{r:02d}" / "trajectory.csv").exists()
            assert (out / f"replicate_{r:02d}" / "summary.json").exists()
        captured = capsys.readouterr().out
        assert "seed 9" in captured and "seed 10" in captured
        # replicates resolve different initial estimates
        s0 = json.loads((out / "replicate_00" / "summary.json").read_text())
        s1 = json.loads((out / "replicate_01" / "summary.json").read_text())
        assert (
            s0["resolved_config"]["init"]["z0"] != s1["resolved_config"]["init"]["z0"]
        )

    def test_allow_large_theta_flag(self, tmp_path):
        data = dict(BASE, players={"order": 1, "theta": 0.6, "delta": 1.0})
        cfg_path = write_config(tmp_path, data)
        assert main(["run", cfg_path, "--out", str(tmp_path / "o")]) == 3
        with pytest.warns(RuntimeWarning):
            code = main(
                ["run", cfg_path, "--out", str(tmp_path / "o"), "--allow-large-theta"]
            )
        assert code == 0


class TestExitCodes:
    def test_config_error_is_2(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, {"game": {"type": "ring", "n": 2}})
        assert main(["run", cfg_path, "--out", str(tmp_path / "o")]) == 2
        assert "config error" in capsys.readouterr().err

    def test_invalid_json_is_2(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 2

    def test_assumption_failure_is_3(self, tmp_path, capsys):
        # one-way chain: not strongly connected
        data = dict(
            BASE,
            game={"type": "ring", "n": 3},
            graph={"weights": [[0, 0, 0], [1, 0, 0], [0, 1, 0]]},
        )
        cfg_path = write_config(tmp_path, data)
        assert main(["run", cfg_path, "--out", str(tmp_path / "o")]) == 3
        assert "strongly connected" in capsys.readouterr().err

    def test_numerical_fault_is_4(self, tmp_path, capsys):
        data = dict(
            BASE,
            init={"z0": 1000.0},
            sim={"step_size": 0.05, "t_end": 2.0, "log_every": 1, "conv_window": 1.0},
        )
        cfg_path = write_config(tmp_path, data)
        assert main(["run", cfg_path, "--out", str(tmp_path / "o")]) == 4
        assert "numerical fault" in capsys.readouterr().err


class TestSolveNe:
    def test_ring_agreement(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, {"game": {"type": "ring", "n": 6}})
        assert main(["solve-ne", cfg_path]) == 0
        out = capsys.readouterr().out
        assert "closed-form" in out and "gradient-play" in out
        assert out.count("-0.5") >= 12
        deviation = float(out.strip().splitlines()[-1].split(":")[1])
        assert deviation < 1e-6

    def test_skew_game_fails_monotonicity(self, tmp_path, capsys):
        cfg_path = write_config(
            tmp_path,
            {"game": {"jacobian": [[0.0, 1.0], [-1.0, 0.0]], "offset": [1.0, 1.0]}},
        )
        assert main(["solve-ne", cfg_path]) == 3
        assert "monotone" in capsys.readouterr().err


class TestCheck:
    def test_all_pass(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, BASE)
        assert main(["check", cfg_path]) == 0
        out = capsys.readouterr().out
        assert "[FAIL]" not in out
        for name in (
            "monotonicity",
            "lipschitz",
            "theta-range",
            "actuator-bound",
            "strong-connectivity",
            "pinned-laplacian",
        ):
            assert name in out

    def test_theta_range_failure(self, tmp_path, capsys):
        data = dict(BASE, players={"order": 1, "theta": 0.6, "delta": 1.0})
        cfg_path = write_config(tmp_path, data)
        assert main(["check", cfg_path]) == 3
        assert "[FAIL] theta-range player 1" in capsys.readouterr().out

    def test_actuator_bound_failure(self, tmp_path, capsys):
        data = dict(
            BASE,
            players={"order": 3, "theta": 1.0 / 3.0, "delta": 1.0, "u_limit": 0.4},
        )
        cfg_path = write_config(tmp_path, data)
        assert main(["check", cfg_path]) == 3
        out = capsys.readouterr().out
        assert "[FAIL] actuator-bound player 1" in out
        assert "0.481481" in out

    def test_disconnected_graph_failure(self, tmp_path, capsys):
        data = dict(
            BASE,
            game={"type": "ring", "n": 3},
            graph={"weights": [[0, 0, 0], [1, 0, 0], [0, 1, 0]]},
        )
        cfg_path = write_config(tmp_path, data)
        assert main(["check", cfg_path]) == 3
        assert "[FAIL] strong-connectivity" in capsys.readouterr().out
