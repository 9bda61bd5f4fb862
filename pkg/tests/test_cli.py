"""app.py のサブコマンドと終了コード."""

from __future__ import annotations

import pytest

from app import main, parse_args


def test_verify_subset(tmp_path, capsys):
    assert main(["verify", "--check", "singular_kernel", "--out", str(tmp_path)]) == 0
    assert "[verify]" in capsys.readouterr().out
    assert (tmp_path / "verify.csv").exists()


def test_verify_failure_exit_code(tmp_path):
    args = ["verify", "--check", "config_feasibility", "--theta1", "3", "--out", str(tmp_path)]
    assert main(args) == 1


def test_analytic_run(tmp_path, capsys):
    assert main(["run", "--analytic-only", "--r", "4", "--out", str(tmp_path)]) == 0
    assert "[run analytic_r004]" in capsys.readouterr().out
    assert (tmp_path / "analytic_r004" / "summary.json").exists()


def test_analytic_sweep(tmp_path):
    args = ["sweep", "--analytic-only", "--r-list", "2,4,8", "--s-list", "1,2", "--out", str(tmp_path)]
    assert main(args) == 0
    assert (tmp_path / "sweep.csv").exists()


def test_invalid_epsilon_is_config_error(tmp_path):
    assert main(["run", "--epsilon", "0.2", "--out", str(tmp_path)]) == 2


def test_infeasible_run(tmp_path, capsys):
    assert main(["run", "--analytic-only", "--theta1", "3", "--out", str(tmp_path)]) == 1
    assert "[infeasible]" in capsys.readouterr().out


def test_grid_too_small(tmp_path):
    assert main(["run", "--r", "2", "--grid", "16x8", "--n-steps", "2", "--out", str(tmp_path)]) == 2


def test_blow_up(tmp_path, capsys):
    config = tmp_path / "cap.yaml"
    config.write_text("blowup_cap: 1.0e-3\n", encoding="utf-8")
    args = ["run", "--config", str(config), "--r", "2", "--grid", "26x8", "--n-steps", "2", "--out", str(tmp_path)]
    assert main(args) == 1
    assert "[blow-up]" in capsys.readouterr().out


def test_slab_flags_are_exclusive():
    with pytest.raises(SystemExit):
        parse_args(["run", "--slab", "--full3d"])
    assert parse_args(["run", "--full3d"]).slab is False
    assert parse_args(["run"]).slab is None
