"""設定の統合と検証."""

from __future__ import annotations

import json

import pytest

from src.config_loader import ConfigError, build_config, load_config_file
from src.spectral.grid import Grid, GridError


class TestBuildConfig:
    def test_defaults(self):
        config = build_config()
        assert config.mode == "run"
        assert config.r == 4
        assert config.r_list == [2, 3, 4, 6]
        assert config.s_list == [1.0]
        assert config.slab
        assert config.theta1 is None

    def test_none_overrides_are_ignored(self):
        assert build_config({"r": None, "epsilon": None}).r == 4

    def test_precedence(self, tmp_path):
        path = tmp_path / "exp.yaml"
        path.write_text("r: 6\nepsilon: 0.05\n", encoding="utf-8")
        config = build_config({"r": 8}, path)
        assert config.r == 8
        assert config.epsilon == 0.05

    def test_json_file(self, tmp_path):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({"r-list": [2, 4, 8], "s_list": [1, 2]}), encoding="utf-8")
        config = build_config(None, path)
        assert config.r_list == [2, 4, 8]
        assert config.s_list == [1.0, 2.0]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config_file(tmp_path / "missing.yaml")

    def test_top_level_must_be_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            build_config(None, path)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"epsilon": 0.2},
            {"alpha1": 0.5},
            {"unknown_key": 1},
            {"r_list": [2, 2, 4]},
            {"s_list": [0.0]},
            {"mode": "sweep", "r_list": [2, 4]},
            {"grid": "64x"},
            {"grid": "63x16"},
        ],
    )
    def test_invalid_values(self, overrides):
        with pytest.raises(ConfigError):
            build_config(overrides)


class TestGridFor:
    def test_default_slab_is_widened(self, params2):
        assert build_config().grid_for(params2) == Grid.slab(1024, 64)

    def test_explicit_slab(self, params2):
        assert build_config({"grid": "26x8"}).grid_for(params2) == Grid.slab(26, 8)

    def test_full_grid_needs_three_sizes(self, params2):
        with pytest.raises(GridError):
            build_config({"grid": "64x16", "slab": False}).grid_for(params2)

    def test_explicit_full(self, params2):
        grid = build_config({"grid": "32x8x8", "slab": False}).grid_for(params2)
        assert grid.shape == (32, 8, 8)

    def test_solver_settings(self):
        settings = build_config({"dt_cfl": 0.25, "workers": 2}).solver_settings()
        assert settings.cfl == 0.25
        assert settings.workers == 2
