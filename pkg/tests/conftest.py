"""共通フィクスチャと slow マーカーの登録."""

from __future__ import annotations

import numpy as np
import pytest

from src.construction.feasibility import derive_params
from src.construction.initial_data import build_initial_data, required_grid_size
from src.spectral.grid import Grid


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 実ソルバーを長時間回すテスト (-m slow で実行)")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def params16():
    """α1=α2=1, ε=0.1, r=16 (K=3, T=0.25)."""
    return derive_params(1.0, 1.0, 0.1, 16)


@pytest.fixture
def params2():
    """α1=α2=1, ε=0.1, r=2 (K=2, T=2^{-1/2})."""
    return derive_params(1.0, 1.0, 0.1, 2)


@pytest.fixture
def slab_grid() -> Grid:
    return Grid.slab(32, 8)


@pytest.fixture
def data2(params2):
    """r=2 の構成データを最小の slab 格子に載せたもの."""
    n1, n3 = required_grid_size(params2)
    return build_initial_data(params2, Grid.slab(n1, n3))
