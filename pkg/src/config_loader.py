"""設定ファイルの読み込みと CLI 値との統合.

優先順位: モデルの既定値 < config/experiment_defaults.yaml < ユーザー設定ファイル < CLI。
ユーザー設定は YAML でも JSON でもよい (JSON は YAML として読める)。
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from src.experiment.config import ExperimentConfig

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).parent.parent / "config"
DEFAULTS_FILE = CONFIG_DIR / "experiment_defaults.yaml"


class ConfigError(ValueError):
    """設定ファイルが読めない、または検証に失敗した."""


# =====================================================================
# YAML読み込みヘルパー
# =====================================================================


def _read_yaml(path: Path) -> dict:
    """YAML (または JSON) をマッピングとして読み込む. ファイルがなければ空."""
    if not path.exists():
        return {}
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path} を解析できません: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path} のトップレベルはマッピングである必要があります")
    return data


def _normalize_keys(data: dict[str, Any]) -> dict[str, Any]:
    """'--r-list' や 'r-list' を 'r_list' に揃える."""
    return {str(k).lstrip("-").replace("-", "_"): v for k, v in data.items()}


# =====================================================================
# 実験設定
# =====================================================================


def load_defaults() -> dict:
    return _normalize_keys(_read_yaml(DEFAULTS_FILE))


def load_config_file(path: Path | str) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"設定ファイルが見つかりません: {path}")
    return _normalize_keys(_read_yaml(path))


def build_config(
    overrides: dict[str, Any] | None = None,
    config_path: Path | str | None = None,
) -> ExperimentConfig:
    """既定値・設定ファイル・CLI 値 (None は未指定扱い) を統合して検証する."""
    merged = load_defaults()
    if config_path is not None:
        merged.update(load_config_file(config_path))
    merged.update({k: v for k, v in _normalize_keys(overrides or {}).items() if v is not None})
    try:
        config = ExperimentConfig.model_validate(merged)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    logger.debug("設定: %s", config.echo())
    return config
