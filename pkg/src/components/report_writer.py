"""レポートファイル (CSV / JSON) の書き出しとコンソール要約."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

# 17桁あれば倍精度が往復で一致する
FLOAT_FORMAT = "%.17g"


def df_to_csv_bytes(df: pd.DataFrame, **kwargs) -> bytes:
    """DataFrameをCSVバイト列に変換.

    - UTF-8 (BOMなし), 小数点は '.'
    - LF改行, 浮動小数は有効17桁
    """
    csv_str = df.to_csv(index=False, lineterminator="\n", float_format=FLOAT_FORMAT, **kwargs)
    return csv_str.encode("utf-8")


def write_csv(df: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(df_to_csv_bytes(df))
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON には NaN/inf がない
        return value if math.isfinite(value) else None
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, pd.DataFrame):
        return _jsonable(value.to_dict(orient="records"))
    return value


def write_json(data: dict, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(data), ensure_ascii=False, indent=2)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def render_summary(title: str, metrics: list[dict]) -> str:
    """要約を整形する.

    Args:
        metrics: [{"label": "r", "value": 4}, {"label": "inflation(s=1)", "value": 2.3}, ...]
    """
    width = max((len(str(m["label"])) for m in metrics), default=0)
    lines = [f"[{title}]"]
    for m in metrics:
        value = m["value"]
        text = f"{value:.6g}" if isinstance(value, float) else str(value)
        lines.append(f"  {str(m['label']).ljust(width)} : {text}")
    return "\n".join(lines)
