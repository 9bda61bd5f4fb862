"""実行結果の表への変換と r に対する成長指数の当てはめ.

sweep の各行から sweep.csv 用の表を作り、s ごとに
log‖b(T)‖ = slope·log r + intercept を最小二乗で当てはめる。
"""

from __future__ import annotations

import math

import numpy as np
import pandas as pd
from scipy import stats

from src.constants import Col

SWEEP_COLUMNS = [Col.R, Col.S, Col.BESOV_B_T, Col.BESOV_B_0, Col.INFLATION, Col.RUN_ID]
VERIFY_COLUMNS = [Col.CHECK, Col.PASSED, Col.VALUE, Col.THRESHOLD, Col.DETAIL]


# =====================================================================
# sweep
# =====================================================================


def build_sweep_frame(rows: list[dict]) -> pd.DataFrame:
    """(r, s) ごとの行を r, s の順に並べる. 既定列以外はそのまま後ろに残す."""
    if not rows:
        return pd.DataFrame(columns=SWEEP_COLUMNS)
    df = pd.DataFrame(rows)
    extra = [c for c in df.columns if c not in SWEEP_COLUMNS]
    df = df[SWEEP_COLUMNS + extra]
    return df.sort_values([Col.R, Col.S], kind="stable").reset_index(drop=True)


def fit_growth(
    df: pd.DataFrame,
    value_col: str = Col.BESOV_B_T,
    predicted: float | None = None,
) -> list[dict]:
    """s ごとに log(value) を log r で回帰. 傾き・95%区間・残差RMSを返す."""
    fits = []
    for s, group in df.groupby(Col.S, sort=True):
        group = group[group[value_col] > 0]
        if len(group) < 3:
            fits.append({"s": float(s), "column": value_col, "n_points": len(group), "slope": None})
            continue
        x = np.log(group[Col.R].to_numpy(dtype=float))
        y = np.log(group[value_col].to_numpy(dtype=float))
        res = stats.linregress(x, y)
        n = len(x)
        half = float(stats.t.ppf(0.975, n - 2)) * float(res.stderr)
        resid = y - (res.intercept + res.slope * x)
        fit = {
            "s": float(s),
            "column": value_col,
            "n_points": n,
            "slope": float(res.slope),
            "intercept": float(res.intercept),
            "stderr": float(res.stderr),
            "ci95": [float(res.slope) - half, float(res.slope) + half],
            "residual_rms": float(math.sqrt(np.mean(resid**2))),
            "run_ids": group[Col.RUN_ID].tolist() if Col.RUN_ID in group else [],
        }
        if predicted is not None:
            fit["predicted"] = predicted
            fit["deviation"] = float(res.slope) - predicted
        fits.append(fit)
    return fits


def fits_to_frame(fits: list[dict]) -> pd.DataFrame:
    cols = ["s", "column", "n_points", "slope", "stderr", "residual_rms", "predicted", "deviation"]
    return pd.DataFrame([{c: f.get(c) for c in cols} for f in fits], columns=cols)


# =====================================================================
# verify
# =====================================================================


def build_verify_frame(checks: list[dict]) -> pd.DataFrame:
    """check, passed, value, threshold, detail の表 (実行順)."""
    return pd.DataFrame(checks, columns=VERIFY_COLUMNS)
