"""sweep/verify 表と成長指数の当てはめ."""

from __future__ import annotations

import json
import math

import numpy as np
import pandas as pd
import pytest

from src.components.report_writer import df_to_csv_bytes, render_summary, write_json
from src.constants import Col
from src.transforms.report_transform import (
    SWEEP_COLUMNS,
    build_sweep_frame,
    build_verify_frame,
    fit_growth,
    fits_to_frame,
)


def _rows(rs, values, s=1.0):
    return [
        {Col.R: r, Col.S: s, Col.BESOV_B_T: v, Col.BESOV_B_0: 1.0, Col.INFLATION: v, Col.RUN_ID: f"x{r}"}
        for r, v in zip(rs, values)
    ]


class TestSweepFrame:
    def test_sorted_by_r_then_s(self):
        rows = _rows([8, 2], [2.0, 1.0], s=2.0) + _rows([2], [0.5], s=1.0)
        frame = build_sweep_frame(rows)
        assert list(frame[Col.R]) == [2, 2, 8]
        assert list(frame[Col.S]) == [1.0, 2.0, 2.0]
        assert list(frame.columns[: len(SWEEP_COLUMNS)]) == SWEEP_COLUMNS

    def test_empty(self):
        assert list(build_sweep_frame([]).columns) == SWEEP_COLUMNS


class TestFitGrowth:
    def test_exact_power_law(self):
        rs = [2, 4, 8, 16]
        frame = build_sweep_frame(_rows(rs, [3.0 * r**0.2 for r in rs]))
        (fit,) = fit_growth(frame, predicted=0.2)
        assert fit["slope"] == pytest.approx(0.2, abs=1e-12)
        assert fit["intercept"] == pytest.approx(math.log(3.0), abs=1e-12)
        assert fit["residual_rms"] < 1e-12
        assert fit["deviation"] == pytest.approx(0.0, abs=1e-12)
        assert fit["run_ids"] == ["x2", "x4", "x8", "x16"]

    def test_too_few_points(self):
        frame = build_sweep_frame(_rows([2, 4], [1.0, 2.0]))
        (fit,) = fit_growth(frame)
        assert fit["slope"] is None
        assert fit["n_points"] == 2

    def test_nonpositive_values_are_dropped(self):
        frame = build_sweep_frame(_rows([2, 4, 8, 16], [0.0, 1.0, 2.0, 4.0]))
        (fit,) = fit_growth(frame)
        assert fit["n_points"] == 3
        assert fit["slope"] == pytest.approx(1.0)

    def test_fits_frame(self):
        frame = build_sweep_frame(_rows([2, 4, 8], [1.0, 2.0, 4.0]))
        table = fits_to_frame(fit_growth(frame, predicted=1.0))
        assert table.loc[0, "slope"] == pytest.approx(1.0)


class TestWriters:
    def test_csv_format(self):
        data = df_to_csv_bytes(pd.DataFrame({"a": [0.1], "b": [1]}))
        assert data == b"a,b\n0.10000000000000001,1\n"

    def test_verify_frame_columns(self):
        frame = build_verify_frame([{Col.CHECK: "x", Col.PASSED: True, Col.VALUE: 0.0, Col.THRESHOLD: 1.0, Col.DETAIL: ""}])
        assert list(frame.columns) == [Col.CHECK, Col.PASSED, Col.VALUE, Col.THRESHOLD, Col.DETAIL]

    def test_json_replaces_nonfinite(self, tmp_path):
        path = write_json({"a": float("nan"), "b": np.int64(3), "c": (1.0, np.float64(2.5))}, tmp_path / "s.json")
        assert json.loads(path.read_text(encoding="utf-8")) == {"a": None, "b": 3, "c": [1.0, 2.5]}

    def test_render_summary(self):
        text = render_summary("run", [{"label": "r", "value": 4}, {"label": "factor", "value": 1.5}])
        assert text.splitlines() == ["[run]", "  r      : 4", "  factor : 1.5"]
