"""単発実行 (run) と r の掃引 (sweep).

run は構成データを作って T まで解き、Besov ノルムの時系列と膨張率を出力する。
analytic_only では解を計算せず、線形部と b10 の閉形式から同じ列の時系列を作る
(格子に載らない大きな r でも評価できる)。
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from src.analytics.besov import cosine_sum_besov, plane_wave_besov_exact
from src.analytics.first_iteration import b10_amplitude, b1_bounds
from src.components.report_writer import render_summary, write_csv, write_json
from src.constants import Col, OutputFile
from src.construction.feasibility import (
    FeasibilityReport,
    check_feasibility,
    inflation_lower_bound,
)
from src.construction.initial_data import b_waves, build_initial_data, initial_besov, u_waves
from src.construction.params import InflationParams
from src.experiment.config import ExperimentConfig
from src.solver.diagnostics import first_iteration_residuals, simulate
from src.transforms.report_transform import build_sweep_frame, fit_growth, fits_to_frame

logger = logging.getLogger(__name__)

ANALYTIC_POINTS = 65
# ‖b10(T)‖ から η モード自身の減衰 e^{-|η|^{2α2}T} を除いた列
DRIVER_SCALED = "besov_b10_scaled"


@dataclass
class InflationReport:
    """1回の実行の結果. 数値はすべて run_id に紐づく."""

    run_id: str
    params: InflationParams
    feasibility: FeasibilityReport
    analytic_only: bool
    initial: dict
    series: pd.DataFrame
    besov_T: dict[float, float]
    besov_0: dict[float, float]
    norm_meta: dict[float, dict] = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    driver_scaled: dict[float, float] = field(default_factory=dict)
    out_dir: Path | None = None

    @property
    def inflation(self) -> dict[float, float]:
        return {
            s: (self.besov_T[s] / self.besov_0[s]) if self.besov_0.get(s) else float("nan")
            for s in self.besov_T
        }

    def summary(self) -> dict:
        return {
            "run_id": self.run_id,
            "analytic_only": self.analytic_only,
            "params": self.params.summary(),
            "predicted_exponent": self.params.predicted_exponent,
            "feasibility": self.feasibility.as_dict(),
            "initial_norms": self.initial,
            "norms": [
                {
                    "s": s,
                    "besov_b_0": self.besov_0.get(s),
                    "besov_b_T": self.besov_T[s],
                    "inflation_factor": self.inflation[s],
                    **self.norm_meta.get(s, {}),
                }
                for s in self.besov_T
            ],
            "residuals": self.residuals,
            "bounds": self.bounds,
        }

    def sweep_rows(self) -> list[dict]:
        rows = []
        for s in self.besov_T:
            row = {
                Col.R: self.params.r,
                Col.S: s,
                Col.BESOV_B_T: self.besov_T[s],
                Col.BESOV_B_0: self.besov_0.get(s, float("nan")),
                Col.INFLATION: self.inflation[s],
                Col.RUN_ID: self.run_id,
            }
            if self.driver_scaled:
                row[DRIVER_SCALED] = self.driver_scaled[s]
            rows.append(row)
        return rows

    def console_metrics(self) -> list[dict]:
        metrics = [
            {"label": "run_id", "value": self.run_id},
            {"label": "r", "value": self.params.r},
            {"label": "T", "value": self.params.T},
            {"label": "feasible", "value": self.feasibility.overall},
            {"label": "1-β1-β2", "value": self.params.predicted_exponent},
        ]
        for s, factor in self.inflation.items():
            metrics.append({"label": f"inflation(s={s:g})", "value": factor})
        return metrics


def run_id_for(r: int, analytic_only: bool) -> str:
    return f"{'analytic' if analytic_only else 'solver'}_r{r:03d}"


# =====================================================================
# 解析的な代理 (解を計算しない)
# =====================================================================


def _linear_profile(coefs: np.ndarray, rates: np.ndarray, t: float) -> tuple[float, float, float]:
    """全項が x=0 で揃う余弦波の和: (sup, エネルギー, 散逸率)."""
    c = coefs * np.exp(-rates * t)
    return float(c.sum()), float(np.sum(c**2) / 4.0), float(np.sum(rates * c**2) / 2.0)


def _analytic_run(p: InflationParams, config: ExperimentConfig) -> dict:
    s_list = list(config.s_list)
    uw, bw = u_waves(p), b_waves(p)
    u_coef = np.array([w.coefficient for w in uw])
    b_coef = np.array([w.coefficient for w in bw])
    u_rates = np.array([w.rate(p.alpha1) for w in uw])
    b_rates = np.array([w.rate(p.alpha2) for w in bw])

    rows = []
    for t in np.linspace(0.0, p.T, ANALYTIC_POINTS):
        su, eu, du = _linear_profile(u_coef, u_rates, float(t))
        sb, eb, db = _linear_profile(b_coef, b_rates, float(t))
        c10 = abs(b10_amplitude(p, float(t)))
        row = {
            Col.T: float(t),
            Col.SUP_U: su,
            Col.SUP_B: sb,
            Col.ENERGY: eu + eb,
            Col.DISSIPATION: du + db,
        }
        for s in s_list:
            row[Col.besov_b(s)] = c10 * plane_wave_besov_exact(1.0, s, p.alpha2)
        rows.append(row)
    series = pd.DataFrame(rows)

    nu = cosine_sum_besov(u_coef, p.k_norms, p.theta1, p.alpha1)
    nb = cosine_sum_besov(b_coef, p.k_prime_norms, p.theta2, p.alpha2)
    besov_0, meta = {}, {}
    for s in s_list:
        norm0 = cosine_sum_besov(b_coef, p.k_prime_norms, s, p.alpha2)
        besov_0[s] = norm0.value
        meta[s] = {"alpha": p.alpha2, "t_window_0": [norm0.t_min, norm0.t_max], "t_star_0": norm0.t_star}
    besov_T = {s: float(series[Col.besov_b(s)].iloc[-1]) for s in s_list}
    eta_decay = math.exp(-p.T)
    c10_T = abs(b10_amplitude(p, p.T))
    bounds = b1_bounds(p, p.T)
    return {
        "series": series,
        "initial": {
            "nu": nu.value,
            "nb": nb.value,
            "c_u": nu.value * p.r**p.beta1,
            "c_b": nb.value * p.r**p.beta2,
        },
        "besov_0": besov_0,
        "besov_T": besov_T,
        "meta": meta,
        "driver_scaled": {s: v / eta_decay for s, v in besov_T.items()},
        "bounds": {
            **bounds.as_dict(),
            "sup_b10_T": c10_T,
            "b10_constant": c10_T / bounds.b10_upper,
        },
    }


# =====================================================================
# 数値解
# =====================================================================


def _solver_run(p: InflationParams, config: ExperimentConfig) -> dict:
    grid = config.grid_for(p)
    u0, b0 = build_initial_data(p, grid)
    norms = initial_besov(p, u0, b0, n_samples=config.besov_samples)
    traj = simulate(
        u0,
        b0,
        p,
        n_steps=config.n_steps,
        sample_every=config.sample_every,
        settings=config.solver_settings(),
        s_list=tuple(config.s_list),
        besov_samples=config.besov_samples,
    )
    residuals = first_iteration_residuals(traj, p)
    series = traj.to_frame()

    later = residuals[residuals[Col.T] > 0]
    final = residuals.iloc[-1]
    bounds = b1_bounds(p, p.T)
    meta = {}
    for s in config.s_list:
        n0, nT = traj.besov_b[s][0], traj.besov_b[s][-1]
        meta[s] = {
            "alpha": p.alpha2,
            "t_window_0": [n0.t_min, n0.t_max],
            "t_window_T": [nT.t_min, nT.t_max],
            "t_star_T": nT.t_star,
            "boundary_hit": n0.boundary_hit or nT.boundary_hit,
        }
    return {
        "series": series,
        "initial": norms.as_dict(),
        "besov_0": {s: traj.besov_values(s)[0] for s in config.s_list},
        "besov_T": {s: traj.besov_values(s)[-1] for s in config.s_list},
        "meta": meta,
        "residuals": {
            "max_ratio_y": float(later[Col.RATIO_Y].max()) if len(later) else 0.0,
            "max_ratio_z": float(later[Col.RATIO_Z].max()) if len(later) else 0.0,
            "sup_z_T": float(final[Col.SUP_Z]),
            "sup_b10_T": float(final["sup_b10"]),
            "grid": list(grid.shape),
            "n_samples": len(series),
        },
        "bounds": {**bounds.as_dict(), "b10_constant": float(final["sup_b10"]) / bounds.b10_upper},
    }


def run_single(
    config: ExperimentConfig,
    r: int | None = None,
    write: bool = True,
) -> InflationReport:
    """構成データの生成から出力まで. 実行不能なパラメータは InfeasibleParamsError."""
    p = config.params_for(r)
    feasibility = check_feasibility(p)
    run_id = run_id_for(p.r, config.analytic_only)
    logger.info("run %s: K=%d T=%.4g γ=%.4g ζ=%.4g", run_id, p.K, p.T, p.gamma, p.zeta_exp)

    result = _analytic_run(p, config) if config.analytic_only else _solver_run(p, config)
    initial = dict(result["initial"])
    initial["c_init"] = (initial["nu"] + initial["nb"]) / (p.r**-p.beta1 + p.r**-p.beta2)

    scale, bracket, applicable = inflation_lower_bound(p, p.T)
    bounds = {**result["bounds"], "lower_bound_scale": scale, "lower_bound_bracket": bracket,
              "lower_bound_applicable": applicable, "delta": p.delta}

    report = InflationReport(
        run_id=run_id,
        params=p,
        feasibility=feasibility,
        analytic_only=config.analytic_only,
        initial=initial,
        series=result["series"],
        besov_T=result["besov_T"],
        besov_0=result["besov_0"],
        norm_meta=result["meta"],
        residuals=result.get("residuals", {}),
        bounds=bounds,
        driver_scaled=result.get("driver_scaled", {}),
    )
    if write:
        out_dir = Path(config.out) / run_id
        write_csv(report.series, out_dir / OutputFile.SERIES)
        write_json(report.summary(), out_dir / OutputFile.SUMMARY)
        write_json(config.echo(), out_dir / OutputFile.CONFIG_ECHO)
        report.out_dir = out_dir
    return report


# =====================================================================
# 掃引
# =====================================================================


@dataclass
class SweepReport:
    runs: list[InflationReport]
    frame: pd.DataFrame
    fits: list[dict]
    predicted: float
    out_dir: Path | None = None

    def summary(self) -> dict:
        return {
            "predicted_exponent": self.predicted,
            "fits": self.fits,
            "runs": [run.summary() for run in self.runs],
        }

    def console_metrics(self) -> list[dict]:
        metrics = [{"label": "1-β1-β2", "value": self.predicted}]
        for fit in self.fits:
            if fit.get("slope") is None:
                continue
            label = f"slope[{fit['column']}](s={fit['s']:g})"
            metrics.append({"label": label, "value": fit["slope"]})
            metrics.append({"label": "  residual_rms", "value": fit["residual_rms"]})
        return metrics


def _run_one(args: tuple[ExperimentConfig, int]) -> InflationReport:
    config, r = args
    return run_single(config, r)


def run_sweep(config: ExperimentConfig, write: bool = True) -> SweepReport:
    """r_list の各 r で run_single を実行し、log‖b(T)‖ を log r で当てはめる."""
    if len(config.r_list) < 3:
        raise ValueError(f"sweep には r_list が3点以上必要です: {config.r_list}")
    jobs = [(config, r) for r in config.r_list]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            runs = list(pool.map(_run_one, jobs))
    else:
        runs = [_run_one(job) for job in jobs]

    rows = [row for run in runs for row in run.sweep_rows()]
    frame = build_sweep_frame(rows)
    predicted = runs[0].params.predicted_exponent
    fits = fit_growth(frame, Col.BESOV_B_T, predicted)
    if config.analytic_only:
        fits += fit_growth(frame, DRIVER_SCALED, predicted)

    report = SweepReport(runs=runs, frame=frame, fits=fits, predicted=predicted)
    if write:
        out_dir = Path(config.out)
        write_csv(frame, out_dir / OutputFile.SWEEP)
        write_csv(fits_to_frame(fits), out_dir / OutputFile.FITS)
        write_json(report.summary(), out_dir / OutputFile.SUMMARY)
        write_json(config.echo(), out_dir / OutputFile.CONFIG_ECHO)
        report.out_dir = out_dir
    for fit in fits:
        if fit.get("slope") is not None:
            logger.info(
                "fit %s s=%g: slope=%.4f ± %.4f (予測 %.4f)",
                fit["column"], fit["s"], fit["slope"], fit["stderr"], predicted,
            )
    return report


def print_summary(title: str, metrics: list[dict]) -> None:
    print(render_summary(title, metrics))
