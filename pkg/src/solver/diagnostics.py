"""軌道の診断量: ノルム・エネルギー・Besovノルムの時系列と第1反復との差."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from src.analytics.besov import BesovNorm, BesovSpec, caloric_besov_norm
from src.analytics.first_iteration import b1_closed_form
from src.constants import Col
from src.construction.feasibility import residual_bound
from src.construction.params import InflationParams
from src.solver.etd import BlowUpDetected, SolverSettings, SolverState, march
from src.spectral.fields import (
    SpectralVectorField,
    dissipation_rate,
    fractional_semigroup,
    l2_energy,
    sup_norm,
)

logger = logging.getLogger(__name__)

DEFAULT_BESOV_SAMPLES = 64
DEFAULT_BESOV_REFINE = 2


@dataclass
class TrajectoryDiagnostics:
    """サンプル時刻ごとの診断量. residual 系は first_iteration_residuals で埋まる."""

    alpha1: float
    alpha2: float
    s_list: tuple[float, ...]
    besov_samples: int = DEFAULT_BESOV_SAMPLES
    besov_refine: int = DEFAULT_BESOV_REFINE
    keep_states: bool = True
    times: list[float] = field(default_factory=list)
    sup_u: list[float] = field(default_factory=list)
    sup_b: list[float] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)
    dissipation: list[float] = field(default_factory=list)
    besov_b: dict[float, list[BesovNorm]] = field(default_factory=dict)
    states: list[SolverState] = field(default_factory=list)
    residuals: pd.DataFrame | None = None

    def record(self, state: SolverState, _step: int = 0) -> None:
        if self.times and state.t < self.times[-1]:
            raise ValueError(f"サンプル時刻が単調ではありません: {state.t} < {self.times[-1]}")
        self.times.append(state.t)
        self.sup_u.append(sup_norm(state.u))
        self.sup_b.append(sup_norm(state.b))
        self.energy.append(l2_energy(state.u) + l2_energy(state.b))
        self.dissipation.append(
            dissipation_rate(state.u, self.alpha1) + dissipation_rate(state.b, self.alpha2)
        )
        for s in self.s_list:
            spec = BesovSpec.for_field(
                state.b, s, self.alpha2, n_samples=self.besov_samples, refine=self.besov_refine
            )
            self.besov_b.setdefault(s, []).append(caloric_besov_norm(state.b, spec))
        if self.keep_states:
            self.states.append(state)

    def besov_values(self, s: float) -> list[float]:
        return [n.value for n in self.besov_b.get(s, [])]

    def inflation_factor(self, s: float) -> float:
        """‖b(T)‖ / ‖b(0)‖ (同じノルム)."""
        values = self.besov_values(s)
        if not values or values[0] == 0:
            return float("nan")
        return values[-1] / values[0]

    def attach_residuals(self, frame: pd.DataFrame) -> None:
        self.residuals = frame

    def to_frame(self) -> pd.DataFrame:
        data = {
            Col.T: self.times,
            Col.SUP_U: self.sup_u,
            Col.SUP_B: self.sup_b,
            Col.ENERGY: self.energy,
            Col.DISSIPATION: self.dissipation,
        }
        for s in self.s_list:
            data[Col.besov_b(s)] = self.besov_values(s)
        df = pd.DataFrame(data)
        if self.residuals is not None:
            cols = [Col.SUP_Y, Col.SUP_Z, Col.RATIO_Y, Col.RATIO_Z]
            df = pd.concat([df, self.residuals[cols].reset_index(drop=True)], axis=1)
        return df


def simulate(
    u0: SpectralVectorField,
    b0: SpectralVectorField,
    p: InflationParams,
    n_steps: int | None = None,
    sample_every: int = 1,
    settings: SolverSettings | None = None,
    s_list: tuple[float, ...] = (1.0,),
    besov_samples: int = DEFAULT_BESOV_SAMPLES,
    besov_refine: int = DEFAULT_BESOV_REFINE,
    keep_states: bool = True,
    t_end: float | None = None,
) -> TrajectoryDiagnostics:
    """t = T (= r^{-γ}) まで解き、サンプル時刻の診断量を集める."""
    t_end = p.T if t_end is None else t_end
    diag = TrajectoryDiagnostics(
        alpha1=p.alpha1,
        alpha2=p.alpha2,
        s_list=tuple(s_list),
        besov_samples=besov_samples,
        besov_refine=besov_refine,
        keep_states=keep_states,
    )
    logger.info(
        "simulate: r=%d α=(%g, %g) T=%.4g 格子=%s n_steps=%s",
        p.r, p.alpha1, p.alpha2, t_end, u0.grid.shape, n_steps,
    )
    try:
        march(
            SolverState(0.0, u0, b0),
            t_end,
            p.alpha1,
            p.alpha2,
            settings,
            n_steps=n_steps,
            sample_every=sample_every,
            observer=diag.record,
        )
    except BlowUpDetected as exc:
        exc.trajectory = diag
        raise
    return diag


# =====================================================================
# 第1反復との差 y, z
# =====================================================================


def first_iteration_residuals(trajectory: TrajectoryDiagnostics, p: InflationParams) -> pd.DataFrame:
    """y = u - e^{-t(-Δ)^{α1}}u0, z = b - e^{-t(-Δ)^{α2}}b0 + b1 の sup と上界比."""
    if not trajectory.states:
        raise ValueError("状態を保持した軌道 (keep_states=True) が必要です")
    first = trajectory.states[0]
    grid = first.u.grid
    rows = []
    for state in trajectory.states:
        t = state.t
        y = state.u - fractional_semigroup(first.u, t, p.alpha1)
        decomposition = b1_closed_form(p, t)
        z = state.b - fractional_semigroup(first.b, t, p.alpha2) + decomposition.render(grid)
        bound = residual_bound(p, t)
        y_sup, z_sup = sup_norm(y), sup_norm(z)
        rows.append(
            {
                Col.T: t,
                Col.SUP_Y: y_sup,
                Col.SUP_Z: z_sup,
                Col.RATIO_Y: y_sup / bound if bound > 0 else 0.0,
                Col.RATIO_Z: z_sup / bound if bound > 0 else 0.0,
                "sup_b10": sup_norm(decomposition.b10.render(grid)),
            }
        )
    frame = pd.DataFrame(rows)
    trajectory.attach_residuals(frame)
    return frame


def energy_audit(trajectory: TrajectoryDiagnostics) -> pd.DataFrame:
    """E(t_{n+1}) - E(t_n) + ∫ D dt (台形則). 非線形項はエネルギーを保存する."""
    t = np.asarray(trajectory.times)
    e = np.asarray(trajectory.energy)
    d = np.asarray(trajectory.dissipation)
    if len(t) < 2:
        return pd.DataFrame(columns=[Col.T, "dt", "energy_change", "dissipated", "residual"])
    dt = np.diff(t)
    dissipated = 0.5 * (d[1:] + d[:-1]) * dt
    change = np.diff(e)
    return pd.DataFrame(
        {
            Col.T: t[1:],
            "dt": dt,
            "energy_change": change,
            "dissipated": dissipated,
            "residual": change + dissipated,
        }
    )
