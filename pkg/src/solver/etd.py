"""分数階MHD系の2段指数時間差分 (ETD2RK) 積分.

線形部 -(-Δ)^{α} は乗数 e^{-|m|^{2α}h} で厳密に扱い、非線形部を
2段の陽的スキームで扱う:

    a   = e^{Lh} w + h φ1(Lh) N(w)
    w+  = a + h φ2(Lh) (N(a) - N(w))

φ1(z) = (e^z - 1)/z, φ2(z) = (e^z - 1 - z)/z^2 は複素周回平均で評価する。
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import fft as sfft

from src.constants import SolverDefaults
from src.spectral.fields import (
    PreconditionError,
    SpectralVectorField,
    leray_project,
    mhd_transport,
    require_divergence_free,
    semigroup_multiplier,
    sup_norm,
)
from src.spectral.grid import Grid

logger = logging.getLogger(__name__)


class SolverSettings(BaseModel):
    """時間積分の設定."""

    model_config = ConfigDict(frozen=True)

    cfl: float = Field(default=SolverDefaults.CFL, gt=0)
    recheck_every: int = Field(default=SolverDefaults.RECHECK_EVERY, ge=1)
    dt_max: float | None = Field(default=None, gt=0)
    blowup_cap: float = Field(default=SolverDefaults.BLOWUP_CAP, gt=0)
    workers: int = Field(default=1, ge=1)
    nonlinear: bool = True
    contour_points: int = Field(default=SolverDefaults.CONTOUR_POINTS, ge=4)


@dataclass(frozen=True)
class SolverState:
    t: float
    u: SpectralVectorField
    b: SpectralVectorField


class BlowUpDetected(RuntimeError):
    """‖u‖∞ + ‖b‖∞ が上限を超えた. trajectory は途中までの診断量."""

    def __init__(self, t: float, size: float, cap: float, trajectory=None) -> None:
        self.t = t
        self.size = size
        self.cap = cap
        self.trajectory = trajectory
        super().__init__(f"t={t:.6g} で ‖u‖∞+‖b‖∞={size:.3e} が上限 {cap:.3e} を超えました")


# =====================================================================
# 右辺
# =====================================================================


def rhs_nonlinear(
    u: SpectralVectorField, b: SpectralVectorField
) -> tuple[SpectralVectorField, SpectralVectorField]:
    """du = -P[(u·∇)u - (b·∇)b], db = -P[(u·∇)b - (b·∇)u]."""
    require_divergence_free(u, "u")
    require_divergence_free(b, "b")
    momentum, induction = mhd_transport(u, b)
    return -leray_project(momentum), -leray_project(induction)


def _zero_rhs(
    u: SpectralVectorField, b: SpectralVectorField
) -> tuple[SpectralVectorField, SpectralVectorField]:
    return SpectralVectorField.zeros(u.grid), SpectralVectorField.zeros(b.grid)


# =====================================================================
# φ関数
# =====================================================================


def phi_functions(
    z: np.ndarray, n_points: int = SolverDefaults.CONTOUR_POINTS
) -> tuple[np.ndarray, np.ndarray]:
    """実数配列 z に対する φ1, φ2. 上半円周上の点で平均し実部を取る."""
    z = np.asarray(z, dtype=float)
    values, inverse = np.unique(z.ravel(), return_inverse=True)
    roots = np.exp(1j * np.pi * (np.arange(1, n_points + 1) - 0.5) / n_points)
    lz = values[:, None] + roots[None, :]
    ez = np.exp(lz)
    phi1 = ((ez - 1.0) / lz).mean(axis=1).real
    phi2 = ((ez - 1.0 - lz) / lz**2).mean(axis=1).real
    return phi1[inverse].reshape(z.shape), phi2[inverse].reshape(z.shape)


@lru_cache(maxsize=16)
def _coefficients(grid: Grid, alpha: float, dt: float, n_points: int):
    decay = semigroup_multiplier(grid, dt, alpha)
    m1, m2, m3 = grid.wavenumbers()
    rate = np.power(m1 * m1 + m2 * m2 + m3 * m3, alpha)
    phi1, phi2 = phi_functions(-rate * dt, n_points)
    return decay, dt * phi1, dt * phi2


# =====================================================================
# 1ステップ
# =====================================================================


def step(
    state: SolverState,
    dt: float,
    alpha1: float,
    alpha2: float,
    settings: SolverSettings | None = None,
) -> SolverState:
    """ETD2RK で dt だけ進める. u には α1, b には α2 の散逸."""
    if dt <= 0:
        raise PreconditionError(f"dt > 0 が必要です: dt={dt}")
    settings = settings or SolverSettings()
    rhs = rhs_nonlinear if settings.nonlinear else _zero_rhs
    grid = state.u.grid
    eu, p1u, p2u = _coefficients(grid, float(alpha1), float(dt), settings.contour_points)
    eb, p1b, p2b = _coefficients(grid, float(alpha2), float(dt), settings.contour_points)

    nu0, nb0 = rhs(state.u, state.b)
    au = SpectralVectorField(grid, eu * state.u.coeffs + p1u * nu0.coeffs)
    ab = SpectralVectorField(grid, eb * state.b.coeffs + p1b * nb0.coeffs)
    if not settings.nonlinear:
        return SolverState(state.t + dt, au, ab)

    nu1, nb1 = rhs(au, ab)
    u = SpectralVectorField(grid, au.coeffs + p2u * (nu1.coeffs - nu0.coeffs))
    b = SpectralVectorField(grid, ab.coeffs + p2b * (nb1.coeffs - nb0.coeffs))
    new = SolverState(state.t + dt, u, b)

    size = sup_norm(u) + sup_norm(b)
    if not math.isfinite(size) or size > settings.blowup_cap:
        logger.warning("blow-up guard: t=%.6g, ‖u‖∞+‖b‖∞=%.3e", new.t, size)
        raise BlowUpDetected(new.t, size, settings.blowup_cap)
    return new


def cfl_dt(state: SolverState, settings: SolverSettings) -> float:
    """dt <= cfl / (k_max (‖u‖∞ + ‖b‖∞)). 速度0なら inf."""
    speed = sup_norm(state.u) + sup_norm(state.b)
    dt = math.inf if speed == 0 else settings.cfl / (state.u.grid.k_max * speed)
    if settings.dt_max is not None:
        dt = min(dt, settings.dt_max)
    return dt


Observer = Callable[[SolverState, int], None]


def march(
    state: SolverState,
    t_end: float,
    alpha1: float,
    alpha2: float,
    settings: SolverSettings | None = None,
    n_steps: int | None = None,
    sample_every: int = 1,
    observer: Observer | None = None,
) -> SolverState:
    """t_end まで進める. n_steps 指定時は固定刻み、なければCFL刻み.

    observer は初期状態、sample_every ステップごと、最終状態で呼ばれる。
    """
    settings = settings or SolverSettings()
    if t_end < state.t:
        raise PreconditionError(f"t_end={t_end} < t={state.t}")
    if n_steps is not None and n_steps < 1:
        raise PreconditionError(f"n_steps は1以上: {n_steps}")

    t0 = state.t
    count = 0
    if observer:
        observer(state, count)
    if t_end == t0:
        return state
    with sfft.set_workers(settings.workers):
        if n_steps is not None:
            dt = (t_end - t0) / n_steps
            for count in range(1, n_steps + 1):
                state = step(state, dt, alpha1, alpha2, settings)
                if count == n_steps:
                    state = SolverState(t_end, state.u, state.b)
                if observer and (count % sample_every == 0 or count == n_steps):
                    observer(state, count)
            return state

        dt = cfl_dt(state, settings)
        remaining = t_end - state.t
        while remaining > 1e-14 * max(t_end, 1.0):
            if count and count % settings.recheck_every == 0:
                dt = cfl_dt(state, settings)
                logger.debug("dt 再評価: t=%.6g dt=%.3e", state.t, dt)
            h = min(dt, remaining)
            state = step(state, h, alpha1, alpha2, settings)
            count += 1
            remaining = t_end - state.t
            last = remaining <= 1e-14 * max(t_end, 1.0)
            if last:
                state = SolverState(t_end, state.u, state.b)
            if observer and (count % sample_every == 0 or last):
                observer(state, count)
    logger.debug("march: %d ステップで t=%.6g に到達", count, state.t)
    return state
