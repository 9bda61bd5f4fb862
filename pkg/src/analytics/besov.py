"""熱半群によるBesovノルム Ḃ^{-s}_{∞,∞} の評価.

‖f‖ = sup_t t^{s/(2α)} ‖e^{-t(-Δ)^α} f‖_∞ を対数等間隔の t 格子で走査し、
離散最大点の近傍を1次元探索で詰める。周期関数では同次・非同次ノルムが
同値なので、探索窓を区切った同次形だけを実装する。
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import minimize_scalar

from src.constants import PAD_FACTOR, BesovDefaults, Tol
from src.spectral.fields import (
    SpectralVectorField,
    fractional_semigroup,
    sup_norm,
    wavenumber_magnitude,
)

logger = logging.getLogger(__name__)


class BesovPreconditionError(ValueError):
    """平均がゼロでない場では同次ノルムの sup が発散する."""


class BesovSpec(BaseModel):
    """ノルム指数 s、半群の冪 α、探索窓 [t_min, t_max]."""

    model_config = ConfigDict(frozen=True)

    s: float = Field(gt=0)
    alpha: float = Field(ge=1)
    t_min: float = Field(gt=0)
    t_max: float = Field(gt=0)
    n_samples: int = Field(default=BesovDefaults.N_SAMPLES, ge=16)
    refine: int = Field(default=PAD_FACTOR, ge=1)

    @model_validator(mode="after")
    def _window(self) -> "BesovSpec":
        if not self.t_min < self.t_max:
            raise ValueError(f"t_min < t_max が必要です: {self.t_min} >= {self.t_max}")
        return self

    @classmethod
    def for_field(
        cls,
        f: SpectralVectorField,
        s: float,
        alpha: float,
        t_max: float = BesovDefaults.T_MAX,
        n_samples: int = BesovDefaults.N_SAMPLES,
        refine: int = PAD_FACTOR,
    ) -> "BesovSpec":
        """既定の窓: t_min = (最大の有効 |m|)^{-2α} / 100."""
        kappa = largest_active_wavenumber(f)
        t_min = kappa ** (-2.0 * alpha) / BesovDefaults.T_MIN_DIVISOR if kappa > 0 else 1e-6
        t_min = min(t_min, t_max / 10.0)
        return cls(s=s, alpha=alpha, t_min=t_min, t_max=t_max, n_samples=n_samples, refine=refine)


@dataclass(frozen=True)
class BesovNorm:
    """ノルム値と評価条件 (s, α, 窓)."""

    value: float
    t_star: float
    s: float
    alpha: float
    t_min: float
    t_max: float
    boundary_hit: bool = False

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "t_star": self.t_star,
            "s": self.s,
            "alpha": self.alpha,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "boundary_hit": self.boundary_hit,
        }


def largest_active_wavenumber(f: SpectralVectorField) -> float:
    """係数が非ゼロのモードのうち最大の |m|."""
    active = np.any(np.abs(f.coeffs) > 1e-14 * max(f.scale(), 1e-300), axis=0)
    if not np.any(active):
        return 0.0
    return float(np.max(np.broadcast_to(wavenumber_magnitude(f.grid), f.grid.shape)[active]))


def _maximize_profile(profile: Callable[[float, int], float], spec: BesovSpec) -> BesovNorm:
    """対数等間隔の走査 (refine=1) の後、最大点の両隣の区間で有界1次元探索."""
    times = np.geomspace(spec.t_min, spec.t_max, spec.n_samples)
    coarse = np.array([profile(t, 1) for t in times])
    i_star = int(np.argmax(coarse))

    if i_star in (0, len(times) - 1):
        logger.warning(
            "Besov最大点が窓の端にあります (s=%g, α=%g, t=%.3e): 窓が狭すぎます",
            spec.s, spec.alpha, times[i_star],
        )
        t_star = float(times[i_star])
        value = profile(t_star, spec.refine)
        return BesovNorm(value, t_star, spec.s, spec.alpha, spec.t_min, spec.t_max, True)

    lo, hi = math.log(times[i_star - 1]), math.log(times[i_star + 1])
    result = minimize_scalar(
        lambda x: -profile(math.exp(x), spec.refine),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-6},
    )
    t_opt = math.exp(float(result.x))
    v_opt = -float(result.fun)
    v_grid = profile(float(times[i_star]), spec.refine)
    if v_grid > v_opt:
        t_opt, v_opt = float(times[i_star]), v_grid
    return BesovNorm(v_opt, t_opt, spec.s, spec.alpha, spec.t_min, spec.t_max)


def caloric_besov_norm(f: SpectralVectorField, spec: BesovSpec) -> BesovNorm:
    """Ḃ^{-s}_{∞,∞} の caloric ノルム (窓内の sup) と最大点 t*."""
    scale = f.scale()
    if scale == 0.0:
        return BesovNorm(0.0, spec.t_min, spec.s, spec.alpha, spec.t_min, spec.t_max)
    mean = float(np.max(np.abs(f.mean())))
    if mean > Tol.ZERO_MEAN * scale:
        raise BesovPreconditionError(f"平均がゼロではありません: |mean|={mean:.3e}")

    power = spec.s / (2.0 * spec.alpha)

    def profile(t: float, refine: int) -> float:
        return t**power * sup_norm(fractional_semigroup(f, t, spec.alpha), refine=refine)

    return _maximize_profile(profile, spec)


def cosine_sum_besov(
    coefficients: Sequence[float],
    wavenumbers: Sequence[float],
    s: float,
    alpha: float,
    t_max: float = BesovDefaults.T_MAX,
    n_samples: int = BesovDefaults.N_SAMPLES,
) -> BesovNorm:
    """同じ向きの振幅をもつ余弦波の和 Σ c_j v cos(k_j·x) (c_j >= 0) のノルム.

    x=0 で全項が同時に最大となるので sup_x は Σ c_j e^{-|k_j|^{2α}t} に等しく、
    格子に載せられない大きな波数でも評価できる。
    """
    c = np.asarray(coefficients, dtype=float)
    kappa = np.asarray(wavenumbers, dtype=float)
    if c.shape != kappa.shape or c.size == 0:
        raise ValueError("coefficients と wavenumbers は同じ長さの非空列")
    if np.any(c < 0) or np.any(kappa <= 0):
        raise BesovPreconditionError("係数は非負、波数は正である必要があります")
    rates = kappa ** (2.0 * alpha)
    t_min = min(float(rates.max()) ** -1 / BesovDefaults.T_MIN_DIVISOR, t_max / 10.0)
    spec = BesovSpec(s=s, alpha=alpha, t_min=t_min, t_max=t_max, n_samples=n_samples, refine=1)
    power = s / (2.0 * alpha)

    def profile(t: float, _refine: int) -> float:
        return t**power * float(np.sum(c * np.exp(-rates * t)))

    return _maximize_profile(profile, spec)


def plane_wave_besov_exact(kappa: float, s: float, alpha: float) -> float:
    """v cos(k·x) (|v|=1, |k|=κ) の厳密値 (s/2α)^{s/2α} e^{-s/2α} κ^{-s}."""
    if kappa <= 0 or s <= 0 or alpha <= 0:
        raise ValueError(f"引数は正である必要があります: κ={kappa}, s={s}, α={alpha}")
    p = s / (2.0 * alpha)
    return p**p * math.exp(-p) * kappa ** (-s)


def plane_wave_maximizer(kappa: float, s: float, alpha: float) -> float:
    """t* = s / (2α κ^{2α})."""
    return s / (2.0 * alpha * kappa ** (2.0 * alpha))
