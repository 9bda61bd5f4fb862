"""ノルム膨張の初期データ (u0, b0) と波数はしごの検査."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import pandas as pd

from src.analytics.besov import BesovNorm, BesovSpec, caloric_besov_norm
from src.analytics.plane_waves import PlaneWave, WaveSum
from src.construction.params import InflationParams
from src.spectral.fields import SpectralVectorField
from src.spectral.grid import Grid, GridError

logger = logging.getLogger(__name__)

# 埋め込みの連鎖を見るときの探索窓 0 < t < 1
EMBEDDING_T_MAX = 1.0


# =====================================================================
# 平面波の和
# =====================================================================


def u_waves(p: InflationParams) -> WaveSum:
    """u0 = r^{-β1} Σ |k_i|^{θ1} v cos(k_i·x)."""
    amp = p.r ** -p.beta1
    return WaveSum.of(
        PlaneWave(amp * norm**p.theta1, p.v, k)
        for k, norm in zip(p.k_vectors, p.k_norms)
    )


def b_waves(p: InflationParams) -> WaveSum:
    """b0 = r^{-β2} Σ |k'_i|^{θ2} v' cos(k'_i·x)."""
    amp = p.r ** -p.beta2
    return WaveSum.of(
        PlaneWave(amp * norm**p.theta2, p.v_prime, k)
        for k, norm in zip(p.k_prime_vectors, p.k_prime_norms)
    )


def required_cutoff(p: InflationParams) -> tuple[int, int]:
    """(軸1, 軸3) に必要なカットオフ. 和モード k'_r + k_r と b⊗b の m3=2 を収める."""
    return 2 * p.largest_wavenumber, 2


def required_grid_size(p: InflationParams) -> tuple[int, int]:
    """カットオフ (n-1)//3 が required_cutoff 以上となる最小の偶数 n."""
    sizes = []
    for c in required_cutoff(p):
        n = 3 * c + 1
        sizes.append(max(4, n + (n % 2)))
    return sizes[0], sizes[1]


def build_initial_data(p: InflationParams, grid: Grid) -> tuple[SpectralVectorField, SpectralVectorField]:
    need1, need3 = required_cutoff(p)
    have1, _, have3 = grid.cutoff
    if have1 < need1 or have3 < need3:
        n1, n3 = required_grid_size(p)
        raise GridError(
            f"格子が小さすぎます: カットオフ ({have1}, {have3}) < ({need1}, {need3}). "
            f"n1 >= {n1}, n3 >= {n3} が必要です"
        )
    u0 = u_waves(p).render(grid)
    b0 = b_waves(p).render(grid)
    logger.debug("初期データ: r=%d K=%d 格子=%s", p.r, p.K, grid.shape)
    return u0, b0


# =====================================================================
# 波数はしごの恒等式と和の評価
# =====================================================================


@dataclass(frozen=True)
class WaveLadderReport:
    """直交関係 (整数演算)、部分和の比、減衰付き和の定数."""

    orthogonality: dict[str, bool]
    k_prime_dot_v: list[int]
    partial_sum_ratios: list[float]
    ratio_upper: float
    decay_sum_constant: float
    theta: float
    gamma_exp: float
    t: float

    @property
    def identities_hold(self) -> bool:
        return all(self.orthogonality.values()) and all(x == 1 for x in self.k_prime_dot_v)

    @property
    def ratios_in_range(self) -> bool:
        eps = 1e-12
        return all(1 - eps <= x <= self.ratio_upper + eps for x in self.partial_sum_ratios)

    def as_dict(self) -> dict:
        return {
            "orthogonality": dict(self.orthogonality),
            "k_prime_dot_v": list(self.k_prime_dot_v),
            "partial_sum_ratios": list(self.partial_sum_ratios),
            "ratio_upper": self.ratio_upper,
            "decay_sum_constant": self.decay_sum_constant,
            "identities_hold": self.identities_hold,
            "ratios_in_range": self.ratios_in_range,
        }


def _int_dot(a, b) -> int:
    return sum(int(x) * int(y) for x, y in zip(a, b))


def wave_ladder_report(
    p: InflationParams,
    theta: float,
    gamma_exp: float,
    t: float,
    alpha: float | None = None,
) -> WaveLadderReport:
    """α は減衰付き和に使う冪 (既定 α2)."""
    if t <= 0:
        raise ValueError(f"t > 0 が必要です: t={t}")
    alpha = p.alpha2 if alpha is None else alpha
    v = tuple(int(x) for x in p.v)
    vp = tuple(int(x) for x in p.v_prime)
    ks, kps = p.k_vectors, p.k_prime_vectors
    orth = {
        "k_dot_v": all(_int_dot(k, v) == 0 for k in ks),
        "k_prime_dot_v_prime": all(_int_dot(k, vp) == 0 for k in kps),
        "k_dot_v_prime": all(_int_dot(k, vp) == 0 for k in ks),
    }
    kpv = [_int_dot(k, v) for k in kps]

    norms = p.k_norms
    ratios = [
        sum(n**theta for n in norms[: i - 1]) / norms[i - 2] ** theta
        for i in range(2, p.r + 1)
    ]
    upper = 2**theta / (2**theta - 1)
    decay = sum(n**gamma_exp * math.exp(-(n ** (2 * alpha)) * t) for n in norms)
    return WaveLadderReport(
        orthogonality=orth,
        k_prime_dot_v=kpv,
        partial_sum_ratios=ratios,
        ratio_upper=upper,
        decay_sum_constant=decay * t ** (gamma_exp / (2 * alpha)),
        theta=theta,
        gamma_exp=gamma_exp,
        t=t,
    )


# =====================================================================
# 初期データの Besov ノルム
# =====================================================================


@dataclass(frozen=True)
class InitialNorms:
    """‖u0‖_{Ḃ^{-θ1}}, ‖b0‖_{Ḃ^{-θ2}} と r^{-β} で割った定数."""

    u: BesovNorm
    b: BesovNorm
    c_u: float
    c_b: float

    @property
    def nu(self) -> float:
        return self.u.value

    @property
    def nb(self) -> float:
        return self.b.value

    def as_dict(self) -> dict:
        return {
            "nu": self.nu,
            "nb": self.nb,
            "c_u": self.c_u,
            "c_b": self.c_b,
            "u_norm": self.u.as_dict(),
            "b_norm": self.b.as_dict(),
        }


def initial_besov(
    p: InflationParams,
    u0: SpectralVectorField,
    b0: SpectralVectorField,
    n_samples: int | None = None,
) -> InitialNorms:
    kwargs = {} if n_samples is None else {"n_samples": n_samples}
    nu = caloric_besov_norm(u0, BesovSpec.for_field(u0, p.theta1, p.alpha1, **kwargs))
    nb = caloric_besov_norm(b0, BesovSpec.for_field(b0, p.theta2, p.alpha2, **kwargs))
    return InitialNorms(
        u=nu,
        b=nb,
        c_u=nu.value * p.r**p.beta1,
        c_b=nb.value * p.r**p.beta2,
    )


def embedding_chain(
    b0: SpectralVectorField,
    p: InflationParams,
    s_list: list[float],
    t_max: float = EMBEDDING_T_MAX,
) -> pd.DataFrame:
    """s >= θ2 の各 s で ‖b0‖_{Ḃ^{-s}} と ‖b0‖_{Ḃ^{-θ2}} に対する比."""
    base = caloric_besov_norm(b0, BesovSpec.for_field(b0, p.theta2, p.alpha2, t_max=t_max))
    rows = []
    for s in sorted(set(s_list)):
        if s < p.theta2:
            logger.info("s=%g < θ2=%g は埋め込みの連鎖から除外", s, p.theta2)
            continue
        norm = caloric_besov_norm(b0, BesovSpec.for_field(b0, s, p.alpha2, t_max=t_max))
        rows.append(
            {
                "s": s,
                "besov_b0": norm.value,
                "ratio": norm.value / base.value if base.value > 0 else 0.0,
                "t_star": norm.t_star,
                "alpha": p.alpha2,
                "t_min": norm.t_min,
                "t_max": norm.t_max,
            }
        )
    return pd.DataFrame(rows, columns=["s", "besov_b0", "ratio", "t_star", "alpha", "t_min", "t_max"])
