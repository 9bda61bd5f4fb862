"""構成データに対する第1反復 u1, b1 の閉形式と、その大きさの目安.

b1 = B_{α2}(e^{-t(-Δ)^{α2}}u0, e^{-t(-Δ)^{α2}}b0) を (i, j) の組ごとの
相互作用に分け、i=j の差モード (すべて η) を b10、i≠j の差モードを b11、
和モードを b12 にまとめる。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from src.analytics.plane_waves import (
    Phase,
    PlaneWave,
    WaveSum,
    diffuse,
    duhamel_weight,
    interaction_terms,
    transport_product,
)
from src.construction.feasibility import InfeasibleParamsError, check_feasibility
from src.construction.initial_data import b_waves, u_waves
from src.construction.params import InflationParams
from src.spectral.fields import SpectralVectorField
from src.spectral.grid import Grid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class B1Decomposition:
    b10: WaveSum
    b11: WaveSum
    b12: WaveSum

    def total(self) -> WaveSum:
        return self.b10 + self.b11 + self.b12

    def render(self, grid: Grid) -> SpectralVectorField:
        return self.total().render(grid)

    @property
    def b10_coefficient(self) -> float:
        """sin(η·x) v' の係数 (t>0 で負)."""
        return sum(w.coefficient for w in self.b10)


def _require_feasible(p: InflationParams) -> None:
    report = check_feasibility(p)
    if not report.overall:
        raise InfeasibleParamsError(report.failures())


def _merge_eta(waves: list[PlaneWave], p: InflationParams) -> WaveSum:
    if not waves:
        return WaveSum()
    return WaveSum.of(
        [PlaneWave(sum(w.coefficient for w in waves), p.v_prime, p.eta, Phase.SINE)]
    )


def b1_closed_form(params: InflationParams, t: float) -> B1Decomposition:
    _require_feasible(params)
    if t < 0:
        raise ValueError(f"t >= 0 が必要です: t={t}")
    alpha = params.alpha2
    diagonal: list[PlaneWave] = []
    off_diagonal: list[PlaneWave] = []
    sums: list[PlaneWave] = []
    for i, wu in enumerate(u_waves(params)):
        for j, wb in enumerate(b_waves(params)):
            terms = interaction_terms(wu, wb, alpha, t)
            if terms.difference is not None:
                (diagonal if i == j else off_diagonal).append(terms.difference)
            if terms.sum is not None:
                sums.append(terms.sum)
    return B1Decomposition(
        b10=_merge_eta(diagonal, params),
        b11=WaveSum.of(off_diagonal),
        b12=WaveSum.of(sums),
    )


def b10_amplitude(params: InflationParams, t: float) -> float:
    """b10 = c(t) sin(η·x) v' の係数 c(t) を浮動小数だけで計算 (大きな r 用).

    c(t) = -(r^{-β1-β2}/2) Σ_i |k_i|^{θ1}|k'_i|^{θ2} w(|k_i|^{2α2}+|k'_i|^{2α2}, |η|^{2α2}, t)
    """
    a2 = params.alpha2
    total = 0.0
    for k, kp in zip(params.k_norms, params.k_prime_norms):
        a = k ** (2 * a2) + kp ** (2 * a2)
        total += k**params.theta1 * kp**params.theta2 * duhamel_weight(a, 1.0, t)
    return -0.5 * params.r ** (-params.beta1 - params.beta2) * total


def u1_closed_form(params: InflationParams, t: float) -> WaveSum:
    """B_{α1}(Su0, Su0) - B_{α1}(Sb0, Sb0). k_j·v = k'_j·v' = 0 により空になる."""
    alpha = params.alpha1
    out = WaveSum()
    for source, sign in ((u_waves(params), 1.0), (b_waves(params), -1.0)):
        for w1 in source:
            for w2 in source:
                out = out + interaction_terms(w1, w2, alpha, t).as_wave_sum().scaled(sign)
    return out


@dataclass(frozen=True)
class TransportSplit:
    """(Su0·∇)Sb0 の E0 (η), E1 (i≠j の差), E2 (和) への分解."""

    e0: WaveSum
    e1: WaveSum
    e2: WaveSum

    def total(self) -> WaveSum:
        return self.e0 + self.e1 + self.e2


def transport_split(params: InflationParams, t: float) -> TransportSplit:
    alpha = params.alpha2
    us = [diffuse(w, t, alpha) for w in u_waves(params)]
    bs = [diffuse(w, t, alpha) for w in b_waves(params)]
    e0: list[PlaneWave] = []
    e1: list[PlaneWave] = []
    e2: list[PlaneWave] = []
    for i, wu in enumerate(us):
        for j, wb in enumerate(bs):
            terms = transport_product(wu, wb)
            if terms.difference is not None:
                (e0 if i == j else e1).append(terms.difference)
            if terms.sum is not None:
                e2.append(terms.sum)
    return TransportSplit(_merge_eta(e0, params), WaveSum.of(e1), WaveSum.of(e2))


# =====================================================================
# 大きさの目安
# =====================================================================


@dataclass(frozen=True)
class B1Bounds:
    """b10 の下界・上界のスケールと b11+b12 の上界のスケール.

    下界は |k1|^{-2α2} <= t <= T のときのみ意味を持ち、範囲外では None。
    """

    b10_lower: float | None
    b10_upper: float
    b11_b12_upper: float
    lower_applicable: bool

    def as_dict(self) -> dict:
        return {
            "b10_lower": self.b10_lower,
            "b10_upper": self.b10_upper,
            "b11_b12_upper": self.b11_b12_upper,
            "lower_applicable": self.lower_applicable,
        }


def b1_bounds(params: InflationParams, t: float) -> B1Bounds:
    scale = params.r**params.predicted_exponent
    k1 = params.k_norms[0]
    applicable = k1 ** (-2 * params.alpha2) <= t <= params.T
    if not applicable:
        logger.debug("t=%g は b10 下界の適用範囲外", t)
    t_power = 1 - (params.theta1 + params.theta2) / (2 * params.alpha2)
    rest = params.r ** (-params.beta1 - params.beta2) * t**t_power
    return B1Bounds(
        b10_lower=scale if applicable else None,
        b10_upper=scale,
        b11_b12_upper=rest,
        lower_applicable=applicable,
    )
