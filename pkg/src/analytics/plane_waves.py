"""平面波の拡散と2波相互作用の閉形式、および双線形作用素の数値積分.

閉形式 (interact_diffused) は2番目の引数の振幅を1番目の波で輸送する
(w1·∇)w2 の規約に従う。数値積分 (bilinear_numeric) はその照合用。
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np
from scipy import integrate, special

from src.constants import Tol
from src.spectral.fields import (
    PreconditionError,
    SpectralVectorField,
    advect,
    fractional_semigroup,
    leray_project,
    sup_norm,
)
from src.spectral.grid import Grid

logger = logging.getLogger(__name__)

FieldGenerator = Callable[[float], SpectralVectorField]


class UnsupportedWaveError(ValueError):
    """閉形式が扱わない位相の組み合わせ."""


class InconsistentBoundError(ValueError):
    """分母が0なのに分子が非ゼロ."""


class Phase(str, enum.Enum):
    COSINE = "cos"
    SINE = "sin"


# =====================================================================
# 平面波
# =====================================================================


@dataclass(frozen=True)
class PlaneWave:
    """coefficient · amplitude · phase(wavevector·x)."""

    coefficient: float
    amplitude: tuple[float, float, float]
    wavevector: tuple[int, int, int]
    phase: Phase = Phase.COSINE

    @property
    def k_squared(self) -> int:
        return sum(int(k) * int(k) for k in self.wavevector)

    def rate(self, alpha: float) -> float:
        """減衰率 |k|^{2α}."""
        return float(self.k_squared) ** alpha

    def is_divergence_free(self) -> bool:
        return float(np.dot(self.wavevector, self.amplitude)) == 0.0

    def modes(self) -> list[tuple[tuple[int, int, int], np.ndarray]]:
        """係数表現: cos は ±k に ½c·a、sin は +k に -i c·a/2, -k に +i c·a/2."""
        a = self.coefficient * np.asarray(self.amplitude, dtype=float)
        k = tuple(int(x) for x in self.wavevector)
        minus_k = tuple(-x for x in k)
        if self.phase is Phase.COSINE:
            return [(k, 0.5 * a), (minus_k, 0.5 * a)]
        return [(k, -0.5j * a), (minus_k, 0.5j * a)]

    def render(self, grid: Grid) -> SpectralVectorField:
        """格子上のスペクトル場へ (カットオフ外の波数は GridError)."""
        return SpectralVectorField.from_modes(grid, self.modes())


@dataclass(frozen=True)
class WaveSum:
    """平面波の有限和."""

    waves: tuple[PlaneWave, ...] = field(default_factory=tuple)

    @classmethod
    def of(cls, waves: Iterable[PlaneWave]) -> "WaveSum":
        return cls(tuple(waves))

    def __add__(self, other: "WaveSum") -> "WaveSum":
        return WaveSum(self.waves + other.waves)

    def __len__(self) -> int:
        return len(self.waves)

    def __iter__(self):
        return iter(self.waves)

    def scaled(self, c: float) -> "WaveSum":
        return WaveSum(tuple(replace(w, coefficient=w.coefficient * c) for w in self.waves))

    def wavevectors(self) -> list[tuple[int, int, int]]:
        return [w.wavevector for w in self.waves]

    def max_wavenumber(self) -> int:
        """成分ごとの |k_i| の最大値 (格子カットオフとの比較用)."""
        return max((max(abs(int(k)) for k in w.wavevector) for w in self.waves), default=0)

    def render(self, grid: Grid) -> SpectralVectorField:
        """格子上のスペクトル場へ (カットオフ外の波数は GridError)."""
        modes = [mode for w in self.waves for mode in w.modes()]
        return SpectralVectorField.from_modes(grid, modes)


# =====================================================================
# 拡散とDuhamel重み
# =====================================================================


def diffuse(w: PlaneWave, t: float, alpha: float) -> PlaneWave:
    """e^{-t(-Δ)^α} を平面波に作用: 係数に e^{-|k|^{2α}t} を掛ける."""
    if t < 0:
        raise PreconditionError(f"時刻は非負である必要があります: t={t}")
    return replace(w, coefficient=w.coefficient * math.exp(-w.rate(alpha) * t))


def duhamel_weight(a: float, b: float, t: float) -> float:
    """∫_0^t e^{-aτ} e^{-b(t-τ)} dτ. a≈b は共鳴極限 t e^{-at}."""
    if a < 0 or b < 0 or t < 0:
        raise ValueError(f"a, b, t は非負: a={a}, b={b}, t={t}")
    if abs(a - b) < Tol.RESONANCE * (a + b + 1.0):
        return t * math.exp(-a * t)
    lo, hi = min(a, b), max(a, b)
    # e^{-lo t} (1 - e^{-(hi-lo)t}) / (hi-lo)
    return math.exp(-lo * t) * -math.expm1(-(hi - lo) * t) / (hi - lo)


def regrouped_b10_weight(a: float, t: float) -> float:
    """e^{-t}(1 - e^{-(a-1)t})/(a-1). duhamel_weight(a, 1, t) と一致する."""
    if a <= 1:
        raise ValueError(f"a > 1 が必要です: a={a}")
    return math.exp(-t) * (1.0 - math.exp(-(a - 1.0) * t)) / (a - 1.0)


def _project_amplitude(amplitude: np.ndarray, m: np.ndarray) -> np.ndarray:
    msq = float(np.dot(m, m))
    if msq == 0:
        return amplitude
    return amplitude - m * float(np.dot(m, amplitude)) / msq


# =====================================================================
# 2波相互作用 (閉形式)
# =====================================================================


@dataclass(frozen=True)
class InteractionTerms:
    """B_α(diffused w1, diffused w2) の差・和モード成分 (該当なしは None)."""

    difference: PlaneWave | None
    sum: PlaneWave | None

    def as_wave_sum(self) -> WaveSum:
        return WaveSum.of(w for w in (self.difference, self.sum) if w is not None)


def interaction_terms(w1: PlaneWave, w2: PlaneWave, alpha: float, t: float) -> InteractionTerms:
    """(w1·∇)w2 の Duhamel 積分を k2-k1, k2+k1 の正弦波として返す."""
    if w1.phase is not Phase.COSINE or w2.phase is not Phase.COSINE:
        raise UnsupportedWaveError("閉形式は余弦波どうしの相互作用のみ対応")
    if not w1.is_divergence_free():
        raise PreconditionError(f"w1 が発散ゼロではありません: k·v={np.dot(w1.wavevector, w1.amplitude)}")
    k1 = np.asarray(w1.wavevector, dtype=int)
    k2 = np.asarray(w2.wavevector, dtype=int)
    c = float(np.dot(k2, w1.amplitude))
    if c == 0.0 or t == 0.0:
        return InteractionTerms(None, None)

    a = w1.rate(alpha) + w2.rate(alpha)
    v2 = np.asarray(w2.amplitude, dtype=float)
    out: list[PlaneWave | None] = []
    for m in (k2 - k1, k2 + k1):
        if not np.any(m):
            # 平均ゼロを保つため波数0は捨てる
            out.append(None)
            continue
        amp = _project_amplitude(v2, m.astype(float))
        if not np.any(amp):
            out.append(None)
            continue
        rate_m = float(np.dot(m, m)) ** alpha
        coef = -0.5 * c * w1.coefficient * w2.coefficient * duhamel_weight(a, rate_m, t)
        out.append(
            PlaneWave(
                coefficient=coef,
                amplitude=tuple(float(x) for x in amp),
                wavevector=tuple(int(x) for x in m),
                phase=Phase.SINE,
            )
        )
    return InteractionTerms(out[0], out[1])


def transport_product(w1: PlaneWave, w2: PlaneWave) -> InteractionTerms:
    """(w1·∇)w2 そのもの (射影・時間積分なし) を k2-k1, k2+k1 の正弦波に分解.

    cos(k1·x) sin(k2·x) = [sin((k2+k1)·x) + sin((k2-k1)·x)] / 2 による。
    """
    if w1.phase is not Phase.COSINE or w2.phase is not Phase.COSINE:
        raise UnsupportedWaveError("余弦波どうしの積のみ対応")
    k1 = np.asarray(w1.wavevector, dtype=int)
    k2 = np.asarray(w2.wavevector, dtype=int)
    c = float(np.dot(k2, w1.amplitude))
    if c == 0.0:
        return InteractionTerms(None, None)
    coef = -0.5 * c * w1.coefficient * w2.coefficient
    out: list[PlaneWave | None] = []
    for m in (k2 - k1, k2 + k1):
        if not np.any(m):
            out.append(None)
            continue
        out.append(
            PlaneWave(coef, tuple(float(x) for x in w2.amplitude), tuple(int(x) for x in m), Phase.SINE)
        )
    return InteractionTerms(out[0], out[1])


def interact_diffused(w1: PlaneWave, w2: PlaneWave, alpha: float, t: float) -> WaveSum:
    """B_α(e^{-t(-Δ)^α}w1, e^{-t(-Δ)^α}w2) の閉形式."""
    return interaction_terms(w1, w2, alpha, t).as_wave_sum()


# =====================================================================
# 双線形作用素の数値積分
# =====================================================================


def diffused_generator(f: SpectralVectorField, alpha: float) -> FieldGenerator:
    """τ -> e^{-τ(-Δ)^α} f."""

    def generate(tau: float) -> SpectralVectorField:
        return fractional_semigroup(f, tau, alpha)

    return generate


def zero_generator(grid: Grid) -> FieldGenerator:
    zero = SpectralVectorField.zeros(grid)
    return lambda tau: zero


def bilinear_numeric(
    u_semi: FieldGenerator,
    v_semi: FieldGenerator,
    t: float,
    alpha: float,
    n_quad: int,
) -> SpectralVectorField:
    """∫_0^t e^{-(t-τ)(-Δ)^α} P ∇·(u⊗v) dτ を Gauss–Legendre 求積で計算."""
    if n_quad < 1:
        raise ValueError(f"n_quad は1以上: {n_quad}")
    if n_quad < 8:
        logger.warning("n_quad=%d は精度が不足する可能性があります", n_quad)
    grid = u_semi(0.0).grid
    acc = SpectralVectorField.zeros(grid)
    if t == 0:
        return acc
    nodes, weights = special.roots_legendre(n_quad)
    taus = 0.5 * t * (nodes + 1.0)
    for tau, w in zip(taus, 0.5 * t * weights):
        integrand = leray_project(advect(u_semi(float(tau)), v_semi(float(tau))))
        acc = acc + fractional_semigroup(integrand, t - float(tau), alpha) * float(w)
    return acc


def bilinear_bound_ratio(
    u_semi: FieldGenerator,
    v_semi: FieldGenerator,
    t: float,
    alpha: float,
    n_quad: int,
) -> float:
    """‖B_α(u,v)‖_∞ / ∫_0^t (t-τ)^{-1/2α} ‖u‖_∞‖v‖_∞ dτ.

    分母は (t-τ) の特異性を Gauss–Jacobi 重みで吸収して評価する。
    """
    numerator = sup_norm(bilinear_numeric(u_semi, v_semi, t, alpha, n_quad))
    p = 1.0 / (2.0 * alpha)
    nodes, weights = special.roots_jacobi(n_quad, -p, 0.0)
    taus = 0.5 * t * (nodes + 1.0)
    values = np.array([sup_norm(u_semi(float(s))) * sup_norm(v_semi(float(s))) for s in taus])
    denominator = (0.5 * t) ** (1.0 - p) * float(np.dot(weights, values))
    if denominator == 0.0:
        if numerator == 0.0:
            return 0.0
        raise InconsistentBoundError(f"分母0に対し分子 {numerator:.3e}")
    return numerator / denominator


def singular_kernel_integral(a: float, b: float, t: float) -> tuple[float, float]:
    """∫_0^t (t-τ)^{-a} τ^{-b} dτ の閉形式 t^{1-a-b} B(1-b, 1-a) と数値積分値."""
    if not (0 <= a < 1 and 0 <= b < 1):
        raise ValueError(f"0 <= a, b < 1 が必要です: a={a}, b={b}")
    if t <= 0:
        raise ValueError(f"t > 0 が必要です: t={t}")
    closed = t ** (1.0 - a - b) * float(special.beta(1.0 - b, 1.0 - a))
    quad, _ = integrate.quad(lambda x: 1.0, 0.0, t, weight="alg", wvar=(-b, -a))
    return closed, float(quad)
