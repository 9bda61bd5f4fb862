"""周期ベクトル場のフーリエ表現と基本演算.

係数は norm="forward" のFFT係数 (平均値規格) で保持する。
v cos(k·x) は +k と -k にそれぞれ ½v として格納される。
全ての演算は入力を変更せず、新しい場を返す。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import fft as sfft

from src.constants import Tol
from src.spectral.grid import Grid, GridError

logger = logging.getLogger(__name__)

_AXES = (1, 2, 3)


class MalformedFieldError(ValueError):
    """共役対称性が崩れた係数配列."""


class PreconditionError(ValueError):
    """演算の前提条件 (発散ゼロ・t>=0 など) 違反."""


# =====================================================================
# 場の型
# =====================================================================


@dataclass(frozen=True, eq=False)
class SpectralVectorField:
    """3成分の周期ベクトル場 (フーリエ係数, shape=(3, n1, n2, n3))."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        expected = (3, *self.grid.shape)
        if self.coeffs.shape != expected:
            raise GridError(f"係数配列の形状 {self.coeffs.shape} != {expected}")

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralVectorField":
        return cls(grid, np.zeros((3, *grid.shape), dtype=complex))

    @classmethod
    def from_modes(
        cls,
        grid: Grid,
        modes: Iterable[tuple[tuple[int, int, int], np.ndarray]],
    ) -> "SpectralVectorField":
        """(波数, 複素3ベクトル) の列から場を作る. 同じ波数は加算される."""
        coeffs = np.zeros((3, *grid.shape), dtype=complex)
        for m, value in modes:
            i, j, k = grid.index_of(m)
            coeffs[:, i, j, k] += np.asarray(value, dtype=complex)
        return cls(grid, coeffs)

    def coefficient(self, m: tuple[int, int, int]) -> np.ndarray:
        """波数 m の係数ベクトル (カットオフ外は0)."""
        if not self.grid.contains(m):
            return np.zeros(3, dtype=complex)
        i, j, k = self.grid.index_of(m)
        return self.coeffs[:, i, j, k].copy()

    def mean(self) -> np.ndarray:
        return self.coeffs[:, 0, 0, 0].copy()

    def scale(self) -> float:
        """係数の最大絶対値 (相対許容誤差の基準)."""
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def _like(self, coeffs: np.ndarray) -> "SpectralVectorField":
        return SpectralVectorField(self.grid, coeffs)

    def _check_grid(self, other: "SpectralVectorField") -> None:
        if other.grid != self.grid:
            raise GridError(f"格子が一致しません: {self.grid.shape} vs {other.grid.shape}")

    def __add__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        self._check_grid(other)
        return self._like(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        self._check_grid(other)
        return self._like(self.coeffs - other.coeffs)

    def __neg__(self) -> "SpectralVectorField":
        return self._like(-self.coeffs)

    def __mul__(self, c: float) -> "SpectralVectorField":
        return self._like(self.coeffs * c)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class PhysicalVectorField:
    """格子点上の実3ベクトル値 (shape=(3, n1, n2, n3))."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        expected = (3, *self.grid.shape)
        if self.values.shape != expected:
            raise GridError(f"値配列の形状 {self.values.shape} != {expected}")

    @classmethod
    def sample(cls, grid: Grid, func) -> "PhysicalVectorField":
        """func(x1, x2, x3) -> (3, ...) を格子点で評価."""
        x1, x2, x3 = grid_points(grid)
        values = np.broadcast_to(np.asarray(func(x1, x2, x3), dtype=float), (3, *grid.shape))
        return cls(grid, np.array(values))


def random_solenoidal(
    grid: Grid, rng: np.random.Generator, amplitude: float = 1.0
) -> SpectralVectorField:
    """平均ゼロ・発散ゼロでカットオフ内に収まる乱数場 (性質検査用)."""
    values = rng.standard_normal((3, *grid.shape))
    f = leray_project(to_spectral(PhysicalVectorField(grid, values)))
    coeffs = f.coeffs.copy()
    coeffs[:, 0, 0, 0] = 0.0
    scale = float(np.max(np.abs(coeffs))) or 1.0
    return SpectralVectorField(grid, coeffs * (amplitude / scale))


def grid_points(grid: Grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """ブロードキャスト可能な格子座標 (各軸 [0, 2π))."""
    n1, n2, n3 = grid.shape
    x1 = (2 * np.pi * np.arange(n1) / n1).reshape(n1, 1, 1)
    x2 = (2 * np.pi * np.arange(n2) / n2).reshape(1, n2, 1)
    x3 = (2 * np.pi * np.arange(n3) / n3).reshape(1, 1, n3)
    return x1, x2, x3


# =====================================================================
# 内部ヘルパー
# =====================================================================


def _reflect(coeffs: np.ndarray) -> np.ndarray:
    """c[m] -> c[-m] (FFT順の添字で (-i) mod n)."""
    out = np.flip(coeffs, axis=_AXES)
    return np.roll(out, shift=(1, 1, 1), axis=_AXES)


def _hermitian_defect(coeffs: np.ndarray) -> float:
    scale = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(coeffs - np.conj(_reflect(coeffs))))) / scale


def _truncate(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return np.where(grid.dealias_mask(), coeffs, 0.0)


def _m_squared(grid: Grid) -> np.ndarray:
    m1, m2, m3 = grid.wavenumbers()
    return m1 * m1 + m2 * m2 + m3 * m3


def _m_dot(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    m1, m2, m3 = grid.wavenumbers()
    return m1 * coeffs[0] + m2 * coeffs[1] + m3 * coeffs[2]


def wavenumber_magnitude(grid: Grid) -> np.ndarray:
    """|m| の配列 (ブロードキャスト形状)."""
    return np.sqrt(_m_squared(grid))


def _ifft(coeffs: np.ndarray) -> np.ndarray:
    return sfft.ifftn(coeffs, axes=_AXES, norm="forward").real


def _fft(values: np.ndarray) -> np.ndarray:
    return sfft.fftn(values, axes=_AXES, norm="forward")


def _pad(coeffs: np.ndarray, grid: Grid, fine: Grid) -> np.ndarray:
    """切り詰め済み係数を細かい格子へゼロ埋めで移す."""
    out = np.zeros((coeffs.shape[0], *fine.shape), dtype=complex)
    index = []
    for n, nf in zip(grid.shape, fine.shape):
        m = np.rint(sfft.fftfreq(n, 1.0 / n)).astype(int)
        index.append(np.mod(m, nf))
    out[(slice(None), *np.ix_(*index))] = coeffs
    return out


def _spatial_magnitude_max(values: np.ndarray) -> float:
    return float(np.sqrt(np.max(np.sum(values * values, axis=0))))


# =====================================================================
# 変換
# =====================================================================


def to_physical(f: SpectralVectorField) -> PhysicalVectorField:
    """逆FFTで格子点値へ. 共役対称性が 1e-12 (相対) を超えて崩れていればエラー."""
    defect = _hermitian_defect(f.coeffs)
    if defect > Tol.HERMITIAN:
        raise MalformedFieldError(f"共役対称性の破れ {defect:.3e} > {Tol.HERMITIAN:g}")
    return PhysicalVectorField(f.grid, _ifft(f.coeffs))


def to_spectral(f: PhysicalVectorField) -> SpectralVectorField:
    """FFTで係数へ. 対称化とカットオフ外の切り捨てを行う."""
    coeffs = _fft(f.values)
    coeffs = 0.5 * (coeffs + np.conj(_reflect(coeffs)))
    return SpectralVectorField(f.grid, _truncate(coeffs, f.grid))


# =====================================================================
# 線形演算
# =====================================================================


def leray_project(f: SpectralVectorField) -> SpectralVectorField:
    """発散ゼロ成分への射影: c(m) -> c(m) - m (m·c(m)) / |m|^2. m=0 は素通し."""
    grid = f.grid
    msq = _m_squared(grid)
    safe = np.where(msq == 0, 1.0, msq)
    factor = _m_dot(grid, f.coeffs) / safe
    m1, m2, m3 = grid.wavenumbers()
    out = f.coeffs.copy()
    out[0] -= m1 * factor
    out[1] -= m2 * factor
    out[2] -= m3 * factor
    return SpectralVectorField(grid, out)


def semigroup_multiplier(grid: Grid, t: float, alpha: float) -> np.ndarray:
    """e^{-|m|^{2α} t} の乗数配列."""
    if t < 0:
        raise PreconditionError(f"時刻は非負である必要があります: t={t}")
    return np.exp(-np.power(_m_squared(grid), alpha) * t)


def fractional_semigroup(f: SpectralVectorField, t: float, alpha: float) -> SpectralVectorField:
    """分数階熱半群 e^{-t(-Δ)^α}. t=0 は恒等写像."""
    if t == 0:
        return SpectralVectorField(f.grid, f.coeffs.copy())
    return SpectralVectorField(f.grid, f.coeffs * semigroup_multiplier(f.grid, t, alpha))


def dissipation_rate(f: SpectralVectorField, alpha: float) -> float:
    """Σ |m|^{2α} |f̂(m)|^2."""
    weight = np.power(_m_squared(f.grid), alpha)
    return float(np.sum(weight * np.sum(np.abs(f.coeffs) ** 2, axis=0)))


def inner_product(f: SpectralVectorField, g: SpectralVectorField) -> float:
    """トーラス平均 <f, g> = Σ Re(f̂·conj(ĝ))."""
    return float(np.sum((f.coeffs * np.conj(g.coeffs)).real))


def rescale(f: SpectralVectorField, lam: int, grid: Grid | None = None) -> SpectralVectorField:
    """f(λx) を返す. 係数は m -> λm に移る (λ は正の整数)."""
    target = grid or f.grid
    if lam < 1 or int(lam) != lam:
        raise PreconditionError(f"λ は正の整数: {lam}")
    lam = int(lam)
    src = f.grid
    if src.slab_mode != target.slab_mode:
        raise GridError("slab/3次元の異なる格子間ではスケーリングできません")
    scaled = [np.rint(m).astype(int).ravel() * lam for m in src.wavenumbers()]
    active = np.any(f.coeffs != 0, axis=0)
    for axis, (m, c) in enumerate(zip(scaled, target.cutoff)):
        outside = np.abs(m) > c
        shape = [1, 1, 1]
        shape[axis] = -1
        if np.any(active & outside.reshape(shape)):
            raise GridError(f"λ={lam} で軸{axis + 1}の波数がカットオフ {c} を超えます")
    index = np.ix_(*[np.mod(m, n) for m, n in zip(scaled, target.shape)])
    out = np.zeros((3, *target.shape), dtype=complex)
    for comp in range(3):
        np.add.at(out[comp], index, f.coeffs[comp])
    return SpectralVectorField(target, out)


# =====================================================================
# 非線形項
# =====================================================================


def require_divergence_free(u: SpectralVectorField, name: str) -> None:
    norm_m = np.sqrt(_m_squared(u.grid))
    scale = float(np.max(norm_m * np.max(np.abs(u.coeffs), axis=0)))
    div = divergence_max(u)
    if div > Tol.DIVERGENCE * (1.0 + scale):
        raise PreconditionError(f"{name} が発散ゼロではありません: max|m·c|={div:.3e}")


def advect(u: SpectralVectorField, v: SpectralVectorField) -> SpectralVectorField:
    """(u·∇)v を擬スペクトル法で計算 (2/3則で切り詰め).

    u は発散ゼロであること ((u·∇)v = ∇·(u⊗v) の前提)。
    """
    u._check_grid(v)
    require_divergence_free(u, "u")
    grid = u.grid
    u_phys = _ifft(u.coeffs)
    out = np.zeros_like(u_phys)
    for i, m in enumerate(grid.wavenumbers()):
        if not np.any(u_phys[i]):
            continue
        dv = _ifft(1j * m * v.coeffs)
        out += u_phys[i] * dv
    coeffs = _fft(out)
    coeffs = 0.5 * (coeffs + np.conj(_reflect(coeffs)))
    return SpectralVectorField(grid, _truncate(coeffs, grid))


def mhd_transport(
    u: SpectralVectorField, b: SpectralVectorField
) -> tuple[SpectralVectorField, SpectralVectorField]:
    """(u·∇)u − (b·∇)b と (u·∇)b − (b·∇)u を発散形でまとめて計算.

    u, b が発散ゼロなら ∂_i(u_i u_j − b_i b_j) と ∂_i(u_i b_j − b_i u_j) に等しい。
    """
    u._check_grid(b)
    grid = u.grid
    ms = grid.wavenumbers()
    up = _ifft(u.coeffs)
    bp = _ifft(b.coeffs)
    sym_pairs = [(i, j) for i in range(3) for j in range(i, 3)]
    anti_pairs = [(i, j) for i in range(3) for j in range(i + 1, 3)]
    # 積は (成分, n1, n2, n3) に積み上げてまとめて変換する
    sym = _fft(np.stack([up[i] * up[j] - bp[i] * bp[j] for i, j in sym_pairs]))
    # 反対称: A_ij = u_i b_j − b_i u_j, A_ji = −A_ij
    anti = _fft(np.stack([up[i] * bp[j] - bp[i] * up[j] for i, j in anti_pairs]))
    momentum = np.zeros((3, *grid.shape), dtype=complex)
    induction = np.zeros((3, *grid.shape), dtype=complex)
    for n, (i, j) in enumerate(sym_pairs):
        momentum[j] += 1j * ms[i] * sym[n]
        if j != i:
            momentum[i] += 1j * ms[j] * sym[n]
    for n, (i, j) in enumerate(anti_pairs):
        induction[j] += 1j * ms[i] * anti[n]
        induction[i] -= 1j * ms[j] * anti[n]
    mom = 0.5 * (momentum + np.conj(_reflect(momentum)))
    ind = 0.5 * (induction + np.conj(_reflect(induction)))
    return (
        SpectralVectorField(grid, _truncate(mom, grid)),
        SpectralVectorField(grid, _truncate(ind, grid)),
    )


# =====================================================================
# ノルム
# =====================================================================


def sup_norm(f: SpectralVectorField, refine: int = 1) -> float:
    """格子点上の |f(x)| の最大値. refine>1 でゼロ埋めした細かい格子で評価."""
    if not np.any(f.coeffs):
        return 0.0
    if refine == 1:
        return _spatial_magnitude_max(_ifft(f.coeffs))
    fine = f.grid.refined(refine)
    return _spatial_magnitude_max(_ifft(_pad(f.coeffs, f.grid, fine)))


def divergence_max(f: SpectralVectorField) -> float:
    """max_m |m·c(m)|."""
    if not np.any(f.coeffs):
        return 0.0
    return float(np.max(np.abs(_m_dot(f.grid, f.coeffs))))


def l2_energy(f: SpectralVectorField) -> float:
    """½ Σ |f̂(m)|^2 (トーラス平均の運動エネルギー)."""
    return 0.5 * float(np.sum(np.abs(f.coeffs) ** 2))


def max_offslab_coefficient(f: SpectralVectorField) -> float:
    """m2≠0 の係数の最大絶対値 (slab不変性の確認用)."""
    m2 = f.grid.wavenumbers()[1]
    mask = np.broadcast_to(m2 != 0, f.grid.shape)
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(f.coeffs[:, mask])))
