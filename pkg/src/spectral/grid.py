"""周期2πトーラス上の格子定義.

slabモードでは n2=1 とし、x2 に依存しない場 (3成分) を2次元格子で扱う。
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import fft as sfft


class GridError(ValueError):
    """格子サイズが足りない・波数が格子外にある場合のエラー."""


class Grid(BaseModel):
    """n1×n2×n3 のフーリエ格子 (周期 2π)."""

    model_config = ConfigDict(frozen=True)

    n1: int = Field(ge=4, description="軸1の格子点数")
    n2: int = Field(ge=1, description="軸2の格子点数 (slabでは1)")
    n3: int = Field(ge=4, description="軸3の格子点数")
    slab_mode: bool = False

    @field_validator("n1", "n3")
    @classmethod
    def _even(cls, v: int) -> int:
        if v % 2 != 0:
            raise ValueError(f"格子点数は偶数である必要があります: {v}")
        return v

    @model_validator(mode="after")
    def _check_slab(self) -> "Grid":
        if self.slab_mode and self.n2 != 1:
            raise ValueError(f"slabモードでは n2=1 が必要です: n2={self.n2}")
        if not self.slab_mode and (self.n2 < 4 or self.n2 % 2 != 0):
            raise ValueError(f"3次元モードでは n2 は4以上の偶数: n2={self.n2}")
        return self

    @classmethod
    def slab(cls, n1: int, n3: int) -> "Grid":
        return cls(n1=n1, n2=1, n3=n3, slab_mode=True)

    @classmethod
    def full(cls, n1: int, n2: int, n3: int) -> "Grid":
        return cls(n1=n1, n2=n2, n3=n3, slab_mode=False)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)

    @property
    def cutoff(self) -> tuple[int, int, int]:
        """2/3則で残す最大波数 (軸ごと). |m_i| <= cutoff_i."""
        return tuple(_cutoff(n) for n in self.shape)  # type: ignore[return-value]

    @property
    def k_max(self) -> float:
        """保持される最大の |m| (CFL評価用)."""
        return float(np.sqrt(sum(c * c for c in self.cutoff)))

    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """ブロードキャスト可能な整数波数配列 (m1, m2, m3) を返す."""
        return _wavenumbers(*self.shape)

    def dealias_mask(self) -> np.ndarray:
        """2/3則で保持するモードのマスク (shape = grid.shape)."""
        return _dealias_mask(*self.shape)

    def contains(self, m: tuple[int, int, int]) -> bool:
        """波数 m がカットオフ内か."""
        return all(abs(int(mi)) <= c for mi, c in zip(m, self.cutoff))

    def index_of(self, m: tuple[int, int, int]) -> tuple[int, int, int]:
        """波数 m の係数配列インデックス (FFT順)."""
        if not self.contains(m):
            raise GridError(f"波数 {tuple(m)} はカットオフ {self.cutoff} の外です")
        return tuple(int(mi) % n for mi, n in zip(m, self.shape))  # type: ignore[return-value]

    def refined(self, factor: int) -> "Grid":
        """アクティブな軸を factor 倍に細かくした格子."""
        if factor < 1:
            raise ValueError(f"refine倍率は1以上: {factor}")
        n2 = self.n2 if self.slab_mode else self.n2 * factor
        return Grid(n1=self.n1 * factor, n2=n2, n3=self.n3 * factor, slab_mode=self.slab_mode)

    def coarsened(self, factor: int) -> "Grid":
        """アクティブな軸を 1/factor にした格子 (スケーリング比較用)."""
        dims = [self.n1, self.n3] + ([] if self.slab_mode else [self.n2])
        if any(n % factor for n in dims):
            raise GridError(f"格子 {self.shape} は {factor} で割り切れません")
        n2 = self.n2 if self.slab_mode else self.n2 // factor
        return Grid(
            n1=self.n1 // factor, n2=n2, n3=self.n3 // factor, slab_mode=self.slab_mode
        )


def _cutoff(n: int) -> int:
    # 3c < n なら2次の積でエイリアシングが保持モードに戻らない
    return (n - 1) // 3


@lru_cache(maxsize=32)
def _wavenumbers(n1: int, n2: int, n3: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m1 = np.rint(sfft.fftfreq(n1, 1.0 / n1)).reshape(n1, 1, 1)
    m2 = np.rint(sfft.fftfreq(n2, 1.0 / n2)).reshape(1, n2, 1)
    m3 = np.rint(sfft.fftfreq(n3, 1.0 / n3)).reshape(1, 1, n3)
    for arr in (m1, m2, m3):
        arr.setflags(write=False)
    return m1, m2, m3


@lru_cache(maxsize=32)
def _dealias_mask(n1: int, n2: int, n3: int) -> np.ndarray:
    m1, m2, m3 = _wavenumbers(n1, n2, n3)
    mask = (
        (np.abs(m1) <= _cutoff(n1))
        & (np.abs(m2) <= _cutoff(n2))
        & (np.abs(m3) <= _cutoff(n3))
    )
    mask.setflags(write=False)
    return mask
