"""ノルム膨張構成のパラメータ.

波数ベクトル k_i = 2^{i-1}K (1,0,0), k'_i = k_i + (0,0,1)、
振幅 v = (0,0,1), v' = (0,1,0)。T = r^{-γ}, K = max(2, ⌈r^ζ⌉)。
"""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field

K_DIRECTION = (1, 0, 0)
ETA = (0, 0, 1)
V = (0.0, 0.0, 1.0)
V_PRIME = (0.0, 1.0, 0.0)


class InflationParams(BaseModel):
    """α1, α2, r, β, θ, γ, ζ と丸め後の K, T."""

    model_config = ConfigDict(frozen=True)

    alpha1: float = Field(ge=1)
    alpha2: float = Field(ge=1)
    r: int = Field(ge=1)
    epsilon: float = Field(gt=0, lt=1 / 6)
    beta1: float = Field(gt=0)
    beta2: float = Field(gt=0)
    theta1: float
    theta2: float
    gamma: float = Field(gt=0)
    zeta_exp: float = Field(gt=0)
    K: int = Field(ge=1)
    T: float = Field(gt=0)

    @property
    def k_vectors(self) -> list[tuple[int, int, int]]:
        return [
            tuple(2 ** (i - 1) * self.K * d for d in K_DIRECTION)  # type: ignore[misc]
            for i in range(1, self.r + 1)
        ]

    @property
    def k_prime_vectors(self) -> list[tuple[int, int, int]]:
        return [tuple(a + b for a, b in zip(k, ETA)) for k in self.k_vectors]  # type: ignore[misc]

    @property
    def k_norms(self) -> list[float]:
        return [math.sqrt(sum(x * x for x in k)) for k in self.k_vectors]

    @property
    def k_prime_norms(self) -> list[float]:
        return [math.sqrt(sum(x * x for x in k)) for k in self.k_prime_vectors]

    @property
    def v(self) -> tuple[float, float, float]:
        return V

    @property
    def v_prime(self) -> tuple[float, float, float]:
        return V_PRIME

    @property
    def eta(self) -> tuple[int, int, int]:
        return ETA

    @property
    def delta(self) -> float:
        """δ の目安: max(r^{-β1}, r^{-β2}, T)."""
        return max(self.r ** -self.beta1, self.r ** -self.beta2, self.T)

    @property
    def predicted_exponent(self) -> float:
        """b の膨張の r 指数 1 - β1 - β2."""
        return 1.0 - self.beta1 - self.beta2

    @property
    def largest_wavenumber(self) -> int:
        """初期データ最大波数 |k_r| (軸1成分)."""
        return 2 ** (self.r - 1) * self.K

    def summary(self) -> dict:
        data = self.model_dump()
        data["delta"] = self.delta
        data["k_vectors"] = [list(k) for k in self.k_vectors]
        data["k_prime_vectors"] = [list(k) for k in self.k_prime_vectors]
        return data


def wave_base(r: int, zeta_exp: float) -> int:
    """K = max(2, ⌈r^ζ⌉). K=1 では |k_1|^{-2α2} < T の窓が空になる."""
    return max(2, math.ceil(r**zeta_exp - 1e-12))
