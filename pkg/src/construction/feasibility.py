"""パラメータ制約の判定と既定パラメータの導出.

entries は r によらず成り立つべき構造的な不等式で、overall はその論理積。
advisories は具体的な r, T, K での小ささの条件 (r が十分大きいときのみ成立)。
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import pandas as pd

from src.constants import Tol
from src.construction.params import InflationParams, wave_base

logger = logging.getLogger(__name__)


class InfeasibleParamsError(ValueError):
    """制約を満たさないパラメータ. names に違反した制約名を持つ."""

    def __init__(self, names: list[str], detail: str = "") -> None:
        self.names = list(names)
        msg = f"制約違反: {', '.join(self.names)}"
        super().__init__(f"{msg} ({detail})" if detail else msg)


@dataclass(frozen=True)
class FeasibilityEntry:
    name: str
    group: str
    expression: str
    margin: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "group": self.group,
            "expression": self.expression,
            "margin": self.margin,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class FeasibilityReport:
    entries: tuple[FeasibilityEntry, ...]
    advisories: tuple[FeasibilityEntry, ...] = field(default_factory=tuple)

    @property
    def overall(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[str]:
        return [e.name for e in self.entries if not e.passed]

    def entry(self, name: str) -> FeasibilityEntry:
        for e in (*self.entries, *self.advisories):
            if e.name == name:
                return e
        raise KeyError(name)

    def failed_groups(self) -> list[str]:
        return sorted({e.group for e in self.entries if not e.passed})

    def to_frame(self) -> pd.DataFrame:
        rows = [dict(e.as_dict(), kind="entry") for e in self.entries]
        rows += [dict(e.as_dict(), kind="advisory") for e in self.advisories]
        return pd.DataFrame(rows)

    def as_dict(self) -> dict:
        return {
            "overall": self.overall,
            "entries": [e.as_dict() for e in self.entries],
            "advisories": [e.as_dict() for e in self.advisories],
        }


def _at_least(name: str, group: str, expression: str, margin: float) -> FeasibilityEntry:
    return FeasibilityEntry(name, group, expression, margin, margin >= -Tol.FEASIBILITY)


def _strict(name: str, group: str, expression: str, margin: float) -> FeasibilityEntry:
    return FeasibilityEntry(name, group, expression, margin, margin > 0)


# =====================================================================
# 制約の各グループ
# =====================================================================


def theta_bounds(alpha1: float, alpha2: float) -> tuple[float, float]:
    """θ1 の上限2つ: 4α2 - α2/α1 - 1 と (θ2 側から) θ1 >= 2α2 - (4α1 - α1/α2 - 1)."""
    return 4 * alpha2 - alpha2 / alpha1 - 1, 4 * alpha1 - alpha1 / alpha2 - 1


def theta_entries(alpha1: float, alpha2: float, theta1: float, theta2: float) -> list[FeasibilityEntry]:
    hi1, hi2 = theta_bounds(alpha1, alpha2)
    diff = abs(theta1 + theta2 - 2 * alpha2)
    return [
        FeasibilityEntry(
            "theta_sum", "theta", "θ1 + θ2 = 2α2", -diff, diff <= Tol.THETA_SUM
        ),
        _at_least(
            "theta1_range", "theta", "1 <= θ1 <= 4α2 - α2/α1 - 1", min(theta1 - 1, hi1 - theta1)
        ),
        _at_least(
            "theta2_range", "theta", "1 <= θ2 <= 4α1 - α1/α2 - 1", min(theta2 - 1, hi2 - theta2)
        ),
    ]


def gamma_lower_bounds(p_beta1: float, p_beta2: float, alpha1: float, alpha2: float) -> tuple[float, float]:
    gap = 1 - p_beta1 - p_beta2
    return gap / (1 - 1 / (2 * alpha1)), gap / (1 - 1 / (2 * alpha2))


def bootstrap_exponents(p: InflationParams) -> list[float]:
    """C2 + C3 + C1C4 を r^{...} で書いたときの4つの指数 (すべて負であるべき)."""
    gap = p.predicted_exponent
    a1, a2, g = p.alpha1, p.alpha2, p.gamma
    return [
        gap - g * (1 - 1 / (2 * a2)),
        gap - g * (1 - 1 / (2 * a1)),
        2 * gap - g * (2 - 1 / a1),
        2 * gap - g * (2 - 1 / (2 * a1) - 1 / (2 * a2)),
    ]


def smallness_exponents(p: InflationParams) -> list[float]:
    """A を r^{...} で書いたときの3つの指数 (すべて負であるべき)."""
    a1 = p.alpha1
    return [
        p.beta1 - 1 + p.zeta_exp * p.theta2,
        -p.beta2 - p.gamma * (1 - 1 / (2 * a1) - p.theta2 / (2 * a1)),
        p.predicted_exponent - p.gamma * (1 - 1 / (2 * a1)),
    ]


def smallness_A(p: InflationParams) -> float:
    """A = r^{β1-1}|k1|^{θ2} + r^{-β2}T^{1-1/2α1-θ2/2α1} + r^{1-β1-β2}T^{1-1/2α1}."""
    a1, r, T = p.alpha1, p.r, p.T
    k1 = p.k_norms[0]
    return (
        r ** (p.beta1 - 1) * k1**p.theta2
        + r ** (-p.beta2) * T ** (1 - 1 / (2 * a1) - p.theta2 / (2 * a1))
        + r**p.predicted_exponent * T ** (1 - 1 / (2 * a1))
    )


def bootstrap_terms(p: InflationParams, t: float | None = None) -> tuple[float, float, float, float]:
    """補正項の評価に現れる C1..C4 を時刻 t (既定 T) で評価."""
    t = p.T if t is None else t
    a1, a2, th1, th2 = p.alpha1, p.alpha2, p.theta1, p.theta2
    r, b1, b2 = p.r, p.beta1, p.beta2
    gap = p.predicted_exponent
    c1 = (
        r ** (1 - b1 - 2 * b2) * t ** (1 - 1 / (2 * a1) - th2 / (2 * a1))
        + r ** (2 * gap) * t ** (1 - 1 / (2 * a1))
        + r ** (1 - 2 * b1 - b2) * t ** (1 - 1 / (2 * a2) - th1 / (2 * a2))
    )
    c2 = (
        r**-b1 * t ** (1 - 1 / (2 * a1) - th1 / (2 * a1))
        + r**-b2 * t ** (1 - 1 / (2 * a2) - th2 / (2 * a2))
        + r**gap * t ** (1 - 1 / (2 * a2))
    )
    c3 = (
        r**-b2 * t ** (1 - 1 / (2 * a1) - th2 / (2 * a1))
        + r**gap * t ** (1 - 1 / (2 * a1))
        + r**-b1 * t ** (1 - 1 / (2 * a2) - th1 / (2 * a2))
    )
    c4 = t ** (1 - 1 / (2 * a1)) + t ** (1 - 1 / (2 * a2))
    return c1, c2, c3, c4


def bootstrap_smallness(p: InflationParams) -> float:
    """C2 + C3 + C1·C4 (t = T)."""
    c1, c2, c3, c4 = bootstrap_terms(p)
    return c2 + c3 + c1 * c4


def residual_bound(p: InflationParams, t: float) -> float:
    """‖y‖_∞ + ‖z‖_∞ の上界の右辺 (定数を除く) = C1(t)."""
    if t <= 0:
        return 0.0
    return bootstrap_terms(p, t)[0]


# =====================================================================
# 判定
# =====================================================================


def check_feasibility(p: InflationParams) -> FeasibilityReport:
    """全制約をマージン付きで評価する."""
    a1, a2 = p.alpha1, p.alpha2
    entries = theta_entries(a1, a2, p.theta1, p.theta2)

    low1, low2 = gamma_lower_bounds(p.beta1, p.beta2, a1, a2)
    entries += [
        _strict("gamma_lower_alpha1", "gamma", "γ > (1-β1-β2)/(1-1/(2α1))", p.gamma - low1),
        _strict("gamma_lower_alpha2", "gamma", "γ > (1-β1-β2)/(1-1/(2α2))", p.gamma - low2),
    ]

    zeta_hi = (1 - p.beta1) / p.theta2 if p.theta2 > 0 else -math.inf
    entries += [
        _strict("zeta_range", "zeta_gamma", "0 < ζ < (1-β1)/θ2", min(p.zeta_exp, zeta_hi - p.zeta_exp)),
        _strict("gamma_upper", "zeta_gamma", "γ < 2α2ζ", 2 * a2 * p.zeta_exp - p.gamma),
        _at_least(
            "theta2_dissipation",
            "zeta_gamma",
            "1 - 1/(2α1) - θ2/(2α1) >= 0",
            1 - 1 / (2 * a1) - p.theta2 / (2 * a1),
        ),
    ]

    k1 = p.k_norms[0]
    entries.append(_strict("k1_window", "window", "|k1|^{-2α2} < T", p.T - k1 ** (-2 * a2)))
    entries += [
        _strict("beta1_range", "beta", "1/3 < β1 < 1/2", min(p.beta1 - 1 / 3, 0.5 - p.beta1)),
        _strict("beta2_range", "beta", "1/3 < β2 < 1/2", min(p.beta2 - 1 / 3, 0.5 - p.beta2)),
    ]
    entries += [
        _strict(f"bootstrap_exponent_{i}", "bootstrap", "r-exponent < 0", -e)
        for i, e in enumerate(bootstrap_exponents(p), start=1)
    ]
    entries += [
        _strict(f"smallness_exponent_{i}", "smallness", "r-exponent < 0", -e)
        for i, e in enumerate(smallness_exponents(p), start=1)
    ]

    advisories = (
        _at_least("smallness_A", "concrete_r", "A <= 1/2", 0.5 - smallness_A(p)),
        _at_least("bootstrap_smallness", "concrete_r", "C2 + C3 + C1C4 <= 1/2", 0.5 - bootstrap_smallness(p)),
    )
    for a in advisories:
        if not a.passed:
            logger.warning("r=%d では %s が未成立 (margin=%.3g)", p.r, a.expression, a.margin)
    return FeasibilityReport(tuple(entries), advisories)


def derive_params(
    alpha1: float,
    alpha2: float,
    epsilon: float,
    r: int,
    theta1_opt: float | None = None,
) -> InflationParams:
    """β1=β2=1/2-ε とし、θ1, ζ, γ を許容区間の中点に取る."""
    if not 0 < epsilon < 1 / 6:
        raise InfeasibleParamsError(["epsilon_range"], f"0 < ε < 1/6: ε={epsilon}")
    beta = 0.5 - epsilon
    hi1, hi2 = theta_bounds(alpha1, alpha2)

    if theta1_opt is not None:
        theta1 = float(theta1_opt)
    else:
        lo = max(1.0, 2 * alpha2 - hi2, 2 * alpha2 - 2 * alpha1 + 1)
        hi = min(hi1, 2 * alpha2 - 1)
        if lo > hi + Tol.FEASIBILITY:
            raise InfeasibleParamsError(
                ["theta1_range", "theta2_range"], f"θ1 の許容区間が空: [{lo:g}, {hi:g}]"
            )
        theta1 = 0.5 * (lo + hi)
    theta2 = 2 * alpha2 - theta1

    failing = [e.name for e in theta_entries(alpha1, alpha2, theta1, theta2) if not e.passed]
    if failing:
        raise InfeasibleParamsError(failing, f"θ1={theta1:g}, θ2={theta2:g}")

    zeta = 0.5 * (1 - beta) / theta2
    low1, low2 = gamma_lower_bounds(beta, beta, alpha1, alpha2)
    gamma_lo, gamma_hi = max(low1, low2), 2 * alpha2 * zeta
    if gamma_lo >= gamma_hi:
        raise InfeasibleParamsError(
            ["gamma_upper"], f"γ の区間が空: ({gamma_lo:g}, {gamma_hi:g})"
        )
    gamma = 0.5 * (gamma_lo + gamma_hi)

    params = InflationParams(
        alpha1=alpha1,
        alpha2=alpha2,
        r=r,
        epsilon=epsilon,
        beta1=beta,
        beta2=beta,
        theta1=theta1,
        theta2=theta2,
        gamma=gamma,
        zeta_exp=zeta,
        K=wave_base(r, zeta),
        T=r ** (-gamma),
    )
    report = check_feasibility(params)
    if not report.overall:
        raise InfeasibleParamsError(report.failures(), "K の丸め後に再判定")
    logger.debug("derive_params: θ1=%g γ=%g ζ=%g K=%d T=%g", theta1, gamma, zeta, params.K, params.T)
    return params


def inflation_lower_bound(p: InflationParams, t: float) -> tuple[float, float, bool]:
    """b のノルム下界: (r^{1-β1-β2}, 括弧内 1 - ..., 適用可能か)."""
    a1, a2, th1, th2 = p.alpha1, p.alpha2, p.theta1, p.theta2
    r, b1, b2 = p.r, p.beta1, p.beta2
    scale = r**p.predicted_exponent
    bracket = (
        1
        - r ** (b1 - 1) * t ** (-th2 / (2 * a2))
        - r**-b2 * t ** (1 - 1 / (2 * a1) - th2 / (2 * a1))
        - r**p.predicted_exponent * t ** (1 - 1 / (2 * a1))
        - r**-b1 * t ** (1 - 1 / (2 * a2) - th1 / (2 * a2))
    )
    applicable = p.k_norms[0] ** (-2 * a2) <= t <= p.T
    return scale, bracket, applicable
