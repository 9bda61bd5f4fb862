"""検証スイート: 閉形式と数値オラクル、保存則・構造・対称性の突き合わせ.

各チェックは CheckResult を返し、1つでも失敗すれば終了コード 1。
結果は out/verify.csv に書き出す。
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from src.analytics.besov import BesovSpec, caloric_besov_norm, plane_wave_besov_exact
from src.analytics.first_iteration import (
    b10_amplitude,
    b1_closed_form,
    transport_split,
    u1_closed_form,
)
from src.analytics.plane_waves import (
    PlaneWave,
    bilinear_numeric,
    diffuse,
    diffused_generator,
    interact_diffused,
    singular_kernel_integral,
)
from src.components.report_writer import write_csv
from src.constants import Col, OutputFile, Tol
from src.construction.feasibility import InfeasibleParamsError, check_feasibility, derive_params
from src.construction.initial_data import build_initial_data, required_grid_size, wave_ladder_report
from src.construction.params import InflationParams
from src.experiment.config import ExperimentConfig
from src.solver.diagnostics import energy_audit, simulate
from src.solver.etd import SolverSettings, SolverState, march
from src.solver.scaling import scaling_symmetry_check
from src.spectral.fields import (
    SpectralVectorField,
    advect,
    divergence_max,
    fractional_semigroup,
    inner_product,
    max_offslab_coefficient,
    random_solenoidal,
    sup_norm,
)
from src.spectral.grid import Grid
from src.transforms.report_transform import build_verify_frame

logger = logging.getLogger(__name__)

# 検証用の固定パラメータ (α1=α2=1, ε=0.1)
REFERENCE_EPSILON = 0.1
BESOV_KAPPAS = ((1, 0, 0), (2, 0, 0), (4, 0, 0), (8, 0, 0), (17, 0, 4))
ENERGY_STEPS = (128, 256)
# 双線形求積の照合: 減衰率差 × t と、主要モードの減衰 × t の上限
BILINEAR_SPREAD = 20.0
BILINEAR_MAX_DECAY = 8.0
# slab 不変性は3次元格子で r=2 の構成を T まで解いて確かめる
SLAB_CHECK_SHAPE = (64, 64, 64)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def as_row(self) -> dict:
        return {
            Col.CHECK: self.name,
            Col.PASSED: self.passed,
            Col.VALUE: self.value,
            Col.THRESHOLD: self.threshold,
            Col.DETAIL: self.detail,
        }


@dataclass
class VerifyReport:
    checks: list[CheckResult] = field(default_factory=list)
    out_path: Path | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def console_metrics(self) -> list[dict]:
        metrics = [
            {"label": c.name, "value": f"{'ok' if c.passed else 'NG'}  {c.value:.3e} (< {c.threshold:.1e})"}
            for c in self.checks
        ]
        metrics.append({"label": "failures", "value": ", ".join(self.failures()) or "なし"})
        return metrics


@dataclass
class _Context:
    config: ExperimentConfig
    rng: np.random.Generator


def _result(
    name: str,
    value: float,
    threshold: float,
    detail: str = "",
    passed: bool | None = None,
) -> CheckResult:
    ok = (value < threshold) if passed is None else passed
    return CheckResult(name, bool(ok and math.isfinite(value)), float(value), float(threshold), detail)


# =====================================================================
# ヘルパー
# =====================================================================


def _random_wavevector(rng: np.random.Generator, bound: int) -> tuple[int, int, int]:
    while True:
        k = rng.integers(-bound, bound + 1, size=3)
        if np.any(k):
            return tuple(int(x) for x in k)


def _orthogonal_amplitude(rng: np.random.Generator, k: tuple[int, int, int]) -> tuple[float, float, float]:
    """k に直交する整数ベクトル (k·v = 0 が浮動小数でも厳密に成り立つ)."""
    while True:
        e = rng.integers(-2, 3, size=3)
        v = np.cross(np.asarray(k), e)
        if np.any(v):
            return tuple(float(x) for x in v)


def _reference_params(r: int, alpha1: float = 1.0, alpha2: float = 1.0) -> InflationParams:
    return derive_params(alpha1, alpha2, REFERENCE_EPSILON, r)


def _minimal_data(p: InflationParams) -> tuple[SpectralVectorField, SpectralVectorField]:
    n1, n3 = required_grid_size(p)
    return build_initial_data(p, Grid.slab(n1, n3))


def _relative(diff: SpectralVectorField, ref: SpectralVectorField) -> float:
    scale = sup_norm(ref)
    return sup_norm(diff) / scale if scale > 0 else sup_norm(diff)


# =====================================================================
# 平面波と双線形作用素
# =====================================================================


def check_semigroup(ctx: _Context) -> CheckResult:
    grid = Grid.full(20, 20, 20)
    worst = 0.0
    for _ in range(50):
        k = _random_wavevector(ctx.rng, 6)
        wave = PlaneWave(1.0, _orthogonal_amplitude(ctx.rng, k), k)
        alpha = float(ctx.rng.uniform(1.0, 2.0))
        t = float(ctx.rng.uniform(0.0, 1.0))
        f = wave.render(grid)
        got = fractional_semigroup(f, t, alpha)
        want = diffuse(wave, t, alpha).render(grid)
        worst = max(worst, float(np.max(np.abs(got.coeffs - want.coeffs))) / f.scale())
    return _result("semigroup_plane_wave", worst, 1e-13, "50 組の (k, α∈[1,2], t∈[0,1])")


def _stiff_interval(source: float, outputs: Sequence[float]) -> float | None:
    """減衰率差 × t が BILINEAR_SPREAD になる t. 主要モードが減衰しすぎる組は None."""
    spread = max(abs(source - o) for o in outputs)
    if spread == 0.0:
        return None
    t = BILINEAR_SPREAD / spread
    if min(min(source, o) for o in outputs) * t > BILINEAR_MAX_DECAY:
        return None
    return t


def check_bilinear_closed_form(ctx: _Context) -> CheckResult:
    grid = Grid.full(20, 20, 20)
    n_quad = ctx.config.n_quad
    worst, count = 0.0, 0
    while count < 20:
        # k2 = k1 + δ: 差モードは遅く和モードは速く減衰する
        k1 = _random_wavevector(ctx.rng, 2)
        k2 = tuple(int(a + d) for a, d in zip(k1, _random_wavevector(ctx.rng, 1)))
        if not any(k2):
            continue
        w1 = PlaneWave(1.0, _orthogonal_amplitude(ctx.rng, k1), k1)
        w2 = PlaneWave(1.0, _orthogonal_amplitude(ctx.rng, k2), k2)
        if float(np.dot(k2, w1.amplitude)) == 0.0:
            continue
        alpha = (1.0, 1.5)[count % 2]
        # 出力モードの有無は t に依らない
        outputs = [w.rate(alpha) for w in interact_diffused(w1, w2, alpha, 1.0)]
        if not outputs:
            continue
        t = _stiff_interval(w1.rate(alpha) + w2.rate(alpha), outputs)
        if t is None:
            continue
        closed = interact_diffused(w1, w2, alpha, t)
        numeric = bilinear_numeric(
            diffused_generator(w1.render(grid), alpha),
            diffused_generator(w2.render(grid), alpha),
            t,
            alpha,
            n_quad,
        )
        rendered = closed.render(grid)
        worst = max(worst, _relative(numeric - rendered, rendered))
        count += 1
    return _result("bilinear_closed_form", worst, Tol.QUADRATURE, f"20 組, n_quad={n_quad}")


def check_u1_vanishes(ctx: _Context) -> CheckResult:
    n_quad = ctx.config.n_quad
    worst = 0.0
    leftovers = 0
    for alpha1, alpha2 in ((1.0, 1.0), (1.2, 1.5)):
        for r in (1, 2, 4):
            p = _reference_params(r, alpha1, alpha2)
            u0, b0 = _minimal_data(p)
            scale = max(sup_norm(u0), sup_norm(b0))
            for t in (p.T / 4, p.T / 2, p.T):
                leftovers += len(u1_closed_form(p, t))
                uu = bilinear_numeric(
                    diffused_generator(u0, alpha1), diffused_generator(u0, alpha1), t, alpha1, n_quad
                )
                bb = bilinear_numeric(
                    diffused_generator(b0, alpha2), diffused_generator(b0, alpha2), t, alpha1, n_quad
                )
                worst = max(worst, sup_norm(uu - bb) / scale)
    return _result(
        "u1_vanishes",
        worst,
        1e-10,
        f"閉形式の残り項数={leftovers}",
        passed=worst < 1e-10 and leftovers == 0,
    )


def check_b1_decomposition(ctx: _Context) -> CheckResult:
    p = _reference_params(2)
    u0, b0 = _minimal_data(p)
    t = p.T / 2
    alpha = p.alpha2
    numeric = bilinear_numeric(
        diffused_generator(u0, alpha), diffused_generator(b0, alpha), t, alpha, ctx.config.n_quad
    )
    closed = b1_closed_form(p, t).render(u0.grid)
    return _result("b1_decomposition", _relative(numeric - closed, closed), 1e-7, f"r=2, t=T/2={t:.4g}")


def check_b1_structure(ctx: _Context) -> CheckResult:
    p = _reference_params(4)
    t = p.T / 2
    decomposition = b1_closed_form(p, t)
    n1, n3 = required_grid_size(p)
    rendered = decomposition.render(Grid.slab(n1, n3))
    on_eta = all(w.wavevector == p.eta and w.amplitude == p.v_prime for w in decomposition.b10)
    off_eta = all(w.wavevector != p.eta for w in decomposition.b11 + decomposition.b12)
    coefficient = decomposition.b10_coefficient
    mismatch = abs(coefficient - b10_amplitude(p, t)) / abs(coefficient)
    return _result(
        "b1_structure",
        max(mismatch, divergence_max(rendered)),
        1e-12,
        f"b10 係数={coefficient:.6g}",
        passed=on_eta and off_eta and coefficient < 0 and mismatch < 1e-12
        and divergence_max(rendered) < 1e-12,
    )


def check_transport_split(ctx: _Context) -> CheckResult:
    p = _reference_params(2)
    u0, b0 = _minimal_data(p)
    t = p.T / 2
    direct = advect(fractional_semigroup(u0, t, p.alpha2), fractional_semigroup(b0, t, p.alpha2))
    split = transport_split(p, t).total().render(u0.grid)
    return _result("transport_split", _relative(direct - split, direct), 1e-12, "E0+E1+E2 = (Su0·∇)Sb0")


def check_singular_kernel(ctx: _Context) -> CheckResult:
    worst = 0.0
    for a, b in ((0.25, 0.5), (0.5, 0.5), (0.75, 0.1)):
        for t in (0.5, 2.0):
            closed, quad = singular_kernel_integral(a, b, t)
            worst = max(worst, abs(closed - quad) / closed)
    return _result("singular_kernel", worst, 1e-8, "ベータ関数 vs 重み付き求積")


# =====================================================================
# 構成データ
# =====================================================================


def check_wave_ladder(ctx: _Context) -> CheckResult:
    base = _reference_params(4).model_copy(update={"K": 4})
    doubled = _reference_params(8).model_copy(update={"K": 4})
    t = 4.0 ** (-2 * base.alpha2)
    first = wave_ladder_report(base, theta=1.0, gamma_exp=2.0, t=t)
    second = wave_ladder_report(doubled, theta=1.0, gamma_exp=2.0, t=t)
    drift = abs(second.decay_sum_constant - first.decay_sum_constant) / first.decay_sum_constant
    ok = first.identities_hold and second.identities_hold
    ok = ok and first.ratios_in_range and second.ratios_in_range
    return _result(
        "wave_ladder",
        drift,
        1e-6,
        f"比の最大={max(second.partial_sum_ratios):.6g} (上限 {second.ratio_upper:g})",
        passed=ok and drift < 1e-6,
    )


def check_besov_plane_wave(ctx: _Context) -> CheckResult:
    grid = Grid.slab(64, 16)
    worst = 0.0
    for k in BESOV_KAPPAS:
        wave = PlaneWave(1.0, (0.0, 1.0, 0.0), k)
        f = wave.render(grid)
        kappa = math.sqrt(wave.k_squared)
        for s in (0.5, 1.0, 2.0):
            for alpha in (1.0, 1.5):
                norm = caloric_besov_norm(f, BesovSpec.for_field(f, s, alpha))
                exact = plane_wave_besov_exact(kappa, s, alpha)
                worst = max(worst, abs(norm.value - exact) / exact)
    return _result("besov_plane_wave", worst, 0.01, "κ ∈ {1,2,4,8,√305}")


def check_feasibility_ledger(ctx: _Context) -> CheckResult:
    problems: list[str] = []
    p = derive_params(1.0, 1.0, REFERENCE_EPSILON, 16)
    if abs(p.theta1 - 1.0) > 1e-14 or abs(p.theta2 - 1.0) > 1e-14:
        problems.append(f"θ=({p.theta1:g}, {p.theta2:g})")
    report = check_feasibility(p)
    if not report.overall:
        problems.append(f"失敗: {report.failures()}")
    try:
        derive_params(1.0, 1.0, REFERENCE_EPSILON, 16, theta1_opt=3.0)
        problems.append("θ1=3 が通過")
    except InfeasibleParamsError as exc:
        if "theta1_range" not in exc.names:
            problems.append(f"θ1=3 の違反名={exc.names}")
    low = check_feasibility(p.model_copy(update={"gamma": 0.3})).entry("gamma_lower_alpha1")
    if low.passed or abs(low.margin + 0.1) > 1e-12:
        problems.append(f"γ=0.3 の margin={low.margin:g}")
    return _result("feasibility_ledger", float(len(problems)), 1.0, "; ".join(problems) or "θ1=θ2=1")


def check_config_feasibility(ctx: _Context) -> CheckResult:
    config = ctx.config
    try:
        p = config.params_for(config.r)
    except InfeasibleParamsError as exc:
        return _result("config_feasibility", math.inf, 1.0, f"実行不能: {', '.join(exc.names)}", passed=False)
    report = check_feasibility(p)
    return _result(
        "config_feasibility",
        float(len(report.failures())),
        1.0,
        f"r={p.r} K={p.K} T={p.T:.4g}",
    )


# =====================================================================
# 時間積分
# =====================================================================


def check_cross_cancellation(ctx: _Context) -> CheckResult:
    grid = Grid.full(16, 16, 16)
    u = random_solenoidal(grid, ctx.rng)
    b = random_solenoidal(grid, ctx.rng)
    lorentz = inner_product(advect(b, b), u)
    stretching = inner_product(advect(b, u), b)
    transport = inner_product(advect(u, b), b)
    value = max(abs(lorentz + stretching), abs(transport)) / (1.0 + abs(lorentz))
    return _result("cross_cancellation", value, 1e-11, f"<(b·∇)b, u>={lorentz:.6g}")


def check_linear_exactness(ctx: _Context) -> CheckResult:
    p = _reference_params(2)
    u0, b0 = _minimal_data(p)
    settings = SolverSettings(nonlinear=False)
    final = march(SolverState(0.0, u0, b0), p.T, p.alpha1, p.alpha2, settings, n_steps=8)
    du = final.u - fractional_semigroup(u0, p.T, p.alpha1)
    db = final.b - fractional_semigroup(b0, p.T, p.alpha2)
    value = max(_relative(du, u0), _relative(db, b0))
    return _result("linear_semigroup", value, 1e-13, "非線形項なしの8ステップ")


def check_energy_order(ctx: _Context) -> CheckResult:
    p = _reference_params(2)
    u0, b0 = _minimal_data(p)
    errors = []
    for n_steps in ENERGY_STEPS:
        trajectory = simulate(u0, b0, p, n_steps=n_steps, s_list=(), keep_states=False)
        errors.append(float(np.sum(np.abs(energy_audit(trajectory)["residual"]))))
    order = math.log2(errors[0] / errors[1]) if errors[1] > 0 else math.inf
    return _result(
        "energy_audit_order",
        order,
        1.5,
        f"残差和 {errors[0]:.3e} -> {errors[1]:.3e}",
        passed=order >= 1.5,
    )


def check_slab_invariance(ctx: _Context) -> CheckResult:
    p = _reference_params(2)
    grid = Grid.full(*SLAB_CHECK_SHAPE)
    u0, b0 = build_initial_data(p, grid)
    worst = {"offslab": 0.0, "divergence": 0.0}

    def observe(state: SolverState, _step: int) -> None:
        worst["offslab"] = max(
            worst["offslab"], max_offslab_coefficient(state.u), max_offslab_coefficient(state.b)
        )
        worst["divergence"] = max(
            worst["divergence"], divergence_max(state.u), divergence_max(state.b)
        )

    march(SolverState(0.0, u0, b0), p.T, p.alpha1, p.alpha2, ctx.config.solver_settings(), observer=observe)
    return _result(
        "slab_invariance",
        worst["offslab"],
        1e-12,
        f"発散の最大={worst['divergence']:.3e}",
        passed=worst["offslab"] < 1e-12 and worst["divergence"] < 1e-10,
    )


def check_scaling_symmetry(ctx: _Context) -> CheckResult:
    grid = Grid.slab(64, 16)
    u0 = SpectralVectorField.from_modes(
        grid,
        [*PlaneWave(0.1, (0.0, 0.0, 1.0), (1, 0, 0)).modes(), *PlaneWave(0.05, (0.0, 0.0, 1.0), (2, 0, 0)).modes()],
    )
    b0 = PlaneWave(0.1, (0.0, 1.0, 0.0), (1, 0, 1)).render(grid)
    value = scaling_symmetry_check(u0, b0, alpha=1.0, lam=2)
    return _result("scaling_symmetry", value, 1e-6, "λ=2, α=1")


# =====================================================================
# 実行
# =====================================================================


CHECKS: dict[str, Callable[[_Context], CheckResult]] = {
    "semigroup_plane_wave": check_semigroup,
    "bilinear_closed_form": check_bilinear_closed_form,
    "u1_vanishes": check_u1_vanishes,
    "b1_decomposition": check_b1_decomposition,
    "b1_structure": check_b1_structure,
    "transport_split": check_transport_split,
    "singular_kernel": check_singular_kernel,
    "wave_ladder": check_wave_ladder,
    "besov_plane_wave": check_besov_plane_wave,
    "feasibility_ledger": check_feasibility_ledger,
    "config_feasibility": check_config_feasibility,
    "cross_cancellation": check_cross_cancellation,
    "linear_semigroup": check_linear_exactness,
    "energy_audit_order": check_energy_order,
    "slab_invariance": check_slab_invariance,
    "scaling_symmetry": check_scaling_symmetry,
}


def run_verify(
    config: ExperimentConfig,
    only: Sequence[str] | None = None,
    write: bool = True,
) -> VerifyReport:
    """検証スイートを実行する. only で対象のチェック名を絞れる."""
    names = list(CHECKS) if only is None else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"未知のチェック: {unknown}")

    ctx = _Context(config=config, rng=np.random.default_rng(config.seed))
    report = VerifyReport()
    for name in names:
        try:
            result = CHECKS[name](ctx)
        except Exception as exc:
            logger.error("チェック %s で例外: %s", name, exc, exc_info=True)
            result = CheckResult(name, False, math.nan, math.nan, f"{type(exc).__name__}: {exc}")
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, "%s: %s value=%.3e threshold=%.1e", name, result.passed, result.value, result.threshold)
        report.checks.append(result)

    if write:
        frame = build_verify_frame([c.as_row() for c in report.checks])
        report.out_path = write_csv(frame, Path(config.out) / OutputFile.VERIFY)
    return report
