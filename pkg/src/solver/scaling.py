"""α1 = α2 = α のときのスケーリング対称性

    u_λ(x, t) = λ^{2α-1} u(λx, λ^{2α} t)

を、粗い格子上の元の解と細かい格子上の拡大データの解で突き合わせる。
"""

from __future__ import annotations

import logging

from src.solver.etd import SolverSettings, SolverState, march
from src.spectral.fields import SpectralVectorField, rescale, sup_norm
from src.spectral.grid import Grid

logger = logging.getLogger(__name__)

DEFAULT_STEPS = 64


def rescale_field(
    f: SpectralVectorField, lam: int, alpha: float, grid: Grid | None = None
) -> SpectralVectorField:
    """λ^{2α-1} f(λx)."""
    return rescale(f, lam, grid) * float(lam) ** (2 * alpha - 1)


def scaling_symmetry_check(
    u0: SpectralVectorField,
    b0: SpectralVectorField,
    alpha: float,
    lam: int,
    t1: float = 0.01,
    n_steps: int = DEFAULT_STEPS,
    settings: SolverSettings | None = None,
) -> float:
    """max(‖Δu‖∞, ‖Δb‖∞) を返す.

    元のデータは grid.coarsened(λ) に載せ替えて t1 まで、拡大データは
    元の格子で t1/λ^{2α} まで、同じステップ数で解く。
    """
    grid = u0.grid
    if lam == 1:
        return 0.0
    coarse = grid.coarsened(lam)
    u_c = rescale(u0, 1, coarse)
    b_c = rescale(b0, 1, coarse)
    u_l = rescale_field(u_c, lam, alpha, grid)
    b_l = rescale_field(b_c, lam, alpha, grid)

    original = march(SolverState(0.0, u_c, b_c), t1, alpha, alpha, settings, n_steps=n_steps)
    scaled = march(
        SolverState(0.0, u_l, b_l), t1 / float(lam) ** (2 * alpha), alpha, alpha, settings, n_steps=n_steps
    )
    du = rescale_field(original.u, lam, alpha, grid) - scaled.u
    db = rescale_field(original.b, lam, alpha, grid) - scaled.b
    discrepancy = max(sup_norm(du), sup_norm(db))
    logger.info("scaling check: λ=%d α=%g 差=%.3e", lam, alpha, discrepancy)
    return discrepancy
