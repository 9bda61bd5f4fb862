"""ETD2RK 積分・診断量・スケーリング対称性."""

from __future__ import annotations

import math

import numpy as np
import pytest

from src.analytics.besov import BesovSpec, caloric_besov_norm
from src.analytics.plane_waves import PlaneWave
from src.constants import Col
from src.construction.feasibility import derive_params
from src.construction.initial_data import build_initial_data, required_grid_size
from src.solver.diagnostics import (
    TrajectoryDiagnostics,
    energy_audit,
    first_iteration_residuals,
    simulate,
)
from src.solver.etd import (
    BlowUpDetected,
    SolverSettings,
    SolverState,
    cfl_dt,
    march,
    phi_functions,
    rhs_nonlinear,
    step,
)
from src.solver.scaling import scaling_symmetry_check
from src.spectral.fields import (
    PreconditionError,
    SpectralVectorField,
    advect,
    divergence_max,
    fractional_semigroup,
    l2_energy,
    leray_project,
    max_offslab_coefficient,
    random_solenoidal,
    sup_norm,
)
from src.spectral.grid import Grid


class TestPhiFunctions:
    def test_matches_direct_formula(self):
        z = np.array([-1000.0, -5.0, -1.0, -0.1])
        phi1, phi2 = phi_functions(z)
        np.testing.assert_allclose(phi1, np.expm1(z) / z, rtol=1e-10)
        np.testing.assert_allclose(phi2, (np.expm1(z) - z) / z**2, rtol=1e-10)

    def test_limits_at_zero(self):
        phi1, phi2 = phi_functions(np.array([0.0, -1e-12]))
        np.testing.assert_allclose(phi1, 1.0, rtol=1e-10)
        np.testing.assert_allclose(phi2, 0.5, rtol=1e-10)

    def test_reference_value(self):
        phi1, phi2 = phi_functions(np.array([-1.0]))
        assert phi1[0] == pytest.approx(0.6321206, abs=1e-7)
        assert phi2[0] == pytest.approx(math.exp(-1.0), abs=1e-12)


class TestRightHandSide:
    def test_zero_velocity(self, slab_grid, rng):
        b = random_solenoidal(slab_grid, rng)
        du, db = rhs_nonlinear(SpectralVectorField.zeros(slab_grid), b)
        np.testing.assert_allclose(du.coeffs, leray_project(advect(b, b)).coeffs, atol=1e-11)
        assert np.max(np.abs(db.coeffs)) < 1e-14

    def test_requires_solenoidal(self, slab_grid):
        gradient = PlaneWave(1.0, (1.0, 0.0, 0.0), (1, 0, 0)).render(slab_grid)
        with pytest.raises(PreconditionError):
            rhs_nonlinear(gradient, SpectralVectorField.zeros(slab_grid))


class TestMarch:
    def test_linear_part_is_exact(self, params2, data2):
        u0, b0 = data2
        settings = SolverSettings(nonlinear=False)
        final = march(SolverState(0.0, u0, b0), params2.T, 1.0, 1.0, settings, n_steps=8)
        assert final.t == params2.T
        assert sup_norm(final.u - fractional_semigroup(u0, params2.T, 1.0)) < 1e-13 * sup_norm(u0)
        assert sup_norm(final.b - fractional_semigroup(b0, params2.T, 1.0)) < 1e-13 * sup_norm(b0)

    def test_zero_data_stays_zero(self, slab_grid):
        zero = SpectralVectorField.zeros(slab_grid)
        final = march(SolverState(0.0, zero, zero), 1.0, 1.0, 1.0)
        assert final.t == 1.0
        assert not np.any(final.u.coeffs)
        assert not np.any(final.b.coeffs)

    def test_zero_length_interval(self, data2):
        u0, b0 = data2
        start = SolverState(0.5, u0, b0)
        calls = []
        assert march(start, 0.5, 1.0, 1.0, observer=lambda s, n: calls.append(n)) is start
        assert calls == [0]

    def test_observer_sampling(self, data2):
        u0, b0 = data2
        calls = []
        march(
            SolverState(0.0, u0, b0), 0.01, 1.0, 1.0, n_steps=10, sample_every=4,
            observer=lambda s, n: calls.append(n),
        )
        assert calls == [0, 4, 8, 10]

    def test_backwards_rejected(self, data2):
        u0, b0 = data2
        with pytest.raises(PreconditionError):
            march(SolverState(1.0, u0, b0), 0.5, 1.0, 1.0)

    def test_invalid_step_count(self, data2):
        u0, b0 = data2
        with pytest.raises(PreconditionError):
            march(SolverState(0.0, u0, b0), 0.5, 1.0, 1.0, n_steps=0)

    def test_second_order_self_convergence(self, data2):
        """dt を半分にすると dt/8 の参照解との差が約 1/4 になる."""
        u0, b0 = data2
        t_end = 0.02

        def solve(n: int) -> SolverState:
            return march(SolverState(0.0, u0, b0), t_end, 1.0, 1.0, n_steps=n)

        ref = solve(64)

        def error(n: int) -> float:
            final = solve(n)
            return sup_norm(final.u - ref.u) + sup_norm(final.b - ref.b)

        slope = math.log2(error(4) / error(8))
        assert 1.7 <= slope <= 2.3

    def test_nonpositive_dt(self, data2):
        u0, b0 = data2
        with pytest.raises(PreconditionError):
            step(SolverState(0.0, u0, b0), 0.0, 1.0, 1.0)

    def test_stays_solenoidal_and_on_slab(self, params2, data2):
        u0, b0 = data2
        final = march(SolverState(0.0, u0, b0), params2.T, 1.0, 1.0, n_steps=16)
        assert divergence_max(final.u) < 1e-10
        assert divergence_max(final.b) < 1e-10
        assert max_offslab_coefficient(final.b) == 0.0


class TestCfl:
    def test_zero_speed(self, slab_grid):
        zero = SpectralVectorField.zeros(slab_grid)
        state = SolverState(0.0, zero, zero)
        assert cfl_dt(state, SolverSettings()) == math.inf
        assert cfl_dt(state, SolverSettings(dt_max=0.1)) == 0.1

    def test_formula(self, data2):
        u0, b0 = data2
        settings = SolverSettings(cfl=0.4)
        expected = 0.4 / (u0.grid.k_max * (sup_norm(u0) + sup_norm(b0)))
        assert cfl_dt(SolverState(0.0, u0, b0), settings) == pytest.approx(expected)


class TestBlowUp:
    def test_guard_carries_partial_trajectory(self, params2, data2):
        u0, b0 = data2
        with pytest.raises(BlowUpDetected) as info:
            simulate(u0, b0, params2, n_steps=4, settings=SolverSettings(blowup_cap=1e-3), s_list=())
        assert info.value.cap == 1e-3
        assert info.value.trajectory.times == [0.0]


class TestDiagnostics:
    def test_energy_decreases(self, params2, data2):
        u0, b0 = data2
        trajectory = simulate(u0, b0, params2, n_steps=32, sample_every=4, s_list=(), keep_states=False)
        assert trajectory.times[-1] == params2.T
        assert trajectory.energy[-1] < trajectory.energy[0]
        assert trajectory.states == []

    def test_energy_audit_balance(self):
        trajectory = TrajectoryDiagnostics(alpha1=1.0, alpha2=1.0, s_list=())
        trajectory.times = [0.0, 1.0]
        trajectory.energy = [1.0, 0.5]
        trajectory.dissipation = [0.4, 0.6]
        audit = energy_audit(trajectory)
        assert audit["dissipated"].iloc[0] == pytest.approx(0.5)
        assert audit["residual"].iloc[0] == pytest.approx(0.0)

    def test_energy_audit_single_sample(self):
        assert energy_audit(TrajectoryDiagnostics(alpha1=1.0, alpha2=1.0, s_list=())).empty

    def test_record_requires_monotone_time(self, data2):
        u0, b0 = data2
        trajectory = TrajectoryDiagnostics(alpha1=1.0, alpha2=1.0, s_list=())
        trajectory.record(SolverState(0.5, u0, b0))
        with pytest.raises(ValueError):
            trajectory.record(SolverState(0.25, u0, b0))

    def test_besov_series_and_residuals(self, params2, data2):
        u0, b0 = data2
        trajectory = simulate(u0, b0, params2, n_steps=8, sample_every=4, s_list=(1.0,))
        first_iteration_residuals(trajectory, params2)
        frame = trajectory.to_frame()
        assert list(frame[Col.T]) == [0.0, trajectory.times[1], params2.T]
        assert frame[Col.SUP_Y].iloc[0] == 0.0
        assert frame[Col.SUP_Z].iloc[0] == 0.0
        assert frame[Col.besov_b(1.0)].iloc[0] == pytest.approx(
            caloric_besov_norm(b0, BesovSpec.for_field(b0, 1.0, 1.0)).value, rel=0.01
        )
        assert trajectory.inflation_factor(1.0) > 0

    def test_residuals_need_states(self, params2, data2):
        u0, b0 = data2
        trajectory = simulate(u0, b0, params2, n_steps=2, s_list=(), keep_states=False)
        with pytest.raises(ValueError):
            first_iteration_residuals(trajectory, params2)

    def test_inflation_factor_without_samples(self):
        trajectory = TrajectoryDiagnostics(alpha1=1.0, alpha2=1.0, s_list=(1.0,))
        assert math.isnan(trajectory.inflation_factor(1.0))


class TestScaling:
    @staticmethod
    def _data(grid: Grid):
        u0 = PlaneWave(0.1, (0.0, 0.0, 1.0), (1, 0, 0)).render(grid) + PlaneWave(
            0.05, (0.0, 0.0, 1.0), (2, 0, 0)
        ).render(grid)
        b0 = PlaneWave(0.1, (0.0, 1.0, 0.0), (1, 0, 1)).render(grid)
        return u0, b0

    def test_identity_scale(self):
        u0, b0 = self._data(Grid.slab(32, 8))
        assert scaling_symmetry_check(u0, b0, alpha=1.0, lam=1) == 0.0

    def test_doubling(self):
        u0, b0 = self._data(Grid.slab(64, 16))
        assert scaling_symmetry_check(u0, b0, alpha=1.0, lam=2) < 1e-6


SWEEP_R = (2, 3, 4, 6)


@pytest.fixture(scope="class")
def solver_sweep():
    """r ∈ SWEEP_R を最小の slab 格子で T まで解いた軌道と残差表."""
    out = {}
    for r in SWEEP_R:
        p = derive_params(1.0, 1.0, 0.1, r)
        n1, n3 = required_grid_size(p)
        u0, b0 = build_initial_data(p, Grid.slab(n1, n3))
        trajectory = simulate(u0, b0, p, s_list=(1.0,), sample_every=16)
        out[r] = (trajectory, first_iteration_residuals(trajectory, p))
    return out


@pytest.mark.slow
class TestFullSolver:
    def test_cube_keeps_slab_structure(self):
        """64³ で r=2 を T まで: x2 方向のモードは生じず、発散ゼロでエネルギーは減る."""
        p = derive_params(1.0, 1.0, 0.1, 2)
        u0, b0 = build_initial_data(p, Grid.full(64, 64, 64))
        offslab, divergence, energy = [], [], []

        def observe(state: SolverState, _step: int) -> None:
            offslab.append(max(max_offslab_coefficient(state.u), max_offslab_coefficient(state.b)))
            divergence.append(max(divergence_max(state.u), divergence_max(state.b)))
            energy.append(l2_energy(state.u) + l2_energy(state.b))

        march(SolverState(0.0, u0, b0), p.T, 1.0, 1.0, observer=observe)
        assert max(offslab) < 1e-12
        assert max(divergence) < 1e-10
        assert all(later <= earlier for earlier, later in zip(energy, energy[1:]))

    def test_inflation_grows_with_r(self, solver_sweep):
        """‖b(T)‖_{Ḃ^{-1}} と膨張率が r について単調に増える."""
        finals = [traj.besov_values(1.0)[-1] for traj, _ in solver_sweep.values()]
        factors = [traj.inflation_factor(1.0) for traj, _ in solver_sweep.values()]
        assert all(a < b for a, b in zip(finals, finals[1:]))
        assert all(a < b for a, b in zip(factors, factors[1:]))

    def test_residual_ratios_stable_across_r(self, solver_sweep):
        """‖y‖∞, ‖z‖∞ と上界の比の最大値が掃引全体で2倍以内に収まる."""
        for col in (Col.RATIO_Y, Col.RATIO_Z):
            peaks = [float(frame.loc[frame[Col.T] > 0, col].max()) for _, frame in solver_sweep.values()]
            assert min(peaks) > 0
            assert max(peaks) <= 2 * min(peaks), (col, peaks)

    def test_inflation_grows_with_s(self):
        """低周波の b10 が効くので、膨張率は s が大きいほど大きい."""
        p = derive_params(1.0, 1.0, 0.1, 2)
        n1, n3 = required_grid_size(p)
        u0, b0 = build_initial_data(p, Grid.slab(n1, n3))
        s_list = (1.0, 2.0, 3.0, 4.0)
        trajectory = simulate(u0, b0, p, s_list=s_list, keep_states=False, sample_every=10**9)
        factors = [trajectory.inflation_factor(s) for s in s_list]
        assert all(a < b for a, b in zip(factors, factors[1:]))
