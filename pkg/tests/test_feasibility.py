"""構成パラメータの導出と制約判定."""

from __future__ import annotations

import pytest
from pydantic import ValidationError

from src.construction.feasibility import (
    InfeasibleParamsError,
    bootstrap_exponents,
    check_feasibility,
    derive_params,
    gamma_lower_bounds,
    inflation_lower_bound,
    residual_bound,
    smallness_exponents,
    theta_bounds,
)
from src.construction.params import InflationParams, wave_base


class TestDeriveParams:
    def test_reference_values(self):
        p = derive_params(1.0, 1.0, 0.1, 16, theta1_opt=1.0)
        assert p.beta1 == pytest.approx(0.4)
        assert p.beta2 == pytest.approx(0.4)
        assert p.theta2 == pytest.approx(1.0)
        assert p.zeta_exp == pytest.approx(0.3)
        assert p.gamma == pytest.approx(0.5)
        assert p.K == 3
        assert p.T == pytest.approx(0.25)

    def test_default_theta_is_degenerate_midpoint(self, params16):
        assert params16.theta1 == 1.0
        assert params16.theta2 == 1.0

    def test_theta_above_range(self):
        with pytest.raises(InfeasibleParamsError) as info:
            derive_params(1.0, 1.0, 0.1, 4, theta1_opt=3.0)
        assert "theta1_range" in info.value.names

    @pytest.mark.parametrize("eps", [0.0, 1 / 6, 0.2])
    def test_epsilon_range(self, eps):
        with pytest.raises(InfeasibleParamsError) as info:
            derive_params(1.0, 1.0, eps, 4)
        assert info.value.names == ["epsilon_range"]

    def test_unequal_dissipation(self):
        p = derive_params(1.2, 1.5, 0.1, 4)
        assert p.theta1 == pytest.approx(1.8)
        assert p.theta1 + p.theta2 == pytest.approx(3.0, abs=1e-14)

    @pytest.mark.parametrize("r", [1, 2, 3, 4, 6, 8, 16, 32, 64])
    @pytest.mark.parametrize("eps", [0.05, 0.1, 0.15])
    def test_round_trip(self, r, eps):
        p = derive_params(1.0, 1.0, eps, r)
        assert check_feasibility(p).overall
        assert abs(p.theta1 + p.theta2 - 2 * p.alpha2) <= 1e-14

    def test_gamma_lower_bound_is_four_epsilon(self):
        eps = 1e-3
        low1, low2 = gamma_lower_bounds(0.5 - eps, 0.5 - eps, 1.0, 1.0)
        assert low1 == pytest.approx(4 * eps)
        assert low2 == pytest.approx(4 * eps)


class TestCheckFeasibility:
    def test_all_pass(self, params16):
        report = check_feasibility(params16)
        assert report.overall
        assert report.failures() == []
        assert report.failed_groups() == []

    def test_gamma_too_small(self, params16):
        report = check_feasibility(params16.model_copy(update={"gamma": 0.3}))
        entry = report.entry("gamma_lower_alpha1")
        assert not entry.passed
        assert entry.margin == pytest.approx(-0.1, abs=1e-12)
        assert "gamma" in report.failed_groups()

    def test_dissipation_margin_is_zero_and_passes(self, params16):
        entry = check_feasibility(params16).entry("theta2_dissipation")
        assert entry.margin == pytest.approx(0.0, abs=1e-15)
        assert entry.passed

    def test_beta_outside_range(self, params16):
        report = check_feasibility(params16.model_copy(update={"beta1": 0.3}))
        assert "beta1_range" in report.failures()

    def test_advisories_do_not_change_overall(self, params16):
        report = check_feasibility(params16)
        names = {a.name for a in report.advisories}
        assert names == {"smallness_A", "bootstrap_smallness"}
        assert report.overall

    def test_frame_contains_entries_and_advisories(self, params16):
        frame = check_feasibility(params16).to_frame()
        assert set(frame["kind"]) == {"entry", "advisory"}
        assert {"name", "group", "margin", "passed"} <= set(frame.columns)


class TestExponents:
    def test_theta_bounds(self):
        assert theta_bounds(1.0, 1.0) == (2.0, 2.0)

    def test_bootstrap_and_smallness_negative(self, params16):
        assert all(e < 0 for e in bootstrap_exponents(params16))
        assert all(e < 0 for e in smallness_exponents(params16))

    def test_residual_bound(self, params16):
        assert residual_bound(params16, 0.0) == 0.0
        assert residual_bound(params16, params16.T) > 0.0

    def test_lower_bound_window(self, params16):
        scale, _, applicable = inflation_lower_bound(params16, params16.T)
        assert scale == pytest.approx(16**0.2)
        assert applicable
        _, _, early = inflation_lower_bound(params16, 1e-6)
        assert not early


class TestWaveBase:
    def test_ceiling(self):
        assert wave_base(16, 0.3) == 3
        assert wave_base(64, 0.5) == 8

    def test_minimum_two(self):
        assert wave_base(1, 0.3) == 2
        assert wave_base(2, 0.3) == 2

    def test_exact_power_not_bumped(self):
        assert wave_base(9, 0.5) == 3


class TestParamsModel:
    @pytest.mark.parametrize("eps", [1 / 6, 0.2])
    def test_epsilon_upper_bound(self, params16, eps):
        with pytest.raises(ValidationError):
            InflationParams(**{**params16.model_dump(), "epsilon": eps})

    def test_valid_round_trip(self, params16):
        assert InflationParams(**params16.model_dump()) == params16
