"""第1反復の閉形式."""

from __future__ import annotations

import pytest

from src.analytics.first_iteration import (
    b10_amplitude,
    b1_bounds,
    b1_closed_form,
    transport_split,
    u1_closed_form,
)
from src.analytics.plane_waves import bilinear_numeric, diffused_generator
from src.construction.feasibility import InfeasibleParamsError, derive_params
from src.spectral.fields import advect, divergence_max, fractional_semigroup, sup_norm


class TestB1ClosedForm:
    def test_zero_time(self, params2):
        d = b1_closed_form(params2, 0.0)
        assert len(d.total()) == 0

    def test_negative_time(self, params2):
        with pytest.raises(ValueError):
            b1_closed_form(params2, -0.1)

    def test_infeasible_params(self, params2):
        with pytest.raises(InfeasibleParamsError):
            b1_closed_form(params2.model_copy(update={"gamma": 0.3}), 0.1)

    def test_structure(self, params16):
        t = params16.T / 2
        d = b1_closed_form(params16, t)
        assert len(d.b10) == 1
        (eta_wave,) = list(d.b10)
        assert eta_wave.wavevector == (0, 0, 1)
        assert eta_wave.amplitude == (0.0, 1.0, 0.0)
        assert all(w.wavevector != (0, 0, 1) for w in d.b11 + d.b12)
        assert d.b10_coefficient < 0
        assert d.b10_coefficient == pytest.approx(b10_amplitude(params16, t), rel=1e-12)

    def test_matches_quadrature(self, params2, data2):
        u0, b0 = data2
        t = params2.T / 2
        numeric = bilinear_numeric(
            diffused_generator(u0, 1.0), diffused_generator(b0, 1.0), t, 1.0, 32
        )
        closed = b1_closed_form(params2, t).render(u0.grid)
        assert sup_norm(numeric - closed) / sup_norm(closed) < 1e-7
        assert divergence_max(closed) < 1e-12


class TestU1:
    @pytest.mark.parametrize("alphas", [(1.0, 1.0), (1.2, 1.5)])
    @pytest.mark.parametrize("r", [1, 2, 4])
    def test_vanishes(self, alphas, r):
        p = derive_params(*alphas, 0.1, r)
        assert len(u1_closed_form(p, p.T / 2)) == 0


class TestTransportSplit:
    def test_sums_to_direct_product(self, params2, data2):
        u0, b0 = data2
        t = params2.T / 2
        direct = advect(fractional_semigroup(u0, t, 1.0), fractional_semigroup(b0, t, 1.0))
        split = transport_split(params2, t)
        assert sup_norm(direct - split.total().render(u0.grid)) / sup_norm(direct) < 1e-12
        assert [w.wavevector for w in split.e0] == [(0, 0, 1)]


class TestBounds:
    def test_single_wave_scales(self):
        p = derive_params(1.0, 1.0, 0.1, 1)
        bounds = b1_bounds(p, 0.5)
        assert bounds.lower_applicable
        assert bounds.b10_lower == pytest.approx(1.0)
        assert bounds.b10_upper == pytest.approx(1.0)
        assert bounds.b11_b12_upper == pytest.approx(1.0)

    def test_rest_scale_is_time_free(self, params16):
        bounds = b1_bounds(params16, params16.T / 3)
        assert bounds.b11_b12_upper == pytest.approx(16 ** (-0.8))

    def test_lower_bound_outside_window(self, params16):
        bounds = b1_bounds(params16, 1e-6)
        assert not bounds.lower_applicable
        assert bounds.b10_lower is None
