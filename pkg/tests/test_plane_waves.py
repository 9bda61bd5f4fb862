"""平面波の閉形式と双線形作用素の数値積分."""

from __future__ import annotations

import math

import numpy as np
import pytest

from src.analytics.plane_waves import (
    Phase,
    PlaneWave,
    UnsupportedWaveError,
    WaveSum,
    bilinear_bound_ratio,
    bilinear_numeric,
    diffuse,
    diffused_generator,
    duhamel_weight,
    interact_diffused,
    interaction_terms,
    regrouped_b10_weight,
    singular_kernel_integral,
    transport_product,
    zero_generator,
)
from src.spectral.fields import PreconditionError, advect, sup_norm
from src.spectral.grid import Grid, GridError

W1 = PlaneWave(1.0, (0.0, 0.0, 1.0), (4, 0, 0))
W2 = PlaneWave(1.0, (0.0, 1.0, 0.0), (4, 0, 1))


class TestDuhamelWeight:
    def test_resonant(self):
        assert duhamel_weight(1.0, 1.0, 2.0) == pytest.approx(2 * math.exp(-2), abs=1e-12)
        assert duhamel_weight(1.0, 1.0, 2.0) == pytest.approx(0.2706706, abs=1e-7)

    def test_zero_rate(self):
        assert duhamel_weight(2.0, 0.0, 1.0) == pytest.approx(0.4323324, abs=1e-7)

    def test_b10_weight(self):
        assert duhamel_weight(33.0, 1.0, 1.0) == pytest.approx(0.0114962, abs=1e-7)
        assert regrouped_b10_weight(33.0, 1.0) == pytest.approx(duhamel_weight(33.0, 1.0, 1.0), rel=1e-12)

    def test_symmetric(self):
        assert duhamel_weight(5.0, 2.0, 0.3) == pytest.approx(duhamel_weight(2.0, 5.0, 0.3), rel=1e-14)

    def test_near_resonance_is_continuous(self):
        a = 3.0
        assert duhamel_weight(a, a + 1e-7, 0.5) == pytest.approx(duhamel_weight(a, a, 0.5), rel=1e-6)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            duhamel_weight(-1.0, 1.0, 1.0)

    def test_regrouped_requires_a_above_one(self):
        with pytest.raises(ValueError):
            regrouped_b10_weight(1.0, 1.0)


class TestDiffuse:
    def test_factor(self):
        w = PlaneWave(2.0, (0.0, 0.0, 1.0), (2, 0, 0))
        assert diffuse(w, 0.25, 1.0).coefficient == pytest.approx(2 * math.exp(-1.0))

    def test_identity_at_zero(self):
        assert diffuse(W1, 0.0, 1.3) == W1

    def test_negative_time(self):
        with pytest.raises(PreconditionError):
            diffuse(W1, -1.0, 1.0)


class TestInteraction:
    def test_paired_example(self):
        """k1=(4,0,0), k2=(4,0,1): 差モード η=(0,0,1) と和モード (8,0,1)."""
        terms = interaction_terms(W1, W2, 1.0, 0.05)
        assert terms.difference.wavevector == (0, 0, 1)
        assert terms.sum.wavevector == (8, 0, 1)
        assert terms.difference.amplitude == (0.0, 1.0, 0.0)
        assert terms.sum.amplitude == (0.0, 1.0, 0.0)
        assert terms.difference.phase is Phase.SINE
        assert terms.difference.coefficient == pytest.approx(-0.5 * duhamel_weight(33, 1, 0.05))
        assert terms.sum.coefficient == pytest.approx(-0.5 * duhamel_weight(33, 65, 0.05))

    def test_orthogonal_pair_is_empty(self):
        w = PlaneWave(1.0, (0.0, 0.0, 1.0), (2, 0, 0))
        assert len(interact_diffused(w, W1, 1.0, 0.1)) == 0

    def test_zero_time(self):
        assert len(interact_diffused(W1, W2, 1.0, 0.0)) == 0

    def test_sine_not_supported(self):
        sine = PlaneWave(1.0, (0.0, 0.0, 1.0), (4, 0, 0), Phase.SINE)
        with pytest.raises(UnsupportedWaveError):
            interaction_terms(sine, W2, 1.0, 0.1)

    def test_transport_product_matches_grid(self):
        grid = Grid.slab(32, 8)
        direct = advect(W1.render(grid), W2.render(grid))
        closed = transport_product(W1, W2).as_wave_sum().render(grid)
        assert sup_norm(direct - closed) < 1e-12


class TestBilinearNumeric:
    @pytest.mark.parametrize("alpha", [1.0, 1.5])
    def test_matches_closed_form(self, alpha):
        grid = Grid.slab(32, 8)
        t = 0.05 if alpha == 1.0 else 0.01
        numeric = bilinear_numeric(
            diffused_generator(W1.render(grid), alpha),
            diffused_generator(W2.render(grid), alpha),
            t,
            alpha,
            32,
        )
        closed = interact_diffused(W1, W2, alpha, t).render(grid)
        assert sup_norm(numeric - closed) / sup_norm(closed) < 1e-8

    def test_zero_generator(self):
        grid = Grid.slab(32, 8)
        out = bilinear_numeric(zero_generator(grid), diffused_generator(W2.render(grid), 1.0), 0.1, 1.0, 16)
        assert not np.any(out.coeffs)

    def test_zero_time(self):
        grid = Grid.slab(32, 8)
        gen = diffused_generator(W1.render(grid), 1.0)
        assert not np.any(bilinear_numeric(gen, gen, 0.0, 1.0, 8).coeffs)

    def test_invalid_quadrature(self):
        grid = Grid.slab(32, 8)
        with pytest.raises(ValueError):
            bilinear_numeric(zero_generator(grid), zero_generator(grid), 0.1, 1.0, 0)

    def test_low_order_warns(self, caplog):
        grid = Grid.slab(32, 8)
        with caplog.at_level("WARNING"):
            bilinear_numeric(zero_generator(grid), zero_generator(grid), 0.1, 1.0, 4)
        assert "n_quad=4" in caplog.text


class TestBoundRatio:
    def test_two_unit_waves(self):
        grid = Grid.slab(32, 8)
        ratio = bilinear_bound_ratio(
            diffused_generator(W1.render(grid), 1.0),
            diffused_generator(W2.render(grid), 1.0),
            0.1,
            1.0,
            32,
        )
        assert 0.0 < ratio <= 1.0

    @pytest.mark.parametrize("c", [-3.0, 0.25, 7.0])
    def test_invariant_under_scaling(self, c):
        grid = Grid.slab(32, 8)

        def ratio(scale: float) -> float:
            return bilinear_bound_ratio(
                diffused_generator(W1.render(grid) * scale, 1.0),
                diffused_generator(W2.render(grid), 1.0),
                0.1,
                1.0,
                32,
            )

        assert ratio(c) == pytest.approx(ratio(1.0), rel=1e-12)

    def test_zero_input(self):
        grid = Grid.slab(32, 8)
        ratio = bilinear_bound_ratio(
            zero_generator(grid), diffused_generator(W2.render(grid), 1.0), 0.1, 1.0, 16
        )
        assert ratio == 0.0


class TestSingularKernel:
    def test_arcsine(self):
        closed, quad = singular_kernel_integral(0.5, 0.5, 1.0)
        assert closed == pytest.approx(math.pi)
        assert quad == pytest.approx(closed, rel=1e-10)

    @pytest.mark.parametrize("a,b,t", [(0.25, 0.5, 2.0), (0.75, 0.1, 0.5), (0.0, 0.0, 3.0)])
    def test_agreement(self, a, b, t):
        closed, quad = singular_kernel_integral(a, b, t)
        assert quad == pytest.approx(closed, rel=1e-8)

    def test_exponent_range(self):
        with pytest.raises(ValueError):
            singular_kernel_integral(1.0, 0.5, 1.0)


class TestWaveSum:
    @pytest.mark.parametrize("phase", [Phase.COSINE, Phase.SINE])
    def test_single_wave_render(self, phase):
        grid = Grid.slab(32, 8)
        wave = PlaneWave(2.0, (0.0, 1.0, 0.0), (3, 0, 1), phase)
        f = wave.render(grid)
        np.testing.assert_array_equal(f.coeffs, WaveSum.of([wave]).render(grid).coeffs)
        assert sup_norm(f, refine=4) == pytest.approx(2.0, rel=1e-12)

    def test_render_outside_cutoff(self):
        with pytest.raises(GridError):
            PlaneWave(1.0, (0.0, 1.0, 0.0), (11, 0, 0)).render(Grid.slab(32, 8))

    def test_scaled_and_max_wavenumber(self):
        s = WaveSum.of([W1, W2]).scaled(-2.0)
        assert [w.coefficient for w in s] == [-2.0, -2.0]
        assert s.max_wavenumber() == 4
        assert s.wavevectors() == [(4, 0, 0), (4, 0, 1)]
