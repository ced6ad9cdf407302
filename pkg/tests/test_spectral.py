import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tqg.spectral import (
    Grid,
    NonFiniteFieldError,
    ScalarField,
    SpectralField,
    VectorField,
    dealias,
    derivative_multiplier,
    divergence,
    forward_transform,
    grad_sup_norm,
    gradient,
    inverse_transform,
    perp_gradient,
    sobolev_norm,
    sobolev_norm_hat,
    sup_norm,
)

GRID = Grid(32)


def trig(m1, m2, grid=GRID):
    return ScalarField.from_function(grid, lambda X, Y: np.sin(m1 * X + m2 * Y))


class TestGrid:
    @pytest.mark.parametrize("n", [15, 17, 8, 0, -4])
    def test_rejects_bad_n(self, n):
        with pytest.raises(ValueError, match="even and >= 16"):
            Grid(n)

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            Grid(16, -1.0)

    def test_mode_numbers(self):
        g = Grid(16)
        assert g.mx.ravel().tolist()[:3] == [0, 1, 2]
        assert g.mx.ravel()[8] == -8
        assert g.my.ravel().tolist() == list(range(9))
        assert g.spectral_shape == (16, 9)

    def test_dealias_mask_cut(self):
        g = Grid(48)
        assert g.dealias_mask[16, 16]
        assert not g.dealias_mask[17, 0]
        assert not g.dealias_mask[0, 17]


class TestFields:
    def test_values_are_read_only(self):
        f = ScalarField.zeros(GRID)
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0

    def test_shape_checked(self):
        with pytest.raises(ValueError, match="does not match"):
            ScalarField(GRID, np.zeros((16, 16)))

    def test_mismatched_grids(self):
        with pytest.raises(ValueError):
            ScalarField.zeros(GRID) + ScalarField.zeros(Grid(16))

    def test_nonfinite_rejected_by_transform(self):
        v = np.zeros((32, 32))
        v[3, 4] = np.nan
        with pytest.raises(NonFiniteFieldError):
            forward_transform(ScalarField(GRID, v))

    def test_mean_is_zero_coefficient(self):
        f = ScalarField.from_function(GRID, lambda X, Y: 2.5 + np.cos(X))
        assert forward_transform(f).coeffs[0, 0] == pytest.approx(2.5, abs=1e-15)


class TestTransforms:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_round_trip(self, seed):
        v = np.random.default_rng(seed).standard_normal((32, 32))
        back = inverse_transform(forward_transform(ScalarField(GRID, v))).values
        assert np.max(np.abs(back - v)) <= 1e-13 * max(1.0, np.max(np.abs(v)))

    def test_spectral_field_shape_checked(self):
        with pytest.raises(ValueError):
            SpectralField(GRID, np.zeros((32, 32), complex))


class TestDerivatives:
    def test_gradient_of_single_mode(self):
        g = gradient(trig(3, -2))
        X, Y = GRID.coords
        assert np.allclose(g.x.values, 3 * np.cos(3 * X - 2 * Y), atol=1e-12)
        assert np.allclose(g.y.values, -2 * np.cos(3 * X - 2 * Y), atol=1e-12)

    def test_perp_gradient_sign(self):
        # perp grad of sin(y) is (-cos y, 0)
        u = perp_gradient(ScalarField.from_function(GRID, lambda X, Y: np.sin(Y)))
        X, Y = GRID.coords
        assert np.allclose(u.x.values, -np.cos(Y), atol=1e-13)
        assert np.allclose(u.y.values, 0.0, atol=1e-13)

    def test_odd_derivative_kills_nyquist(self):
        nyq = ScalarField.from_function(GRID, lambda X, Y: np.cos(16 * X))
        assert np.allclose(gradient(nyq).x.values, 0.0, atol=1e-13)
        second = derivative_multiplier(GRID, 0, 2)
        assert second[16, 0] == -(16.0**2)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            derivative_multiplier(GRID, 0, 0)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_divergence_of_perp_gradient_vanishes(self, seed):
        v = np.random.default_rng(seed).standard_normal((32, 32))
        d = divergence(perp_gradient(ScalarField(GRID, v)))
        assert np.max(np.abs(d.values)) <= 1e-11 * np.max(np.abs(v))


class TestDealias:
    def test_removes_high_modes_only(self):
        low = trig(10, 0)
        high = trig(11, 0)
        assert np.allclose(inverse_transform(dealias(forward_transform(low))).values,
                           low.values, atol=1e-13)
        assert np.allclose(inverse_transform(dealias(forward_transform(high))).values,
                           0.0, atol=1e-13)


    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-2, 3))
    def test_projection(self, seed, s):
        f = forward_transform(ScalarField(GRID, np.random.default_rng(seed).standard_normal((32, 32))))
        once = dealias(f)
        assert np.array_equal(dealias(once).coeffs, once.coeffs)
        assert sobolev_norm_hat(GRID, once.coeffs, s) <= sobolev_norm_hat(GRID, f.coeffs, s)


class TestNorms:
    def test_l2_of_sine(self):
        # int_0^{2pi} int_0^{2pi} sin^2 x = 2 pi^2
        assert sobolev_norm(trig(1, 0), 0) == pytest.approx(math.pi * math.sqrt(2), rel=1e-14)

    @pytest.mark.parametrize("s", [-2.0, 1.0, 3.0])
    def test_weighted_single_mode(self, s):
        # |k|^2 = 5 for (1, 2): the norm picks up (1 + 5)^(s/2)
        expected = math.pi * math.sqrt(2) * 6.0 ** (s / 2)
        assert sobolev_norm(trig(1, 2), s) == pytest.approx(expected, rel=1e-13)

    def test_nyquist_column_counted_once(self):
        # sampled, cos(16 y) is (-1)^j: RMS 1, so the L2 norm is exactly L
        f = ScalarField.from_function(GRID, lambda X, Y: np.cos(16 * Y))
        assert sobolev_norm(f, 0) == pytest.approx(2 * math.pi, rel=1e-13)

    def test_index_range(self):
        with pytest.raises(ValueError):
            sobolev_norm(trig(1, 0), 5)

    def test_domain_scaling(self):
        g = Grid(32, 4 * math.pi)
        f = ScalarField.from_function(g, lambda X, Y: np.ones_like(X))
        assert sobolev_norm(f, 2) == pytest.approx(4 * math.pi, rel=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(0, 1))
    def test_monotone_in_index(self, seed, s, ds):
        f = ScalarField(GRID, np.random.default_rng(seed).standard_normal((32, 32)))
        assert sobolev_norm(f, s) <= sobolev_norm(f, s + ds) * (1 + 1e-14)

    def test_sup_and_grad_sup(self):
        f = trig(2, 0) * 3.0
        assert sup_norm(f) == pytest.approx(3.0, rel=1e-12)
        assert grad_sup_norm(f) == pytest.approx(6.0, rel=1e-12)

    def test_vector_field_scaling(self):
        v = VectorField(trig(1, 0), trig(0, 1)) * 2.0
        assert sup_norm(v.x) == pytest.approx(2.0, rel=1e-12)
