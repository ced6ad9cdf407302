import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tqg.helmholtz import (
    C_P1,
    apply_helmholtz,
    invert_helmholtz,
    log_bound_report,
    log_plus,
    master_estimate_ratio,
    velocity_from_streamfunction,
    velocity_from_vorticity,
    velocity_gradient,
    w1inf_norm,
)
from tqg.spectral import Grid, ScalarField, divergence_ratio

GRID = Grid(64)


def mode(m1, m2, amp=1.0):
    return ScalarField.from_function(GRID, lambda X, Y: amp * np.sin(m1 * X + m2 * Y))


def random_field(seed, n=64):
    v = np.random.default_rng(seed).standard_normal((n, n))
    return ScalarField(Grid(n), v)


class TestInversion:
    def test_single_mode(self):
        # (Laplacian - 1) sin(3x + 4y) = -26 sin(3x + 4y)
        psi = invert_helmholtz(mode(3, 4))
        assert np.allclose(psi.values, -mode(3, 4).values / 26, atol=1e-15)

    def test_constant(self):
        psi = invert_helmholtz(ScalarField.from_function(GRID, lambda X, Y: 2.0 + 0 * X))
        assert np.allclose(psi.values, -2.0, atol=1e-14)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_round_trip(self, seed):
        w = random_field(seed)
        back = apply_helmholtz(invert_helmholtz(w))
        assert np.max(np.abs(back.values - w.values)) <= 1e-11 * np.max(np.abs(w.values))

    def test_rejects_nonfinite(self):
        v = np.zeros((64, 64))
        v[0, 0] = np.inf
        with pytest.raises(ValueError):
            invert_helmholtz(ScalarField(GRID, v))


class TestVelocity:
    def test_sine_x(self):
        # psi = -sin(x)/2, u = (0, -cos(x)/2)
        u = velocity_from_vorticity(mode(1, 0))
        X, _ = GRID.coords
        assert np.allclose(u.x.values, 0.0, atol=1e-15)
        assert np.allclose(u.y.values, -0.5 * np.cos(X), atol=1e-15)

    def test_background_subtracted(self):
        q = mode(2, 1)
        assert np.allclose(velocity_from_vorticity(q, q).x.values, 0.0)

    def test_streamfunction_route(self):
        psi = ScalarField.from_function(GRID, lambda X, Y: np.cos(2 * Y))
        u = velocity_from_streamfunction(psi)
        _, Y = GRID.coords
        assert np.allclose(u.x.values, 2 * np.sin(2 * Y), atol=1e-13)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_divergence_free(self, seed):
        assert divergence_ratio(velocity_from_vorticity(random_field(seed))) <= 1e-12

    def test_gradient_layout(self):
        u = velocity_from_vorticity(mode(1, 0))
        grad = velocity_gradient(u)
        X, _ = GRID.coords
        assert grad.shape == (2, 2, 64, 64)
        assert np.allclose(grad[0, 1], 0.5 * np.sin(X), atol=1e-14)
        assert np.allclose(grad[1], 0.0, atol=1e-14)

    def test_w1inf(self):
        assert w1inf_norm(velocity_from_vorticity(mode(1, 0))) == pytest.approx(0.5, rel=1e-12)


class TestMasterEstimate:
    @pytest.mark.parametrize("k", [0, 1, 2])
    @pytest.mark.parametrize("m", [(1, 0), (3, 4), (10, 7)])
    def test_single_mode_closed_form(self, m, k):
        k2 = m[0] ** 2 + m[1] ** 2
        expected = math.sqrt(k2 / (1 + k2))
        assert master_estimate_ratio(mode(*m), k) == pytest.approx(expected, rel=1e-12)

    def test_zero_field(self):
        assert master_estimate_ratio(ScalarField.zeros(GRID), 1) == 0.0

    def test_bad_k(self):
        with pytest.raises(ValueError):
            master_estimate_ratio(mode(1, 0), 3)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([0, 1, 2]))
    def test_bounded_by_one(self, seed, k):
        assert master_estimate_ratio(random_field(seed), k) <= 1 + 1e-12


class TestLogBound:
    def test_log_plus(self):
        assert log_plus(0.5) == 0.0
        assert log_plus(1.0) == 0.0
        assert log_plus(math.e) == pytest.approx(1.0)

    def test_sine_report(self):
        rep = log_bound_report(mode(1, 0))
        w22 = 2 * math.pi * math.sqrt(2)
        assert rep.lhs == pytest.approx(0.5, rel=1e-12)
        assert rep.rhs_raw == pytest.approx(2 + 2 * math.log(w22), rel=1e-12)
        assert rep.ratio == pytest.approx(rep.lhs / rep.rhs_raw)

    def test_zero_field_rejected(self):
        with pytest.raises(ValueError):
            log_bound_report(ScalarField.zeros(GRID))

    def test_calibrated_constant_covers_sine_family(self):
        worst = max(log_bound_report(mode(m, 0)).ratio for m in range(1, 33))
        assert worst <= C_P1
        assert worst > 0.95 * C_P1
