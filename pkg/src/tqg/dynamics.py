"""TQG right-hand side and the RK4 stepper.

The buoyancy ``b`` is transported by ``u``; the potential vorticity obeys
``dq/dt + u . grad(q - b) = -u_h . grad b`` with ``u = perp_grad (Laplacian - 1)^{-1}(q - f)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from tqg.helmholtz import helmholtz_symbol
from tqg.spectral import (
    Grid,
    ScalarField,
    VectorField,
    _same_grid,
    derivative_multiplier,
    irfft,
    perp_gradient,
    rfft,
)


class BlowupDetected(RuntimeError):
    """Non-finite values appeared while advancing the state."""

    def __init__(self, t: float, message: str = "non-finite values in state",
                 last_state: "TqgState | None" = None):
        super().__init__(f"blow-up detected at t={t!r}: {message}")
        self.t = t
        self.last_state = last_state
        self.last_record = None


@dataclass(frozen=True)
class TqgState:
    b: ScalarField
    q: ScalarField
    t: float = 0.0

    def __post_init__(self):
        _same_grid(self.b, self.q)
        if self.t < 0:
            raise ValueError(f"t must be >= 0 (got {self.t})")

    @property
    def grid(self) -> Grid:
        return self.b.grid

    def is_finite(self) -> bool:
        return self.b.is_finite() and self.q.is_finite()


def bathymetry_velocity(h: ScalarField) -> VectorField:
    """``u_h = (1/2) perp_grad h``."""
    return 0.5 * perp_gradient(h)


@dataclass(frozen=True, eq=False)
class TqgParams:
    f: ScalarField
    h: ScalarField
    dealias_on: bool = True
    dt: float = 1e-3
    cfl_target: float = 0.5
    u_h: VectorField = field(init=False)

    def __post_init__(self):
        _same_grid(self.f, self.h)
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0 (got {self.dt})")
        if not 0 < self.cfl_target < 1:
            raise ValueError(f"cfl_target must lie in (0, 1) (got {self.cfl_target})")
        object.__setattr__(self, "u_h", bathymetry_velocity(self.h))

    @classmethod
    def quiescent(cls, grid: Grid, **kwargs) -> "TqgParams":
        """Zero Coriolis variation and flat bathymetry."""
        return cls(ScalarField.zeros(grid), ScalarField.zeros(grid), **kwargs)

    @property
    def grid(self) -> Grid:
        return self.f.grid

    @cached_property
    def _ops(self) -> "_SpectralOps":
        return _SpectralOps(self)


class _SpectralOps:
    """Multipliers and static fields reused by every RHS evaluation."""

    def __init__(self, params: TqgParams):
        g = params.grid
        self.n = g.n
        self.mask = g.dealias_mask if params.dealias_on else None
        self.dx = derivative_multiplier(g, 0, 1)
        self.dy = derivative_multiplier(g, 1, 1)
        if self.mask is not None:
            self.dx = np.where(self.mask, self.dx, 0.0)
            self.dy = np.where(self.mask, self.dy, 0.0)
        self.inv_symbol = 1.0 / helmholtz_symbol(g)
        self.f_hat = rfft(params.f.values)
        h_half = 0.5 * rfft(params.h.values)
        self.uhx = irfft(-self.dy * h_half, g.n)
        self.uhy = irfft(self.dx * h_half, g.n)

    def project(self, c: np.ndarray) -> np.ndarray:
        return c if self.mask is None else np.where(self.mask, c, 0.0)

    def velocity(self, q_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        psi_hat = (q_hat - self.f_hat) * self.inv_symbol
        return irfft(-self.dy * psi_hat, self.n), irfft(self.dx * psi_hat, self.n)

    def grad(self, s_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return irfft(self.dx * s_hat, self.n), irfft(self.dy * s_hat, self.n)

    def rhs(self, b_hat: np.ndarray, q_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ux, uy = self.velocity(q_hat)
        bx, by = self.grad(b_hat)
        sx, sy = self.grad(q_hat - b_hat)
        adv_b = ux * bx + uy * by
        adv_q = ux * sx + uy * sy + self.uhx * bx + self.uhy * by
        return -self.project(rfft(adv_b)), -self.project(rfft(adv_q))

    def flux_divergence(self, s: np.ndarray, ux: np.ndarray, uy: np.ndarray) -> np.ndarray:
        """Spectral ``div(s u)`` with the same projection as the advective RHS."""
        s = irfft(self.project(rfft(s)), self.n)
        return self.dx * self.project(rfft(s * ux)) + self.dy * self.project(rfft(s * uy))


def advect(s: ScalarField, u: VectorField, dealias_on: bool = True) -> ScalarField:
    """Pseudo-spectral ``(u . grad) s``.

    With ``dealias_on`` the gradient, the velocity and the product are all
    truncated by the two-thirds rule.
    """
    _same_grid(s, u)
    g = s.grid
    mask = g.dealias_mask if dealias_on else np.ones(g.spectral_shape, bool)

    def trunc(c):
        return np.where(mask, c, 0.0)

    s_hat = trunc(rfft(s.values))
    sx = irfft(derivative_multiplier(g, 0, 1) * s_hat, g.n)
    sy = irfft(derivative_multiplier(g, 1, 1) * s_hat, g.n)
    ux = irfft(trunc(rfft(u.x.values)), g.n)
    uy = irfft(trunc(rfft(u.y.values)), g.n)
    return ScalarField(g, irfft(trunc(rfft(ux * sx + uy * sy)), g.n))


def _require_finite(t: float, *arrays: np.ndarray, state: TqgState | None = None) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise BlowupDetected(t, last_state=state)


def tqg_rhs(state: TqgState, params: TqgParams) -> tuple[ScalarField, ScalarField]:
    """Time derivatives ``(db/dt, dq/dt)``."""
    _same_grid(state.b, params.f)
    ops = params._ops
    db, dq = ops.rhs(rfft(state.b.values), rfft(state.q.values))
    _require_finite(state.t, db, dq, state=state)
    g = state.grid
    return ScalarField(g, irfft(db, g.n)), ScalarField(g, irfft(dq, g.n))


def rk4_step(state: TqgState, params: TqgParams, dt: float | None = None) -> TqgState:
    """Advance by one classical RK4 step of size ``dt`` (default ``params.dt``).

    A negative ``dt`` integrates backwards; the resulting time must stay >= 0.
    """
    dt = params.dt if dt is None else dt
    ops = params._ops
    g = state.grid
    b0, q0 = rfft(state.b.values), rfft(state.q.values)
    k1 = ops.rhs(b0, q0)
    k2 = ops.rhs(b0 + 0.5 * dt * k1[0], q0 + 0.5 * dt * k1[1])
    k3 = ops.rhs(b0 + 0.5 * dt * k2[0], q0 + 0.5 * dt * k2[1])
    k4 = ops.rhs(b0 + dt * k3[0], q0 + dt * k3[1])
    b1 = b0 + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    q1 = q0 + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    b, q = irfft(b1, g.n), irfft(q1, g.n)
    _require_finite(state.t + dt, b, q, state=state)
    return TqgState(ScalarField(g, b), ScalarField(g, q), state.t + dt)


CFL_EPS = 1e-12


def cfl_suggest(state: TqgState, params: TqgParams) -> float:
    """``cfl_target * dx / max(|u|_inf + |u_h|_inf, eps)``; not capped."""
    ux, uy = params._ops.velocity(rfft(state.q.values))
    speed = float(np.max(np.hypot(ux, uy)))
    speed_h = float(np.max(np.hypot(params.u_h.x.values, params.u_h.y.values)))
    return params.cfl_target * state.grid.dx / max(speed + speed_h, CFL_EPS)


def check_cfl(state: TqgState, params: TqgParams, dt: float) -> None:
    limit = cfl_suggest(state, params)
    if abs(dt) > limit:
        warnings.warn(f"dt={dt:g} exceeds CFL suggestion {limit:g} at t={state.t:g}",
                      RuntimeWarning, stacklevel=2)
