"""Initial conditions and static input fields."""

from __future__ import annotations

import cmath
import math

import numpy as np

from tqg.dynamics import TqgState
from tqg.rng import Xoshiro256StarStar
from tqg.spectral import Grid, ScalarField, irfft


def shear_state(grid: Grid, amplitude: float = 1.0) -> TqgState:
    """``b0 = A sin(y)``, ``q0 = A sin(y) cos(x)`` (lowest box mode when ``L != 2 pi``)."""
    k = 2 * np.pi / grid.length
    b = ScalarField.from_function(grid, lambda X, Y: amplitude * np.sin(k * Y))
    q = ScalarField.from_function(grid, lambda X, Y: amplitude * np.sin(k * Y) * np.cos(k * X))
    return TqgState(b, q, 0.0)


def random_bandlimited(grid: Grid, rng: Xoshiro256StarStar, slope: float = -3.0,
                       kmax: int | None = None, amplitude: float = 1.0) -> ScalarField:
    """Random-phase field with shell energy ``E(|m|) ~ |m|^slope`` for ``0 < |m| <= kmax``.

    Modes are visited in a fixed order (``my`` ascending, then ``mx`` ascending
    over the upper half plane) and each draws one uniform phase, so the field
    depends only on the generator stream. The result has zero mean and RMS
    equal to ``amplitude``.
    """
    n = grid.n
    kmax = n // 8 if kmax is None else kmax
    if not 1 <= kmax < n // 2:
        raise ValueError(f"kmax must lie in [1, {n // 2 - 1}] (got {kmax})")
    coeffs = np.zeros(grid.spectral_shape, dtype=complex)
    for my in range(kmax + 1):
        for mx in range(-kmax, kmax + 1):
            if (my == 0 and mx <= 0) or mx * mx + my * my > kmax * kmax:
                continue
            mag = math.hypot(mx, my) ** (0.5 * (slope - 1.0))
            c = mag * cmath.exp(2j * math.pi * rng.uniform())
            coeffs[mx % n, my] = c
            if my == 0:
                coeffs[(-mx) % n, 0] = np.conj(c)
    values = irfft(coeffs, n)
    rms = float(np.sqrt(np.mean(values**2)))
    return ScalarField(grid, values * (amplitude / rms))


def random_state(grid: Grid, seed: int, slope: float = -3.0, kmax: int | None = None,
                 amplitude: float = 1.0) -> TqgState:
    rng = Xoshiro256StarStar(seed)
    b = random_bandlimited(grid, rng, slope, kmax, amplitude)
    q = random_bandlimited(grid, rng, slope, kmax, amplitude)
    return TqgState(b, q, 0.0)


def single_mode(grid: Grid, kx: int, ky: int, amplitude: float, phase: float) -> ScalarField:
    """``A cos(kx x' + ky y' + phase)`` with ``x' = 2 pi x / L``."""
    k = 2 * np.pi / grid.length
    return ScalarField.from_function(
        grid, lambda X, Y: amplitude * np.cos(k * (kx * X + ky * Y) + phase)
    )
