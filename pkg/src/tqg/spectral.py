"""
Spectral core for doubly-periodic square grids.

Conventions used throughout the package:

- ``values[i, j]`` is the sample at ``(x_i, y_j) = (i L/n, j L/n)``; axis 0 is x,
  axis 1 is y.
- Coefficients are the real-to-complex half spectrum over the y axis
  (shape ``(n, n//2 + 1)``), scaled by ``1/n**2`` so that the (0, 0)
  coefficient is the spatial mean.
- Continuum norms carry a factor ``L**2``: ``int |f|^2 dx = L**2 sum_k |c_k|^2``
  over the full lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class NonFiniteFieldError(ValueError):
    """Raised when a field contains NaN or Inf samples."""


@dataclass(frozen=True)
class Grid:
    """Square periodic grid ``[0, L)^2`` with ``n`` points per side."""

    n: int
    length: float = 2 * np.pi

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 16 or self.n % 2:
            raise ValueError(f"n must be even and >= 16 (got {self.n!r})")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"length must be > 0 (got {self.length!r})")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def spectral_shape(self) -> tuple[int, int]:
        return (self.n, self.n // 2 + 1)

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Sample coordinates ``(X, Y)``, each of shape (n, n)."""
        x = np.arange(self.n) * self.dx
        X, Y = np.meshgrid(x, x, indexing="ij")
        X.flags.writeable = False
        Y.flags.writeable = False
        return X, Y

    @cached_property
    def mx(self) -> np.ndarray:
        """Integer x mode numbers, shape (n, 1), in ``[-n/2, n/2)``."""
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(int).reshape(-1, 1)

    @cached_property
    def my(self) -> np.ndarray:
        """Integer y mode numbers (half spectrum), shape (1, n/2 + 1)."""
        return np.arange(self.n // 2 + 1).reshape(1, -1)

    @cached_property
    def kx(self) -> np.ndarray:
        return (2 * np.pi / self.length) * self.mx.astype(float)

    @cached_property
    def ky(self) -> np.ndarray:
        return (2 * np.pi / self.length) * self.my.astype(float)

    @cached_property
    def k2(self) -> np.ndarray:
        return self.kx**2 + self.ky**2

    @cached_property
    def multiplicity(self) -> np.ndarray:
        """How many full-lattice modes each half-spectrum entry stands for."""
        w = np.full(self.spectral_shape, 2.0)
        w[:, 0] = 1.0
        w[:, -1] = 1.0
        return w

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        cut = self.n / 3
        return (np.abs(self.mx) <= cut) & (np.abs(self.my) <= cut)

    def nyquist_mask(self, axis: int) -> np.ndarray:
        """Boolean mask of the Nyquist plane ``|m_axis| = n/2``."""
        m = self.mx if axis == 0 else self.my
        return np.broadcast_to(np.abs(m) == self.n // 2, self.spectral_shape)


def _check_finite(values: np.ndarray, what: str = "field") -> None:
    if not np.all(np.isfinite(values)):
        bad = int(np.count_nonzero(~np.isfinite(values)))
        raise NonFiniteFieldError(f"{what} has {bad} non-finite samples")


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"values shape {values.shape} does not match grid n={self.grid.n}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros((grid.n, grid.n)))

    @classmethod
    def from_function(cls, grid: Grid, func) -> "ScalarField":
        X, Y = grid.coords
        return cls(grid, np.broadcast_to(func(X, Y), (grid.n, grid.n)).astype(float))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def __add__(self, other: "ScalarField") -> "ScalarField":
        _same_grid(self, other)
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        _same_grid(self, other)
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, scale: float) -> "ScalarField":
        return ScalarField(self.grid, self.values * scale)

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.spectral_shape:
            raise ValueError(
                f"coeffs shape {self.coeffs.shape} does not match {self.grid.spectral_shape}"
            )

    def full(self) -> np.ndarray:
        """Coefficients on the full ``n x n`` lattice (numpy FFT ordering)."""
        n = self.grid.n
        out = np.empty((n, n), dtype=complex)
        h = self.coeffs.shape[1]
        out[:, :h] = self.coeffs
        # c(-mx, -my) = conj(c(mx, my)) fills the negative-my half
        neg_x = (-np.arange(n)) % n
        for col in range(h, n):
            out[:, col] = np.conj(self.coeffs[neg_x, n - col])
        return out


@dataclass(frozen=True, eq=False)
class VectorField:
    x: ScalarField
    y: ScalarField

    def __post_init__(self):
        _same_grid(self.x, self.y)

    @property
    def grid(self) -> Grid:
        return self.x.grid

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(ScalarField.zeros(grid), ScalarField.zeros(grid))

    def __mul__(self, scale: float) -> "VectorField":
        return VectorField(self.x * scale, self.y * scale)

    __rmul__ = __mul__


def _same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def rfft(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    return np.fft.rfft2(values) / (n * n)


def irfft(coeffs: np.ndarray, n: int) -> np.ndarray:
    return np.fft.irfft2(coeffs * (n * n), s=(n, n))


def forward_transform(f: ScalarField) -> SpectralField:
    _check_finite(f.values)
    return SpectralField(f.grid, rfft(f.values))


def inverse_transform(f: SpectralField) -> ScalarField:
    return ScalarField(f.grid, irfft(f.coeffs, f.grid.n))


def derivative_multiplier(grid: Grid, axis: int, order: int) -> np.ndarray:
    """Fourier multiplier ``(i k_axis)^order`` with the odd-order Nyquist plane zeroed."""
    if order < 1:
        raise ValueError(f"derivative order must be >= 1 (got {order})")
    if axis not in (0, 1):
        raise ValueError(f"axis must be 0 or 1 (got {axis})")
    k = grid.kx if axis == 0 else grid.ky
    mult = np.broadcast_to((1j * k) ** order, grid.spectral_shape).copy()
    if order % 2:
        mult[grid.nyquist_mask(axis)] = 0.0
    return mult


def spectral_derivative(f: SpectralField, axis: int, order: int = 1) -> SpectralField:
    return SpectralField(f.grid, f.coeffs * derivative_multiplier(f.grid, axis, order))


def gradient(f: ScalarField) -> VectorField:
    fh = forward_transform(f)
    return VectorField(
        inverse_transform(spectral_derivative(fh, 0)),
        inverse_transform(spectral_derivative(fh, 1)),
    )


def perp_gradient(f: ScalarField) -> VectorField:
    """``(-d/dy f, d/dx f)``."""
    fh = forward_transform(f)
    return VectorField(
        -inverse_transform(spectral_derivative(fh, 1)),
        inverse_transform(spectral_derivative(fh, 0)),
    )


def divergence(v: VectorField) -> ScalarField:
    g = v.grid
    c = rfft(v.x.values) * derivative_multiplier(g, 0, 1) + rfft(
        v.y.values
    ) * derivative_multiplier(g, 1, 1)
    return ScalarField(g, irfft(c, g.n))


def divergence_ratio(v: VectorField) -> float:
    """``max_k |k . v_hat(k)| / max_k |v_hat(k)|`` (0 for a zero field).

    Uses the same first-derivative multipliers as ``divergence``, so the Nyquist
    planes do not contribute.
    """
    g = v.grid
    ux, uy = rfft(v.x.values), rfft(v.y.values)
    div = derivative_multiplier(g, 0, 1) * ux + derivative_multiplier(g, 1, 1) * uy
    top = np.max(np.abs(div))
    bottom = max(np.max(np.abs(ux)), np.max(np.abs(uy)))
    return float(top / bottom) if bottom > 0 else 0.0


def dealias(f: SpectralField) -> SpectralField:
    """Two-thirds rule: zero every mode with ``|m_x| > n/3`` or ``|m_y| > n/3``."""
    return SpectralField(f.grid, np.where(f.grid.dealias_mask, f.coeffs, 0.0))


def sobolev_norm_hat(grid: Grid, coeffs: np.ndarray, s: float) -> float:
    weight = grid.multiplicity * (1.0 + grid.k2) ** s
    return float(grid.length * np.sqrt(np.sum(weight * np.abs(coeffs) ** 2)))


def sobolev_norm(f: ScalarField, s: float) -> float:
    """Frequency-space norm ``(sum_k (1+|k|^2)^s |f_hat(k)|^2)^(1/2)``.

    Scaled so that ``s = 0`` gives the continuum L2 norm over the box.
    """
    if not -4.0 <= s <= 4.0:
        raise ValueError(f"Sobolev index s must lie in [-4, 4] (got {s})")
    return sobolev_norm_hat(f.grid, forward_transform(f).coeffs, s)


def vector_sobolev_norm(v: VectorField, s: float) -> float:
    return float(np.hypot(sobolev_norm(v.x, s), sobolev_norm(v.y, s)))


def sup_norm(f: ScalarField) -> float:
    _check_finite(f.values)
    return float(np.max(np.abs(f.values)))


def grad_sup_norm(f: ScalarField) -> float:
    """Max over the grid of the Euclidean norm of the spectral gradient."""
    g = gradient(f)
    return float(np.max(np.hypot(g.x.values, g.y.values)))
