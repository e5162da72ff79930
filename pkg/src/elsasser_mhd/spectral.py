"""Fourier representation of periodic vector fields on the cube [0, 2*pi)^3.

Spectral fields are stored on the real-to-complex half lattice produced by
``numpy.fft.rfftn``: array shape ``(3, n, n, n // 2 + 1)``.  The missing half
is implied by Hermitian symmetry; only the ``k_3 = 0`` and ``k_3 = n/2`` planes
carry redundant entries, and those are what :func:`hermitian_residual` checks.

Normalization: ``coeffs(k) = n**-3 * sum_x f(x) exp(-i k.x)``, so coefficient
magnitudes do not depend on resolution.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

__all__ = [
    "Grid",
    "get_grid",
    "SpectralVectorField",
    "PhysicalVectorField",
    "InvalidFieldError",
    "SymmetryError",
    "to_spectral",
    "to_physical",
    "leray_project",
    "fractional_multiplier",
    "dealias_two_thirds",
    "divergence_max",
    "hermitian_residual",
    "ScalarSpectralField",
]

AXES = (1, 2, 3)
DOMAIN = 2.0 * np.pi


class InvalidFieldError(ValueError):
    """Raised for non-finite or malformed field data."""


class SymmetryError(ValueError):
    """Raised when spectral data is not the transform of a real field."""


@dataclass(frozen=True)
class Grid:
    """Cubic periodic lattice with ``n`` points per axis on [0, 2*pi)^3."""

    n: int

    def __post_init__(self):
        n = self.n
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise ValueError(f"grid n must be a power of two >= 8, got {n!r}")

    @property
    def domain(self) -> float:
        return DOMAIN

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n // 2 + 1)

    @property
    def physical_shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def cell_volume(self) -> float:
        return (DOMAIN / self.n) ** 3

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavevectors, shape ``(3, n, n, n//2+1)``, broadcast-ready."""
        n = self.n
        full = np.fft.fftfreq(n, 1.0 / n)
        half = np.fft.rfftfreq(n, 1.0 / n)
        k1, k2, k3 = np.meshgrid(full, full, half, indexing="ij")
        return np.stack([k1, k2, k3])

    @cached_property
    def k_squared(self) -> np.ndarray:
        return np.sum(self.wavenumbers**2, axis=0)

    @cached_property
    def k_abs(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @cached_property
    def half_weights(self) -> np.ndarray:
        """Multiplicity of each stored mode in a sum over the full lattice."""
        w = np.full(self.spectral_shape, 2.0)
        w[..., 0] = 1.0
        w[..., -1] = 1.0
        return w

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        cutoff = self.n / 3.0
        return np.all(np.abs(self.wavenumbers) <= cutoff, axis=0)

    @cached_property
    def nodes(self) -> np.ndarray:
        """Physical lattice coordinates, shape ``(3, n, n, n)``."""
        x = DOMAIN * np.arange(self.n) / self.n
        return np.stack(np.meshgrid(x, x, x, indexing="ij"))

    def index(self, k) -> tuple[tuple[int, int, int], bool]:
        """Storage index of wavevector ``k`` and whether it is the conjugate.

        Returns ``(idx, conj)``; if ``conj`` is true the stored entry holds the
        coefficient of ``-k`` and must be conjugated.
        """
        n = self.n
        k = tuple(int(c) for c in k)
        if any(abs(c) > n // 2 for c in k):
            raise ValueError(f"wavevector {k} outside the lattice for n={n}")
        conj = k[2] < 0
        if conj:
            k = tuple(-c for c in k)
        return (k[0] % n, k[1] % n, k[2]), conj


@lru_cache(maxsize=None)
def get_grid(n: int) -> Grid:
    """Shared grid instance, so cached wavenumber tables are reused."""
    return Grid(int(n))


@dataclass(frozen=True, eq=False)
class SpectralVectorField:
    """Complex Fourier coefficients of a real 3-component field."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (3,) + self.grid.spectral_shape:
            raise InvalidFieldError(
                f"coefficient shape {self.coeffs.shape} does not match grid n={self.grid.n}"
            )

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralVectorField":
        return cls(grid, np.zeros((3,) + grid.spectral_shape, dtype=complex))

    @classmethod
    def from_modes(cls, grid: Grid, modes: dict) -> "SpectralVectorField":
        """Build a field from ``{k: vector}``; the ``-k`` partner is set to the conjugate.

        A mode listed together with its negative must already be consistent.
        """
        out = np.zeros((3,) + grid.spectral_shape, dtype=complex)
        for k, v in modes.items():
            v = np.asarray(v, dtype=complex)
            for kk, vv in ((tuple(k), v), (tuple(-c for c in k), np.conj(v))):
                idx, conj = grid.index(kk)
                out[(slice(None),) + idx] = np.conj(vv) if conj else vv
        return cls(grid, out)

    def mode(self, k) -> np.ndarray:
        """Coefficient vector at wavevector ``k`` of the full lattice."""
        idx, conj = self.grid.index(k)
        c = self.coeffs[(slice(None),) + idx]
        return np.conj(c) if conj else c.copy()

    def __add__(self, other):
        _check_same_grid(self, other)
        return SpectralVectorField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return SpectralVectorField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralVectorField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralVectorField(self.grid, -self.coeffs)

    @property
    def mean(self) -> np.ndarray:
        return self.coeffs[:, 0, 0, 0]


@dataclass(frozen=True, eq=False)
class PhysicalVectorField:
    """Real 3-component field sampled at the lattice nodes ``2*pi*(i, j, l)/n``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (3,) + self.grid.physical_shape:
            raise InvalidFieldError(
                f"value shape {self.values.shape} does not match grid n={self.grid.n}"
            )

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values**2, axis=0))


def _check_same_grid(a, b):
    if a.grid.n != b.grid.n:
        raise ValueError(f"grid mismatch: n={a.grid.n} vs n={b.grid.n}")


def _rfft(values: np.ndarray, n: int) -> np.ndarray:
    return np.fft.rfftn(values, axes=AXES) / n**3


def _irfft(coeffs: np.ndarray, n: int) -> np.ndarray:
    return np.fft.irfftn(coeffs * n**3, s=(n, n, n), axes=AXES)


def to_spectral(f: PhysicalVectorField) -> SpectralVectorField:
    """Forward transform with the ``n**-3`` normalization."""
    if not np.all(np.isfinite(f.values)):
        raise InvalidFieldError("non-finite values in physical field")
    return SpectralVectorField(f.grid, _rfft(np.asarray(f.values, dtype=float), f.grid.n))


def hermitian_residual(g: SpectralVectorField) -> float:
    """Largest violation of ``coeffs(-k) = conj(coeffs(k))`` on the redundant planes."""
    n = g.grid.n
    worst = 0.0
    for plane in (0, n // 2):
        c = g.coeffs[..., plane]
        # index -i mod n along both full axes
        mirrored = np.roll(c[:, ::-1, ::-1], shift=1, axis=(1, 2))
        worst = max(worst, float(np.max(np.abs(c - np.conj(mirrored)))))
    return worst


def to_physical(g: SpectralVectorField, rtol: float = 1e-12) -> PhysicalVectorField:
    """Inverse transform; the imaginary residue implied by asymmetry must be below ``rtol``."""
    scale = float(np.max(np.abs(g.coeffs))) if g.coeffs.size else 0.0
    if scale > 0.0 and hermitian_residual(g) > rtol * scale:
        raise SymmetryError("spectral field violates Hermitian symmetry")
    return PhysicalVectorField(g.grid, _irfft(g.coeffs, g.grid.n))


def leray_project(g: SpectralVectorField) -> SpectralVectorField:
    """Project each mode onto the plane orthogonal to ``k``; the mean mode is left alone."""
    k = g.grid.wavenumbers
    k2 = g.grid.k_squared
    k2_safe = np.where(k2 == 0, 1.0, k2)
    kdotv = np.sum(k * g.coeffs, axis=0)
    return SpectralVectorField(g.grid, g.coeffs - k * (kdotv / k2_safe))


def fractional_multiplier(g: SpectralVectorField, s: float) -> SpectralVectorField:
    """Scale mode ``k`` by ``|k|**s``.  ``s = 0`` is the identity."""
    if s == 0:
        return SpectralVectorField(g.grid, g.coeffs.copy())
    if s < 0 and np.any(g.mean != 0):
        raise ValueError("negative-order multiplier needs a mean-zero field")
    kabs = g.grid.k_abs
    with np.errstate(divide="ignore"):
        factor = np.where(kabs == 0, 0.0, kabs**s)
    return SpectralVectorField(g.grid, g.coeffs * factor)


def dealias_two_thirds(g: SpectralVectorField) -> SpectralVectorField:
    """Zero every mode with some ``|k_i| > n/3``."""
    return SpectralVectorField(g.grid, g.coeffs * g.grid.dealias_mask)


def divergence_max(g: SpectralVectorField) -> float:
    """``max_k |k . coeffs(k)|``; zero iff the field is discretely solenoidal."""
    return float(np.max(np.abs(np.sum(g.grid.wavenumbers * g.coeffs, axis=0))))


@dataclass(frozen=True, eq=False)
class ScalarSpectralField:
    """Half-lattice Fourier coefficients of a real scalar, shape ``(n, n, n//2+1)``."""

    grid: Grid
    coeffs: np.ndarray

    def to_physical(self) -> np.ndarray:
        n = self.grid.n
        return np.fft.irfftn(self.coeffs * n**3, s=(n, n, n), axes=(0, 1, 2))

    def mode(self, k) -> complex:
        idx, conj = self.grid.index(k)
        c = self.coeffs[idx]
        return complex(np.conj(c) if conj else c)
