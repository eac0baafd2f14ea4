"""Boundary data on the sphere at infinity and its angular transforms.

Two geometries are supported:

* n = 2: the circle, Fourier modes ell = -L..L with orthonormal basis
  e^{i ell theta} / sqrt(2 pi), trapezoid quadrature on a uniform grid;
* n = 3: zonal (axisymmetric) data on S^2, modes ell = 0..L with basis
  sqrt((2 ell + 1)/(4 pi)) P_ell(cos theta), Gauss-Legendre quadrature in
  cos theta (the azimuthal factor 2 pi is folded into the weights).

Both bases are orthonormal in L^2 of the sphere, so coefficient l^2 norms are
L^2 norms.  The Laplace-Beltrami operator is the negative semi-definite one:
mode ell has eigenvalue -ell(ell + n - 2).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import eval_legendre

from .errors import DomainError, PreconditionError

__all__ = [
    "BoundaryData",
    "AngularGrid",
    "mode_numbers",
    "synth",
    "analyze",
    "laplace_beltrami",
    "laplacian_eigenvalues",
    "hk_weights",
    "hk_norm",
    "l2_inner",
    "random_boundary_data",
]


def mode_numbers(dim_n: int, L: int) -> np.ndarray:
    if dim_n == 2:
        return np.arange(-L, L + 1)
    if dim_n == 3:
        return np.arange(0, L + 1)
    raise DomainError(f"unsupported dimension n={dim_n}")


def laplacian_eigenvalues(dim_n: int, L: int) -> np.ndarray:
    ell = mode_numbers(dim_n, L)
    return -(ell * (ell + dim_n - 2)).astype(float)


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Coefficients of a function on S^{n-1} in the orthonormal mode basis."""

    dim_n: int
    L: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        expected = len(mode_numbers(self.dim_n, self.L))
        if c.shape != (expected,):
            raise DomainError(
                f"expected {expected} coefficients for n={self.dim_n}, L={self.L}; got {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise DomainError("non-finite boundary coefficients")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, dim_n: int, L: int) -> "BoundaryData":
        return cls(dim_n, L, np.zeros(len(mode_numbers(dim_n, L)), complex))

    @classmethod
    def single_mode(cls, dim_n: int, L: int, ell: int, value: complex = 1.0) -> "BoundaryData":
        out = np.zeros(len(mode_numbers(dim_n, L)), complex)
        out[cls._index(dim_n, L, ell)] = value
        return cls(dim_n, L, out)

    @staticmethod
    def _index(dim_n, L, ell):
        idx = ell + L if dim_n == 2 else ell
        if not 0 <= idx < len(mode_numbers(dim_n, L)):
            raise DomainError(f"mode {ell} outside band L={L}")
        return idx

    @property
    def modes(self) -> np.ndarray:
        return mode_numbers(self.dim_n, self.L)

    def coeff(self, ell: int) -> complex:
        return self.coeffs[self._index(self.dim_n, self.L, ell)]

    def with_coeffs(self, coeffs) -> "BoundaryData":
        return BoundaryData(self.dim_n, self.L, coeffs)

    def resized(self, L: int) -> "BoundaryData":
        """Zero-pad or truncate to band limit ``L``."""
        out = BoundaryData.zeros(self.dim_n, L)
        keep = min(L, self.L)
        for ell in mode_numbers(self.dim_n, keep):
            out.coeffs[self._index(self.dim_n, L, ell)] = self.coeff(ell)
        return out

    def __add__(self, other):
        self._compatible(other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._compatible(other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def _compatible(self, other):
        if (self.dim_n, self.L) != (other.dim_n, other.L):
            raise DomainError("boundary data with different (n, L)")

    def to_json(self) -> dict:
        return {
            "dim_n": self.dim_n,
            "L": self.L,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "BoundaryData":
        coeffs = np.array([complex(re, im) for re, im in data["coeffs"]], dtype=complex)
        return cls(int(data["dim_n"]), int(data["L"]), coeffs)


@dataclass(frozen=True)
class AngularGrid:
    """Quadrature nodes on S^{n-1}: angles theta and weights."""

    dim_n: int
    size: int
    theta: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.size < 2:
            raise DomainError("angular grid needs at least 2 nodes")
        if self.dim_n == 2:
            theta = 2.0 * np.pi * np.arange(self.size) / self.size
            weights = np.full(self.size, 2.0 * np.pi / self.size)
        elif self.dim_n == 3:
            x, w = np.polynomial.legendre.leggauss(self.size)
            theta = np.arccos(x[::-1])
            weights = 2.0 * np.pi * w[::-1]
        else:
            raise DomainError(f"unsupported dimension n={self.dim_n}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def for_band(cls, dim_n: int, L: int, factor: float = 1.0) -> "AngularGrid":
        """Smallest grid of at least ``factor * (2L + 2)`` nodes."""
        return cls(dim_n, int(np.ceil(factor * (2 * L + 2))))


@lru_cache(maxsize=64)
def _basis(dim_n: int, L: int, grid: AngularGrid) -> np.ndarray:
    """Basis matrix B[q, m] = Y_m(theta_q)."""
    ell = mode_numbers(dim_n, L)
    if dim_n == 2:
        return np.exp(1j * np.outer(grid.theta, ell)) / np.sqrt(2.0 * np.pi)
    x = np.cos(grid.theta)
    norm = np.sqrt((2 * ell + 1) / (4.0 * np.pi))
    return (eval_legendre(ell[None, :], x[:, None]) * norm).astype(complex)


def _check_grid(dim_n, L, grid):
    if grid.dim_n != dim_n:
        raise PreconditionError("grid dimension differs from data dimension")
    if grid.size < 2 * L + 2:
        raise PreconditionError(f"grid size {grid.size} < 2L+2 = {2 * L + 2}")


def synth(f: BoundaryData, grid: AngularGrid) -> np.ndarray:
    """Point values of the mode expansion at the grid nodes."""
    _check_grid(f.dim_n, f.L, grid)
    return _basis(f.dim_n, f.L, grid) @ f.coeffs


def synth_array(dim_n: int, L: int, coeffs: np.ndarray, grid: AngularGrid) -> np.ndarray:
    """Batched :func:`synth`: ``coeffs`` has modes on axis 0."""
    _check_grid(dim_n, L, grid)
    return np.tensordot(_basis(dim_n, L, grid), coeffs, axes=(1, 0))


def analyze_array(dim_n: int, L: int, values: np.ndarray, grid: AngularGrid) -> np.ndarray:
    """Batched :func:`analyze`: ``values`` has grid nodes on axis 0."""
    _check_grid(dim_n, L, grid)
    b = _basis(dim_n, L, grid)
    return np.tensordot(b.conj() * grid.weights[:, None], values, axes=(0, 0))


def analyze(values, grid: AngularGrid, L: int) -> BoundaryData:
    """Quadrature projection of grid values onto modes up to ``L``."""
    values = np.asarray(values, dtype=complex)
    if values.shape != (grid.size,):
        raise PreconditionError("value array does not match grid size")
    return BoundaryData(grid.dim_n, L, analyze_array(grid.dim_n, L, values, grid))


def laplace_beltrami(f: BoundaryData) -> BoundaryData:
    return f.with_coeffs(laplacian_eigenvalues(f.dim_n, f.L) * f.coeffs)


def hk_weights(dim_n: int, L: int, k: float) -> np.ndarray:
    """Sobolev weights (1 + ell(ell + n - 2))^k per mode."""
    return (1.0 - laplacian_eigenvalues(dim_n, L)) ** k


def hk_norm(f: BoundaryData, k: int) -> float:
    """H^k(S^{n-1}) norm, (sum (1 + ell(ell+n-2))^k |f_ell|^2)^{1/2}."""
    if k < 0 or int(k) != k:
        raise DomainError("k must be a nonnegative integer")
    w = hk_weights(f.dim_n, f.L, k)
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def l2_inner(f: BoundaryData, g: BoundaryData) -> complex:
    """<f, g> = integral of f * conj(g) over the sphere."""
    f._compatible(g)
    return complex(np.sum(f.coeffs * np.conj(g.coeffs)))


def random_boundary_data(dim_n: int, L: int, seed: int, decay: float = 0.25,
                         hk_target: float | None = None, k: int = 2) -> BoundaryData:
    """Seeded random smooth boundary data.

    Generator: ``numpy.random.default_rng(seed)``; coefficient for mode ell is
    (g1 + i g2) * exp(-decay*|ell|) with g1, g2 standard normal, drawn in mode
    order.  With ``hk_target`` the result is rescaled to that H^k norm.
    """
    rng = np.random.default_rng(seed)
    ell = mode_numbers(dim_n, L)
    z = rng.standard_normal(len(ell)) + 1j * rng.standard_normal(len(ell))
    f = BoundaryData(dim_n, L, z * np.exp(-decay * np.abs(ell)))
    if hk_target is not None:
        f = f * (hk_target / hk_norm(f, k))
    return f
