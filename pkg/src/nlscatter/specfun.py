"""Bessel and Hankel functions of integer and half-integer order.

Direct evaluation is delegated to :mod:`scipy.special` (AMOS routines); the
large-argument Poincare series for the Hankel functions is implemented here
and serves as an independent check on the direct route.

Orders are carried as :class:`Order` (``2*nu`` stored as an integer) so that
half-integer orders arising in odd dimension are exact.  Plain floats are
accepted wherever an order is expected, for general real orders such as the
shifted orders produced by an inverse-square potential.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy import special

from .errors import AccuracyError, DomainError, RegimeError

__all__ = [
    "Order",
    "order_value",
    "bessel_j",
    "bessel_y",
    "hankel",
    "hankel_asymptotic",
    "poincare_coefficients",
    "NU_MAX",
    "Z_MAX",
]

NU_MAX = 200.0
Z_MAX = 1.0e4


@dataclass(frozen=True, order=True)
class Order:
    """Bessel order nu stored as the integer ``two_nu = 2*nu``."""

    two_nu: int

    def __post_init__(self):
        if not isinstance(self.two_nu, (int, np.integer)):
            raise TypeError("two_nu must be an integer")
        if self.two_nu < 0:
            raise DomainError(f"negative order 2nu={self.two_nu}")

    @property
    def nu(self) -> float:
        return self.two_nu / 2.0

    @property
    def is_half_integer(self) -> bool:
        return self.two_nu % 2 == 1

    @classmethod
    def from_mode(cls, ell: int, dim_n: int) -> "Order":
        """Order of the free radial solution for angular mode ``ell``.

        n=2 uses Fourier modes (nu = |ell|); n=3 uses zonal Legendre modes
        (nu = ell + 1/2).
        """
        if dim_n == 2:
            return cls(2 * abs(int(ell)))
        if dim_n == 3:
            if ell < 0:
                raise DomainError("zonal modes have ell >= 0")
            return cls(2 * int(ell) + 1)
        raise DomainError(f"unsupported dimension n={dim_n}")

    @classmethod
    def of(cls, nu: float) -> "Order":
        two_nu = 2.0 * float(nu)
        if two_nu != round(two_nu):
            raise DomainError(f"order {nu} is not integer or half-integer")
        return cls(int(round(two_nu)))

    def __float__(self):
        return self.nu


def order_value(nu) -> float:
    """Float value of an :class:`Order` or a real number."""
    if isinstance(nu, Order):
        return nu.nu
    nu = float(nu)
    if nu < 0:
        raise DomainError(f"negative order {nu}")
    return nu


def _check(nu: float, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise DomainError("argument must be positive")
    if nu > NU_MAX or np.any(z > Z_MAX):
        raise AccuracyError(
            f"(nu={nu}, z<= {z.max():.3g}) outside validated range nu<={NU_MAX}, z<={Z_MAX}"
        )
    return z


def _scalar(x, z_in):
    return x.item() if np.ndim(z_in) == 0 else x


def bessel_j(nu, z):
    """J_nu(z) for z > 0."""
    v = order_value(nu)
    z_arr = _check(v, z)
    return _scalar(special.jv(v, z_arr), z)


def bessel_y(nu, z):
    """Y_nu(z) for z > 0."""
    v = order_value(nu)
    z_arr = _check(v, z)
    return _scalar(special.yv(v, z_arr), z)


def hankel(kind: int, nu, z):
    """Hankel function H^(1) = J + iY (kind 1) or H^(2) = J - iY (kind 2)."""
    v = order_value(nu)
    z_arr = _check(v, z)
    if kind == 1:
        out = special.hankel1(v, z_arr)
    elif kind == 2:
        out = special.hankel2(v, z_arr)
    else:
        raise DomainError(f"Hankel kind must be 1 or 2, got {kind}")
    return _scalar(out, z)


def poincare_coefficients(nu, terms: int) -> np.ndarray:
    """Coefficients a_k(nu), k < terms, of the large-argument Hankel series.

    a_k(nu) = prod_{m=1..k} (4 nu^2 - (2m-1)^2) / (k! 8^k).
    """
    v = order_value(nu)
    mu = 4.0 * v * v
    a = np.empty(terms)
    prod = 1.0
    for k in range(terms):
        if k > 0:
            prod *= mu - (2 * k - 1) ** 2
        a[k] = prod / (factorial(k) * 8.0**k)
    return a


def hankel_asymptotic(kind: int, nu, z, terms: int, check_regime: bool = True):
    """Truncated Poincare expansion of H^(kind)_nu(z).

    H^(1)_nu(z) ~ sqrt(2/(pi z)) e^{i(z - nu pi/2 - pi/4)} sum_k i^k a_k(nu) z^{-k},
    and H^(2) is the complex conjugate for real arguments.  The series
    terminates for half-integer orders, so it is exact there once ``terms``
    exceeds nu + 1/2.
    """
    if kind not in (1, 2):
        raise DomainError(f"Hankel kind must be 1 or 2, got {kind}")
    v = order_value(nu)
    z_arr = np.asarray(z, dtype=float)
    if np.any(~(z_arr > 0)):
        raise DomainError("argument must be positive")
    if check_regime and np.any(z_arr < max(10.0, 2.0 * v * v)):
        exact = isinstance(nu, Order) and nu.is_half_integer and terms > v
        if not exact:
            raise RegimeError(f"z below max(10, 2nu^2) for nu={v}")
    sgn = 1.0 if kind == 1 else -1.0
    a = poincare_coefficients(v, terms)
    series = np.zeros_like(z_arr, dtype=complex)
    # Horner in w = (sgn i)/z
    w = sgn * 1j / z_arr
    for coeff in a[::-1]:
        series = series * w + coeff
    phase = z_arr - v * np.pi / 2.0 - np.pi / 4.0
    out = np.sqrt(2.0 / (np.pi * z_arr)) * np.exp(sgn * 1j * phase) * series
    return _scalar(out, z)
