import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from nlscatter.errors import AccuracyError, DomainError, RegimeError
from nlscatter.specfun import (Order, bessel_j, bessel_y, hankel, hankel_asymptotic,
                               poincare_coefficients)


def test_order_from_mode():
    assert Order.from_mode(-3, 2).nu == 3.0
    assert Order.from_mode(2, 3).nu == 2.5
    assert Order.from_mode(2, 3).is_half_integer
    with pytest.raises(DomainError):
        Order.from_mode(-1, 3)
    with pytest.raises(DomainError):
        Order(-2)


def test_half_order_closed_form():
    z = np.linspace(0.5, 30.0, 50)
    assert np.allclose(bessel_j(Order(1), z), np.sqrt(2 / (np.pi * z)) * np.sin(z), rtol=1e-13)
    assert np.allclose(bessel_y(Order(1), z), -np.sqrt(2 / (np.pi * z)) * np.cos(z), rtol=1e-12)
    h = hankel(1, Order(1), z)
    assert np.allclose(h, -1j * np.sqrt(2 / (np.pi * z)) * np.exp(1j * z), rtol=1e-13)


@settings(max_examples=40, deadline=None)
@given(nu=st.floats(0, 40), z=st.floats(0.1, 200))
def test_wronskian(nu, z):
    # J_nu Y_nu' - J_nu' Y_nu = 2/(pi z)
    w = special.jv(nu, z) * special.yvp(nu, z) - special.jvp(nu, z) * special.yv(nu, z)
    j, y = bessel_j(nu, z), bessel_y(nu, z)
    assert j == special.jv(nu, z) and y == special.yv(nu, z)
    assert abs(w * np.pi * z / 2 - 1) < 1e-8 * max(1.0, abs(y) ** 2)


def test_hankel_kinds_conjugate():
    z = np.linspace(1, 50, 20)
    assert np.allclose(hankel(2, 2.3, z), np.conj(hankel(1, 2.3, z)))
    with pytest.raises(DomainError):
        hankel(3, 1.0, 1.0)


def test_range_guards():
    with pytest.raises(DomainError):
        bessel_j(1.0, 0.0)
    with pytest.raises(AccuracyError):
        bessel_j(1.0, 2e4)
    with pytest.raises(AccuracyError):
        bessel_j(300.0, 1.0)


def test_poincare_coefficients_direct():
    nu = 1.3
    mu = 4 * nu**2
    assert np.allclose(poincare_coefficients(nu, 3),
                       [1.0, (mu - 1) / 8, (mu - 1) * (mu - 9) / 128])


def test_asymptotic_exact_for_half_integer():
    z = np.linspace(0.3, 5.0, 30)
    for two_nu in (1, 3, 7):
        o = Order(two_nu)
        approx = hankel_asymptotic(1, o, z, terms=two_nu // 2 + 2)
        assert np.allclose(approx, hankel(1, o, z), rtol=1e-12)


def test_asymptotic_regime_and_accuracy():
    with pytest.raises(RegimeError):
        hankel_asymptotic(1, 4.2, 5.0, terms=4)
    z = np.array([200.0, 400.0])
    for kind in (1, 2):
        err = np.abs(hankel_asymptotic(kind, 2.2, z, terms=6) / hankel(kind, 2.2, z) - 1)
        assert np.all(err < 1e-11)
