import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlscatter.errors import DomainError
from nlscatter.hamflow import (PhasePoint, classify, flow, hamiltonian_p, random_sigma_points,
                               vector_field)


def test_vector_field_conserves_p():
    rng = np.random.default_rng(0)
    for s in rng.normal(size=(20, 4)):
        x, y, nu, mu = s
        dx, dy, dnu, dmu = vector_field(0.0, s)
        assert abs(2 * nu * dnu + 2 * mu * dmu) < 1e-14


def test_radial_sets_are_fixed_points():
    for nu in (1.0, -1.0):
        assert np.allclose(vector_field(0.0, [0.0, 0.3, nu, 0.0]), 0.0)
    assert classify(np.array([0.0, 0.0, 1.0, 0.0]), 1.0) == "R+"
    assert classify(np.array([0.0, 0.0, -1.0, 0.0]), 1.0) == "R-"
    assert classify(np.array([2.0, 0.0, 0.0, 0.0]), 1.0) == "escaped"
    assert classify(np.array([0.0, 0.0, 0.0, 1.0]), 1.0) == "undecided"


def test_closed_form_on_boundary():
    # at x=0 with p=0: nu(t) = lam tanh(2 lam t + c)
    lam = 1.5
    pt = PhasePoint(0.0, 0.0, 0.3 * lam, np.sqrt(1 - 0.09) * lam)
    res = flow(pt, lam, T=3.0)
    c = np.arctanh(0.3)
    assert np.allclose(res.states[:, 2], lam * np.tanh(2 * lam * res.times + c), atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), lam=st.floats(0.5, 3.0))
def test_sigma_points_flow_to_radial_sets(seed, lam):
    (pt,) = random_sigma_points(1, lam, seed)
    assert abs(hamiltonian_p(pt, lam)) < 1e-12
    res = flow(pt, lam)
    assert (res.forward_limit, res.backward_limit) == ("R+", "R-")
    assert res.p_drift < 1e-8 and res.nu_monotone


def test_off_characteristic_set_undecided():
    # p != 0: the limits sit at nu = +-sqrt(p + lam^2), not on the radial sets
    res = flow(PhasePoint(0.2, 0.0, 0.5, 0.8), 1.0)
    assert (res.forward_limit, res.backward_limit) == ("undecided", "undecided")
    assert res.states[-1, 2] == pytest.approx(np.sqrt(0.89), abs=1e-8)


def test_escape_event():
    # x(t) = x0 cosh(c) / cosh(2 rho t + c) peaks above 1 when x0 cosh(c) > 1
    rho = 1.0
    res = flow(PhasePoint(0.5, 0.0, -0.99 * rho, np.sqrt(1 - 0.99**2) * rho), 1.0)
    assert res.forward_limit == "escaped"
    assert res.states[-1, 0] == pytest.approx(1.0, abs=1e-9)


def test_guards_and_outputs(tmp_path):
    with pytest.raises(DomainError):
        PhasePoint(-0.1, 0, 0, 0)
    with pytest.raises(DomainError):
        PhasePoint(0, 0, np.nan, 0)
    with pytest.raises(DomainError):
        flow(PhasePoint(0, 0, 0.5, 0.5), 0.0)
    res = flow(PhasePoint(0, 0, 0.0, 1.0), 1.0, T=5.0)
    res.write_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,x,y,nu,mu,p" and len(lines) == len(res.times) + 1
    assert res.to_json()["samples"] == len(res.times)
    assert np.all(np.diff(res.times) > 0)


def test_hamiltonian_examples():
    lam = 1.3
    assert hamiltonian_p(PhasePoint(0, 0, lam, 0), lam) == 0
    assert hamiltonian_p(PhasePoint(0, 0, 0, lam), lam) == pytest.approx(0)
    assert hamiltonian_p(PhasePoint(0, 0, lam, lam), lam) == pytest.approx(lam**2)


def test_radial_point_stays_fixed():
    res = flow(PhasePoint(0.0, 0.4, 2.0, 0.0), 2.0)
    assert np.allclose(res.states, [0.0, 0.4, 2.0, 0.0])
    assert res.forward_limit == res.backward_limit == "R+"


def test_equator_and_off_shell_conservation():
    res = flow(PhasePoint(0.0, 0.0, 0.0, 1.0), 1.0)
    assert (res.forward_limit, res.backward_limit) == ("R+", "R-")
    off = flow(PhasePoint(0.005, 1.0, 0.3, 2.0), 1.0, T=50.0)
    assert off.p_drift < 1e-8 and off.nu_monotone
