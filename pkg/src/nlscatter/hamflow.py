"""Rescaled Hamilton flow of |zeta|^2 - lambda^2 near the boundary at infinity.

Coordinates (x, y, nu, mu): x = 1/r, y an angle on the boundary (a great
circle for n=3 zonal data), nu dual to r and mu the rescaled angular
momentum.  With the round metric the rescaled vector field reads

    x' = -2 nu x,   y' = 2 mu,   nu' = 2 mu^2,   mu' = -2 nu mu,

which conserves p = nu^2 + mu^2 - lambda^2.  On the characteristic set
p = 0 at x = 0 the radial sets nu = -lambda (source) and nu = +lambda (sink),
with mu = 0, are the only fixed points.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, StepSizeError

__all__ = ["PhasePoint", "FlowResult", "hamiltonian_p", "vector_field", "flow",
           "classify", "random_sigma_points"]

CLASSIFY_TOL = 1e-6


@dataclass(frozen=True)
class PhasePoint:
    x: float
    y: float
    nu: float
    mu: float

    def __post_init__(self):
        if not all(np.isfinite([self.x, self.y, self.nu, self.mu])):
            raise DomainError("phase point has non-finite coordinates")
        if self.x < 0:
            raise DomainError("x must be nonnegative")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.nu, self.mu], dtype=float)


def hamiltonian_p(pt: PhasePoint, lam: float) -> float:
    """Boundary principal symbol nu^2 + mu^2 - lambda^2."""
    return pt.nu**2 + pt.mu**2 - lam**2


def vector_field(_t, s):
    x, _y, nu, mu = s
    return [-2.0 * nu * x, 2.0 * mu, 2.0 * mu * mu, -2.0 * nu * mu]


def classify(state: np.ndarray, lam: float, tol: float = CLASSIFY_TOL) -> str:
    """'R+', 'R-', 'escaped' (x > 1) or 'undecided'.

    :func:`flow` also reports 'escaped' when integration stops at x = 1.
    """
    x, _y, nu, mu = state
    if x > 1.0:
        return "escaped"
    if abs(mu) < tol and x < tol:
        if abs(nu - lam) < tol:
            return "R+"
        if abs(nu + lam) < tol:
            return "R-"
    return "undecided"


@dataclass(eq=False)
class FlowResult:
    """Trajectory samples (time-ordered, backward then forward) and diagnostics."""

    times: np.ndarray
    states: np.ndarray
    lam: float
    forward_limit: str
    backward_limit: str
    p_drift: float
    min_nu_increment: float

    @property
    def p_values(self) -> np.ndarray:
        return self.states[:, 2] ** 2 + self.states[:, 3] ** 2 - self.lam**2

    @property
    def nu_monotone(self) -> bool:
        return self.min_nu_increment >= -1e-10

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "x", "y", "nu", "mu", "p"])
            for t, s, p in zip(self.times, self.states, self.p_values):
                w.writerow([repr(float(t))] + [repr(float(v)) for v in s] + [repr(float(p))])

    def to_json(self) -> dict:
        return {"forward_limit": self.forward_limit, "backward_limit": self.backward_limit,
                "p_drift": self.p_drift, "min_nu_increment": self.min_nu_increment,
                "samples": int(len(self.times))}


def _escape(_t, s):
    return s[0] - 1.0


_escape.terminal = True


def _integrate(s0, T, rtol, atol):
    sol = solve_ivp(vector_field, (0.0, T), s0, method="DOP853", rtol=rtol, atol=atol,
                    events=_escape)
    if sol.status == -1:
        raise StepSizeError(f"Hamilton flow integration failed: {sol.message}")
    return sol.t, sol.y.T, sol.status == 1


def flow(pt: PhasePoint, lam: float, T: float | None = None, rtol: float = 1e-12,
         atol: float = 1e-14) -> FlowResult:
    """Integrate forward and backward for time T (default 200/lambda) and classify the limits."""
    if lam <= 0:
        raise DomainError("lambda must be positive")
    if pt.x > 1.0:
        raise DomainError("phase point must satisfy x <= 1")
    T = 200.0 / lam if T is None else float(T)
    s0 = pt.as_array()
    tf, sf, esc_f = _integrate(s0, T, rtol, atol)
    tb, sb, esc_b = _integrate(s0, -T, rtol, atol)
    times = np.concatenate([tb[::-1], tf[1:]])
    states = np.concatenate([sb[::-1], sf[1:]])
    p = states[:, 2] ** 2 + states[:, 3] ** 2 - lam**2
    drift = float(np.max(np.abs(p - hamiltonian_p(pt, lam))))
    dnu = np.diff(states[:, 2])
    fwd = "escaped" if esc_f else classify(sf[-1], lam)
    bwd = "escaped" if esc_b else classify(sb[-1], lam)
    return FlowResult(times, states, lam, fwd, bwd, drift, float(dnu.min()) if len(dnu) else 0.0)


def random_sigma_points(count: int, lam: float, seed: int, x: float = 0.0) -> list[PhasePoint]:
    """Seeded points on the characteristic set away from the radial sets.

    nu = lambda cos(a), mu = lambda sin(a) with a uniform in (0.01, pi - 0.01)
    (sign of mu random), y uniform on [0, 2 pi); generator numpy default_rng(seed).
    """
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.01, np.pi - 0.01, count)
    sgn = rng.choice([-1.0, 1.0], count)
    y = rng.uniform(0.0, 2.0 * np.pi, count)
    return [PhasePoint(x, float(yy), float(lam * np.cos(aa)), float(s * lam * np.sin(aa)))
            for aa, s, yy in zip(a, sgn, y)]
