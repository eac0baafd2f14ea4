"""Polynomial nonlinearities, the Picard iteration and the nonlinear scattering map.

The fixed-point problem is

    w = u_plus + R(lambda + i0) N[u_minus + w],    u = u_minus + w,

with u0 = P(lambda) f = u_minus + u_plus.  The outgoing data is b = b0 + b1,
b0 the outgoing limit of u0 and b1 that of w - u_plus.
"""
from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .angular import AngularGrid, BoundaryData, analyze_array, hk_norm, synth_array
from .errors import DivergenceError, NonConvergenceError, PreconditionError, DomainError
from .expansion import ExpansionFit, extract_limit
from .linfield import (Field, RadialGrid, RadialPotential, apply_helmholtz, poisson_apply,
                       resolvent_apply, split_in_out)

__all__ = [
    "Nonlinearity",
    "SolverConfig",
    "SolveResult",
    "evaluate_N",
    "weighted_norm",
    "picard_solve",
    "scattering_map",
    "born_term",
    "threshold_search",
    "pde_residual",
    "flux_defect",
    "flux_check",
    "AdmissibilityWarning",
]

log = logging.getLogger(__name__)


class AdmissibilityWarning(UserWarning):
    """The exponent p is outside the range covered by the small-data theory."""


@dataclass(frozen=True)
class Nonlinearity:
    """Sum of monomials coeff * u^a * conj(u)^b, each of degree a + b >= p (p odd)."""

    monomials: tuple = ()
    p: int = 3

    def __post_init__(self):
        mons = tuple((complex(c), int(a), int(b)) for c, a, b in self.monomials)
        if self.p < 1 or self.p % 2 == 0:
            raise DomainError(f"p must be an odd positive integer, got {self.p}")
        for c, a, b in mons:
            if a < 0 or b < 0 or a + b < self.p:
                raise DomainError(f"monomial u^{a} conj(u)^{b} has degree below p={self.p}")
        object.__setattr__(self, "monomials", mons)

    @classmethod
    def power(cls, c: complex, p: int) -> "Nonlinearity":
        """c |u|^{p-1} u."""
        return cls(((c, (p + 1) // 2, (p - 1) // 2),), p)

    @classmethod
    def zero(cls, p: int = 3) -> "Nonlinearity":
        return cls((), p)

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c, _, _ in self.monomials)

    @property
    def degree(self) -> int:
        return max((a + b for _, a, b in self.monomials), default=self.p)

    def admissible(self, dim_n: int) -> bool:
        """Strict exponent condition (p-1)(n-1) > 4."""
        return (self.p - 1) * (dim_n - 1) > 4

    def admissible_pn(self, dim_n: int) -> bool:
        """Decay condition (p-1)(n-1)/2 > 2 on the forcing."""
        return (self.p - 1) * (dim_n - 1) / 2.0 > 2

    @property
    def is_gauge_real(self) -> bool:
        """Every monomial is real-coefficient |u|^{2q} u, so conj(u) N[u] is real."""
        return all(c.imag == 0 and a == b + 1 for c, a, b in self.monomials)

    def to_json(self) -> dict:
        return {"p": self.p,
                "monomials": [[c.real, c.imag, a, b] for c, a, b in self.monomials]}

    @classmethod
    def from_json(cls, data: dict) -> "Nonlinearity":
        mons = [(complex(re, im), a, b) for re, im, a, b in data["monomials"]]
        return cls(tuple(mons), int(data["p"]))


def evaluate_N(u: Field, N: Nonlinearity, dealias_factor: float | None = None) -> Field:
    """Pseudospectral N[u]: synthesize on an enlarged angular grid, multiply, analyze."""
    if N.is_zero or not np.any(u.values):
        return Field.zeros(u.dim_n, u.L, u.grid)
    if dealias_factor is None:
        dealias_factor = (N.degree + 1) / 2.0
    grid = AngularGrid.for_band(u.dim_n, u.L, dealias_factor)
    vals = synth_array(u.dim_n, u.L, u.values, grid)
    conj = np.conj(vals)
    out = np.zeros_like(vals)
    with np.errstate(over="raise", invalid="raise"):
        try:
            for c, a, b in N.monomials:
                out += c * vals**a * conj**b
        except FloatingPointError as exc:
            raise DivergenceError("overflow evaluating the nonlinearity",
                                  float(np.max(np.abs(vals)))) from exc
    return u.with_values(analyze_array(u.dim_n, u.L, out, grid))


def _radial_weight(grid: RadialGrid, dim_n: int, delta: float) -> np.ndarray:
    r = grid.nodes
    return grid.weights * r ** (dim_n - 1) * (1.0 + r * r) ** (-0.5 - delta)


def weighted_norm(v: Field, delta: float = 0.05) -> float:
    """<r>^{-1/2-delta} weighted L^2 norm over the radial grid and the sphere."""
    if delta <= 0:
        raise DomainError("delta must be positive")
    w = _radial_weight(v.grid, v.dim_n, delta)
    return float(np.sqrt(np.sum(w * np.abs(v.values) ** 2)))


@dataclass
class SolverConfig:
    """Picard iteration and far-field fit settings."""

    grid: RadialGrid = field(default_factory=RadialGrid)
    potential: RadialPotential | None = None
    tol: float = 1e-12
    delta: float = 0.05
    max_iter: int = 50
    k: int = 2
    max_data_norm: float = 1.0
    accept_residual: float = 1e-6
    dealias_factor: float | None = None
    num_radii: int = 24
    J: int | None = None

    def to_json(self) -> dict:
        return {
            "grid": self.grid.to_json(),
            "potential": self.potential.to_json() if self.potential else None,
            "tol": self.tol, "delta": self.delta, "max_iter": self.max_iter, "k": self.k,
            "max_data_norm": self.max_data_norm, "accept_residual": self.accept_residual,
            "dealias_factor": self.dealias_factor, "num_radii": self.num_radii, "J": self.J,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SolverConfig":
        data = dict(data)
        if "grid" in data:
            data["grid"] = RadialGrid.from_json(data["grid"])
        if data.get("potential"):
            data["potential"] = RadialPotential.from_json(data["potential"])
        return cls(**data)


@dataclass(eq=False)
class SolveResult:
    u: Field
    w: Field
    b_total: BoundaryData
    b0: BoundaryData
    b1: BoundaryData
    iterates: int
    update_norms: list
    contraction_factors: list
    pde_residual: float
    flux_defect: float
    tail_bound: float
    fit_b1: ExpansionFit | None = None

    @property
    def eps_remainder(self) -> float | None:
        return None if self.fit_b1 is None else self.fit_b1.eps

    def to_json(self) -> dict:
        return {
            "b_total": self.b_total.to_json(),
            "b0": self.b0.to_json(),
            "b1": self.b1.to_json(),
            "iterates": self.iterates,
            "update_norms": list(map(float, self.update_norms)),
            "contraction_factors": list(map(float, self.contraction_factors)),
            "pde_residual": self.pde_residual,
            "flux_defect": self.flux_defect,
            "tail_bound": self.tail_bound,
            "remainder_exponent": self.eps_remainder,
            "b1_fit_residual": None if self.fit_b1 is None else self.fit_b1.fit_residual,
        }

    def write_iterations_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "update_norm", "contraction_factor"])
            for m, un in enumerate(self.update_norms):
                cf = self.contraction_factors[m - 1] if m >= 1 else ""
                w.writerow([m, repr(float(un)), "" if cf == "" else repr(float(cf))])


def pde_residual(u: Field, N: Nonlinearity, potential: RadialPotential | None = None,
                 delta: float = 0.05, dealias_factor: float | None = None) -> float:
    """Weighted relative residual of (H - lambda^2) u - N[u] on interior nodes."""
    Nu = evaluate_N(u, N, dealias_factor)
    lhs = apply_helmholtz(u, potential)
    grid = u.grid
    r = grid.nodes
    inner = (r > 0.5) & (r < grid.r_max - 2.0 * grid.panel_width)
    w = _radial_weight(grid, u.dim_n, delta) * inner

    def norm(x):
        return np.sqrt(np.sum(w * np.abs(x) ** 2))

    scale = norm(grid.lam**2 * u.values) + norm(Nu.values)
    if scale == 0:
        return 0.0
    return float(norm(lhs.values - Nu.values) / scale)


def flux_defect(f: BoundaryData, b: BoundaryData) -> float:
    """| ||b||^2 - ||f||^2 | / ||f||^2 in L^2 of the sphere."""
    nf = float(np.sum(np.abs(f.coeffs) ** 2))
    if nf == 0:
        return 0.0
    return abs(float(np.sum(np.abs(b.coeffs) ** 2)) - nf) / nf


def flux_check(f: BoundaryData, b: BoundaryData, nonlinearity: Nonlinearity | None = None,
               potential: RadialPotential | None = None) -> float:
    """Flux defect, refusing nonlinearities for which the balance is not expected."""
    if nonlinearity is not None and not nonlinearity.is_gauge_real:
        raise PreconditionError("flux balance needs real gauge-invariant monomials |u|^{2q}u")
    if potential is not None and np.iscomplexobj(potential(np.array([1.0]))):
        raise PreconditionError("flux balance needs a real potential")
    return flux_defect(f, b)


def _tail_bound(F: Field, p: int) -> float:
    """C r_max^{1 - p(n-1)/2} with C fitted from the forcing on the outer half."""
    grid = F.grid
    r = grid.nodes
    decay = p * (F.dim_n - 1) / 2.0
    outer = r > 0.5 * grid.r_max
    amp = np.sqrt(np.sum(np.abs(F.values[:, outer]) ** 2, axis=0))
    C = float(np.max(amp * r[outer] ** decay)) if np.any(outer) else 0.0
    return C * grid.r_max ** (1.0 - decay)


def _tail_kwargs(N: Nonlinearity, dim_n: int) -> dict:
    """Analytic continuation of the forcing beyond r_max, when its tail is integrable."""
    decay = N.p * (dim_n - 1) / 2.0
    if decay - (dim_n - 1) / 2.0 <= 1.0:
        return {}
    return {"tail_decay": decay, "tail_freqs": N.degree + 1}


def _check_data(f: BoundaryData, N: Nonlinearity, cfg: SolverConfig):
    if not N.admissible(f.dim_n):
        warnings.warn(f"(p-1)(n-1) = {(N.p - 1) * (f.dim_n - 1)} <= 4: outside the admissible range",
                      AdmissibilityWarning, stacklevel=3)
    norm = hk_norm(f, cfg.k)
    if norm > cfg.max_data_norm:
        raise PreconditionError(f"||f||_H^{cfg.k} = {norm:.3g} exceeds max_data_norm {cfg.max_data_norm}")


def picard_solve(f: BoundaryData, N: Nonlinearity, cfg: SolverConfig | None = None) -> SolveResult:
    """Solve the nonlinear Helmholtz equation with incoming data ``f`` by Picard iteration."""
    cfg = cfg or SolverConfig()
    _check_data(f, N, cfg)
    grid = cfg.grid
    u0 = poisson_apply(f, grid, cfg.potential)
    u_minus, u_plus = split_in_out(u0, cfg.potential)

    tail = _tail_kwargs(N, f.dim_n)
    w = u_plus
    updates: list[float] = []
    growth = 0
    converged = False
    forcing = None
    for m in range(cfg.max_iter):
        forcing = evaluate_N(u_minus + w, N, cfg.dealias_factor)
        w_next = u_plus + resolvent_apply(forcing, +1, cfg.potential, **tail)
        upd = weighted_norm(w_next - w, cfg.delta)
        if not np.isfinite(upd):
            raise DivergenceError("non-finite Picard update", upd)
        updates.append(upd)
        w = w_next
        log.debug("picard m=%d update=%.3e", m, upd)
        if upd < cfg.tol:
            converged = True
            break
        if len(updates) >= 2 and upd > updates[-2]:
            growth += 1
            if growth >= 2 and upd > 10 * cfg.tol:
                raise DivergenceError(f"Picard updates grew twice, last norm {upd:.3e}", upd)
        else:
            growth = 0
    factors = [updates[i + 1] / updates[i] for i in range(len(updates) - 1) if updates[i] > 0]
    if not converged:
        raise NonConvergenceError(
            f"no convergence in {cfg.max_iter} iterations (last update {updates[-1]:.3e})")

    u = u_minus + w
    fit0 = extract_limit(u0, +1, cfg.num_radii, cfg.J, cfg.k)
    b0 = fit0.leading
    scattered = w - u_plus
    if np.any(scattered.values):
        fit1 = extract_limit(scattered, +1, cfg.num_radii, cfg.J, cfg.k)
        b1 = fit1.leading
    else:
        fit1 = None
        b1 = BoundaryData.zeros(f.dim_n, f.L)
    b = b0 + b1
    residual = pde_residual(u, N, cfg.potential, cfg.delta, cfg.dealias_factor)
    if residual > cfg.accept_residual:
        log.warning("PDE residual %.3e above accept_residual %.1e", residual, cfg.accept_residual)
    tail = _tail_bound(forcing, N.p) if forcing is not None else 0.0
    return SolveResult(u, w, b, b0, b1, len(updates), updates, factors, residual,
                       flux_defect(f, b), tail, fit1)


def scattering_map(f: BoundaryData, N: Nonlinearity, cfg: SolverConfig | None = None):
    """Outgoing data b and a summary report for incoming data ``f``."""
    cfg = cfg or SolverConfig()
    res = picard_solve(f, N, cfg)
    report = {
        "hk_norm_f": hk_norm(f, cfg.k),
        "hk_norm_b": hk_norm(res.b_total, cfg.k),
        "flux_defect": res.flux_defect,
        "remainder_exponent": res.eps_remainder,
        "iterates": res.iterates,
        "pde_residual": res.pde_residual,
    }
    return res.b_total, report


def born_term(f: BoundaryData, N: Nonlinearity, cfg: SolverConfig | None = None) -> BoundaryData:
    """Far field of the first Born correction R(lambda + i0) N[P(lambda) f]."""
    cfg = cfg or SolverConfig()
    u0 = poisson_apply(f, cfg.grid, cfg.potential)
    scattered = resolvent_apply(evaluate_N(u0, N, cfg.dealias_factor), +1, cfg.potential,
                                **_tail_kwargs(N, f.dim_n))
    if not np.any(scattered.values):
        return BoundaryData.zeros(f.dim_n, f.L)
    return extract_limit(scattered, +1, cfg.num_radii, cfg.J, cfg.k).leading


def threshold_search(direction: BoundaryData, N: Nonlinearity, cfg: SolverConfig | None = None,
                     t_lo: float = 1e-3, t_hi: float = 10.0, rel_bracket: float = 0.05) -> float:
    """Largest data size t in [t_lo, t_hi] for which the Picard iteration converges."""
    cfg = cfg or SolverConfig()
    if abs(hk_norm(direction, cfg.k) - 1.0) > 1e-8:
        raise PreconditionError("direction must have unit H^k norm")
    probe = replace(cfg, max_data_norm=np.inf)

    def ok(t):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", AdmissibilityWarning)
                picard_solve(direction * t, N, probe)
            return True
        except (NonConvergenceError, FloatingPointError):
            return False

    if not ok(t_lo):
        raise PreconditionError(f"iteration already fails at t_lo = {t_lo}")
    if ok(t_hi):
        return t_hi
    lo, hi = t_lo, t_hi
    while hi / lo > 1.0 + rel_bracket:
        mid = np.sqrt(lo * hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo
