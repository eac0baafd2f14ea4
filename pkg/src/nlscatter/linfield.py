"""Radial-mode fields, the Poisson operator and the outgoing/incoming resolvent.

A field u(r, omega) = sum_ell u_ell(r) Y_ell(omega) is stored as a complex
array of shape (modes, nodes) on a composite Gauss-Legendre radial grid.
Per mode the operator H - lambda^2 is

    -u'' - (n-1)/r u' + ell(ell+n-2)/r^2 u + V u - lambda^2 u,

a Sturm-Liouville operator with weight r^{n-1}.  Each mode carries a regular
solution phi_reg (bounded at the origin) and an outgoing solution phi_out
(~ r^{-(n-2)/2} H^(1)_nu(lambda r) at large r); the resolvent is built by
variation of parameters from this pair.

Normalizations (all checked by the test-suite):

* free regular solution: phi_reg = r^{-(n-2)/2} J_nu(lambda r);
* Poisson operator: u0_ell = sqrt(2 pi lambda) e^{-i(nu pi/2 + pi/4)} f_ell phi_reg,
  so that r^{(n-1)/2} u0 ~ e^{-i lambda r} f + e^{+i lambda r} b0 with
  b0_ell = e^{-i(nu pi + pi/2)} f_ell;
* Green's function: G(r, r') = -phi_reg(r<) phi_out(r>) / W, with
  W = r^{n-1}(phi_reg phi_out' - phi_reg' phi_out) = 2i/pi in the free case.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special
from scipy.integrate import quad, solve_ivp

from . import _numerics as num
from .angular import BoundaryData, mode_numbers
from .errors import (
    DomainError,
    NormalizationError,
    PreconditionError,
    ResonanceError,
    StepSizeError,
)
from .specfun import NU_MAX, Order, Z_MAX

__all__ = [
    "RadialGrid",
    "ModeField",
    "Field",
    "RadialPotential",
    "ModeBasis",
    "mode_basis",
    "free_mode",
    "poisson_coefficient",
    "poisson_apply",
    "poisson_adjoint",
    "split_in_out",
    "resolvent_apply",
    "potential_mode",
    "apply_helmholtz",
    "cutoff",
]


@dataclass(frozen=True)
class RadialGrid:
    """Composite Gauss-Legendre grid on [r_min, r_max] carrying lambda.

    ``r_match`` is the start of the asymptotic region (the cutoff radius R);
    far-field fits use [2 r_match, r_max].  ``M`` must be a multiple of
    ``panel_order``.  Panels are geometrically graded (ratio ``grading``) from
    r_min until their width reaches that of the uniform panels covering the
    rest of the interval; this keeps r^{2 ell} integrands resolved near the
    origin, where phi_out is huge for high modes.
    """

    lam: float = 1.0
    r_min: float = 1.0e-4
    r_match: float | None = None
    r_max: float | None = None
    M: int = 4096
    panel_order: int = 8
    grading: float = 1.25
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    half_widths: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("lambda must be positive")
        r_match = self.r_match if self.r_match is not None else 4.0 * np.pi / self.lam
        r_max = self.r_max if self.r_max is not None else 16.0 * r_match
        object.__setattr__(self, "r_match", float(r_match))
        object.__setattr__(self, "r_max", float(r_max))
        if not 0 < self.r_min < self.r_match < self.r_max:
            raise DomainError("need 0 < r_min < r_match < r_max")
        if self.M % self.panel_order or self.M < 2 * self.panel_order:
            raise DomainError("M must be a multiple of panel_order (at least two panels)")
        if self.panel_order < 4:
            raise DomainError("panel_order >= 4 needed for degree-6 exactness")
        if self.lam * self.r_max > Z_MAX:
            raise DomainError("lambda * r_max exceeds the validated Bessel range")
        x, w, _ = num.gauss_panel(self.panel_order)
        edges = self._edges()
        half = 0.5 * np.diff(edges)
        object.__setattr__(self, "half_widths", half)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def num_panels(self) -> int:
        return self.M // self.panel_order

    def _edges(self) -> np.ndarray:
        P = self.num_panels
        q = self.grading
        n_geo = 0
        if q > 1.0:
            while n_geo < P - 1:
                r_g = self.r_min * q**n_geo
                if r_g * (1.0 - 1.0 / q) >= (self.r_max - r_g) / (P - n_geo) or r_g >= self.r_match:
                    break
                n_geo += 1
        r_g = self.r_min * q**n_geo if n_geo else self.r_min
        geo = self.r_min * q ** np.arange(n_geo)
        return np.concatenate([geo, np.linspace(r_g, self.r_max, P - n_geo + 1)])

    @property
    def panel_width(self) -> float:
        """Width of the outer (uniform) panels."""
        return 2.0 * float(self.half_widths[-1])

    def refined(self, factor: int = 2) -> "RadialGrid":
        return RadialGrid(self.lam, self.r_min, self.r_match, self.r_max,
                          self.M * factor, self.panel_order, self.grading)

    def integrate(self, g: np.ndarray) -> np.ndarray:
        """Integral over [r_min, r_max] along the last axis."""
        return g @ self.weights

    def cumulative(self, g: np.ndarray) -> np.ndarray:
        """Integral from r_min to each node along the last axis."""
        _, w, S = num.gauss_panel(self.panel_order)
        h = self.half_widths
        gp = g.reshape(g.shape[:-1] + (self.num_panels, self.panel_order))
        inner = h[:, None] * (gp @ S.T)
        totals = h * (gp @ w)
        before = np.cumsum(totals, axis=-1) - totals
        return (inner + before[..., None]).reshape(g.shape)

    def cumulative_from_right(self, g: np.ndarray) -> np.ndarray:
        """Integral from each node to r_max along the last axis."""
        _, w, S = num.gauss_panel(self.panel_order)
        h = self.half_widths
        gp = g.reshape(g.shape[:-1] + (self.num_panels, self.panel_order))
        totals = h * (gp @ w)
        inner = totals[..., None] - h[:, None] * (gp @ S.T)
        after = np.cumsum(totals[..., ::-1], axis=-1)[..., ::-1] - totals
        return (inner + after[..., None]).reshape(g.shape)

    def fd_operators(self):
        return _fd_operators(self)

    def to_json(self) -> dict:
        return {"lam": self.lam, "r_min": self.r_min, "r_match": self.r_match,
                "r_max": self.r_max, "M": self.M, "panel_order": self.panel_order,
                "grading": self.grading}

    @classmethod
    def from_json(cls, data: dict) -> "RadialGrid":
        keys = ("lam", "r_min", "r_match", "r_max", "M", "panel_order", "grading")
        return cls(**{k: data[k] for k in keys if k in data})


@lru_cache(maxsize=8)
def _fd_operators(grid: RadialGrid):
    return num.fd_stencils(grid.nodes, width=7)


def cutoff(grid: RadialGrid) -> np.ndarray:
    """Smooth chi(r): 0 for r <= R, 1 for r >= 2R, R = r_match."""
    return num.smooth_step((grid.nodes - grid.r_match) / grid.r_match)


@dataclass(frozen=True, eq=False)
class ModeField:
    """Radial profile of a single angular mode."""

    ell: int
    nu: float
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class Field:
    """Band-limited field: one radial profile per angular mode on a shared grid."""

    dim_n: int
    L: int
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        shape = (len(mode_numbers(self.dim_n, self.L)), self.grid.M)
        if v.shape != shape:
            raise DomainError(f"field values have shape {v.shape}, expected {shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, dim_n: int, L: int, grid: RadialGrid) -> "Field":
        return cls(dim_n, L, grid, np.zeros((len(mode_numbers(dim_n, L)), grid.M), complex))

    @property
    def modes(self) -> np.ndarray:
        return mode_numbers(self.dim_n, self.L)

    def mode(self, ell: int) -> ModeField:
        idx = ell + self.L if self.dim_n == 2 else ell
        return ModeField(ell, Order.from_mode(ell, self.dim_n).nu, self.values[idx])

    def with_values(self, values) -> "Field":
        return Field(self.dim_n, self.L, self.grid, values)

    def conj(self) -> "Field":
        # conj(Y_ell) = Y_{-ell} on the circle; zonal modes are real
        v = np.conj(self.values)
        return self.with_values(v[::-1] if self.dim_n == 2 else v)

    def _other(self, other):
        if (other.dim_n, other.L, other.grid) != (self.dim_n, self.L, self.grid):
            raise DomainError("fields on different grids or bands")
        return other.values

    def __add__(self, other):
        return self.with_values(self.values + self._other(other))

    def __sub__(self, other):
        return self.with_values(self.values - self._other(other))

    def __mul__(self, scalar):
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def to_json(self) -> dict:
        return {
            "dim_n": self.dim_n,
            "L": self.L,
            "grid": self.grid.to_json(),
            "modes": [int(m) for m in self.modes],
            "values": [[[float(z.real), float(z.imag)] for z in row] for row in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Field":
        grid = RadialGrid.from_json(data["grid"])
        vals = np.array([[complex(a, b) for a, b in row] for row in data["values"]])
        return cls(int(data["dim_n"]), int(data["L"]), grid, vals)

    def write_csv(self, path) -> None:
        """Radial profiles, one real/imag column pair per mode."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            header = ["r"]
            for m in self.modes:
                header += [f"re_{m}", f"im_{m}"]
            w.writerow(header)
            for i, r in enumerate(self.grid.nodes):
                row = [repr(float(r))]
                for z in self.values[:, i]:
                    row += [repr(float(z.real)), repr(float(z.imag))]
                w.writerow(row)


@dataclass(frozen=True)
class RadialPotential:
    """Radial short-range potential V(r) with |V(r)| <= C r^{-gamma}.

    ``kind`` and ``params`` identify the closed form (used for hashing and
    serialization); see the factory classmethods.
    """

    kind: str
    params: tuple
    gamma: float
    C: float

    def __post_init__(self):
        if not self.gamma > 1:
            raise DomainError("short-range potentials need gamma > 1")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        p = self.params
        if self.kind == "exponential":
            return p[0] * np.exp(-p[1] * r)
        if self.kind == "algebraic":
            return p[0] * (1.0 + r) ** (-p[1])
        if self.kind == "inverse_square":
            return p[0] / r**2
        raise DomainError(f"unknown potential kind {self.kind!r}")

    @classmethod
    def exponential(cls, strength: float, rate: float = 1.0, gamma: float = 4.0):
        # strength*exp(-rate r) <= C r^{-gamma} with C = strength*(gamma/(e rate))^gamma
        C = abs(strength) * (gamma / (np.e * rate)) ** gamma
        return cls("exponential", (float(strength), float(rate)), gamma, C)

    @classmethod
    def algebraic(cls, strength: float, power: float):
        return cls("algebraic", (float(strength), float(power)), float(power), abs(strength))

    @classmethod
    def inverse_square(cls, strength: float):
        return cls("inverse_square", (float(strength),), 2.0, abs(strength))

    def check_bound(self, grid: RadialGrid, samples: int = 2000) -> bool:
        r = np.geomspace(grid.r_min, grid.r_max, samples)
        return bool(np.all(np.abs(self(r)) <= self.C * r ** (-self.gamma) * (1 + 1e-12)))

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": list(self.params), "gamma": self.gamma, "C": self.C}

    @classmethod
    def from_json(cls, data: dict) -> "RadialPotential":
        return cls(data["kind"], tuple(data["params"]), float(data["gamma"]), float(data["C"]))


@dataclass(frozen=True, eq=False)
class ModeBasis:
    """Regular/outgoing radial solution pair for one mode.

    ``split`` is the coefficient a in phi_reg = a phi_out + conj(a) conj(phi_out)
    (a = 1/2 in the free case); ``nu_far`` is the order whose Hankel phase
    describes phi_out at r_max.
    """

    ell: int
    nu: float
    nu_far: float
    regular: np.ndarray
    regular_d: np.ndarray
    outgoing: np.ndarray
    outgoing_d: np.ndarray
    wronskian: complex
    wronskian_profile: np.ndarray
    split: complex

    def solutions(self, sign: int):
        if sign > 0:
            return self.outgoing, self.wronskian
        return np.conj(self.outgoing), np.conj(self.wronskian)


def _free_profiles(nu: float, dim_n: int, lam: float, r: np.ndarray):
    s = (dim_n - 2) / 2.0
    z = lam * r
    rs = r ** (-s)
    j = special.jv(nu, z)
    jp = special.jvp(nu, z)
    h = special.hankel1(nu, z)
    hp = special.h1vp(nu, z)
    reg = rs * j
    reg_d = -s * rs / r * j + lam * rs * jp
    out = rs * h
    out_d = -s * rs / r * h + lam * rs * hp
    return reg, reg_d, out, out_d


def _check_order(nu: float):
    if nu > NU_MAX:
        raise DomainError(f"order {nu} beyond validated range {NU_MAX}")


def _free_basis(grid: RadialGrid, dim_n: int, ell: int) -> ModeBasis:
    nu = Order.from_mode(ell, dim_n).nu
    _check_order(nu)
    reg, reg_d, out, out_d = _free_profiles(nu, dim_n, grid.lam, grid.nodes)
    prof = grid.nodes ** (dim_n - 1) * (reg * out_d - reg_d * out)
    return ModeBasis(ell, nu, nu, reg, reg_d, out, out_d, 2j / np.pi, prof, 0.5)


def _effective_order(nu: float, r: float, potential: RadialPotential) -> float:
    # exact for V = c/r^2, tends to nu for faster decay
    val = nu * nu + r * r * float(potential(r))
    return float(np.sqrt(val)) if val > 0 else nu


def _wkb_outgoing(nu: float, dim_n: int, lam: float, R: float, potential: RadialPotential):
    """Outgoing data at R normalized like the free Hankel profile at infinity.

    H_nu is corrected by the WKB phase int_R^inf (k - k_V), with
    k(s) = sqrt(lambda^2 - nu^2/s^2) and k_V = sqrt(k^2 - V), and by the
    amplitude that keeps the radial flux of the free profile.
    """
    def k(s):
        return np.sqrt(lam * lam - nu * nu / (s * s))

    if not lam * R > 2.0 * nu:
        raise PreconditionError(f"r_max too small for WKB matching of order {nu}")
    def gap(s):
        # k - k_V without cancellation
        v = float(potential(s))
        return v / (k(s) + np.sqrt(k(s) ** 2 - v))

    tail, _ = quad(gap, R, np.inf, epsabs=1e-15, epsrel=1e-12, limit=200)
    _, _, out, out_d = _free_profiles(nu, dim_n, lam, np.array([R]))
    phase_d = -gap(R)
    # amplitude chosen so the radial flux equals that of the free profile
    k_free = (out_d[0] / out[0]).imag
    factor = np.sqrt(k_free / (k_free + phase_d)) * np.exp(1j * tail)
    return factor * out[0], factor * (out_d[0] + 1j * phase_d * out[0])


def _integrate_mode(grid, dim_n, ell, potential, y0, r0, t_eval):
    q = ell * (ell + dim_n - 2)
    lam2 = grid.lam**2

    def rhs(r, y):
        return [y[1], -(dim_n - 1) / r * y[1] + (q / r**2 + potential(r) - lam2) * y[0]]

    sol = solve_ivp(rhs, (r0, t_eval[-1]), y0, method="DOP853", t_eval=t_eval,
                    rtol=1e-12, atol=1e-300)
    if not sol.success:
        raise StepSizeError(f"radial ODE failed for mode {ell}: {sol.message}")
    return sol.y[0], sol.y[1]


def _potential_basis(grid: RadialGrid, dim_n: int, ell: int, potential: RadialPotential) -> ModeBasis:
    nu = Order.from_mode(ell, dim_n).nu
    _check_order(nu)
    r = grid.nodes
    nu0 = _effective_order(nu, grid.r_min, potential)
    reg0, regd0, _, _ = _free_profiles(nu0, dim_n, grid.lam, np.array([grid.r_min]))
    reg, reg_d = _integrate_mode(grid, dim_n, ell, potential,
                                 [complex(reg0[0]), complex(regd0[0])], grid.r_min, r)
    reg, reg_d = reg.real, reg_d.real
    if potential.kind == "inverse_square":
        nu_far = _effective_order(nu, grid.r_max, potential)
        _, _, out0, outd0 = _free_profiles(nu_far, dim_n, grid.lam, np.array([grid.r_max]))
        out0, outd0 = out0[0], outd0[0]
    else:
        nu_far = nu
        out0, outd0 = _wkb_outgoing(nu, dim_n, grid.lam, grid.r_max, potential)
    out_rev, outd_rev = _integrate_mode(grid, dim_n, ell, potential,
                                        [out0, outd0], grid.r_max, r[::-1])
    out, out_d = out_rev[::-1], outd_rev[::-1]
    prof = r ** (dim_n - 1) * (reg * out_d - reg_d * out)
    tail = slice(-grid.panel_order * 4, None)
    wr = complex(np.mean(prof[tail]))
    if abs(wr) < 1e-12:
        raise ResonanceError(f"vanishing Wronskian for mode {ell}")
    # reg = a out + conj(a) conj(out): a = W[reg, conj out] / W[out, conj out]
    w_rc = r ** (dim_n - 1) * (reg * np.conj(out_d) - reg_d * np.conj(out))
    w_oc = r ** (dim_n - 1) * (out * np.conj(out_d) - out_d * np.conj(out))
    split = complex(np.mean(w_rc[tail] / w_oc[tail]))
    return ModeBasis(ell, nu, nu_far, reg, reg_d, out, out_d, wr, prof, split)


@lru_cache(maxsize=512)
def mode_basis(grid: RadialGrid, dim_n: int, ell: int,
               potential: RadialPotential | None = None) -> ModeBasis:
    """Cached regular/outgoing solution pair for mode ``ell``."""
    if dim_n == 2 and ell < 0:
        return mode_basis(grid, dim_n, -ell, potential)
    if potential is None:
        return _free_basis(grid, dim_n, ell)
    return _potential_basis(grid, dim_n, ell, potential)


def potential_mode(ell: int, potential: RadialPotential | None, grid: RadialGrid,
                   dim_n: int = 3):
    """Regular and outgoing solutions with a radial potential, plus their Wronskian.

    The regular solution starts at r_min from free Bessel data, the outgoing
    one is integrated inward from r_max from free Hankel data; both use the
    effective order sqrt(nu^2 + r^2 V(r)) at the starting radius.  The
    Wronskian is r^{n-1}(phi_reg phi_out' - phi_reg' phi_out).
    """
    b = mode_basis(grid, dim_n, ell, potential)
    return (ModeField(ell, b.nu, b.regular.astype(complex)),
            ModeField(ell, b.nu, b.outgoing), b.wronskian)


def free_mode(ell: int, grid: RadialGrid, dim_n: int = 3) -> ModeField:
    """Regular free solution r^{-(n-2)/2} J_nu(lambda r)."""
    b = mode_basis(grid, dim_n, ell, None)
    return ModeField(ell, b.nu, b.regular.astype(complex))


def poisson_coefficient(grid: RadialGrid, dim_n: int, ell: int,
                        potential: RadialPotential | None = None) -> complex:
    """Multiplier c with u0_ell = c f_ell phi_reg for unit incoming data.

    The incoming part of phi_reg is conj(a) conj(phi_out) with far-field
    amplitude conj(a) sqrt(2/(pi lambda)) e^{+i theta}, theta = nu pi/2 + pi/4.
    """
    b = mode_basis(grid, dim_n, ell, potential)
    theta = b.nu_far * np.pi / 2.0 + np.pi / 4.0
    amp = np.conj(b.split) * np.sqrt(2.0 / (np.pi * grid.lam)) * np.exp(1j * theta)
    if abs(amp) < 1e-14:
        raise NormalizationError(f"incoming matching coefficient vanishes for mode {ell}")
    return complex(1.0 / amp)


def poisson_apply(f: BoundaryData, grid: RadialGrid,
                  potential: RadialPotential | None = None) -> Field:
    """Generalized eigenfunction u0 = P(lambda) f with incoming data f."""
    out = Field.zeros(f.dim_n, f.L, grid)
    for i, ell in enumerate(f.modes):
        if f.coeffs[i] == 0:
            continue
        b = mode_basis(grid, f.dim_n, int(ell), potential)
        out.values[i] = poisson_coefficient(grid, f.dim_n, int(ell), potential) * f.coeffs[i] * b.regular
    return out


def poisson_adjoint(F: Field, potential: RadialPotential | None = None) -> BoundaryData:
    """P(lambda)^* F, adjoint of :func:`poisson_apply` for the L^2 pairings."""
    grid = F.grid
    out = np.zeros(len(F.modes), complex)
    rw = grid.nodes ** (F.dim_n - 1)
    for i, ell in enumerate(F.modes):
        b = mode_basis(grid, F.dim_n, int(ell), potential)
        c = poisson_coefficient(grid, F.dim_n, int(ell), potential)
        out[i] = np.conj(c) * grid.integrate(b.regular * F.values[i] * rw)
    return BoundaryData(F.dim_n, F.L, out)


def split_in_out(u0: Field, potential: RadialPotential | None = None):
    """Split u0 = u_minus + u_plus with u_plus purely outgoing beyond 2R.

    Per mode u0_ell = c phi_reg; u_plus = chi(r) c a phi_out with a the
    outgoing share of phi_reg (1/2 in the free case, i.e. J = (H1 + H2)/2).
    The near-field (1 - chi) u0 is kept in u_minus.
    """
    grid = u0.grid
    chi = cutoff(grid)
    plus = Field.zeros(u0.dim_n, u0.L, grid)
    w = grid.weights
    for i, ell in enumerate(u0.modes):
        b = mode_basis(grid, u0.dim_n, int(ell), potential)
        reg = b.regular
        scale = np.max(np.abs(reg))
        c = np.sum(w * reg * u0.values[i]) / np.sum(w * reg * reg) if scale > 0 else 0.0
        plus.values[i] = chi * c * b.split * b.outgoing
    minus = u0 - plus
    return minus, plus


def _green_prefactor(wronskian: complex) -> complex:
    return -1.0 / wronskian


def _tail_ratio(F: Field) -> float:
    rw = F.grid.nodes ** (F.dim_n - 1) * F.grid.weights
    dens = np.sum(np.abs(F.values) ** 2, axis=0) * rw
    total = dens.sum()
    if total == 0:
        return 0.0
    return float(np.sqrt(dens[F.grid.nodes > 0.8 * F.grid.r_max].sum() / total))


def _outer_tail(h: np.ndarray, grid: RadialGrid, q: float, max_freq: int) -> complex:
    """Estimate of int_{r_max}^inf h dr for h ~ r^{-q} sum_m c_m e^{i m lambda r}.

    The amplitudes (plus 1/r corrections) are fitted on [r_max/2, r_max];
    only even m with |m| <= max_freq occur for products of outgoing and
    incoming waves.
    """
    r = grid.nodes
    sel = r > 0.5 * grid.r_max
    rs = r[sel]
    R = grid.r_max
    lam = grid.lam
    freqs = np.arange(-max_freq, max_freq + 1, 2)
    cols, tails = [], []
    for m in freqs:
        wave = np.exp(1j * m * lam * rs)
        for extra in (0.0, 1.0):
            cols.append(wave * rs ** (-q - extra))
            qq = q + extra
            if m == 0:
                tails.append(R ** (1.0 - qq) / (qq - 1.0))
            else:
                om = m * lam
                tails.append(np.exp(1j * om * R) * R ** (-qq) * (1j / om) * (1.0 + 1j * qq / (om * R)))
    A = np.stack(cols, axis=1)
    scale = np.linalg.norm(A, axis=0)
    coef = np.linalg.lstsq(A / scale, h[sel], rcond=None)[0] / scale
    return complex(np.dot(coef, tails))


def resolvent_apply(F: Field, sign: int = +1, potential: RadialPotential | None = None,
                    tail_tol: float | None = 1e-2, tail_decay: float | None = None,
                    tail_freqs: int = 4) -> Field:
    """R(lambda + i0) F (sign=+1) or R(lambda - i0) F (sign=-1), mode by mode.

    u_ell(r) = -(1/W) [phi_out(r) int_{r_min}^r phi_reg F r'^{n-1} dr'
                       + phi_reg(r) int_r^{r_max} phi_out F r'^{n-1} dr'],
    with phi_out replaced by its conjugate for sign=-1.  Forcing beyond r_max
    is truncated; ``tail_tol`` bounds the admissible L^2 mass of F on
    r > 0.8 r_max relative to the total.  With ``tail_decay`` = q0 the
    forcing is taken to continue as r^{-q0} times waves e^{i j lambda r},
    |j| < ``tail_freqs``, and the outer integral gets the matching analytic tail.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    if tail_tol is not None:
        ratio = _tail_ratio(F)
        if ratio > tail_tol:
            raise PreconditionError(f"forcing tail mass {ratio:.3g} exceeds {tail_tol}")
    grid = F.grid
    rw = grid.nodes ** (F.dim_n - 1)
    out = Field.zeros(F.dim_n, F.L, grid)
    for i, ell in enumerate(F.modes):
        g = F.values[i]
        if not np.any(g):
            continue
        b = mode_basis(grid, F.dim_n, int(ell), potential)
        phi_out, wr = b.solutions(sign)
        inner = grid.cumulative(b.regular * g * rw)
        h = phi_out * g * rw
        outer = grid.cumulative_from_right(h)
        if tail_decay is not None:
            q = tail_decay - (F.dim_n - 1) / 2.0
            if q <= 1.0:
                raise PreconditionError(f"forcing decay r^-{tail_decay} too slow for a finite tail")
            outer = outer + _outer_tail(h, grid, q, tail_freqs)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = _green_prefactor(wr) * (phi_out * inner + b.regular * outer)
        out.values[i] = np.where(np.isfinite(vals), vals, 0.0)
    return out


def apply_helmholtz(u: Field, potential: RadialPotential | None = None) -> Field:
    """(H - lambda^2) u by 7-point finite differences on the radial nodes."""
    grid = u.grid
    index, d1, d2 = grid.fd_operators()
    r = grid.nodes
    du = num.apply_stencil(index, d1, u.values)
    ddu = num.apply_stencil(index, d2, u.values)
    q = (u.modes * (u.modes + u.dim_n - 2)).astype(float)[:, None]
    V = potential(r) if potential is not None else 0.0
    res = -ddu - (u.dim_n - 1) / r * du + (q / r**2 + V - grid.lam**2) * u.values
    return u.with_values(res)
