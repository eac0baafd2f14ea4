"""Far-field extraction: the limits of r^{(n-1)/2} e^{-+ i lambda r} u(r, .).

Sign convention: ``sign=+1`` extracts the outgoing amplitude (coefficient of
r^{-(n-1)/2} e^{+i lambda r}), ``sign=-1`` the incoming one.

Per mode the field in the fit window is modelled as

    u~(r) ~ b T(r) + c O(r) + r^{-eps} (d0 T + e0 O) + r^{-eps-1} (d1 T + e1 O)
            + r^{-eps-1} sum_k s_k e^{2 i k sign lambda r},

in the units u~ = r^{(n-1)/2} e^{-i sign lambda r} u, where T is the
normalized profile travelling in the requested direction and O the opposite
one.  The profiles are the asymptotic series generated by
:func:`expansion_terms`; with ``J=None`` the series is used in resummed form,
i.e. the exact Hankel profile r^{-(n-2)/2} H_nu(lambda r).  The truncated
series is only useful for r >> nu^2, so the resummed profile is the default.
The side waves (k = 1, -2 by default) carry the non-resonant harmonics that a
cubic forcing produces.  When eps < 0.8, r^{-2 eps} (d2 T + e2 O) is added
for the squared phase corrections of slowly decaying potentials.  The
remainder exponent eps is shared by all modes and fitted by a bounded scalar
search.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .angular import BoundaryData, hk_weights, laplacian_eigenvalues, hk_norm
from .errors import DomainError, FitError, PreconditionError
from .linfield import Field, mode_basis

__all__ = ["ExpansionFit", "expansion_terms", "series_ratios", "extract_limit"]

MAX_TERMS = 8
COND_LIMIT = 1e10
EXACT_RESIDUAL = 1e-10
WINDOW_START = 0.375  # default window [max(2 r_match, 0.375 r_max), r_max]
SQUARE_EPS = 0.8  # below this the r^{-2 eps} terms are fitted too


def series_ratios(dim_n: int, L: int, J: int, sign: int, lam: float) -> np.ndarray:
    """Per-mode ratios v_j / v_0, shape (J+1, modes).

    Recursion for r^{-(n-1)/2} e^{+i lambda r} sum_j v_j r^{-j}:
        v_{j+1} = (Delta + j(j+1) - (n-1)(n-3)/4) v_j / (2i (j+1) lambda),
    Delta the negative Laplace-Beltrami operator; i -> -i for sign=-1.
    """
    eig = laplacian_eigenvalues(dim_n, L)
    shift = (dim_n - 1) * (dim_n - 3) / 4.0
    unit = 2j * sign * lam
    ratios = np.ones((J + 1, len(eig)), complex)
    for j in range(J):
        ratios[j + 1] = ratios[j] * (eig + j * (j + 1) - shift) / (unit * (j + 1))
    return ratios


def expansion_terms(v0: BoundaryData, J: int, sign: int = +1, lam: float = 1.0) -> list[BoundaryData]:
    """Coefficients v_1..v_J of the outgoing (sign=+1) or incoming expansion."""
    if J > MAX_TERMS:
        raise DomainError(f"at most {MAX_TERMS} expansion terms are supported")
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    ratios = series_ratios(v0.dim_n, v0.L, J, sign, lam)
    return [v0.with_coeffs(ratios[j] * v0.coeffs) for j in range(1, J + 1)]


@dataclass(eq=False)
class ExpansionFit:
    leading: BoundaryData
    opposite: BoundaryData
    terms: list
    eps: float | None
    fit_residual: float
    radii: np.ndarray
    remainder_norms: np.ndarray
    sign: int
    k: int
    remainder_amplitude: BoundaryData | None = field(default=None)

    def to_json(self) -> dict:
        return {
            "sign": self.sign,
            "leading": self.leading.to_json(),
            "opposite": self.opposite.to_json(),
            "terms": [t.to_json() for t in self.terms],
            "eps": self.eps,
            "fit_residual": self.fit_residual,
            "radii": [float(r) for r in self.radii],
            "remainder_norms": [float(x) for x in self.remainder_norms],
            "hk_norm_leading": {
                "k": hk_norm(self.leading, self.k),
                "k-2": hk_norm(self.leading, max(self.k - 2, 0)),
            },
        }

    def write_csv(self, path) -> None:
        """Table (r_i, ||u~(r_i) - b||_{H^{k-2}}) for remainder plots."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "remainder_norm"])
            for r, e in zip(self.radii, self.remainder_norms):
                w.writerow([repr(float(r)), repr(float(e))])


def _radii_indices(u: Field, num_radii: int, window) -> np.ndarray:
    grid = u.grid
    if window is None:
        window = (max(2.0 * grid.r_match, WINDOW_START * grid.r_max), grid.r_max)
    lo, hi = window
    if lo < 2.0 * grid.r_match - 1e-12 or hi > grid.r_max:
        raise PreconditionError("fit window must lie in [2 r_match, r_max]")
    nodes = grid.nodes
    inside = np.flatnonzero((nodes >= lo) & (nodes <= hi))
    targets = np.linspace(nodes[inside[0]], nodes[inside[-1]], num_radii)
    idx = inside[np.searchsorted(nodes[inside], targets).clip(0, len(inside) - 1)]
    idx = np.unique(idx)
    if len(idx) < num_radii:
        raise PreconditionError("fit window holds too few grid nodes")
    return idx


def _profiles(u: Field, idx: np.ndarray, sign: int, J: int | None):
    """Normalized travelling profiles T, O (modes x radii) in u~ units."""
    grid = u.grid
    r = grid.nodes[idx]
    lam = grid.lam
    n = u.dim_n
    phase = r ** ((n - 1) / 2.0) * np.exp(-1j * sign * lam * r)
    T = np.empty((len(u.modes), len(r)), complex)
    O = np.empty_like(T)
    if J is None:
        for i, ell in enumerate(u.modes):
            b = mode_basis(grid, n, int(ell), None)
            theta = b.nu * np.pi / 2.0 + np.pi / 4.0
            amp_out = np.sqrt(2.0 / (np.pi * lam)) * np.exp(-1j * theta)
            h_out = b.outgoing[idx] / amp_out
            h_in = np.conj(h_out)
            T[i], O[i] = (h_out, h_in) if sign > 0 else (h_in, h_out)
        return r, T * phase, O * phase
    rt = series_ratios(n, u.L, J, sign, lam)
    ro = series_ratios(n, u.L, J, -sign, lam)
    powers = r[None, :] ** (-np.arange(J + 1)[:, None])
    T = rt.T @ powers
    O = (ro.T @ powers) * np.exp(-2j * sign * lam * r)[None, :]
    return r, T, O


def _solve(cols: np.ndarray, y: np.ndarray):
    scale = np.linalg.norm(cols, axis=0)
    scale[scale == 0] = 1.0
    A = cols / scale
    sv = np.linalg.svd(A, compute_uv=False)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if cond > COND_LIMIT:
        raise FitError(f"far-field fit condition number {cond:.3g} exceeds {COND_LIMIT:g}")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    coef = coef / scale
    return coef, y - cols @ coef


def extract_limit(u: Field, sign: int = +1, num_radii: int = 24, J: int | None = None,
                  k: int = 2, window=None, remainder: str = "auto",
                  side_waves: tuple = (1, -2)) -> ExpansionFit:
    """Far-field amplitude of ``u`` in the direction ``sign`` by constrained least squares.

    ``remainder``: "auto" adds the remainder columns only if the two-wave
    model leaves a relative residual above 1e-10; "always" and "never" force
    the choice.  ``window`` is a radius interval inside [2 r_match, r_max].
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    if remainder not in ("auto", "always", "never"):
        raise DomainError(f"unknown remainder mode {remainder!r}")
    n_cols = 2 if remainder == "never" else 8 + len(side_waves)
    if num_radii < max((J or 0) + 2, n_cols + 1):
        raise PreconditionError(f"num_radii={num_radii} too small for a {n_cols}-column fit")
    idx = _radii_indices(u, num_radii, window)
    r, T, O = _profiles(u, idx, sign, J)
    lam = u.grid.lam
    y = u.values[:, idx] * (r ** ((u.dim_n - 1) / 2.0) * np.exp(-1j * sign * lam * r))[None, :]

    half = len(r) // 2
    early = np.sqrt(np.sum(np.abs(y[:, :half]) ** 2))
    late = np.sqrt(np.sum(np.abs(y[:, half:]) ** 2))
    if late > 1e3 * early + 1e-300:
        raise PreconditionError("field grows faster than r^{-(n-1)/2} in the fit window")

    w = hk_weights(u.dim_n, u.L, max(k - 2, 0))
    active = [i for i in range(len(u.modes)) if np.any(y[i])]
    sides = [np.exp(2j * kk * sign * lam * r) for kk in side_waves]

    def fit_all(eps):
        coefs = np.zeros((len(u.modes), n_cols + 2), complex)
        res = np.zeros_like(y)
        for i in active:
            cols = [T[i], O[i]]
            if eps is not None:
                d0, d1 = r ** (-eps), r ** (-eps - 1.0)
                cols += [d0 * T[i], d0 * O[i], d1 * T[i], d1 * O[i]] + [d1 * s for s in sides]
                if eps < SQUARE_EPS:
                    d2 = r ** (-2.0 * eps)
                    cols += [d2 * T[i], d2 * O[i]]
            c, rr = _solve(np.stack(cols, axis=1), y[i])
            coefs[i, : len(c)] = c
            res[i] = rr
        return coefs, res

    def total(res):
        return float(np.sum(w[:, None] * np.abs(res) ** 2))

    def rel(res, coefs):
        scale = max(np.sqrt(np.sum(w * np.abs(coefs[:, 0]) ** 2)),
                    np.sqrt(np.sum(w * np.abs(coefs[:, 1]) ** 2)), 1e-300)
        return np.sqrt(total(res) / len(r)) / scale

    coefs, res = fit_all(None)
    eps = None
    if remainder == "always" or (remainder == "auto" and active and rel(res, coefs) > EXACT_RESIDUAL):
        opt = minimize_scalar(lambda e: total(fit_all(e)[1]), bounds=(0.02, 4.0),
                              method="bounded", options={"xatol": 1e-6})
        eps = float(opt.x)
        coefs, res = fit_all(eps)

    leading = BoundaryData(u.dim_n, u.L, coefs[:, 0])
    opposite = BoundaryData(u.dim_n, u.L, coefs[:, 1])
    E = y - coefs[:, 1:2] * O - coefs[:, 0:1]
    remainder_norms = np.sqrt(np.sum(w[:, None] * np.abs(E) ** 2, axis=0))
    amp = BoundaryData(u.dim_n, u.L, coefs[:, 2]) if eps is not None else None
    terms = expansion_terms(leading, J if J is not None else 3, sign, lam)
    return ExpansionFit(leading, opposite, terms, eps, float(rel(res, coefs)),
                        r, remainder_norms, sign, k, amp)
