"""Acceptance criteria, shared by ``nlscatter selfcheck`` and the test-suite.

Reference resolution: n=3 zonal, lambda=1, L=16, M=4096, r_max ~ 201.
Each ``criterion_XX`` returns a :class:`CriterionResult`; none of them raise
on a failed check.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .angular import BoundaryData, hk_norm, random_boundary_data
from .expansion import expansion_terms, extract_limit
from ._numerics import smooth_step
from .hamflow import flow, random_sigma_points
from .linfield import (Field, RadialGrid, RadialPotential, apply_helmholtz, poisson_adjoint,
                       poisson_apply, resolvent_apply, split_in_out)
from .nonlinear import (AdmissibilityWarning, Nonlinearity, SolverConfig, born_term,
                        picard_solve)
from .specfun import Order, hankel_asymptotic, poincare_coefficients

__all__ = ["CriterionResult", "CRITERIA", "run_all", "format_line"]

DIM_N = 3
LAM = 1.0
L_REF = 16
M_REF = 4096


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail, "seconds": self.seconds}


def format_line(res: CriterionResult) -> str:
    tag = "PASS" if res.passed else "FAIL"
    return f"[{tag}] C{res.number:02d} {res.name}: {res.detail} ({res.seconds:.1f}s)"


def _grid(M: int = M_REF) -> RadialGrid:
    return RadialGrid(lam=LAM, M=M)


def _window(r, center, sigma):
    # C-infinity cutoff: 1 for |r - c| <= 5 sigma, 0 for |r - c| >= 7 sigma
    return smooth_step((7.0 * sigma - np.abs(r - center)) / (2.0 * sigma))


def make_forcing(grid: RadialGrid, seed: int, compact: bool = True, L: int = L_REF,
                 dim_n: int = DIM_N) -> Field:
    """Seeded smooth forcing: per-mode Gaussians with random centres and widths.

    With ``compact`` each Gaussian is multiplied by a C-infinity window, so
    the forcing is compactly supported in [c - 7 sigma, c + 7 sigma].
    """
    rng = np.random.default_rng(seed)
    F = Field.zeros(dim_n, L, grid)
    r = grid.nodes
    for i in range(len(F.modes)):
        center = rng.uniform(12.0, 40.0)
        sigma = rng.uniform(0.8, 1.5)
        amp = (rng.standard_normal() + 1j * rng.standard_normal()) * np.exp(-0.2 * i)
        prof = np.exp(-(((r - center) / sigma) ** 2))
        if compact:
            prof = prof * _window(r, center, sigma)
        F.values[i] = amp * prof
    return F


def _interior(grid: RadialGrid) -> np.ndarray:
    r = grid.nodes
    return (r > 0.5) & (r < grid.r_max - 2.0 * grid.panel_width)


def _quiet_cfg(**kw) -> SolverConfig:
    return SolverConfig(grid=_grid(), **kw)


def _picard(f, N, cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdmissibilityWarning)
        return picard_solve(f, N, cfg)


def criterion_01() -> CriterionResult:
    grid = _grid()
    errs = []
    for seed in range(20):
        f = random_boundary_data(DIM_N, L_REF, seed)
        fit = extract_limit(poisson_apply(f, grid), -1)
        errs.append(hk_norm(fit.leading - f, 2) / hk_norm(f, 2))
    worst = max(errs)
    return CriterionResult(1, "linear round-trip", worst <= 1e-7,
                           f"max rel H^2 error {worst:.2e} over 20 seeds (<= 1e-7)")


def criterion_02() -> CriterionResult:
    f = random_boundary_data(DIM_N, L_REF, 101)
    res = _picard(f, Nonlinearity.zero(3), _quiet_cfg(max_data_norm=np.inf))
    mult = res.b_total.coeffs / f.coeffs
    phase_err = mod_err = 0.0
    for ell, m in zip(f.modes, mult):
        nu = Order.from_mode(int(ell), DIM_N)
        # leading Hankel phases: outgoing over incoming share of J_nu
        z = 1.0e3
        oracle = (hankel_asymptotic(1, nu, z, 1, check_regime=False) * np.exp(-1j * z)
                  / (hankel_asymptotic(2, nu, z, 1, check_regime=False) * np.exp(1j * z)))
        phase_err = max(phase_err, abs(m - oracle))
        mod_err = max(mod_err, abs(abs(m) - 1.0))
    ok = phase_err <= 1e-8 and mod_err <= 1e-12
    return CriterionResult(2, "free scattering matrix", ok,
                           f"max |mult - oracle| {phase_err:.2e} (<= 1e-8), "
                           f"max ||mult|-1| {mod_err:.2e} (<= 1e-12)")


POTENTIALS = {
    "V=0": None,
    "V=3exp(-r)": RadialPotential.exponential(3.0, 1.0),
    "V=(1+r)^-1.5": RadialPotential.algebraic(1.0, 1.5),
}


def criterion_03() -> CriterionResult:
    grid = _grid()
    inner = _interior(grid)
    worst = {}
    for name, V in POTENTIALS.items():
        w = 0.0
        for seed in range(10):
            F = make_forcing(grid, seed)
            u = resolvent_apply(F, +1, V)
            res = apply_helmholtz(u, V) - F
            rel = (np.linalg.norm(res.values[:, inner]) / np.linalg.norm(F.values[:, inner]))
            w = max(w, rel)
        worst[name] = w
    ok = all(v <= 1e-6 for v in worst.values())
    detail = ", ".join(f"{k}: {v:.2e}" for k, v in worst.items())
    return CriterionResult(3, "resolvent residual", ok, f"max rel residual {detail} (<= 1e-6)")


def criterion_04() -> CriterionResult:
    grid = _grid()
    worst = 0.0
    for seed in range(5):
        F = make_forcing(grid, 50 + seed, compact=False)
        lhs = (resolvent_apply(F, +1) - resolvent_apply(F, -1)) * (2.0 * LAM / 1j)
        g = poisson_adjoint(F)
        rhs = poisson_apply(g, grid)
        for i in range(len(F.modes)):
            scale = np.linalg.norm(rhs.values[i])
            if scale > 0:
                worst = max(worst, np.linalg.norm(lhs.values[i] - rhs.values[i]) / scale)
    return CriterionResult(4, "spectral-measure identity", worst <= 1e-6,
                           f"max per-mode rel difference {worst:.2e} over 5 F (<= 1e-6)")


def criterion_05() -> CriterionResult:
    f = random_boundary_data(DIM_N, L_REF, 202, hk_target=0.05)
    cfg = _quiet_cfg()
    defects = {}
    for c in (1.0, -1.0):
        defects[c] = _picard(f, Nonlinearity.power(c, 3), cfg).flux_defect
    N_i = Nonlinearity.power(1j, 3)
    nf = [float(np.sum(np.abs(g.coeffs) ** 2)) for g in (f, f * 0.5)]
    imb = []
    for g, n2 in zip((f, f * 0.5), nf):
        b = _picard(g, N_i, cfg).b_total
        imb.append(abs(float(np.sum(np.abs(b.coeffs) ** 2)) - n2))
    defect_i = imb[0] / nf[0]
    ratio = imb[0] / imb[1]
    ok = max(defects.values()) <= 1e-5 and defect_i >= 1e-7 and abs(ratio / 16.0 - 1) <= 0.25
    return CriterionResult(5, "flux unitarity", ok,
                           f"defect c=+1 {defects[1.0]:.2e}, c=-1 {defects[-1.0]:.2e} (<= 1e-5); "
                           f"c=i defect {defect_i:.2e} (>= 1e-7), imbalance halving ratio "
                           f"{ratio:.3f} (16 +- 25%)")


def criterion_06() -> CriterionResult:
    p = 3
    f = random_boundary_data(DIM_N, L_REF, 303, hk_target=0.05)
    N = Nonlinearity.power(1.0, p)
    cfg = _quiet_cfg()
    dis = []
    for g in (f, f * 0.5):
        b1 = _picard(g, N, cfg).b1
        dis.append(hk_norm(b1 - born_term(g, N, cfg), 0))
    ratio = dis[0] / dis[1]
    target = 2.0 ** (2 * p - 1)
    ok = abs(ratio / target - 1) <= 0.25
    return CriterionResult(6, "Born consistency", ok,
                           f"disagreement {dis[0]:.2e} -> {dis[1]:.2e}, ratio {ratio:.3f} "
                           f"({target:.0f} +- 25%)")


def criterion_07() -> CriterionResult:
    d = random_boundary_data(DIM_N, L_REF, 404, hk_target=1.0)
    parts = []
    ok = True
    for p, t in ((3, 0.4), (5, 4.0)):
        N = Nonlinearity.power(1.0, p)
        cfg = _quiet_cfg(tol=1e-15, max_data_norm=np.inf)
        q = [_picard(d * s, N, cfg).contraction_factors[0] for s in (t, t / 2)]
        ratio = q[0] / q[1]
        target = 2.0 ** (p - 1)
        ok &= abs(ratio / target - 1) <= 0.15
        parts.append(f"p={p}: q {q[0]:.2e}/{q[1]:.2e} ratio {ratio:.3f} ({target:.0f} +- 15%)")
    return CriterionResult(7, "contraction scaling", ok, "; ".join(parts))


def criterion_08() -> CriterionResult:
    f = random_boundary_data(DIM_N, L_REF, 505, hk_target=0.05)
    N = Nonlinearity.power(1.0, 3)
    ref = _picard(f, N, _quiet_cfg())
    base = hk_norm(ref.b_total, 2)
    base1 = hk_norm(ref.b1, 2)
    changes = {}
    b1_changes = {}
    for name, L, M in (("L32", 32, M_REF), ("M8192", L_REF, 2 * M_REF), ("both", 32, 2 * M_REF)):
        res = _picard(f.resized(L), N, SolverConfig(grid=_grid(M)))
        changes[name] = abs(hk_norm(res.b_total, 2) - base) / base
        b1_changes[name] = abs(hk_norm(res.b1, 2) - base1) / base1
    ok = max(changes.values()) <= 1e-3
    detail = ", ".join(f"{k}: {v:.2e}" for k, v in changes.items())
    extra = ", ".join(f"{k}: {v:.2e}" for k, v in b1_changes.items())
    return CriterionResult(8, "Sobolev preservation", ok,
                           f"rel change of ||b||_H2 {detail} (<= 1e-3); of ||b1||_H2 {extra}")


def criterion_09() -> CriterionResult:
    f = random_boundary_data(DIM_N, L_REF, 606, hk_target=0.05)
    res = _picard(f, Nonlinearity.power(1.0, 3), _quiet_cfg())
    fit = res.fit_b1
    eps = fit.eps if fit is not None else None
    resid = fit.fit_residual if fit is not None else float("nan")
    ok = eps is not None and eps > 0.1 and resid <= 1e-4
    eps_txt = "none" if eps is None else f"{eps:.3f}"
    return CriterionResult(9, "remainder rate", ok,
                           f"eps' {eps_txt} (> 0.1), fit residual {resid:.2e} (<= 1e-4)")


def criterion_10() -> CriterionResult:
    pts = random_sigma_points(100, LAM, 707)
    fwd = bwd = 0
    drift = 0.0
    mono = True
    for pt in pts:
        r = flow(pt, LAM, T=200.0 / LAM)
        fwd += r.forward_limit == "R+"
        bwd += r.backward_limit == "R-"
        drift = max(drift, r.p_drift)
        mono &= r.nu_monotone
    ok = fwd == 100 and bwd == 100 and drift <= 1e-8 and mono
    return CriterionResult(10, "radial-set geometry", ok,
                           f"forward->R+ {fwd}/100, backward->R- {bwd}/100, p drift {drift:.2e} "
                           f"(<= 1e-8), nu nondecreasing {mono}")


def criterion_11() -> CriterionResult:
    grid = _grid()
    f = random_boundary_data(DIM_N, L_REF, 808)
    f = f * (1.0 / hk_norm(f, 0))
    u0 = poisson_apply(f, grid)
    um, up = split_in_out(u0)
    recon = float(np.max(np.abs(um.values + up.values - u0.values)) / np.max(np.abs(u0.values)))
    zp = hk_norm(extract_limit(up, -1).leading, 0)
    zm = hk_norm(extract_limit(um, +1).leading, 0)
    ok = recon <= 1e-15 and zp <= 1e-8 and zm <= 1e-8
    return CriterionResult(11, "splitting exactness", ok,
                           f"reconstruction {recon:.1e} (<= 1e-15), L(-)u+ {zp:.2e}, "
                           f"L(+)u- {zm:.2e} (<= 1e-8)")


def criterion_12() -> CriterionResult:
    worst = 0.0
    for n in (2, 3):
        L = 8
        ells = np.arange(0, L + 1)
        for ell in ells:
            v0 = BoundaryData.single_mode(n, L, int(ell))
            terms = expansion_terms(v0, 4, +1, LAM)
            a = poincare_coefficients(Order.from_mode(int(ell), n), 5)
            for j in range(1, 5):
                ratio = terms[j - 1].coeff(int(ell)) / v0.coeff(int(ell))
                oracle = (1j ** j) * a[j] / LAM**j
                worst = max(worst, abs(ratio - oracle) / max(abs(oracle), 1.0))
    return CriterionResult(12, "expansion recursion vs Hankel", worst <= 1e-10,
                           f"max rel deviation {worst:.2e}, l <= 8, j <= 4, n = 2, 3 (<= 1e-10)")


CRITERIA = [criterion_01, criterion_02, criterion_03, criterion_04, criterion_05, criterion_06,
            criterion_07, criterion_08, criterion_09, criterion_10, criterion_11, criterion_12]


def run_one(fn) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        res = fn()
    except Exception as exc:  # a crash is a failed criterion, reported by name
        number = CRITERIA.index(fn) + 1
        res = CriterionResult(number, fn.__name__, False, f"raised {type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t0
    return res


def run_all(echo=print) -> list[CriterionResult]:
    out = []
    for fn in CRITERIA:
        res = run_one(fn)
        if echo is not None:
            echo(format_line(res))
        out.append(res)
    return out
