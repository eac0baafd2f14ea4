"""Nonlinear Helmholtz scattering on flat R^n (n=2, n=3 zonal) by radial spectral methods."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .specfun import Order, bessel_j, bessel_y, hankel, hankel_asymptotic, poincare_coefficients
from .angular import AngularGrid, BoundaryData, hk_norm, random_boundary_data
from .linfield import (Field, RadialGrid, RadialPotential, poisson_adjoint, poisson_apply,
                       resolvent_apply, split_in_out)
from .expansion import ExpansionFit, expansion_terms, extract_limit
from .nonlinear import (AdmissibilityWarning, Nonlinearity, SolveResult, SolverConfig,
                        evaluate_N, flux_check, picard_solve, scattering_map)
from .hamflow import PhasePoint, flow

__all__ = [
    "Order", "bessel_j", "bessel_y", "hankel", "hankel_asymptotic", "poincare_coefficients",
    "AngularGrid", "BoundaryData", "hk_norm", "random_boundary_data",
    "Field", "RadialGrid", "RadialPotential", "poisson_apply", "poisson_adjoint",
    "resolvent_apply", "split_in_out",
    "ExpansionFit", "expansion_terms", "extract_limit",
    "AdmissibilityWarning", "Nonlinearity", "SolverConfig", "SolveResult", "evaluate_N",
    "flux_check", "picard_solve", "scattering_map",
    "PhasePoint", "flow",
]
