"""Dirichlet Laplacians of 2D lattice walks: spectral zeta values, exact heat
kernels, and trace-of-inverse experiments at desk scale."""

__version__ = "0.1.0"

from .backend import DEFAULT_BACKEND, HAVE_COMPILED, get_backend
from .domains import Domain, LayerPartition, boundary_layer, build_domain, path_domain
from .kernels import (
    KernelState,
    ReturnSeries,
    evolve_environment,
    evolve_full,
    evolve_killed,
    fit_qh_rate,
    green_diagonal,
    return_sum,
)
from .operators import DirichletOperator, SymmetrizedOperator, assemble, matvec, symmetrize
from .spectra import (
    SpectralSummary,
    TraceResult,
    dense_spectrum,
    green_diagonals,
    heat_trace,
    iu_diagnostic,
    kirchhoff_check,
    zeta_exact,
    zeta_from_spectrum,
    zeta_hutchinson,
)
from .walks import (
    ConductanceEnvironment,
    CovarianceMatrix,
    StepSet,
    builtin_walk,
    covariance,
    heat_constant,
    path_walk,
    sample_environment,
)

__all__ = [
    "DEFAULT_BACKEND",
    "HAVE_COMPILED",
    "get_backend",
    "Domain",
    "LayerPartition",
    "boundary_layer",
    "build_domain",
    "path_domain",
    "KernelState",
    "ReturnSeries",
    "evolve_environment",
    "evolve_full",
    "evolve_killed",
    "fit_qh_rate",
    "green_diagonal",
    "return_sum",
    "DirichletOperator",
    "SymmetrizedOperator",
    "assemble",
    "matvec",
    "symmetrize",
    "SpectralSummary",
    "TraceResult",
    "dense_spectrum",
    "green_diagonals",
    "heat_trace",
    "iu_diagnostic",
    "kirchhoff_check",
    "zeta_exact",
    "zeta_from_spectrum",
    "zeta_hutchinson",
    "ConductanceEnvironment",
    "CovarianceMatrix",
    "StepSet",
    "builtin_walk",
    "covariance",
    "heat_constant",
    "path_walk",
    "sample_environment",
]
