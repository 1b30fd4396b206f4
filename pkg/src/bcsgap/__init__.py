"""Periodic B-spline Galerkin solver for the lattice BCS gap equation.

The gap equation ``F = K * G[F]`` on the reciprocal torus, with kernel
``K = C1 + C2 Z_nu`` (on-site plus power-law part), is discretised in a
tensor-product periodic B-spline basis.  All convolution operators are
circulant and applied through the FFT.
"""
from .circulant import CirculantOperator
from .errors import BCSGapError, ConfigError, NodalSingularityError, SingularOperatorError
from .kernel import KernelSpec, assemble_A, assemble_B, epstein_direct, sobolev_norm, symbol
from .lattice import Lattice, cell_volume, dispersion, fermi_surface_indicator
from .nonlinearity import (
    GapField,
    NonlinearMap,
    apply_G_map,
    assemble_G,
    g_matrix,
    g_scalar,
    project_antisymmetric,
)
from .oracle import (
    classify_constant_matrix,
    elliptic_K,
    phi,
    phi_quadrature,
    solve_scalar_constant,
)
from .solver import (
    GapProblem,
    SolveReport,
    SolverConfig,
    classify_symmetry,
    iterate,
    residual,
)
from .splines import (
    SplineBasis,
    eval_basis,
    fourier_coeff,
    functional_mass_row,
    mass_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "BCSGapError",
    "CirculantOperator",
    "ConfigError",
    "GapField",
    "GapProblem",
    "KernelSpec",
    "Lattice",
    "NodalSingularityError",
    "NonlinearMap",
    "SingularOperatorError",
    "SolveReport",
    "SolverConfig",
    "SplineBasis",
    "apply_G_map",
    "assemble_A",
    "assemble_B",
    "assemble_G",
    "cell_volume",
    "classify_constant_matrix",
    "classify_symmetry",
    "dispersion",
    "elliptic_K",
    "epstein_direct",
    "eval_basis",
    "fermi_surface_indicator",
    "fourier_coeff",
    "functional_mass_row",
    "g_matrix",
    "g_scalar",
    "iterate",
    "mass_matrix",
    "phi",
    "phi_quadrature",
    "project_antisymmetric",
    "residual",
    "sobolev_norm",
    "solve_scalar_constant",
    "symbol",
]
