"""Spectral curves of one-matrix models with complex 't Hooft parameters.

Submodules
----------
poly
    Potentials, polynomial roots and the branch-tracked square root.
curve
    Spectral curves, periods, and the one- and two-cut cubic solvers.
stokes
    Turning points, Stokes lines, minimal-cut tests and criticality events.
prepotential
    Numeric and closed-form prepotentials, superpotentials and vacua.
abelian
    Normalized Abelian differentials and the prepotential Hessian.
critical
    Critical loci in the S and λ planes and the cut-splitting scan.
cli
    Command-line front end.
"""

__version__ = "0.1.0"

import types as _types

from .poly import BranchSqrt, Potential, eval_potential, eval_w, poly_roots
from .curve import (ContinuationError, CutSpec, DegenerationError, InconsistentBranchError,
                    SolverError, SpectralCurve, branch_points_S, continue_two_cut,
                    one_cut_cubic_curve, period_integral, puiseux_two_cut, solve_one_cut_cubic,
                    solve_two_cut_cubic, sw_slice_solve)
from .stokes import StokesGraph, StokesLine, detect_criticality, minimal_cut_exists, stokes_graph
from .prepotential import (cubic_prepotential, gaussian_prepotential, numeric_prepotential,
                           solve_vacua_cubic_one_cut, solve_vacua_gaussian, superpotential_eff)
from .abelian import d2F_matrix, holomorphic_basis, omega0
from .critical import (CriticalLocus, SplittingReport, critical_loci_S, critical_residual_lambda,
                       critical_residual_S, lambda_loci, splitting_scan, sw_singularity_check,
                       trace_locus_S)

__all__ = [name for name, value in dict(globals()).items()
           if not name.startswith("_") and not isinstance(value, _types.ModuleType)]
