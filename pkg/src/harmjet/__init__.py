"""Fillability of boundary data by graphs of harmonic 1-jets.

Modules
-------
extcalc   exact exterior calculus on jet space and the identity suite
jetgeom   sampled boundary data (x, u, A) and its geometry
conslaw   harmonic conservation laws and moment conditions
dirichlet spectral and finite-difference Dirichlet solvers, DtN map
fill      dual-path fillability verdict and the harmonic filling
holo      holomorphic loops in C^m, their lift, fill and reconstruction
cli       command line front end
"""

from .conslaw import (FILLABLE, INDETERMINATE, NOT_FILLABLE, eval_moment, harmonic_basis,
                      moment_report, stokes_cylinder_check)
from .dirichlet import dtn, solve, solve_fd, trace_from_samples
from .errors import HarmJetError
from .fill import check, generate
from .holo import ComplexLoop, fill_holo, holo_check, lift
from .jetgeom import JetBoundary, isotropy_residual

__version__ = "0.1.0"

__all__ = [
    "FILLABLE", "INDETERMINATE", "NOT_FILLABLE", "ComplexLoop", "HarmJetError", "JetBoundary",
    "check", "dtn", "eval_moment", "fill_holo", "generate", "harmonic_basis",
    "holo_check", "isotropy_residual", "lift", "moment_report", "solve", "solve_fd",
    "stokes_cylinder_check", "trace_from_samples",
]
