"""
Deciding whether boundary data bounds a harmonic graph
======================================================

Boundary data on a closed curve gives a point x, a value u and a gradient
row A at each sample. The data is the boundary of the 1-jet graph of a
harmonic function exactly when the harmonic moments vanish. Equivalently,
the normal defect zeta = (A - grad V) . N vanishes, where V is the harmonic
extension of u. The checker evaluates both quantities and compares them.
"""

import numpy as np

from harmjet.conslaw import harmonic_basis, moment_report
from harmjet.fill import check, generate, zeta_pairing

###############################################################################
# A fillable boundary: values and gradient of a random harmonic polynomial.

b = generate("harmonic_poly_graph", seed=7, deg=4)
rep = check(b)
print("harmonic graph:", rep.verdict, "| max normalized moment",
      f"{rep.moments.max_normalized:.1e}", "| max |zeta|", f"{rep.fill.zeta_inf:.1e}")

###############################################################################
# Push the gradient off the graph in the normal direction. The moments and
# the defect grow linearly in the perturbation size.

print("\n eps      max |mu|   max |zeta|   verdict")
for eps in (1e-4, 1e-3, 1e-2):
    rep = check(generate("normal_perturbed", seed=7, eps=eps))
    print(f"{eps:.0e}  {rep.moments.max_abs:.3e}  {rep.fill.zeta_inf:.3e}   {rep.verdict}")

###############################################################################
# Every moment equals the pairing of its test function with the defect.
# Here we check that pairing for the first few test functions.

bad = generate("normal_perturbed", seed=7, eps=1e-2)
basis = harmonic_basis(2, 1, 3)
mom = moment_report(bad, basis)
pred = zeta_pairing(bad, basis, check(bad, basis).fill.zeta)
for H, mu, p in zip(basis, mom.residuals, pred):
    print(f"{H.label:8s} moment {mu:+.6e}   pairing {p:+.6e}")

###############################################################################
# A tangential perturbation breaks isotropy: the tangential part of A no
# longer matches the derivative of u along the curve. The checker stops at
# that stage instead of reading the moments.

rep = check(generate("tangential_perturbed", seed=7, eps=1e-3))
print("\ntangential perturbation:", rep.verdict, "at stage", rep.stage,
      f"(isotropy residual {rep.moments.isotropy:.1e})")

###############################################################################
# The same pipeline on the unit sphere uses spherical harmonics.

rep = check(generate("random_isotropic", seed=3, n=3, samples=(16, 32)),
            basis=harmonic_basis(3, 1, 6))
print("random isotropic data on the sphere:", rep.verdict,
      f"| max |zeta| {np.abs(rep.fill.zeta).max():.3f}")
