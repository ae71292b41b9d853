"""
Spectral and finite-difference Dirichlet solvers
================================================

On a disk the harmonic extension and the Dirichlet-to-Neumann map are
diagonal in Fourier modes. On any other planar Jordan domain, a
Shortley-Weller finite-difference scheme on a Cartesian grid does the same
job to second order. We use the spectral solver as an oracle for the grid.
"""

import numpy as np

from harmjet.dirichlet import dtn_disk, normal_derivative_fd, solve_disk, solve_fd, \
    trace_from_samples
from harmjet.jetgeom import JetBoundary

N = 256
s = 2 * np.pi * np.arange(N) / N
x = np.stack([np.cos(s), np.sin(s)], 1)
exact = lambda p: np.exp(p[:, 0]) * np.cos(p[:, 1])
v = exact(x)[:, None]

###############################################################################
# The DtN map multiplies mode k by |k|.

tr = trace_from_samples(x, np.cos(3 * s))
print("DtN of cos 3s, mode 3 coefficient ratio:",
      (dtn_disk(tr).coeffs[3] / tr.coeffs[3]).real.item())

###############################################################################
# Grid solutions converge at second order toward the spectral oracle.

b = JetBoundary(x, v, np.zeros((N, 1, 2)))
oracle = solve_disk(trace_from_samples(x, v))
prev = None
print("\n  h        max error   ratio    normal-derivative error")
for h in (1 / 32, 1 / 64, 1 / 128):
    sol = solve_fd(b, h=h)
    pts, vals = sol.nodes()
    err = np.abs(vals - oracle.evaluate(pts)).max()
    dn = normal_derivative_fd(sol, b)[:, 0]
    dn_exact = np.einsum("ji,ji->j", oracle.gradient(x)[:, 0], x)
    ratio = "" if prev is None else f"{prev / err:.2f}"
    print(f"1/{round(1 / h):<4d}  {err:.3e}   {ratio:6s}   {np.abs(dn - dn_exact).max():.3e}")
    prev = err

###############################################################################
# On an ellipse a linear trace is reproduced exactly by the scheme.

xe = np.stack([2 * np.cos(s), np.sin(s)], 1)
be = JetBoundary(xe, xe[:, :1], np.zeros((N, 1, 2)))
pts, vals = solve_fd(be, h=1 / 64).nodes()
print("\nellipse, V = x1:", f"max error {np.abs(vals[:, 0] - pts[:, 0]).max():.1e}",
      f"on {len(pts)} nodes")
