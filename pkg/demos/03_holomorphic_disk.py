"""
Loops in C^m that bound holomorphic disks
=========================================

A loop (z^1, ..., z^m) whose last coordinate w traces a Jordan curve bounds a
holomorphic disk over that curve only if every holomorphic 1-form integrates
to zero around it. When it does, the loop lifts to isotropic boundary data
of a harmonic system. Filling that data and differentiating recovers the
disk.
"""

import numpy as np

from harmjet.holo import ComplexLoop, fill_holo, generate_loop, holo_check, lift

N = 256
w = np.exp(-2j * np.pi * np.arange(N) / N)

###############################################################################
# The loop (w^3, w) is a holomorphic graph: all moments vanish and the
# reconstruction matches the loop to roundoff.

res = fill_holo(ComplexLoop(np.stack([w ** 3, w], 1)))
print("w^3:", res.verdict, f"| trace error {res.trace_error:.1e}",
      f"| Cauchy-Riemann residual {res.cr_residual:.1e}")

###############################################################################
# Adding eps * conj(w)^j leaves a moment of size j * 2 pi * eps, which the
# w^(j-1) dz^1 test picks up.

for j in (1, 2, 3):
    loop = generate_loop(seed=0, deg=3, eps=1e-3, power=j)
    rep = holo_check(loop)
    k = int(np.argmax(np.abs(rep.moments)))
    print(f"conj(w)^{j}: largest moment {abs(rep.moments[k]):.6e} from {rep.labels[k]};",
          f"expected {j * 2 * np.pi * 1e-3:.6e}")

###############################################################################
# The lift integrates Re(z^1 dw). A loop for which that integral does not
# close cannot be lifted.

try:
    lift(ComplexLoop(np.stack([1j * np.conj(w), w], 1)))
except Exception as exc:
    print("\nlift of i conj(w):", type(exc).__name__, "-", exc)
