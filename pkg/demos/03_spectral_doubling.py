"""
Spectral doubling on the dumbbell
=================================

Each eigenvalue of the unit sphere appears twice in the dumbbell spectrum
in the limit, and a small eigenvalue lambda_1 ~ 1/log(1/eps) separates the
two copies of the constant function.  The odd zonal mode converges at the
same slow logarithmic rate, which is why its deviation from the limit is
still 0.43 at eps = 1e-3.
"""
import numpy as np

from pinchlab.dumbbell import build_dumbbell, spectrum_targets
from pinchlab.inequalities import moment_gap
from pinchlab.spectrum import warped_spectrum

target = spectrum_targets(2, 9)
print("targets " + " ".join(f"{t:6g}" for t in target))
for eps in (1e-1, 1e-2, 1e-3, 1e-4, 1e-6):
    M = build_dumbbell(2, 0, eps)
    res = warped_spectrum(M, 9)
    vals = res.values(9)
    print(f"eps={eps:<7g} " + " ".join(f"{v:6.3f}" for v in vals)
          + f"   max dev (sigma<=7) {np.max(np.abs(vals - target)[:8]):.3f}")

M = build_dumbbell(2, 0, 1e-3)
res = warped_spectrum(M, 9)
print("\nmodes at eps = 1e-3 (i: circle degree, j: even/odd across the neck, radial index)")
for e in res.eigenvalues:
    print(f"  {e.value:9.5f} x{e.multiplicity}  mode {e.mode}")

rep = moment_gap(M, 2, lambda_1=float(res.values(2)[1]))
print(f"\nmoment gap {rep.eps_P:.2e}, radius gap {rep.eps_R:.2e}, Reilly gap {rep.eps_Lambda:.2f}")
