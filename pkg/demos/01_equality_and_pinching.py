"""
Equality cases and pinching gaps
================================

Round spheres realise equality in the moment, radius and Reilly
inequalities.  Perturbing the sphere by a small cosine bump opens all three
gaps: the moment gap quadratically, the radius and Reilly gaps linearly.
"""
import numpy as np

from pinchlab.geometry import bump_sphere, round_sphere
from pinchlab.inequalities import fmap_defect, moment_gap
from pinchlab.measure import field_Z, hsiung_defect, sup_norm
from pinchlab.spectrum import warped_spectrum


def lambda_1(M):
    return float(warped_spectrum(M, 2).values(2)[1])


print("round spheres")
for R in (0.5, 1.0, 2.0):
    M = round_sphere(2, R)
    rep = moment_gap(M, 2, lambda_1=lambda_1(M))
    print(f"  R={R:<4} eps_P={rep.eps_P:+.1e} eps_R={rep.eps_R:+.1e} eps_L={rep.eps_Lambda:+.1e}"
          f"  |Z|_inf={sup_norm(M, field_Z):.1e}  hsiung={hsiung_defect(M):+.1e}")

# the bump family phi = delta cos 2r
print("\ncosine bumps")
print("  delta    eps_P      eps_R      eps_L      F-map defect")
deltas = np.array([0.2, 0.1, 0.05, 0.025])
gaps = []
for d in deltas:
    M = bump_sphere(2, d)
    rep = moment_gap(M, 2, lambda_1=lambda_1(M))
    gaps.append(rep.eps_P)
    print(f"  {d:<7} {rep.eps_P:.3e}  {rep.eps_R:.3e}  {rep.eps_Lambda:.3e}  {fmap_defect(M):.3e}")

slope = np.polyfit(np.log(deltas), np.log(gaps), 1)[0]
print(f"\nmoment gap ~ delta^{slope:.2f}")
