"""
Building the dumbbell
=====================

Two concentric sheets 1 +- phi_eps are glued along a catenoid-like neck of
waist eps.  As eps -> 0 the mean curvature stays bounded in sup norm, the
surface converges to the unit sphere in the sense of |X| and ||H - 1||_1,
yet the L^3 norm of the second fundamental form blows up.
"""
import numpy as np

from pinchlab.dumbbell import build_dumbbell, build_phi_eps, check_convergence, sweep_convergence
from pinchlab.measure import hsiung_defect, volume

prof = build_phi_eps(2, 0, 1e-3)
r = np.geomspace(1e-3 * (1 + 1e-6), prof.bridge.r0 + prof.bridge.h, 9)
phi, d1, d2 = prof.eval(r)
print(f"profile at eps = 1e-3, b_eps = {prof.b_eps:.4f}")
print("  r          phi        phi'       phi''")
for row in zip(r, phi, d1, d2):
    print("  " + "  ".join(f"{x:+.3e}" for x in row))
rn = 1e-3 * (1 + np.geomspace(1e-6, prof.a / 1e-3, 2000))
_, d1, d2 = prof.eval(rn)
scale = np.abs(d2) + (1 + d1**2) * np.abs(d1) / rn
print(f"  max |ODE residual| / scale on the neck: {np.max(np.abs(prof.ode_residual(rn)) / scale):.1e}")

M = build_dumbbell(2, 0, 1e-3)
print(f"\nlength {M.length:.6f}, volume {volume(M):.6f} (two unit spheres: {8 * np.pi:.6f})")
print(f"integrated identity defect {hsiung_defect(M):+.2e}")

rows = sweep_convergence()
keys = [k for k in rows[0] if k != "eps"]
print("\n  eps     " + "  ".join(f"{k:>13}" for k in keys))
for row in rows:
    print(f"  {row['eps']:<7g} " + "  ".join(f"{row[k]:13.5g}" for k in keys))
for name, ok, detail in check_convergence(rows):
    print(f"  {'ok  ' if ok else 'FAIL'} {name}: {detail}")
