"""
A doorway state coupled to a dense background
=============================================

One doorway resonance of width Gamma_s feeds an equidistant ladder of fine
levels. Averaged over one level spacing the fine structure collapses onto a
smooth Breit-Wigner shape, more closely as Gamma_s/d grows. Absorption then destroys the weak-localization
correction to the conductance.
"""
import numpy as np

from kickosc import transport as tr

p = tr.DoorwayParams(gamma_lead1=[1.0], gamma_lead2=[1.0], gamma_s=40.0, d=1.0)
roots = tr.fine_structure_roots(p, (-5, 5))
print("fine resonances in [-5, 5]:", np.round(roots, 3))

print("\n  k   period average   smooth form")
for k in (0, 5, 20):
    avg = tr.period_average(lambda e: tr.cross_section_fine(e, p, 0, 1), p, k)
    smooth = tr.averaged_cross_section((k + 0.5) * p.d, p, 0, 1)
    print(f"{k:3d}  {avg:14.5f}  {smooth:12.5f}")

print("\nkappa      Delta G (gamma_s = 25, M1 = M2 = 2)")
for kappa in (0.0, 0.1, 1.0, 10.0, 100.0):
    print(f"{kappa:<9g}  {tr.weak_localization(tr.WeakLocParams(2, 2, 25.0, kappa)):.5f}")
