"""
Dicke model: averaged entanglement and its plateau
==================================================

Average the entropy of several coherent states placed along one classical
orbit, then fit S(t) = A0 (1 - exp(-A1 t)).  Initial conditions are scaled
by sqrt(J) so that every J follows the same classical orbit.  This takes a
few seconds per J.
"""
import numpy as np

from semient.harness import dicke_mean_entanglement, fit_saturation
from semient.models import DickeParams

r1 = (0.5, 0.0, 0.0, 0.0)
t = np.linspace(0, 120, 361)

# %%
for two_j, n_max in ((7, 30), (13, 45)):
    params = DickeParams(two_j=two_j, n_max=n_max)
    mean, members, diag = dicke_mean_entanglement(params, r1, t, m=8)
    fit = fit_saturation(mean)
    print(f"J={two_j / 2}: A0={fit.a0:.4f} A1={fit.a1:.4f} rms={fit.rms:.4f} "
          f"leakage_ok={diag['leakage_ok']}")
