"""
Quadratic onset and its hbar dependence
=======================================

For a product initial state the entropy starts as S(t) = c t^2.  The
coefficient c follows from four correlation functions of the Hamiltonian in
the initial state, and for fixed classical initial conditions it changes
only weakly with hbar.
"""
import numpy as np

from semient.dynamics import Propagator, entropy_series
from semient.models import BecParams, initial_state, model_hamiltonian
from semient.shorttime import (correlation_coefficient, hbar_scan, linear_onset_test,
                               model_factory, quad_coefficient_from_series)

coords = (1.0, 1.0, 1.0, 1.0)

# %%
# One system: correlation formula against a fit of the evolved series.
params = BecParams(hbar=1.0, n_max=40)
psi0, u0, v0 = initial_state(params, coords)
H = model_hamiltonian(params)
c = correlation_coefficient(H, u0, v0, params.hbar).value
t_hi = np.sqrt(0.01 / c)
series = entropy_series(psi0, Propagator(H), np.linspace(0, t_hi, 41))
fit = quad_coefficient_from_series(series, t_hi, degree=4).value
slope, err = linear_onset_test(series, t_hi)
print(f"correlation formula {c:.8f}")
print(f"onset fit           {fit:.8f}")
print(f"linear term         {slope:.1e} +- {err:.1e}")

# %%
# Same classical point, three values of hbar.
factory = model_factory(lambda hb: BecParams(hbar=hb, n_max=60 if hb < 0.3 else 40), coords)
scan = hbar_scan(factory, [1.0, 0.5, 0.1])
for hb, val in zip(scan.parameters, scan.values):
    print(f"hbar={hb:<4} c={val:.6f}")
print("successive differences", scan.differences)
