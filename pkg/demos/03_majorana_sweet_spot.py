"""The sweet spot mu = 0, delta = eta: only local Andreev pairs cross the left interface.

Shows even-only transport, the pi-periodicity of exp(tau F), independence of
the chain length, the uncorrelated left/right currents and the quantised
zero-bias conductance.

    python3 demos/03_majorana_sweet_spot.py
"""
import numpy as np

from kitaev_fcs import ChainSpec, ReservoirSpec, cgf_curve, charge_distribution, majorana_conductance
from kitaev_fcs.xft import additivity_residual, fit_slope, parity_and_periodicity

res = ReservoirSpec(0.3, 0.3, mu_l=0.05, mu_r=-0.05, beta=10.0)
chain = ChainSpec(10, mu=0.0, eta=1.0, delta=1.0)

# %% distribution
dist = charge_distribution(chain, res)
odd, per = parity_and_periodicity(chain, res, dist=dist)
print(f"odd-q mass {odd:.2e}, max |exp(tau F(xi+pi)) - exp(tau F(xi))| {per:.2e}")
print("slope", fit_slope(dist).slope, "(beta mu_L = 0.5 per electron)")
print("P(q) near q=0:", {int(q): float(np.exp(lp)) for q, lp in zip(dist.q_values, dist.log_p) if abs(q) <= 4})

# %% length independence
xi = np.linspace(0, 2 * np.pi, 17)
ref = cgf_curve(ChainSpec(3, mu=0.0, eta=1.0, delta=1.0), res, xi).f_values
for n in (5, 10, 20):
    f = cgf_curve(ChainSpec(n, mu=0.0, eta=1.0, delta=1.0), res, xi).f_values
    print(f"N={n:2d}: max |F_N - F_3| = {np.max(np.abs(f - ref)):.1e}")

# %% the two interfaces are independent
print("max |F(xl, xr) - F(xl, 0) - F(0, xr)| =", additivity_residual(chain, res))

# %% zero-bias conductance in units of 2e^2/h = 1/pi
for gl in (0.1, 0.3, 1.0):
    g = majorana_conductance(ReservoirSpec(gl, 0.3), beta=1e4)
    print(f"Gamma_L={gl}: G = {g:.6f}   pi G = {np.pi * g:.6f}")
