"""Closed-form short-chain characteristic functions against the determinant formula.

    python3 demos/05_oracles.py
"""
import numpy as np

from kitaev_fcs import CountingField, ReservoirSpec, cf_at_frequency
from kitaev_fcs.oracles import CASES, analytic_cf, laurent_coefficients

res = ReservoirSpec(0.3, 0.3, mu_l=0.05, mu_r=-0.05, beta=10.0)
rng = np.random.default_rng(1)

for tag, case in CASES.items():
    chain = case.default_chain()
    err = 0.0
    for xi, w in zip(rng.uniform(0, 2 * np.pi, 200), rng.uniform(-4, 4, 200)):
        a = analytic_cf(tag, chain, res, xi, w)
        err = max(err, abs(a - cf_at_frequency(chain, res, CountingField(xi), w)) / abs(a))
    print(f"{tag:9s} N={chain.n_sites}  max rel. error {err:.1e}   ({case.description})")

# %% Laurent coefficients at one frequency: probabilities of transferring j charges
c = laurent_coefficients("general3", CASES["general3"].default_chain(), res, 0.05)
print({j: f"{v:.3e}" for j, v in sorted(c.items())})
