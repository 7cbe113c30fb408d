"""The nine acceptance criteria, each at its stated tolerance.

Every test records a one-line verdict that is printed in the terminal
summary under "acceptance criteria", then asserts.
"""
import time

import numpy as np
import pytest

from kitaev_fcs import (ChainSpec, CountingField, FrequencyGrid, ReservoirSpec, cf_at_frequency, cgf, cgf_curve,
                        charge_distribution, cumulants)
from kitaev_fcs.oracles import CASES, analytic_cf, landauer_current, majorana_conductance
from kitaev_fcs.xft import (additivity_residual, affinity, fit_slope, gc_symmetry_residual, joint_xft_residual,
                            parity_and_periodicity)

pytestmark = pytest.mark.slow

RES = ReservoirSpec(0.3, 0.3, mu_l=0.05, mu_r=-0.05, beta=10.0)
XI = 2 * np.pi * np.arange(64) / 64


def _record(verdicts, num, checks, extra=""):
    """``checks`` is a list of (label, value, passed)."""
    ok = all(p for _, _, p in checks)
    parts = [f"{label}={value:.3g}{'' if p else ' (!)'}" for label, value, p in checks]
    verdicts[num] = (ok, ", ".join(parts) + (f"; {extra}" if extra else ""))
    return ok


def _grid(chain, d_omega=0.01, res=RES):
    return FrequencyGrid.auto(chain, res, d_omega)


def test_criterion_1_oracle_equivalence(verdicts):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240611)
    checks = []
    for tag in ("trivial3", "pairing3", "pairing4", "majorana", "general3"):
        case = CASES[tag]
        chain = case.default_chain(mu=rng.uniform(-1.5, 1.5), delta=rng.uniform(0.5, 1.5))
        w = _grid(chain).half_width
        err = 0.0
        for xi, om in zip(rng.uniform(0, 2 * np.pi, 120), rng.uniform(-w, w, 120)):
            a = analytic_cf(tag, chain, RES, xi, om)
            b = cf_at_frequency(chain, RES, CountingField(xi), om)
            err = max(err, abs(a - b) / abs(a))
        checks.append((f"{tag}_relerr", err, err < 1e-8))
    dt = time.perf_counter() - t0
    checks.append(("seconds", dt, dt < 10))
    assert _record(verdicts, 1, checks, "120 samples per case")


def test_criterion_2_figure_2(verdicts):
    t0 = time.perf_counter()
    chain = ChainSpec(10, mu=1.0, eta=1.0, delta=0.0)
    fit = fit_slope(charge_distribution(chain, RES))
    gc = gc_symmetry_residual(chain, RES, affinity=affinity("normal", RES))
    dt = time.perf_counter() - t0
    assert _record(verdicts, 2, [("slope", fit.slope, abs(fit.slope - 1) < 0.02),
                                 ("gc_residual", gc, gc < 1e-8), ("seconds", dt, dt < 120)])


def test_criterion_3_figure_3(verdicts):
    t0 = time.perf_counter()
    even = ChainSpec(10, mu=0.0, eta=0.0, delta=1.0)
    odd = ChainSpec(11, mu=0.0, eta=0.0, delta=1.0)
    current = cumulants(even, RES, max_order=1)[0]
    d = charge_distribution(even, RES)
    lp = dict(zip(d.q_values.tolist(), d.rate))
    asym = max(abs(lp[q] - lp[-q]) for q in lp if q > 0 and -q in lp and np.isfinite(lp[q]) and np.isfinite(lp[-q]))
    slope = fit_slope(charge_distribution(odd, RES)).slope
    dt = time.perf_counter() - t0
    assert _record(verdicts, 3, [("even_current", abs(current), abs(current) < 1e-6),
                                 ("even_rate_asymmetry", asym, asym < 1e-4),
                                 ("odd_slope", slope, abs(slope - 1) < 0.02), ("seconds", dt, dt < 180)])


def test_criterion_4_figure_4(verdicts):
    t0 = time.perf_counter()
    chain = ChainSpec(10, mu=0.0, eta=1.0, delta=1.0)
    dist = charge_distribution(chain, RES)
    odd, per = parity_and_periodicity(chain, RES, dist=dist)
    slope = fit_slope(dist).slope
    g = majorana_conductance(RES, beta=1e4)
    dt = time.perf_counter() - t0
    assert _record(verdicts, 4, [("odd_mass", odd, odd < 1e-10), ("periodicity", per, per < 1e-8),
                                 ("slope", slope, abs(slope - 0.5) < 0.01),
                                 ("conductance-1/pi", abs(g - 1 / np.pi), abs(g - 1 / np.pi) < 1e-3),
                                 ("seconds", dt, dt < 120)])


def test_criterion_5_figure_5(verdicts):
    chain = ChainSpec(10, mu=1.0, eta=1.0, delta=1.0)
    fit = fit_slope(charge_distribution(chain, RES))
    checks = [("slope-0.5", abs(fit.slope - 0.5), abs(fit.slope - 0.5) < 1e-3)]
    for kind in ("normal", "car", "lar"):
        r = gc_symmetry_residual(chain, RES, affinity=affinity(kind, RES))
        checks.append((f"gc_{kind}", r, r > 1e-3))
    pure = fit_slope(charge_distribution(ChainSpec(10, mu=0.0, eta=1.0, delta=1.0), RES)).residual
    literal = gc_symmetry_residual(chain, RES, affinity=2 * RES.beta * RES.mu_l)
    extra = (f"fit residual {fit.residual:.3g} vs pure LAR {pure:.3g}; "
             f"GC residual at 2*beta*mu_L = {literal:.3g} (not an XFT affinity for electron counting)")
    assert fit.residual > pure
    assert _record(verdicts, 5, checks, extra)


def test_criterion_6_landauer(verdicts):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(5):
        chain = ChainSpec(3, mu=rng.uniform(-1.5, 1.5), eta=rng.uniform(0.5, 1.5))
        res = ReservoirSpec(rng.uniform(0.1, 0.5), rng.uniform(0.1, 0.5), mu_l=rng.uniform(-0.3, 0.3),
                            mu_r=rng.uniform(-0.3, 0.3), beta=rng.uniform(5, 20))
        c1 = cumulants(chain, res, max_order=1)[0]
        ref = landauer_current(chain, res)
        worst = max(worst, abs(c1 - ref) / abs(ref))
    assert _record(verdicts, 6, [("max_relerr", worst, worst < 1e-6)], "5 random parameter sets")


def test_criterion_7_site_number_independence(verdicts):
    curves = {n: cgf_curve(ChainSpec(n, mu=0.0, eta=1.0, delta=1.0), RES, XI).f_values for n in (3, 5, 10)}
    dev = max(np.max(np.abs(curves[n] - curves[3])) for n in (5, 10))
    assert _record(verdicts, 7, [("max_deviation", dev, dev < 1e-8)])


def test_criterion_8_joint_fields(verdicts):
    joint = joint_xft_residual(ChainSpec(10, mu=1.0, eta=1.0, delta=1.0), RES)
    add = additivity_residual(ChainSpec(10, mu=0.0, eta=1.0, delta=1.0), RES)
    assert _record(verdicts, 8, [("joint_xft", joint, joint < 1e-8), ("majorana_additivity", add, add < 1e-8)])


def _rate_drift(chain, d_omega):
    """Max change of the rate function at fixed q / tau when d_omega is halved."""
    coarse = charge_distribution(chain, RES, grid=_grid(chain, d_omega))
    fine = charge_distribution(chain, RES, grid=_grid(chain, d_omega / 2), n_xi=1024)
    drift = 0.0
    for q, h in zip(coarse.q_values, coarse.rate):
        hf = -fine.log_prob(2 * q) / fine.tau
        if np.isfinite(h) and np.isfinite(hf):
            drift = max(drift, abs(h - hf))
    return drift


def _slope(chain, d_omega):
    return fit_slope(charge_distribution(chain, RES, grid=_grid(chain, d_omega), n_xi=1024)).slope


def test_criterion_9_invariants(verdicts):
    trivial = ChainSpec(10, mu=1.0, eta=1.0, delta=0.0)
    majorana = ChainSpec(10, mu=0.0, eta=1.0, delta=1.0)
    general = ChainSpec(10, mu=1.0, eta=1.0, delta=1.0)
    checks = []
    norm, f0, conj, c2min = 0.0, 0.0, 0.0, np.inf
    for chain in (trivial, majorana, general):
        d = charge_distribution(chain, RES)
        norm = max(norm, abs(np.exp(d.log_p).sum() - 1))
        f0 = max(f0, abs(cgf(chain, RES, CountingField())))
        f = cgf_curve(chain, RES, XI).f_values
        g = cgf_curve(chain, RES, -XI).f_values
        conj = max(conj, np.max(np.abs(g - np.conj(f))))
        c2min = min(c2min, cumulants(chain, RES, max_order=2)[1])
    checks += [("norm", norm, norm < 1e-8), ("F0", f0, f0 == 0), ("conjugation", conj, conj < 1e-10),
               ("min_C2", c2min, c2min >= 0)]
    coarse_drift = max(_rate_drift(c, 0.01) for c in (trivial, majorana))
    drift = max(_rate_drift(c, 0.005) for c in (trivial, majorana))
    checks.append(("rate_drift_0.005", drift, drift < 1e-3))
    sdrift = max(abs(_slope(c, 0.01) - _slope(c, 0.005)) for c in (trivial, majorana, general))
    checks.append(("slope_drift", sdrift, sdrift < 1e-3))
    assert _record(verdicts, 9, checks, f"rate drift from d_omega=0.01 is {coarse_drift:.3g} (finite-tau prefactor)")
