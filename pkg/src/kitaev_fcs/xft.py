"""Exchange fluctuation theorem checks on CGFs and charge distributions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientSupport, ParityError
from .fcs import ChargeDistribution, FrequencyGrid, cgf_curve, charge_distribution
from .model import ChainSpec, ReservoirSpec

__all__ = [
    "XftReport",
    "ComponentCharges",
    "SlopeFit",
    "affinity",
    "gc_symmetry_residual",
    "fit_slope",
    "xft_slope",
    "parity_and_periodicity",
    "branch_reduced_difference",
    "joint_xft_residual",
    "additivity_residual",
    "difference_residual",
    "decompose_components",
    "xft_report",
]

_LAR_NOTE = "LAR: q counts electrons (even support), affinity beta*mu_L per electron"


def affinity(kind: str, res: ReservoirSpec) -> float:
    """Affinity per counted left-lead electron for a single transfer channel.

    ``kind`` is ``"normal"`` (``beta (mu_L - mu_R)``), ``"car"``
    (``beta (mu_L + mu_R)``) or ``"lar"`` (``beta mu_L``; pairs carry twice that).
    """
    if kind == "normal":
        return res.beta * (res.mu_l - res.mu_r)
    if kind == "car":
        return res.beta * (res.mu_l + res.mu_r)
    if kind == "lar":
        return res.beta * res.mu_l
    raise ValueError(f"unknown channel {kind!r}")


def _xi_samples(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def gc_symmetry_residual(chain: ChainSpec, res: ReservoirSpec, grid: FrequencyGrid | None = None,
                         affinity: float = 0.0, n_xi: int = 64) -> float:
    """``max |F(xi) - F(-xi + i A)|`` over ``n_xi`` real fields in ``[0, 2 pi)``."""
    xi = _xi_samples(n_xi)
    f = cgf_curve(chain, res, xi, grid=grid).f_values
    g = cgf_curve(chain, res, -xi + 1j * affinity, grid=grid).f_values
    return float(np.max(np.abs(f - g)))


@dataclass(frozen=True)
class SlopeFit:
    """Weighted fit of ``ln P(q) - ln P(-q) = slope * q``."""

    slope: float
    stderr: float
    residual: float  # weighted rms of the fit residuals
    q: np.ndarray = field(repr=False)
    log_ratio: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)


def _curvature(dist: ChargeDistribution) -> dict[int, float]:
    """Second difference of ``-ln P`` between same-parity neighbours."""
    lp = {int(q): v for q, v in zip(dist.q_values, dist.log_p)}
    out = {}
    for q, v in lp.items():
        a, b = lp.get(q - 2, -np.inf), lp.get(q + 2, -np.inf)
        if np.isfinite(v) and np.isfinite(a) and np.isfinite(b):
            out[q] = -(a - 2 * v + b) / 4.0
    return out


def fit_slope(dist: ChargeDistribution, max_neg_log: float = 30.0) -> SlopeFit:
    """Fit the XFT slope over pairs ``(q, -q)`` with ``-ln P < max_neg_log`` on both sides.

    Weights are the local curvature of ``-ln P`` (averaged over ``q`` and
    ``-q``), so sharply resolved regions count more than the flat tails.
    """
    lp = {int(q): v for q, v in zip(dist.q_values, dist.log_p)}
    qs = np.array(sorted(q for q in lp if q > 0 and q in lp and -q in lp
                         and np.isfinite(lp[q]) and np.isfinite(lp[-q])
                         and -lp[q] < max_neg_log and -lp[-q] < max_neg_log))
    if qs.size < 3:
        raise InsufficientSupport(f"only {qs.size} usable (q, -q) pairs")
    y = np.array([lp[q] - lp[-q] for q in qs])
    curv = _curvature(dist)
    known = np.array(sorted(curv))
    w = np.empty(qs.size)
    for i, q in enumerate(qs):
        pair = []
        for s in (q, -q):
            k = s if s in curv else known[np.argmin(np.abs(known - s))]
            pair.append(curv[int(k)])
        w[i] = max(0.5 * (pair[0] + pair[1]), 1e-12)
    x = qs.astype(float)
    slope = float(np.sum(w * x * y) / np.sum(w * x * x))
    r = y - slope * x
    dof = max(qs.size - 1, 1)
    stderr = float(np.sqrt(np.sum(w * r * r) / dof / np.sum(w * x * x)))
    resid = float(np.sqrt(np.sum(w * r * r) / np.sum(w)))
    return SlopeFit(slope, stderr, resid, qs, y, w)


def xft_slope(dist: ChargeDistribution, max_neg_log: float = 30.0) -> tuple[float, float]:
    """``(slope, stderr)`` of the fluctuation-theorem ratio; see ``fit_slope``."""
    fit = fit_slope(dist, max_neg_log)
    return fit.slope, fit.stderr


def parity_and_periodicity(chain: ChainSpec, res: ReservoirSpec, grid: FrequencyGrid | None = None,
                           dist: ChargeDistribution | None = None, n_xi: int = 64) -> tuple[float, float]:
    """``(odd_mass, periodicity_residual)``.

    ``odd_mass`` sums ``|P(q)|`` over odd ``q`` of the reconstructed
    distribution.  ``periodicity_residual`` is
    ``max |exp(tau F(xi + pi)) - exp(tau F(xi))|`` over real ``xi``, which is
    insensitive to the branch of the logarithm.
    """
    if dist is None:
        dist = charge_distribution(chain, res, grid=grid)
    odd = dist.q_values % 2 == 1
    odd_mass = float(np.sum(np.abs(dist.p_values[odd])))
    xi = _xi_samples(n_xi)
    curve = cgf_curve(chain, res, np.r_[xi, xi + np.pi], grid=grid)
    z = np.exp(curve.tau * curve.f_values)
    periodicity = float(np.max(np.abs(z[n_xi:] - z[:n_xi])))
    return odd_mass, periodicity


def branch_reduced_difference(f_a, f_b, d_omega: float) -> np.ndarray:
    """``|F_a - F_b|`` after removing whole branch windings ``i d_omega / 2 * k``.

    One winding of ``ln Z`` at a single frequency shifts ``F`` by ``i d_omega / 2``.
    """
    d = np.asarray(f_a) - np.asarray(f_b)
    step = d_omega / 2
    k = np.rint(d.imag / step)
    return np.abs(d - 1j * step * k)


def _field_grid(n: int):
    xl, xr = np.meshgrid(_xi_samples(n), _xi_samples(n), indexing="ij")
    return xl.ravel(), xr.ravel()


def joint_xft_residual(chain: ChainSpec, res: ReservoirSpec, grid: FrequencyGrid | None = None,
                       n_xi: int = 8) -> float:
    """``max |F(xl, xr) - F(-xl + i beta mu_L, -xr + i beta mu_R)|`` on an ``n_xi x n_xi`` grid."""
    xl, xr = _field_grid(n_xi)
    f = cgf_curve(chain, res, xl, grid=grid, xi_r=xr).f_values
    g = cgf_curve(chain, res, -xl + 1j * res.beta * res.mu_l, grid=grid,
                  xi_r=-xr + 1j * res.beta * res.mu_r).f_values
    return float(np.max(np.abs(f - g)))


def additivity_residual(chain: ChainSpec, res: ReservoirSpec, grid: FrequencyGrid | None = None,
                        n_xi: int = 8) -> float:
    """``max |F(xl, xr) - F(xl, 0) - F(0, xr)|``: zero when the two interfaces are uncorrelated."""
    xl, xr = _field_grid(n_xi)
    f = cgf_curve(chain, res, xl, grid=grid, xi_r=xr).f_values
    fl = cgf_curve(chain, res, xl, grid=grid, xi_r=np.zeros_like(xr)).f_values
    fr = cgf_curve(chain, res, np.zeros_like(xl), grid=grid, xi_r=xr).f_values
    return float(np.max(np.abs(f - fl - fr)))


def difference_residual(chain: ChainSpec, res: ReservoirSpec, grid: FrequencyGrid | None = None,
                        n_xi: int = 8) -> float:
    """``max |F(xl, xr) - F(xl - xr)|``: zero when charge is conserved in the chain."""
    xl, xr = _field_grid(n_xi)
    f = cgf_curve(chain, res, xl, grid=grid, xi_r=xr).f_values
    g = cgf_curve(chain, res, xl - xr, grid=grid).f_values
    return float(np.max(np.abs(f - g)))


@dataclass(frozen=True)
class ComponentCharges:
    """Split of measured lead charges into normal and crossed-Andreev transfers."""

    q_l_lead: int
    q_r_lead: int
    q_c: int
    q_n: int
    q_l: int = 0
    q_r: int = 0

    @property
    def q_s(self) -> int:
        """Charge absorbed by the condensate."""
        return -self.q_l_lead - self.q_r_lead


def decompose_components(q_l_lead: int, q_r_lead: int) -> ComponentCharges:
    """``q_c = (q_L + q_R)/2`` and ``q_n = (q_L - q_R)/2``, assuming no local Andreev events."""
    if (q_l_lead + q_r_lead) % 2:
        raise ParityError(f"q_L + q_R = {q_l_lead + q_r_lead} is odd")
    return ComponentCharges(q_l_lead, q_r_lead, (q_l_lead + q_r_lead) // 2, (q_l_lead - q_r_lead) // 2)


@dataclass(frozen=True)
class XftReport:
    """Summary of the fluctuation-theorem diagnostics for one configuration."""

    affinity_expected: float
    slope_fitted: float
    slope_stderr: float
    gc_residual: float
    parity_odd_mass: float
    periodicity_residual: float
    fit_residual: float = float("nan")
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def xft_report(chain: ChainSpec, res: ReservoirSpec, grid: FrequencyGrid | None = None,
               affinity_value: float | None = None, channel: str = "normal", n_xi: int = 512) -> XftReport:
    """Run the single-lead checks: GC residual, slope fit, parity and periodicity."""
    a = affinity(channel, res) if affinity_value is None else affinity_value
    dist = charge_distribution(chain, res, grid=grid, n_xi=n_xi)
    fit = fit_slope(dist)
    odd, per = parity_and_periodicity(chain, res, grid=grid, dist=dist)
    notes = (_LAR_NOTE,) if channel == "lar" else ()
    return XftReport(
        affinity_expected=float(a),
        slope_fitted=fit.slope,
        slope_stderr=fit.stderr,
        gc_residual=gc_symmetry_residual(chain, res, grid=grid, affinity=a),
        parity_odd_mass=odd,
        periodicity_residual=per,
        fit_residual=fit.residual,
        notes=notes,
    )
