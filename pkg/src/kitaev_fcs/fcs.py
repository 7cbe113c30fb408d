"""Cumulant generating function, cumulants and charge distribution.

For each frequency the characteristic function ``Z(xi, omega)`` is a Laurent
polynomial of degree at most two in ``exp(i xi)`` per counted lead, because
the counting field only enters the 4x4 (or 8x8) lead-site block.  The
coefficients are extracted once per frequency by a small FFT over a Schur
complement of the dressed propagator; every later evaluation of ``Z`` is a
cheap contraction with that table.
"""
from __future__ import annotations

import functools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchAmbiguity, SingularPropagator, StepTooSmall, TailNotConverged
from .keldysh import CountingField, det_ratio, dressed_inverse_propagator, lead_blocks
from .model import ChainSpec, ReservoirSpec

__all__ = [
    "FrequencyGrid",
    "CfTable",
    "CgfCurve",
    "ChargeDistribution",
    "cf_table",
    "cf_at_frequency",
    "continued_log_cf",
    "cgf",
    "cgf_curve",
    "cumulants",
    "charge_distribution",
]

TAIL_TOL = 1e-12
DEGREE = 2  # max |power| of exp(i xi) per lead
_N_SAMPLE = 8  # FFT points per field, > 2*DEGREE + 1
BASE_STEP = 2 * np.pi / 1024
MIN_STEP = 2 * np.pi / 2**16
MAX_JUMP = np.pi / 4
_CHUNK = 256


@dataclass(frozen=True)
class FrequencyGrid:
    """Symmetric midpoint grid ``omega_k = (k + 1/2) d_omega`` on ``[-half_width, half_width]``.

    ``half_width`` is rounded up to a multiple of ``d_omega`` so the grid is
    invariant under ``omega -> -omega``.  The measurement time is
    ``tau = 2 pi / d_omega``.
    """

    d_omega: float
    half_width: float

    def __post_init__(self):
        if not (self.d_omega > 0 and np.isfinite(self.d_omega)):
            raise ValueError("d_omega must be positive")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        m = math.ceil(self.half_width / self.d_omega - 1e-9)
        object.__setattr__(self, "half_width", m * self.d_omega)

    @classmethod
    def auto(cls, chain: ChainSpec, res: ReservoirSpec, d_omega: float, extra: float = 0.0):
        """Default window ``|mu| + 2(|eta|+|delta|) + 10 max(gamma) + 10/beta`` (plus ``extra``)."""
        w = chain.bandwidth + 10 * max(res.gamma_l, res.gamma_r) + 10 / res.beta + extra
        w += max(abs(res.mu_l), abs(res.mu_r))
        return cls(d_omega, w)

    @property
    def n_points(self) -> int:
        return 2 * round(self.half_width / self.d_omega)

    @property
    def omegas(self) -> np.ndarray:
        m = self.n_points // 2
        return (np.arange(-m, m) + 0.5) * self.d_omega

    @property
    def tau(self) -> float:
        return 2 * np.pi / self.d_omega

    @property
    def weight(self) -> float:
        """Quadrature weight ``d_omega / (4 pi)`` of each ``ln Z`` term."""
        return self.d_omega / (4 * np.pi)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("KITAEV_FCS_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class CfTable:
    """Laurent coefficients of ``Z(xi, omega)`` on a frequency grid.

    ``coeffs[w, j]`` multiplies ``exp(i (j - 2) xi)`` for one counted lead,
    ``coeffs[w, j, k]`` multiplies ``exp(i((j-2) xi_l + (k-2) xi_r))`` for two.
    """

    omegas: np.ndarray
    coeffs: np.ndarray
    counted: tuple[str, ...]
    grid: FrequencyGrid

    @property
    def powers(self) -> np.ndarray:
        return np.arange(-DEGREE, DEGREE + 1)

    def evaluate(self, xi_l, xi_r=None) -> np.ndarray:
        """``Z`` at the points ``xi_l`` (and ``xi_r``); shape ``xi.shape + (n_omega,)``."""
        xi_l = np.asarray(xi_l, dtype=complex)
        el = np.exp(1j * xi_l[..., None] * self.powers)
        if len(self.counted) == 1:
            if xi_r is not None:
                raise ValueError("single-field table takes one counting field")
            return el @ self.coeffs.T
        xi_r = np.zeros_like(xi_l) if xi_r is None else np.asarray(xi_r, dtype=complex)
        er = np.exp(1j * xi_r[..., None] * self.powers)
        outer = (el[..., :, None] * er[..., None, :]).reshape(el.shape[:-1] + (-1,))
        return outer @ self.coeffs.reshape(self.coeffs.shape[0], -1).T

    def derivative(self, xi, order: int) -> np.ndarray:
        """``d^n Z / d xi^n`` for a single-field table."""
        xi = np.asarray(xi, dtype=complex)
        p = self.powers
        e = (1j * p) ** order * np.exp(1j * xi[..., None] * p)
        return e @ self.coeffs.T


def _schur_blocks(chain: ChainSpec, res: ReservoirSpec, omegas: np.ndarray, sites: list[int]) -> np.ndarray:
    """``[D^-1]_SS`` for the zero-field dressed inverse propagator ``D``."""
    idx = np.concatenate([np.arange(4 * s, 4 * s + 4) for s in sites])
    d = dressed_inverse_propagator(chain, res, CountingField(), omegas)
    rhs = np.zeros((d.shape[-1], idx.size), dtype=complex)
    rhs[idx, np.arange(idx.size)] = 1.0
    try:
        x = np.linalg.solve(d, np.broadcast_to(rhs, d.shape[:-2] + rhs.shape))
    except np.linalg.LinAlgError as exc:
        raise SingularPropagator("dressed propagator is singular on the frequency grid") from exc
    return x[..., idx, :]


def _table_chunk(chain: ChainSpec, res: ReservoirSpec, omegas: np.ndarray, two_field: bool) -> np.ndarray:
    n = chain.n_sites
    thetas = 2 * np.pi * np.arange(_N_SAMPLE) / _N_SAMPLE
    if n == 1 or not two_field:
        g = _schur_blocks(chain, res, omegas, [0])
        size = 4
    else:
        g = _schur_blocks(chain, res, omegas, [0, n - 1])
        size = 8
    sig_l0 = lead_blocks("left", 0.0, omegas, res)
    sig_r0 = lead_blocks("right", 0.0, omegas, res)
    dl = lead_blocks("left", thetas[:, None], omegas, res) - sig_l0  # (M, W, 4, 4)
    if two_field:
        dr = lead_blocks("right", thetas[:, None], omegas, res) - sig_r0
    eye = np.eye(size)
    nw = omegas.size
    if not two_field:
        ds = np.zeros((_N_SAMPLE, nw, size, size), dtype=complex)
        ds[..., :4, :4] = dl
        z = np.linalg.det(eye - g[None] @ ds)  # (M, W)
        c = np.fft.fft(z, axis=0) / _N_SAMPLE
        keep = np.r_[np.arange(-DEGREE, 0) % _N_SAMPLE, np.arange(0, DEGREE + 1)]
        rest = np.setdiff1d(np.arange(_N_SAMPLE), keep)
        _check_degree(c[rest])
        return c[keep].T  # (W, 5)
    ds = np.zeros((_N_SAMPLE, _N_SAMPLE, nw, size, size), dtype=complex)
    if n == 1:
        ds[...] = dl[:, None] + dr[None, :]
    else:
        ds[..., :4, :4] = dl[:, None]
        ds[..., 4:, 4:] = dr[None, :]
    z = np.linalg.det(eye - g[None, None] @ ds)  # (M, M, W)
    c = np.fft.fft2(z, axes=(0, 1)) / _N_SAMPLE**2
    keep = np.r_[np.arange(-DEGREE, 0) % _N_SAMPLE, np.arange(0, DEGREE + 1)]
    rest = np.setdiff1d(np.arange(_N_SAMPLE), keep)
    _check_degree(c[rest])
    _check_degree(c[:, rest])
    return np.moveaxis(c[np.ix_(keep, keep)], -1, 0)  # (W, 5, 5)


def _check_degree(c: np.ndarray) -> None:
    if c.size and np.max(np.abs(c)) > 1e-9:
        raise RuntimeError(f"characteristic function exceeds Laurent degree {DEGREE} (residual {np.max(np.abs(c)):.2e})")


@functools.lru_cache(maxsize=32)
def cf_table(chain: ChainSpec, res: ReservoirSpec, grid: FrequencyGrid, two_field: bool = False) -> CfTable:
    """Build (and cache) the Laurent coefficient table on ``grid``.

    Frequencies are processed in chunks, optionally in parallel with
    ``KITAEV_FCS_WORKERS`` threads.  The chunking does not change the result.
    """
    omegas = grid.omegas
    chunks = [omegas[i:i + _CHUNK] for i in range(0, omegas.size, _CHUNK)]
    work = functools.partial(_table_chunk, chain, res, two_field=two_field)
    nw = _workers()
    if nw > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=nw) as ex:
            parts = list(ex.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    coeffs = np.concatenate(parts, axis=0)
    coeffs.setflags(write=False)
    omegas.setflags(write=False)
    counted = ("left", "right") if two_field else ("left",)
    return CfTable(omegas=omegas, coeffs=coeffs, counted=counted, grid=grid)


def cf_at_frequency(chain: ChainSpec, res: ReservoirSpec, cf: CountingField, omega: float) -> complex:
    """Per-frequency characteristic function from a direct LU determinant ratio."""
    return det_ratio(chain, res, cf, omega)


# ---------------------------------------------------------------- continuation


def _eval(table: CfTable, pts: np.ndarray) -> np.ndarray:
    if pts.ndim == 1:
        return table.evaluate(pts)
    return table.evaluate(pts[:, 0], pts[:, 1])


def _phase_increment(table: CfTable, a, b, za, zb, step: float) -> np.ndarray:
    """Continuous change of ``arg Z`` from point ``a`` to ``b``, refining as needed."""
    d = np.angle(zb / za)
    if np.max(np.abs(d)) <= MAX_JUMP:
        return d
    if step / 2 < MIN_STEP:
        if np.max(np.abs(d)) > np.pi / 2:
            raise BranchAmbiguity(f"phase jump {np.max(np.abs(d)):.3f} rad persists at step {step:.2e}")
        return d
    mid = (a + b) / 2
    zm = _eval(table, np.asarray(mid)[None])[0]
    if np.any(zm == 0):
        raise BranchAmbiguity("characteristic function vanishes on the continuation path")
    return (_phase_increment(table, a, mid, za, zm, step / 2)
            + _phase_increment(table, mid, b, zm, zb, step / 2))


def _increments(table: CfTable, pts: np.ndarray, z: np.ndarray, step: float) -> np.ndarray:
    """Phase increments between consecutive rows of ``z`` (points ``pts``)."""
    if np.any(z == 0):
        raise BranchAmbiguity("characteristic function vanishes on the continuation path")
    d = np.angle(z[1:] / z[:-1])
    for k in np.nonzero(np.max(np.abs(d), axis=1) > MAX_JUMP)[0]:
        d[k] = _phase_increment(table, pts[k], pts[k + 1], z[k], z[k + 1], step)
    return d


def _sweep(table: CfTable, kappa: float, dists: np.ndarray, sign: float) -> np.ndarray:
    """Continue ``ln Z`` from ``i kappa`` to ``i kappa + sign*dists`` (``dists`` ascending, > 0).

    ``Z`` is real and positive at ``i kappa``, so the sweep starts on the
    principal branch.
    """
    verts = np.r_[0.0, dists]
    n_sub = np.maximum(1, np.ceil(np.diff(verts) / BASE_STEP).astype(int))
    pieces = [np.zeros(1)]
    for v0, v1, m in zip(verts[:-1], verts[1:], n_sub):
        pieces.append(v0 + (v1 - v0) * np.arange(1, m + 1) / m)
    pts = sign * np.concatenate(pieces) + 1j * kappa
    marks = np.cumsum(n_sub)
    z = table.evaluate(pts)
    if np.any(z[0].real <= 0):
        raise BranchAmbiguity("characteristic function is not positive on the imaginary axis")
    d = _increments(table, pts, z, BASE_STEP)
    phase = np.concatenate([np.zeros((1, z.shape[1])), np.cumsum(d, axis=0)])
    return np.log(np.abs(z[marks])) + 1j * phase[marks]


def _continue_single(table: CfTable, xi: np.ndarray) -> np.ndarray:
    """Points sharing ``Im xi`` are reached by outward sweeps along one horizontal line."""
    logs = np.empty((xi.size, table.omegas.size), dtype=complex)
    for kappa in np.unique(xi.imag):
        grp = np.nonzero(xi.imag == kappa)[0]
        on_axis = grp[xi.real[grp] == 0]
        if on_axis.size:
            z = table.evaluate(np.array([1j * kappa]))[0]
            if np.any(z.real <= 0):
                raise BranchAmbiguity("characteristic function is not positive on the imaginary axis")
            logs[on_axis] = np.log(z.real)
        for sign in (1.0, -1.0):
            sel = grp[sign * xi.real[grp] > 0]
            if sel.size == 0:
                continue
            dist = sign * xi.real[sel]
            order = np.argsort(dist, kind="stable")
            sel, dist = sel[order], dist[order]
            uniq, inv = np.unique(dist, return_inverse=True)
            logs[sel] = _sweep(table, kappa, uniq, sign)[inv]
    return logs


def _continue_batch(table: CfTable, tgt: np.ndarray) -> np.ndarray:
    """Straight segments ``i Im(tgt) -> tgt`` for many two-field points at once."""
    start = 1j * tgt.imag
    z0 = _eval(table, start)
    if np.any(z0.real <= 0):
        raise BranchAmbiguity("characteristic function is not positive on the imaginary axis")
    length = np.max(np.abs(tgt.real), axis=1)
    n_steps = max(1, math.ceil(length.max() / BASE_STEP))
    step = length.max() / n_steps
    phase = np.zeros(z0.shape)
    z_prev = z0
    for k in range(1, n_steps + 1):
        pts = start + (tgt - start) * (k / n_steps)
        z = _eval(table, pts)
        if np.any(z == 0):
            raise BranchAmbiguity("characteristic function vanishes on the continuation path")
        d = np.angle(z / z_prev)
        for i in np.nonzero(np.max(np.abs(d), axis=1) > MAX_JUMP)[0]:
            prev = start[i] + (tgt[i] - start[i]) * ((k - 1) / n_steps)
            d[i] = _phase_increment(table, prev, pts[i], z_prev[i], z[i], step)
        phase += d
        z_prev = z
    return np.log(np.abs(z_prev)) + 1j * phase


def continued_log_cf(table: CfTable, xi_l, xi_r=None) -> tuple[np.ndarray, np.ndarray]:
    """Continuous ``ln Z(xi, omega)`` along ``0 -> i Im(xi) -> xi``, point by point.

    Returns ``(logs, windings)`` with ``logs`` of shape ``(n_points, n_omega)``
    and, per point, the winding number summed over frequencies relative to the
    principal branch of the logarithm.
    """
    xi_l = np.atleast_1d(np.asarray(xi_l, dtype=complex)).ravel()
    if xi_r is None and len(table.counted) == 1:
        logs = _continue_single(table, xi_l)
        z = table.evaluate(xi_l)
    else:
        xi_r = np.zeros_like(xi_l) if xi_r is None else np.broadcast_to(
            np.asarray(xi_r, dtype=complex).ravel(), xi_l.shape)
        tgt = np.stack([xi_l, xi_r], axis=1)
        logs = np.empty((xi_l.size, table.omegas.size), dtype=complex)
        for i in range(0, xi_l.size, 64):
            logs[i:i + 64] = _continue_batch(table, tgt[i:i + 64])
        z = table.evaluate(xi_l, xi_r)
    winds = np.rint((logs.imag - np.angle(z)) / (2 * np.pi)).astype(int).sum(axis=1)
    return logs, winds


def _tail_check(table: CfTable, logs: np.ndarray) -> None:
    edge = np.max(np.abs(logs[..., [0, -1]]))
    if edge > TAIL_TOL:
        raise TailNotConverged(f"|ln Z| = {edge:.2e} at the window edge exceeds {TAIL_TOL:g}")


def _default_grid(chain, res, grid, d_omega):
    if grid is None:
        grid = FrequencyGrid.auto(chain, res, d_omega)
    return grid


def cgf(chain: ChainSpec, res: ReservoirSpec, cf: CountingField, grid: FrequencyGrid | None = None,
        d_omega: float = 0.01) -> complex:
    """CGF ``F(xi) = (d_omega/4pi) sum_k ln Z(xi, omega_k)`` on the continued branch.

    ``xi_r`` different from zero selects the two-field (left, right) table.
    """
    curve = cgf_curve(chain, res, [cf.xi_l], grid=grid, d_omega=d_omega,
                      xi_r=None if cf.xi_r == 0 else [cf.xi_r])
    return complex(curve.f_values[0])


@dataclass(frozen=True)
class CgfCurve:
    """CGF values along a list of counting fields."""

    xi_values: np.ndarray
    f_values: np.ndarray
    branch_windings: np.ndarray
    xi_r_values: np.ndarray | None = None
    tau: float = float("nan")


def cgf_curve(chain: ChainSpec, res: ReservoirSpec, xi_values, grid: FrequencyGrid | None = None,
              d_omega: float = 0.01, xi_r=None) -> CgfCurve:
    """Evaluate the CGF on many counting fields, sharing one coefficient table."""
    grid = _default_grid(chain, res, grid, d_omega)
    table = cf_table(chain, res, grid, xi_r is not None)
    xi = np.atleast_1d(np.asarray(xi_values, dtype=complex))
    xr = None if xi_r is None else np.broadcast_to(np.asarray(xi_r, dtype=complex), xi.shape)
    logs, winds = continued_log_cf(table, xi, xr)
    _tail_check(table, logs)
    # divide out Z(0) = 1 + O(eps) so that F(0) vanishes exactly
    zero = np.zeros(1, dtype=complex)
    log0 = np.log(np.abs(table.evaluate(zero) if xr is None else table.evaluate(zero, zero)))
    f = grid.weight * np.sum(logs - log0, axis=1)
    return CgfCurve(xi_values=xi, f_values=f, branch_windings=winds, xi_r_values=xr, tau=grid.tau)


# ---------------------------------------------------------------- cumulants


def _moments_to_cumulants(m: np.ndarray) -> np.ndarray:
    """Raw moments ``m[..., 1..n]`` to cumulants, with ``m[..., 0] == 1``."""
    n = m.shape[-1] - 1
    k = np.zeros_like(m)
    for order in range(1, n + 1):
        acc = m[..., order].copy()
        for j in range(1, order):
            acc -= math.comb(order - 1, j - 1) * k[..., j] * m[..., order - j]
        k[..., order] = acc
    return k


def cumulants(chain: ChainSpec, res: ReservoirSpec, grid: FrequencyGrid | None = None, max_order: int = 4,
              method: str = "analytic", d_omega: float = 0.01) -> list[float]:
    """Scaled cumulants ``C_n = (-i)^n d^n F / d xi^n`` at ``xi = 0`` for ``n = 1..max_order``.

    ``method="analytic"`` differentiates the per-frequency Laurent polynomials
    exactly; ``method="fd"`` uses central differences of the summed CGF with
    Richardson extrapolation (base step ``1e-3 * 4**(n-1)``, three halvings).
    """
    if not 1 <= max_order <= 4:
        raise ValueError("max_order must be between 1 and 4")
    grid = _default_grid(chain, res, grid, d_omega)
    table = cf_table(chain, res, grid)
    if method == "analytic":
        p = table.powers.astype(float)
        m = np.stack([(table.coeffs * p**r).sum(axis=1) for r in range(max_order + 1)], axis=-1)
        if np.max(np.abs(m[:, 0] - 1)) > 1e-10:
            raise RuntimeError("per-frequency characteristic function is not normalised")
        m = m / m[:, :1]
        k = _moments_to_cumulants(m)
        return [float(grid.weight * np.sum(k[:, r]).real) for r in range(1, max_order + 1)]
    if method == "fd":
        return _fd_cumulants(table, grid, max_order)
    raise ValueError(f"unknown method {method!r}")


_FD_STENCILS = {
    1: (np.array([-1, 1]), np.array([-0.5, 0.5])),
    2: (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])),
    3: (np.array([-2, -1, 1, 2]), np.array([-0.5, 1.0, -1.0, 0.5])),
    4: (np.array([-2, -1, 0, 1, 2]), np.array([1.0, -4.0, 6.0, -4.0, 1.0])),
}


def _fd_cumulants(table: CfTable, grid: FrequencyGrid, max_order: int, h0: float = 1e-3, levels: int = 3,
                  rtol: float = 1e-6) -> list[float]:
    def f(x):
        return grid.weight * np.sum(np.log(table.evaluate(np.asarray(x, dtype=float))), axis=-1)

    out = []
    for n in range(1, max_order + 1):
        offs, w = _FD_STENCILS[n]
        # roundoff grows like eps / h^n, so higher orders start from a wider step
        hs = h0 * 4.0 ** (n - 1) * 2.0 ** -np.arange(levels)
        est = np.array([np.sum(w * f(offs * h)) / h**n for h in hs])
        # central stencils have error series in h^2
        tab = [est]
        for lvl in range(1, levels):
            prev = tab[-1]
            fac = 4.0**lvl
            tab.append((fac * prev[1:] - prev[:-1]) / (fac - 1))
        best = tab[-1][0]
        second = tab[-2][-1]
        if abs(best - second) > rtol * max(abs(best), 1e-12) + 1e-10:
            raise StepTooSmall(f"Richardson extrapolation of order {n} did not converge")
        out.append(float(((-1j) ** n * best).real))
    return out


# ---------------------------------------------------------------- distribution


@dataclass(frozen=True)
class ChargeDistribution:
    """Transferred-charge distribution at measurement time ``tau``.

    ``log_p`` is ``-inf`` where the probability is numerically zero (for
    instance odd ``q`` under a parity constraint).  ``rate`` is ``-ln P / tau``.
    ``p_values`` keeps the signed real reconstruction for parity sums.
    """

    tau: float
    q_values: np.ndarray
    log_p: np.ndarray
    rate: np.ndarray
    p_values: np.ndarray = field(repr=False)

    def log_prob(self, q: int) -> float:
        i = int(q) - int(self.q_values[0])
        if 0 <= i < self.q_values.size:
            return float(self.log_p[i])
        return -np.inf


def _log_mgf(table: CfTable, kappa: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``Lambda = tau F(i kappa)`` with its first two derivatives in ``kappa``."""
    p = table.powers.astype(float)
    e = np.exp(-np.multiply.outer(kappa, p))  # (K, 5)
    c = table.coeffs.real
    z0 = e @ c.T
    z1 = (e * -p) @ c.T
    z2 = (e * p**2) @ c.T
    if np.any(z0 <= 0):
        raise BranchAmbiguity("characteristic function is not positive on the imaginary axis")
    lam = 0.5 * np.sum(np.log(z0), axis=1)
    d1 = 0.5 * np.sum(z1 / z0, axis=1)
    d2 = 0.5 * np.sum(z2 / z0 - (z1 / z0) ** 2, axis=1)
    return lam, d1, d2


def _tilts(table: CfTable, cutoff: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tilts whose tilted means cover every ``q`` with Chernoff bound above ``-cutoff``."""
    k_max = 2.0
    while True:
        kap = np.linspace(-k_max, k_max, int(400 * k_max) + 1)
        lam, d1, d2 = _log_mgf(table, kap)
        qk = -d1
        bound = qk * kap + lam
        ok_lo = bound[0] < -cutoff or d2[0] < 1e-3
        ok_hi = bound[-1] < -cutoff or d2[-1] < 1e-3
        if (ok_lo and ok_hi) or k_max >= 64:
            break
        k_max *= 2
    keep = bound >= -cutoff - 1.0
    idx = np.nonzero(keep)[0]
    lo, hi = max(idx[0] - 1, 0), min(idx[-1] + 1, kap.size - 1)
    kap, lam, qk, d2 = kap[lo:hi + 1], lam[lo:hi + 1], qk[lo:hi + 1], d2[lo:hi + 1]
    # pick a tilt each time the tilted mean has moved by about one tilted width
    chosen = [kap.size - 1]
    for i in range(kap.size - 2, -1, -1):
        j = chosen[-1]
        if abs(qk[i] - qk[j]) > max(0.5 * np.sqrt(max(d2[j], 1e-12)), 0.5) or i == 0:
            chosen.append(i)
    chosen = np.array(sorted(set(chosen)))
    return kap[chosen], lam[chosen], qk[chosen]


def charge_distribution(chain: ChainSpec, res: ReservoirSpec, grid: FrequencyGrid | None = None,
                        n_xi: int = 512, cutoff: float = 50.0, d_omega: float = 0.01,
                        floor: float = 1e-10) -> ChargeDistribution:
    """``P(q)`` by exponentially tilted inverse Fourier transforms of ``exp(tau F)``.

    For each tilt ``kappa`` the DFT of ``exp(tau F(theta + i kappa) - tau F(i kappa))``
    over ``n_xi`` points on ``[0, 2 pi)`` gives ``P(q) exp(-q kappa - tau F(i kappa))``
    with ``O(1)`` magnitude near the tilted mean, so ``ln P`` is accurate far
    into the tails.  ``q`` is reported where ``-ln P < cutoff``; the range is
    contiguous and numerically vanishing entries carry ``log_p = -inf``.
    """
    if n_xi < 256 or n_xi & (n_xi - 1):
        raise ValueError(f"n_xi must be a power of two >= 256, got {n_xi}")
    grid = _default_grid(chain, res, grid, d_omega)
    table = cf_table(chain, res, grid)
    kaps, lams, qks = _tilts(table, cutoff + 5.0)
    thetas = 2 * np.pi * np.arange(n_xi) / n_xi
    q_lo = math.floor(qks.min()) - 4
    q_hi = math.ceil(qks.max()) + 4
    if q_hi - q_lo + 1 > n_xi // 2:
        raise ValueError(f"n_xi={n_xi} too small for a charge window of width {q_hi - q_lo + 1}")
    qs = np.arange(q_lo, q_hi + 1)
    nearest = np.argmin(np.abs(qs[:, None] - qks[None, :]), axis=1)
    log_p = np.full(qs.size, -np.inf)
    p_val = np.zeros(qs.size)
    for t, (kap, lam) in enumerate(zip(kaps, lams)):
        sel = np.nonzero(nearest == t)[0]
        if sel.size == 0:
            continue
        logs, winds = continued_log_cf(table, np.r_[thetas, 2 * np.pi] + 1j * kap)
        _tail_check(table, logs)
        tf = 0.5 * np.sum(logs, axis=1)
        if (winds[-1] - winds[0]) % 2:
            raise BranchAmbiguity("exp(tau F) is not 2 pi periodic on this grid")
        expo = tf[:-1] - lam
        dq = np.fft.fft(np.exp(expo)) / n_xi  # component q sits at index q mod n_xi
        d = dq[qs[sel] % n_xi]
        scale = np.exp(np.clip(qs[sel] * kap + lam, -700, 700))
        p_val[sel] = d.real * scale
        good = d.real > floor
        log_p[sel[good]] = qs[sel[good]] * kap + lam + np.log(d.real[good])
    # trim to the contiguous range of reported charges
    reported = np.nonzero(np.isfinite(log_p) & (-log_p < cutoff))[0]
    if reported.size == 0:
        raise BranchAmbiguity("no charge resolved above the floor")
    s = slice(reported[0], reported[-1] + 1)
    lp = log_p[s].copy()
    lp[np.isfinite(lp) & (-lp >= cutoff)] = -np.inf
    return ChargeDistribution(tau=grid.tau, q_values=qs[s], log_p=lp, rate=-lp / grid.tau,
                              p_values=p_val[s])
