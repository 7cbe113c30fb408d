"""Counting-field dressed lead self-energies and the Keldysh-Nambu kernel.

Each site carries a 4x4 block in Keldysh (x) Nambu space, Keldysh-major:
index ``2*k + nu`` with ``k`` in {1, 2} (after the Larkin-Ovchinnikov
rotation) and ``nu`` in {electron, hole}.  In the rotated basis the bare chain
enters as ``(omega - K)`` on both Keldysh diagonal blocks and a wide-band lead
as ``-1j*gamma*[[1, 2*(1 - 2n)], [0, -1]]`` per Nambu species.

Charge convention: ``xi`` counts electrons that leave a reservoir and enter the
chain, so the mean current of a normal conductor flows from the higher to the
lower chemical potential for positive first cumulant.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import SingularPropagator
from .model import ChainSpec, ReservoirSpec, build_bdg_matrix, occupation

__all__ = [
    "LAMBDA1",
    "LAMBDA2",
    "CountingField",
    "LeadBlock",
    "counting_matrix",
    "wide_band_block",
    "lead_self_energy",
    "lead_blocks",
    "bare_inverse_propagator",
    "dressed_inverse_propagator",
    "assemble_kernel",
    "det_ratio",
]

LAMBDA1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
LAMBDA2 = np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2.0)

_I2 = np.eye(2)
_ROT_R = np.kron(LAMBDA1, _I2)
_ROT_L = np.kron(LAMBDA2.T, _I2)
_ROT_L_INV = np.kron(LAMBDA2, _I2)

# Eigenvalues of omega - K closer than this (with both leads detached) are singular.
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class CountingField:
    """Counting fields on the left and right reservoirs (complex values allowed)."""

    xi_l: complex = 0.0
    xi_r: complex = 0.0

    def __post_init__(self):
        for name in ("xi_l", "xi_r"):
            if not np.isfinite(complex(getattr(self, name))):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class LeadBlock:
    """Self-energy of one lead at one frequency, 4x4 in Keldysh (x) Nambu space."""

    matrix: np.ndarray
    side: Literal["left", "right"]


def _branch_phases(xi) -> np.ndarray:
    """Contour (x) Nambu diagonal of the counting matrix, shape ``(..., 4)``.

    The forward branch carries ``diag(exp(-i xi/2), -exp(i xi/2))`` and the
    backward branch its ``xi -> -xi`` partner.
    """
    xi = np.asarray(xi, dtype=complex)
    a = np.exp(-0.5j * xi)
    b = np.exp(0.5j * xi)
    return np.stack([a, -b, b, -a], axis=-1)


def counting_matrix(xi) -> tuple[np.ndarray, np.ndarray]:
    """Return the rotated counting matrices ``(m_dag, m)``.

    A lead self-energy is dressed as ``m_dag @ Q @ m`` where ``Q`` is the
    undressed rotated block.  ``m_dag`` is the analytic continuation of the
    conjugate transpose of ``m``; the two coincide for real ``xi``.
    """
    ph = _branch_phases(xi)
    m = (_ROT_R * ph[..., None, :]) @ _ROT_R
    m_dag = (_ROT_L * (1.0 / ph)[..., None, :]) @ _ROT_L_INV
    return m_dag, m


def wide_band_block(gamma, n) -> np.ndarray:
    """Rotated wide-band reservoir block ``-1j*gamma*[[1, 2(1-2n)], [0, -1]]``.

    Broadcasts over ``n``; the result has shape ``n.shape + (2, 2)``.
    """
    n = np.asarray(n, dtype=float)
    out = np.zeros(n.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = -1j * gamma
    out[..., 0, 1] = -2j * gamma * (1.0 - 2.0 * n)
    out[..., 1, 1] = 1j * gamma
    return out


def _side_params(side: str, res: ReservoirSpec):
    if side == "left":
        return res.gamma_l, res.mu_l
    if side == "right":
        return res.gamma_r, res.mu_r
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def lead_blocks(side: str, xi, omegas, res: ReservoirSpec) -> np.ndarray:
    """Vectorised lead self-energy; ``xi`` and ``omegas`` broadcast against each other."""
    gamma, mu_side = _side_params(side, res)
    omegas = np.asarray(omegas, dtype=float)
    n_e = occupation(omegas, mu_side, res.beta, "electron")
    n_h = occupation(omegas, mu_side, res.beta, "hole")
    q = np.zeros(omegas.shape + (4, 4), dtype=complex)
    q[..., 0::2, 0::2] = wide_band_block(gamma, n_e)
    q[..., 1::2, 1::2] = wide_band_block(gamma, n_h)
    m_dag, m = counting_matrix(xi)
    return m_dag @ q @ m


def lead_self_energy(side: str, xi, omega: float, res: ReservoirSpec) -> LeadBlock:
    """Counting-field dressed self-energy of one lead at frequency ``omega``."""
    return LeadBlock(matrix=lead_blocks(side, xi, float(omega), res), side=side)


def _promote(k: np.ndarray) -> np.ndarray:
    """Place a ``2N x 2N`` Nambu matrix identically on both Keldysh blocks."""
    n = k.shape[-1] // 2
    kr = k.reshape(k.shape[:-2] + (n, 2, n, 2))
    big = np.zeros(k.shape[:-2] + (n, 2, 2, n, 2, 2), dtype=complex)
    for kel in range(2):
        big[..., :, kel, :, :, kel, :] = kr
    return big.reshape(k.shape[:-2] + (4 * n, 4 * n))


def bare_inverse_propagator(chain: ChainSpec, omegas) -> np.ndarray:
    """``(omega - K)`` promoted to Keldysh space, shape ``omegas.shape + (4N, 4N)``."""
    omegas = np.asarray(omegas, dtype=float)
    k = build_bdg_matrix(chain)
    eye = np.eye(k.shape[0])
    return _promote(omegas[..., None, None] * eye - k)


def _self_energy(chain: ChainSpec, res: ReservoirSpec, cf: CountingField, omegas) -> np.ndarray:
    omegas = np.asarray(omegas, dtype=float)
    n = chain.n_sites
    sigma = np.zeros(omegas.shape + (4 * n, 4 * n), dtype=complex)
    sigma[..., 0:4, 0:4] += lead_blocks("left", cf.xi_l, omegas, res)
    sigma[..., 4 * n - 4:, 4 * n - 4:] += lead_blocks("right", cf.xi_r, omegas, res)
    return sigma


def dressed_inverse_propagator(chain: ChainSpec, res: ReservoirSpec, cf: CountingField, omegas) -> np.ndarray:
    """``(omega - K) - Sigma(xi, omega)``; its determinant ratio is the per-frequency CF."""
    return bare_inverse_propagator(chain, omegas) - _self_energy(chain, res, cf, omegas)


def _check_detached(chain: ChainSpec, res: ReservoirSpec, omega: float) -> None:
    if res.gamma_l == 0 and res.gamma_r == 0:
        ev = np.linalg.eigvalsh(build_bdg_matrix(chain))
        if np.min(np.abs(omega - ev)) < SINGULAR_TOL:
            raise SingularPropagator(f"omega={omega} is an eigenvalue of the detached chain")


def assemble_kernel(chain: ChainSpec, res: ReservoirSpec, cf: CountingField, omega: float) -> np.ndarray:
    """Return the ``4N x 4N`` kernel ``I - G(omega) Sigma(xi, omega)``.

    ``G`` is applied through an LU solve of ``omega - K``; raises
    ``SingularPropagator`` when ``omega`` sits on an eigenvalue of ``K``.
    Use ``det_ratio`` for determinants, which never forms ``G``.
    """
    from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
    import warnings

    _check_detached(chain, res, omega)
    k = build_bdg_matrix(chain)
    a = omega * np.eye(k.shape[0]) - k
    with warnings.catch_warnings():
        warnings.simplefilter("error", LinAlgWarning)
        try:
            lu = lu_factor(a)
        except (LinAlgWarning, np.linalg.LinAlgError, ValueError) as exc:
            raise SingularPropagator(f"omega - K is singular at omega={omega}") from exc
    if np.min(np.abs(np.diag(lu[0]))) < SINGULAR_TOL * max(1.0, np.abs(a).max()):
        raise SingularPropagator(f"omega - K is singular at omega={omega}")
    sigma = _self_energy(chain, res, cf, float(omega))
    n2 = k.shape[0]
    # G is block diagonal in Keldysh space: apply it to each Keldysh row block.
    s = sigma.reshape(chain.n_sites, 2, 2, 4 * chain.n_sites)
    s = np.moveaxis(s, 1, 0).reshape(2, n2, 4 * chain.n_sites)
    gs = np.stack([lu_solve(lu, s[kel]) for kel in range(2)])
    gs = np.moveaxis(gs.reshape(2, chain.n_sites, 2, 4 * chain.n_sites), 0, 1)
    gs = gs.reshape(4 * chain.n_sites, 4 * chain.n_sites)
    return np.eye(4 * chain.n_sites) - gs


def det_ratio(chain: ChainSpec, res: ReservoirSpec, cf: CountingField, omega: float) -> complex:
    """``det[I - G Sigma(xi)] / det[I - G Sigma(0)]`` via LU of the dressed inverse propagators."""
    _check_detached(chain, res, omega)
    num = dressed_inverse_propagator(chain, res, cf, float(omega))
    den = dressed_inverse_propagator(chain, res, CountingField(), float(omega))
    s1, l1 = np.linalg.slogdet(num)
    s0, l0 = np.linalg.slogdet(den)
    if s0 == 0:
        raise SingularPropagator(f"dressed propagator is singular at omega={omega}")
    if s1 == 0:
        return 0j
    return complex(s1 / s0 * np.exp(l1 - l0))
