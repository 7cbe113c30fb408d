"""Kitaev chain parameters, the Nambu-space (BdG) matrix and reservoir occupations.

Units are natural (hbar = e = k_B = 1). Matrices use site-major, Nambu-minor
ordering: index ``2*j`` is the electron on site ``j`` and ``2*j + 1`` the hole.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

__all__ = [
    "ChainSpec",
    "ReservoirSpec",
    "OccupationSet",
    "build_bdg_matrix",
    "occupation",
    "occupations",
    "pairing_block",
]

SIGMA3 = np.diag([1.0, -1.0])


@dataclass(frozen=True)
class ChainSpec:
    """Finite Kitaev chain.

    Parameters
    ----------
    n_sites : int
        Number of lattice sites ``N``.
    mu : float
        Chemical potential of the chain.
    eta : float
        Hopping amplitude.
    delta : float
        Superconducting pairing amplitude.
    """

    n_sites: int
    mu: float = 0.0
    eta: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ValueError(f"n_sites must be a positive integer, got {self.n_sites!r}")
        for name in ("mu", "eta", "delta"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "n_sites", int(self.n_sites))

    @property
    def bandwidth(self) -> float:
        """Half-width of the energy window that contains the whole BdG spectrum."""
        return abs(self.mu) + 2.0 * (abs(self.eta) + abs(self.delta))


@dataclass(frozen=True)
class ReservoirSpec:
    """Two normal reservoirs in the wide-band limit, at a common temperature.

    ``gamma_l`` and ``gamma_r`` are the level widths (retarded self-energy
    ``-1j * gamma``), ``mu_l`` and ``mu_r`` the chemical potentials measured
    from the grounded superconductor and ``beta`` the inverse temperature.
    """

    gamma_l: float
    gamma_r: float
    mu_l: float = 0.0
    mu_r: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        if not (self.gamma_l >= 0 and self.gamma_r >= 0):
            raise ValueError("gamma_l and gamma_r must be nonnegative")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        for name in ("gamma_l", "gamma_r", "mu_l", "mu_r", "beta"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class OccupationSet:
    """Electron and hole occupations of one reservoir at one frequency."""

    n_e: float
    n_h: float

    @property
    def nbar_e(self) -> float:
        return 1.0 - self.n_e

    @property
    def nbar_h(self) -> float:
        return 1.0 - self.n_h


def pairing_block(eta: float, delta: float) -> np.ndarray:
    """Bond block ``eta*sigma3 + 1j*delta*sigma2 = [[eta, delta], [-delta, -eta]]``."""
    return np.array([[eta, delta], [-delta, -eta]], dtype=float)


def build_bdg_matrix(chain: ChainSpec) -> np.ndarray:
    """Return the ``2N x 2N`` Nambu-space matrix of the chain.

    Diagonal blocks are ``-mu*sigma3``, the super-diagonal blocks ``-D`` and
    the sub-diagonal blocks ``-D.T`` with ``D = pairing_block(eta, delta)``.
    """
    n = chain.n_sites
    d = pairing_block(chain.eta, chain.delta)
    k = np.zeros((2 * n, 2 * n))
    for j in range(n):
        k[2 * j:2 * j + 2, 2 * j:2 * j + 2] = -chain.mu * SIGMA3
        if j + 1 < n:
            k[2 * j:2 * j + 2, 2 * j + 2:2 * j + 4] = -d
            k[2 * j + 2:2 * j + 4, 2 * j:2 * j + 2] = -d.T
    return k


def _logistic(x):
    # 1/(exp(x)+1) without overflow; saturates to exactly 0 or 1.
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    e = np.exp(-x[pos])
    out[pos] = e / (1.0 + e)
    out[~pos] = 1.0 / (1.0 + np.exp(x[~pos]))
    return out


def occupation(omega, mu_res, beta, species: Literal["electron", "hole"] = "electron"):
    """Fermi occupation of a reservoir for electrons or holes.

    Electrons: ``1/(exp(beta*(omega - mu_res)) + 1)``; holes:
    ``1/(exp(beta*(omega + mu_res)) + 1) = 1 - n_e(-omega)``.
    Accepts scalars or arrays and returns the same shape.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    if species == "electron":
        x = beta * (np.asarray(omega, dtype=float) - mu_res)
    elif species == "hole":
        x = beta * (np.asarray(omega, dtype=float) + mu_res)
    else:
        raise ValueError(f"unknown species {species!r}")
    out = _logistic(np.atleast_1d(x)).reshape(np.shape(x))
    return float(out) if out.ndim == 0 else out


def occupations(omega, res: ReservoirSpec):
    """Return ``(n1e, n1h, n2e, n2h)`` for the left (1) and right (2) reservoirs."""
    return (
        occupation(omega, res.mu_l, res.beta, "electron"),
        occupation(omega, res.mu_l, res.beta, "hole"),
        occupation(omega, res.mu_r, res.beta, "electron"),
        occupation(omega, res.mu_r, res.beta, "hole"),
    )
