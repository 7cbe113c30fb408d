"""Closed-form characteristic functions for short chains.

Each coefficient family (A, B, C, D) has one function.  The ``+`` coefficients
depend on ``mu + omega`` and describe the electron channel, the ``-``
coefficients the hole channel; every ``A`` takes the occupation factor of its
own channel, ``1 - 2 n_a nbar_b - 2 nbar_a n_b``.  Under the charge convention
of ``keldysh`` the transfer of an electron out of the left reservoir carries
``exp(+i xi)``.

The Majorana and general cases are only available at the specialised
parameter values that the numeric literals in their coefficients assume.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import CaseMismatch
from .model import ChainSpec, ReservoirSpec, occupation, occupations

__all__ = [
    "AnalyticCase",
    "CASES",
    "get_case",
    "analytic_cf",
    "laurent_coefficients",
    "d1", "a1", "c1",
    "d2", "a2", "c2",
    "d2p", "a2p", "c2p",
    "d3", "a3", "c3",
    "d4", "c41", "c42", "c43", "c44", "b4", "a4",
    "landauer_current",
    "majorana_conductance",
]

_TOL = 1e-12


@dataclass(frozen=True)
class AnalyticCase:
    """A closed-form case and its parameter constraints."""

    tag: str
    n_sites: int | None
    constraints: tuple[tuple[str, float], ...]
    description: str

    def validate(self, chain: ChainSpec) -> None:
        """Raise ``CaseMismatch`` unless ``chain`` satisfies this case's constraints."""
        if self.n_sites is not None and chain.n_sites != self.n_sites:
            raise CaseMismatch(f"{self.tag} requires n_sites={self.n_sites}, got {chain.n_sites}")
        if self.n_sites is None and chain.n_sites < 3:
            raise CaseMismatch(f"{self.tag} requires n_sites >= 3, got {chain.n_sites}")
        for name, value in self.constraints:
            if abs(getattr(chain, name) - value) > _TOL:
                raise CaseMismatch(f"{self.tag} requires {name}={value}, got {getattr(chain, name)}")

    def default_chain(self, mu: float = 0.4, delta: float = 1.0) -> ChainSpec:
        """A chain inside the validity domain (free parameters set from the arguments)."""
        n = self.n_sites or 5
        if self.tag == "trivial3":
            return ChainSpec(n, mu=mu, eta=1.0, delta=0.0)
        if self.tag in ("pairing3", "pairing4"):
            return ChainSpec(n, mu=mu, eta=0.0, delta=delta)
        return ChainSpec(n, **dict(self.constraints))


CASES = {
    "trivial3": AnalyticCase("trivial3", 3, (("delta", 0.0),), "normal conductor, two Levitov-Lesovik channels"),
    "pairing3": AnalyticCase("pairing3", 3, (("eta", 0.0),), "pure pairing, odd length: normal transfer"),
    "pairing4": AnalyticCase("pairing4", 4, (("eta", 0.0),), "pure pairing, even length: crossed Andreev reflection"),
    "majorana": AnalyticCase("majorana", None, (("mu", 0.0), ("eta", 1.0), ("delta", 1.0)),
                             "sweet spot: local Andreev reflection only"),
    "general3": AnalyticCase("general3", 3, (("mu", 1.0), ("eta", 1.0), ("delta", 1.0)),
                             "all three transfer channels"),
}


def get_case(case) -> AnalyticCase:
    if isinstance(case, AnalyticCase):
        return case
    try:
        return CASES[case]
    except KeyError:
        raise CaseMismatch(f"unknown analytic case {case!r}; choose from {sorted(CASES)}") from None


# ------------------------------------------------------------------ trivial


def d1(sign: int, omega, mu, eta, gl, gr):
    x = mu + sign * omega
    return (gl**2 * (eta**4 - 2 * eta**2 * x**2 + x**4 + x**2 * gr**2)
            + gr**2 * (eta**2 - x**2) ** 2
            + 2 * eta**4 * gl * gr
            + x**2 * (x**2 - 2 * eta**2) ** 2)


def a1(sign: int, omega, mu, eta, gl, gr, occ_factor):
    x = mu + sign * omega
    num = (gl**2 * (eta**4 - 2 * eta**2 * x**2 + x**4 + x**2 * gr**2)
           + gr**2 * (eta**2 - x**2) ** 2
           + 2 * occ_factor * eta**4 * gl * gr
           + x**2 * (x**2 - 2 * eta**2) ** 2)
    return num / d1(sign, omega, mu, eta, gl, gr)


def c1(sign: int, omega, mu, eta, gl, gr):
    return 4 * eta**4 * gl * gr / d1(sign, omega, mu, eta, gl, gr)


# ------------------------------------------------------------------ pairing


def d2(sign: int, omega, mu, delta, gl, gr):
    p = mu + sign * omega
    m = mu - sign * omega
    s = delta**2 + mu**2 - omega**2
    return (p**2 * (2 * delta**2 + mu**2 - omega**2) ** 2
            + 2 * delta**4 * gl * gr
            + gl**2 * (s**2 + m**2 * gr**2)
            + gr**2 * s**2)


def a2(sign: int, omega, mu, delta, gl, gr, occ_factor):
    p = mu + sign * omega
    m = mu - sign * omega
    s = delta**2 + mu**2 - omega**2
    num = (p**2 * (2 * delta**2 + mu**2 - omega**2) ** 2
           + 2 * delta**4 * occ_factor * gl * gr
           + gr**2 * s**2
           + gl**2 * (s**2 + m**2 * gr**2))
    return num / d2(sign, omega, mu, delta, gl, gr)


def c2(sign: int, omega, mu, delta, gl, gr):
    return 4 * delta**4 * gl * gr / d2(sign, omega, mu, delta, gl, gr)


def _d2p_body(sign, omega, mu, delta, gl, gr):
    p = mu + sign * omega
    m = mu - sign * omega
    return (m**2 * p**4 * (m**2 + gr**2)
            + gl**2 * (m**2 * (2 * delta**2 + mu**2 - omega**2) ** 2 + gr**2 * (delta**2 + mu**2 - omega**2) ** 2)
            + delta**4 * p**2 * (11 * m**2 + 4 * gr**2)
            + 2 * delta**2 * m * p**3 * (3 * m**2 + 2 * gr**2)
            + delta**8 + 6 * delta**6 * (mu**2 - omega**2))


def d2p(sign: int, omega, mu, delta, gl, gr):
    return _d2p_body(sign, omega, mu, delta, gl, gr) + 2 * delta**6 * gl * gr


def a2p(sign: int, omega, mu, delta, gl, gr, occ_factor):
    num = _d2p_body(sign, omega, mu, delta, gl, gr) + 2 * delta**6 * occ_factor * gl * gr
    return num / d2p(sign, omega, mu, delta, gl, gr)


def c2p(sign: int, omega, mu, delta, gl, gr):
    return 4 * delta**6 * gl * gr / d2p(sign, omega, mu, delta, gl, gr)


# ------------------------------------------------------------------ Majorana (mu=0, delta=eta=1)


def d3(omega, gl):
    return gl**4 * omega**2 + 2 * gl**2 * (omega**4 - 4 * omega**2 + 8) + omega**2 * (omega**2 - 4) ** 2


def a3(omega, gl, n1e, n1h):
    x = n1e * (1 - n1h) + (1 - n1e) * n1h
    num = gl**4 * omega**2 + 2 * gl**2 * (8 * (1 - x) + omega**4 - 4 * omega**2) + omega**2 * (omega**2 - 4) ** 2
    return num / d3(omega, gl)


def c3(omega, gl):
    return 16 * gl**2 / d3(omega, gl)


# ------------------------------------------------------------------ general (mu=eta=delta=1)


def d4(omega, gl, gr):
    w = omega
    return ((w**6 - 11 * w**4 + 27 * w**2 - 1) ** 2
            + 2 * (w**10 - 15 * w**8 + 78 * w**6 - 178 * w**4 + 209 * w**2 + 1) * (gl**2 + gr**2)
            + gr**4 * ((w - 1) ** 2 * gl**2 + ((w - 2) * w - 1) ** 2) * ((w + 1) ** 2 * gl**2 + (w * (w + 2) - 1) ** 2)
            + (w**4 - 6 * w**2 + 1) ** 2 * gl**4
            + 32 * gl * gr * (gl**2 + w**2 + 1) * (gr**2 + w**2 + 1)
            + 2 * gr**2 * ((w**6 - 5 * w**4 + 11 * w**2 + 1) * gl**4
                           + 2 * (w**8 - 8 * w**6 + 30 * w**4 - 48 * w**2 + 65) * gl**2))


def _c4(omega, gl, gr, sl, sr):
    return 16 * gl * gr * (gl**2 + (omega + sl) ** 2) * (gr**2 + (sr + omega) ** 2) / d4(omega, gl, gr)


def c41(omega, gl, gr):
    return _c4(omega, gl, gr, 1, 1)


def c42(omega, gl, gr):
    return _c4(omega, gl, gr, -1, -1)


def c43(omega, gl, gr):
    return _c4(omega, gl, gr, 1, -1)


def c44(omega, gl, gr):
    return _c4(omega, gl, gr, -1, 1)


def b4(omega, gl, gr):
    w = omega
    return 16 * gl**2 * (w**2 * gr**4 + 2 * (w**4 - 3 * w**2 + 8) * gr**2 + w**2 * (w**2 - 5) ** 2) / d4(omega, gl, gr)


def _general_terms(omega, gl, gr, n1e, n1h, n2e, n2h):
    """Coefficients of ``exp(i j xi)`` for ``j = -2..2`` (``j = 0`` excluded)."""
    nb = lambda n: 1 - n  # noqa: E731
    # each channel picks the C4j whose factors sit at -omega
    ca, cb = c42(omega, gl, gr), c41(omega, gl, gr)
    cc, cd = c44(omega, gl, gr), c43(omega, gl, gr)
    plus = ca * n1e * nb(n2e) + cb * nb(n1h) * n2h + cc * n1e * nb(n2h) + cd * nb(n1h) * n2e
    minus = ca * nb(n1e) * n2e + cb * n1h * nb(n2h) + cc * nb(n1e) * n2h + cd * n1h * nb(n2e)
    bb = b4(omega, gl, gr)
    return {-2: bb * n1h * nb(n1e), -1: minus, 1: plus, 2: bb * n1e * nb(n1h)}


def a4(omega, gl, gr, n1e, n1h, n2e, n2h):
    """Complement of all transfer terms, so that the CF is normalised."""
    return 1 - sum(_general_terms(omega, gl, gr, n1e, n1h, n2e, n2h).values())


# ------------------------------------------------------------------ assembly


def _occ_factor(na, nb_):
    return 1 - 2 * na * (1 - nb_) - 2 * (1 - na) * nb_


def _channel(a, c, n_out, n_in):
    """``a + c (nbar_out n_in e^{-i xi} + n_out nbar_in e^{i xi})`` as Laurent coefficients."""
    return {-1: c * (1 - n_out) * n_in, 0: a, 1: c * n_out * (1 - n_in)}


def _product(p, q):
    out = {}
    for i, u in p.items():
        for j, v in q.items():
            out[i + j] = out.get(i + j, 0) + u * v
    return out


def laurent_coefficients(case, chain: ChainSpec, res: ReservoirSpec, omega) -> dict[int, float]:
    """Coefficients ``{j: c_j}`` of ``Z = sum_j c_j exp(i j xi)`` for the closed-form case."""
    case = get_case(case)
    case.validate(chain)
    gl, gr = res.gamma_l, res.gamma_r
    n1e, n1h, n2e, n2h = occupations(omega, res)
    mu, eta, delta = chain.mu, chain.eta, chain.delta
    if case.tag == "trivial3":
        elec = _channel(a1(+1, omega, mu, eta, gl, gr, _occ_factor(n1e, n2e)), c1(+1, omega, mu, eta, gl, gr), n1e, n2e)
        hole = _channel(a1(-1, omega, mu, eta, gl, gr, _occ_factor(n1h, n2h)), c1(-1, omega, mu, eta, gl, gr),
                        1 - n1h, 1 - n2h)
        return _product(elec, hole)
    if case.tag == "pairing3":
        elec = _channel(a2(+1, omega, mu, delta, gl, gr, _occ_factor(n1e, n2e)), c2(+1, omega, mu, delta, gl, gr),
                        n1e, n2e)
        hole = _channel(a2(-1, omega, mu, delta, gl, gr, _occ_factor(n1h, n2h)), c2(-1, omega, mu, delta, gl, gr),
                        1 - n1h, 1 - n2h)
        return _product(elec, hole)
    if case.tag == "pairing4":
        # an electron leaves the left reservoir while a hole enters the right one
        elec = _channel(a2p(+1, omega, mu, delta, gl, gr, _occ_factor(n1e, n2h)), c2p(+1, omega, mu, delta, gl, gr),
                        n1e, n2h)
        hole = _channel(a2p(-1, omega, mu, delta, gl, gr, _occ_factor(n1h, n2e)), c2p(-1, omega, mu, delta, gl, gr),
                        1 - n1h, 1 - n2e)
        return _product(elec, hole)
    if case.tag == "majorana":
        cc = c3(omega, gl)
        return {-2: cc * (1 - n1e) * n1h, 0: a3(omega, gl, n1e, n1h), 2: cc * n1e * (1 - n1h)}
    terms = _general_terms(omega, gl, gr, n1e, n1h, n2e, n2h)
    terms[0] = a4(omega, gl, gr, n1e, n1h, n2e, n2h)
    return terms


def analytic_cf(case, chain: ChainSpec, res: ReservoirSpec, xi, omega):
    """Closed-form per-frequency characteristic function ``Z(xi, omega)``.

    Raises ``CaseMismatch`` when ``chain`` is outside the case's validity domain.
    """
    coeffs = laurent_coefficients(case, chain, res, omega)
    xi = np.asarray(xi, dtype=complex)
    return sum(c * np.exp(1j * j * xi) for j, c in coeffs.items())


# ------------------------------------------------------------------ transport


def _landauer_integrand(omega, chain: ChainSpec, res: ReservoirSpec):
    gl, gr = res.gamma_l, res.gamma_r
    n1e, n1h, n2e, n2h = occupations(omega, res)
    mu, eta = chain.mu, chain.eta
    cp = c1(+1, omega, mu, eta, gl, gr)
    cm = c1(-1, omega, mu, eta, gl, gr)
    ap = a1(+1, omega, mu, eta, gl, gr, _occ_factor(n1e, n2e))
    am = a1(-1, omega, mu, eta, gl, gr, _occ_factor(n1h, n2h))
    elec = cp * (n1e * (1 - n2e) - (1 - n1e) * n2e) / (ap + cp * ((1 - n1e) * n2e + n1e * (1 - n2e)))
    hole = cm * ((1 - n1h) * n2h - n1h * (1 - n2h)) / (am + cm * ((1 - n1h) * n2h + n1h * (1 - n2h)))
    return (elec + hole) / (4 * np.pi)


def landauer_current(chain: ChainSpec, res: ReservoirSpec, grid=None) -> float:
    """Mean current of the three-site normal chain from the transmission integral.

    With a ``FrequencyGrid`` the integrand is summed on its points; without one
    it is integrated adaptively over the real line.
    """
    get_case("trivial3").validate(chain)
    if grid is not None:
        return float(np.sum(_landauer_integrand(grid.omegas, chain, res)) * grid.d_omega)
    edges = sorted({-abs(chain.mu) - 2 * abs(chain.eta), res.mu_l, res.mu_r, -res.mu_l, -res.mu_r,
                    abs(chain.mu) + 2 * abs(chain.eta)})
    w = abs(chain.mu) + 2 * abs(chain.eta) + 60 * max(res.gamma_l, res.gamma_r) + 60 / res.beta
    total = 0.0
    pts = [-w] + [e for e in edges if -w < e < w] + [w]
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(_landauer_integrand, lo, hi, args=(chain, res), epsabs=1e-15, epsrel=1e-12, limit=400)
        total += val
    return float(total)


def _lar_current(mu_l: float, gamma_l: float, beta: float) -> float:
    """Mean left-lead current of the sweet-spot chain, ``int dw/2pi C3 (n1e - n1h)``."""
    if gamma_l == 0:
        return 0.0

    def f(w):
        return c3(w, gamma_l) * (occupation(w, mu_l, beta) - occupation(w, mu_l, beta, "hole")) / (2 * np.pi)

    span = abs(mu_l) + 60.0 / beta
    val, _ = integrate.quad(f, -span, span, points=[-abs(mu_l), 0.0, abs(mu_l)], epsabs=1e-16, epsrel=1e-12,
                            limit=400)
    return float(val)


def majorana_conductance(res: ReservoirSpec, beta: float | None = None) -> float:
    """Zero-bias conductance ``dI/d mu_L`` of the sweet-spot chain (``mu = 0``, ``delta = eta = 1``).

    The derivative is a central difference at ``mu_L = 0`` with a step well
    below the thermal width ``1/beta``.
    """
    beta = res.beta if beta is None else beta
    h = 0.05 / beta
    return (_lar_current(h, res.gamma_l, beta) - _lar_current(-h, res.gamma_l, beta)) / (2 * h)
