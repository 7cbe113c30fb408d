import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kitaev_fcs.model import (ChainSpec, OccupationSet, ReservoirSpec, build_bdg_matrix, occupation,
                              occupations, pairing_block)

finite = st.floats(-3, 3, allow_nan=False)


def test_chain_validation():
    with pytest.raises(ValueError):
        ChainSpec(0)
    with pytest.raises(ValueError):
        ChainSpec(3, mu=np.nan)


def test_reservoir_validation():
    with pytest.raises(ValueError):
        ReservoirSpec(-0.1, 0.3)
    with pytest.raises(ValueError):
        ReservoirSpec(0.3, 0.3, beta=0.0)


def test_bdg_single_site():
    k = build_bdg_matrix(ChainSpec(1, mu=0.7, eta=1.0, delta=0.4))
    np.testing.assert_allclose(k, np.diag([-0.7, 0.7]))


def test_bdg_blocks():
    chain = ChainSpec(4, mu=0.3, eta=1.1, delta=0.6)
    k = build_bdg_matrix(chain)
    assert k.shape == (8, 8)
    d = pairing_block(1.1, 0.6)
    np.testing.assert_allclose(k[0:2, 2:4], -d)
    np.testing.assert_allclose(k[2:4, 0:2], -d.T)
    np.testing.assert_allclose(k[4:6, 4:6], np.diag([-0.3, 0.3]))
    assert np.all(k[0:2, 4:8] == 0)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 12), mu=finite, eta=finite, delta=finite)
def test_bdg_hermitian_and_particle_hole(n, mu, eta, delta):
    k = build_bdg_matrix(ChainSpec(n, mu=mu, eta=eta, delta=delta))
    np.testing.assert_allclose(k, k.T.conj())
    ev = np.sort(np.linalg.eigvalsh(k))
    np.testing.assert_allclose(ev, -ev[::-1], atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(w=st.floats(-50, 50), mu=st.floats(-2, 2), beta=st.floats(0.1, 1e4))
def test_hole_occupation_is_mirrored_electron(w, mu, beta):
    n_h = occupation(w, mu, beta, "hole")
    n_e = occupation(-w, mu, beta, "electron")
    assert n_h == pytest.approx(1 - n_e, abs=1e-15)
    assert 0.0 <= n_h <= 1.0


def test_occupation_extremes_do_not_overflow():
    with np.errstate(over="raise"):
        assert occupation(1e4, 0.0, 1e4) == 0.0
        assert occupation(-1e4, 0.0, 1e4) == 1.0
    with pytest.raises(ValueError):
        occupation(0.0, 0.0, 1.0, "proton")


@settings(max_examples=60, deadline=None)
@given(w=st.floats(-2, 2), ml=st.floats(-0.5, 0.5), mr=st.floats(-0.5, 0.5), beta=st.floats(0.5, 20))
def test_detailed_balance_identities(w, ml, mr, beta):
    res = ReservoirSpec(0.3, 0.3, mu_l=ml, mu_r=mr, beta=beta)
    n1e, n1h, n2e, n2h = occupations(w, res)
    # complements from the mirrored logistic, free of 1 - n cancellation
    b1e, b1h, b2e, b2h = occupations(-w, ReservoirSpec(0.3, 0.3, mu_l=-ml, mu_r=-mr, beta=beta))
    assert b1e == pytest.approx(1 - n1e, abs=1e-15)
    assert b2h == pytest.approx(1 - n2h, abs=1e-15)
    assert b1e * n2e == pytest.approx(np.exp(-beta * (ml - mr)) * n1e * b2e, rel=1e-12)
    assert b1e * n2h == pytest.approx(np.exp(-beta * (ml + mr)) * n1e * b2h, rel=1e-12)
    assert b1e * n1h == pytest.approx(np.exp(-2 * beta * ml) * n1e * b1h, rel=1e-12)


def test_occupation_set():
    occ = OccupationSet(0.25, 0.75)
    assert occ.nbar_e == 0.75 and occ.nbar_h == 0.25


def test_sweet_spot_spectrum():
    ev = np.linalg.eigvalsh(build_bdg_matrix(ChainSpec(3, mu=0.0, eta=1.0, delta=1.0)))
    np.testing.assert_allclose(np.sort(ev), [-2, -2, 0, 0, 2, 2], atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 8), mu=finite, eta=finite, delta=finite)
def test_particle_hole_conjugation(n, mu, eta, delta):
    k = build_bdg_matrix(ChainSpec(n, mu=mu, eta=eta, delta=delta))
    s1 = np.kron(np.eye(n), np.array([[0, 1], [1, 0]]))
    np.testing.assert_allclose(s1 @ k.conj() @ s1, -k, atol=1e-14)


def test_no_pairing_decouples_nambu_sectors():
    k = build_bdg_matrix(ChainSpec(5, mu=0.3, eta=0.8, delta=0.0))
    assert np.all(k[0::2, 1::2] == 0)


def test_occupation_examples():
    assert occupation(0.3, 0.3, 7.0) == 0.5
    assert occupation(0.1, 0.0, 1e4) < 1e-300
    assert occupation(0.5, 0.3, 2.0, "hole") == pytest.approx(1 / (1 + np.exp(1.6)))
    np.testing.assert_allclose(occupation(np.array([0.0, 1.0]), 0.0, 1.0), [0.5, 1 / (1 + np.e)])
