import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kitaev_fcs import ChainSpec, CountingField, ReservoirSpec
from kitaev_fcs.errors import SingularPropagator
from kitaev_fcs.keldysh import (LAMBDA1, LAMBDA2, assemble_kernel, counting_matrix, det_ratio, lead_self_energy,
                                wide_band_block)
from kitaev_fcs.model import build_bdg_matrix
from kitaev_fcs.oracles import analytic_cf, landauer_current

RES = ReservoirSpec(0.3, 0.3, mu_l=0.05, mu_r=-0.05, beta=10.0)
CHAIN = ChainSpec(5, mu=0.6, eta=1.0, delta=0.7)


def test_rotations_orthogonal():
    np.testing.assert_allclose(LAMBDA1 @ LAMBDA1, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(LAMBDA2.T @ LAMBDA2, np.eye(2), atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(xi=st.floats(-10, 10))
def test_counting_matrix_adjoint_for_real_field(xi):
    m_dag, m = counting_matrix(xi)
    np.testing.assert_allclose(m_dag, m.conj().T, atol=1e-14)


def test_counting_matrix_at_zero_is_nambu_sign():
    m_dag, m = counting_matrix(0.0)
    np.testing.assert_allclose(m_dag @ m, np.eye(4), atol=1e-14)
    q = np.zeros((4, 4), complex)
    q[0::2, 0::2] = wide_band_block(0.3, 0.2)
    q[1::2, 1::2] = wide_band_block(0.3, 0.7)
    np.testing.assert_allclose(m_dag @ q @ m, q, atol=1e-15)


def test_undressed_block_form():
    blk = lead_self_energy("left", 0.0, 0.2, RES).matrix
    n_e = 1 / (np.exp(10 * (0.2 - 0.05)) + 1)
    np.testing.assert_allclose(blk[0::2, 0::2], [[-0.3j, -0.6j * (1 - 2 * n_e)], [0, 0.3j]], atol=1e-15)
    assert blk[1, 0] == 0 and blk[0, 1] == 0


def test_half_filling_keldysh_entry_vanishes():
    blk = lead_self_energy("left", 0.0, RES.mu_l, RES).matrix
    assert abs(blk[0, 2]) < 1e-15


def test_detached_lead_block_is_zero():
    res = ReservoirSpec(0.0, 0.3)
    assert not lead_self_energy("left", 1.2, 0.4, res).matrix.any()


def test_two_pi_periodicity_of_dressing():
    a = lead_self_energy("left", 2 * np.pi + 0.4, 0.3, RES).matrix
    b = lead_self_energy("left", 0.4, 0.3, RES).matrix
    np.testing.assert_allclose(a, b, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(xi=st.floats(-7, 7), im=st.floats(-2, 2), w=st.floats(-3, 3))
def test_dressing_preserves_determinant(xi, im, w):
    a = np.linalg.det(lead_self_energy("left", xi + 1j * im, w, RES).matrix)
    b = np.linalg.det(lead_self_energy("left", 0.0, w, RES).matrix)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-14)


def test_side_validation():
    with pytest.raises(ValueError):
        lead_self_energy("middle", 0.0, 0.0, RES)


def test_decoupled_kernel_is_identity():
    res = ReservoirSpec(0.0, 0.0)
    k = assemble_kernel(CHAIN, res, CountingField(0.7, 0.2), 0.123)
    np.testing.assert_allclose(k, np.eye(20))
    assert det_ratio(CHAIN, res, CountingField(0.7), 0.123) == pytest.approx(1.0)


def test_kernel_dimensions():
    assert assemble_kernel(ChainSpec(11, mu=0.0, eta=0.0, delta=1.0), RES, CountingField(0.3), 0.2).shape == (44, 44)


def test_kernel_support_on_end_sites():
    k = assemble_kernel(CHAIN, RES, CountingField(0.9, 0.4), 0.37)
    off = k - np.eye(k.shape[0])
    cols = np.nonzero(np.abs(off).sum(axis=0) > 0)[0]
    assert set(cols) <= set(range(4)) | set(range(16, 20))


def test_zero_field_ratio_is_one():
    for w in (-2.1, 0.0, 0.5):
        assert det_ratio(CHAIN, RES, CountingField(), w) == 1.0


def test_det_ratio_matches_kernel_determinant():
    cf = CountingField(1.3, -0.4)
    w = 0.41
    num = np.linalg.det(assemble_kernel(CHAIN, RES, cf, w))
    den = np.linalg.det(assemble_kernel(CHAIN, RES, CountingField(), w))
    assert det_ratio(CHAIN, RES, cf, w) == pytest.approx(num / den, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(xi=st.floats(0, 2 * np.pi), w=st.floats(-3, 3))
def test_conjugation_and_periodicity(xi, w):
    z = det_ratio(CHAIN, RES, CountingField(xi), w)
    assert det_ratio(CHAIN, RES, CountingField(-xi), w) == pytest.approx(np.conj(z), rel=1e-9, abs=1e-13)
    assert det_ratio(CHAIN, RES, CountingField(xi + 2 * np.pi), w) == pytest.approx(z, rel=1e-9, abs=1e-13)


def test_singular_at_detached_eigenvalue():
    res = ReservoirSpec(0.0, 0.0)
    ev = np.linalg.eigvalsh(build_bdg_matrix(CHAIN))
    with pytest.raises(SingularPropagator):
        assemble_kernel(CHAIN, res, CountingField(0.5), float(ev[3]))
    with pytest.raises(SingularPropagator):
        det_ratio(CHAIN, res, CountingField(0.5), float(ev[3]))


def test_coupled_eigenvalue_is_regular():
    ev = np.linalg.eigvalsh(build_bdg_matrix(CHAIN))
    z = det_ratio(CHAIN, RES, CountingField(0.5), float(ev[3]))
    assert np.isfinite(z)


def test_trivial_example_against_closed_form():
    chain = ChainSpec(3, mu=1.0, eta=1.0, delta=0.0)
    z = det_ratio(chain, RES, CountingField(1.1), 0.7)
    assert z == pytest.approx(analytic_cf("trivial3", chain, RES, 1.1, 0.7), rel=1e-10)


def test_charge_sign_convention():
    """With mu_L > mu_R the mean current out of the left lead is positive."""
    chain = ChainSpec(3, mu=1.0, eta=1.0, delta=0.0)
    h = 1e-5
    w = 0.02
    dz = (det_ratio(chain, RES, CountingField(h), w) - det_ratio(chain, RES, CountingField(-h), w)) / (2 * h)
    assert (-1j * dz).real > 0
    assert landauer_current(chain, RES) > 0
