import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_psd, rank_one
from ucmbl.errors import DegenerateC22, NotPSD, ZeroLambda
from ucmbl.psd import (
    SymTensor2,
    check_psd,
    det2,
    diagonalize_normal_flux,
    flux_matrices,
    is_psd,
    lambda_of,
    psd_sqrt,
)


def eig_sqrt(c):
    """Oracle: square root through numpy's symmetric eigendecomposition."""
    w, q = np.linalg.eigh(c.as_matrix())
    return q @ (np.sqrt(np.clip(w, 0.0, None))[..., None] * np.swapaxes(q, -1, -2))


def test_sqrt_identity_and_diagonal():
    a = psd_sqrt(SymTensor2.identity())
    assert (a.a11, a.a12, a.a22) == (1.0, 0.0, 1.0)
    a = psd_sqrt(SymTensor2(4.0, 0.0, 9.0))
    assert (a.a11, a.a12, a.a22) == pytest.approx((2.0, 0.0, 3.0), abs=1e-15)


def test_sqrt_of_2112():
    # eigenvalues 1 and 3; sqrt in the eigenbasis gives (sqrt3 +- 1) / 2
    a = psd_sqrt(SymTensor2(2.0, 1.0, 2.0))
    assert a.a11 == pytest.approx(1.3660254037844386, abs=1e-15)
    assert a.a12 == pytest.approx(0.36602540378443865, abs=1e-15)
    assert a.a22 == pytest.approx(1.3660254037844386, abs=1e-15)


def test_sqrt_zero_tensor_is_zero():
    a = psd_sqrt(SymTensor2(0.0, 0.0, 0.0))
    assert (a.a11, a.a12, a.a22) == (0.0, 0.0, 0.0)


def test_sqrt_rank_one():
    # C = v v^T with v = (3, 4): sqrt(C) = v v^T / |v|
    a = psd_sqrt(SymTensor2(9.0, 12.0, 16.0))
    assert (a.a11, a.a12, a.a22) == pytest.approx((1.8, 2.4, 3.2), abs=1e-14)


def test_sqrt_random_suite_against_eigendecomposition(rng):
    c = random_psd(rng, 10_000)
    a = psd_sqrt(c)
    sq = a.as_matrix() @ a.as_matrix()
    assert np.max(np.abs(sq - c.as_matrix())) <= 1e-12 * max(1.0, float(np.max(np.abs(c.as_matrix()))))
    assert np.all(is_psd(a))
    assert np.max(np.abs(a.as_matrix() - eig_sqrt(c))) <= 1e-12


def test_sqrt_rank_one_suite(rng):
    # singular C: the root is only Holder-1/2 in C, so rounding of the stored
    # entries moves it by O(sqrt(eps)); A^2 = C still holds to round-off
    c, exact = rank_one(rng, 1000)
    a = psd_sqrt(c)
    assert np.max(np.abs(a.as_matrix() @ a.as_matrix() - c.as_matrix())) <= 1e-12
    assert np.max(np.abs(a.as_matrix() - exact.as_matrix())) <= 1e-7
    assert np.all(is_psd(a))


def test_sqrt_rejects_indefinite_and_small_c22():
    with pytest.raises(NotPSD):
        psd_sqrt(SymTensor2(1.0, 2.0, 1.0))
    with pytest.raises(NotPSD):
        psd_sqrt(SymTensor2(-1.0, 0.0, 1.0))
    with pytest.raises(DegenerateC22):
        psd_sqrt(SymTensor2(1.0, 0.0, 1e-4), c22_min=1e-3)


psd_entries = st.tuples(
    st.floats(0.0, 5.0), st.floats(-5.0, 5.0), st.floats(0.1, 5.0)
)


@given(psd_entries, st.floats(0.05, 20.0))
def test_sqrt_scales(e, s):
    l11, l21, l22 = e
    c = SymTensor2(l11 * l11, l11 * l21, l21 * l21 + l22 * l22)
    a = psd_sqrt(c)
    b = psd_sqrt(SymTensor2(s * s * c.a11, s * s * c.a12, s * s * c.a22))
    scale = max(1.0, s * max(abs(a.a11), abs(a.a12), abs(a.a22)))
    assert np.allclose([b.a11, b.a12, b.a22], [s * a.a11, s * a.a12, s * a.a22], rtol=0, atol=1e-12 * scale)


@given(psd_entries)
def test_sqrt_squares_back(e):
    l11, l21, l22 = e
    c = SymTensor2(l11 * l11, l11 * l21, l21 * l21 + l22 * l22)
    a = psd_sqrt(c)
    m = a.as_matrix() @ a.as_matrix()
    assert np.max(np.abs(m - c.as_matrix())) <= 1e-12 * max(1.0, np.max(np.abs(c.as_matrix())))
    assert is_psd(a)


def test_det2_examples():
    assert det2(SymTensor2.identity()) == 1.0
    assert det2(SymTensor2(4.0, 0.0, 9.0)) == 36.0
    assert det2(SymTensor2(2.0, 1.0, 2.0)) == 3.0


def test_lambda_examples(rng):
    assert lambda_of(SymTensor2(1.0, 0.0, 2.0)) == 2.0
    assert lambda_of(SymTensor2(1.0, 3.0, 4.0)) == 5.0
    a = psd_sqrt(random_psd(rng, 1000))
    assert np.max(np.abs(lambda_of(a) - np.sqrt(a.a12**2 + a.a22**2))) <= 1e-14


def test_check_psd_tolerance():
    check_psd(SymTensor2(1.0, 1.0 + 1e-14, 1.0))   # within the 1e-12 slack
    with pytest.raises(NotPSD):
        check_psd(SymTensor2(1.0, 1.0 + 1e-6, 1.0))


def test_flux_matrices_identity_and_symmetry(rng):
    a1, a2 = flux_matrices(SymTensor2.identity())
    assert np.array_equal(a1, [[0, 1, 0], [1, 0, 0], [0, 0, 0]])
    assert np.array_equal(a2, [[0, 0, 1], [0, 0, 0], [1, 0, 0]])
    a = psd_sqrt(random_psd(rng, 200))
    a1, a2 = flux_matrices(a)
    assert np.array_equal(a1, np.swapaxes(a1, -1, -2))
    assert np.array_equal(a2, np.swapaxes(a2, -1, -2))


@pytest.mark.parametrize(
    "a12, a22, lam",
    [(0.0, 1.0, 1.0), (0.0, 2.0, 2.0), (3.0, 4.0, 5.0)],
)
def test_diagonalize_examples(a12, a22, lam):
    eig, r = diagonalize_normal_flux(SymTensor2(1.0, a12, a22))
    assert eig == pytest.approx([-lam, 0.0, lam])
    _, a2 = flux_matrices(SymTensor2(1.0, a12, a22))
    assert np.max(np.abs(r @ np.diag(eig) @ r.T - a2)) <= 1e-12
    assert np.max(np.abs(r.T @ r - np.eye(3))) <= 1e-14


def test_diagonalize_sign_convention_and_reassembly(rng):
    a = psd_sqrt(random_psd(rng, 2000))
    eig, r = diagonalize_normal_flux(a)
    _, a2 = flux_matrices(a)
    back = r @ (eig[..., :, None] * np.swapaxes(r, -1, -2))
    assert np.max(np.abs(back - a2)) <= 1e-12
    for k in range(3):
        col = r[..., :, k]
        first = np.take_along_axis(col, np.argmax(np.abs(col) > 1e-14, axis=-1)[..., None], -1)
        assert np.all(first > 0)


def test_diagonalize_zero_lambda():
    with pytest.raises(ZeroLambda):
        diagonalize_normal_flux(SymTensor2(1.0, 0.0, 0.0))
