import numpy as np
import pytest

from steady_squeeze.bases.dicke_basis import collective_ops, dicke_state
from steady_squeeze.bases.full_basis import (
    allowed_spins,
    check_emitter_cap,
    lift_matrix,
    lift_state,
    permutation_isometry,
    popcounts,
    site_ops,
    spin_length_weights,
    symmetric_isometry,
)
from steady_squeeze.errors import BasisMismatchError, DimensionCapError
from steady_squeeze.utils.operator_core import HilbertBasis, PureState, expectation_real, vectorize


def test_site_zero_is_most_significant(sites3):
    down = PureState.basis_state(sites3.basis, 0)
    assert expectation_real(sites3.sz[0], down) == pytest.approx(-0.5)
    raised = sites3.splus[0].apply(down.vector)
    assert np.flatnonzero(raised).tolist() == [4]
    raised = sites3.splus[2].apply(down.vector)
    assert np.flatnonzero(raised).tolist() == [1]


def test_site_dictionary(sites3):
    site = sites3.site(1)
    assert site["x"] is sites3.sx[1]
    assert set(site) == {"x", "y", "z", "+", "-"}


def test_emitter_cap():
    with pytest.raises(DimensionCapError):
        check_emitter_cap(13)
    with pytest.raises(DimensionCapError):
        check_emitter_cap(0)
    check_emitter_cap(5, cap=5)


def test_popcounts():
    assert popcounts(3).tolist() == [0, 1, 1, 2, 1, 2, 2, 3]


def test_isometry_is_orthonormal():
    iso = symmetric_isometry(4).toarray()
    np.testing.assert_allclose(iso.conj().T @ iso, np.eye(5), atol=1e-12)


def test_lifted_states(sites3):
    basis = collective_ops(3).basis
    lifted = lift_state(PureState(basis, dicke_state(basis, -1.5)))
    assert lifted.basis == HilbertBasis.tensor(3)
    np.testing.assert_allclose(lifted.vector, np.eye(8)[0])

    w = PureState(basis, dicke_state(basis, -0.5))
    np.testing.assert_allclose(lift_state(w).vector[[1, 2, 4]], np.full(3, 1 / np.sqrt(3)))
    np.testing.assert_allclose(lift_matrix(w.projector(), 3), lift_state(w).projector(), atol=1e-12)
    with pytest.raises(BasisMismatchError):
        lift_state(PureState.basis_state(collective_ops(3, spin=0.5).basis, 0))


def test_allowed_spins():
    assert allowed_spins(3) == [1.5, 0.5]
    assert allowed_spins(4) == [2.0, 1.0, 0.0]


def test_spin_length_weights():
    basis = HilbertBasis.tensor(2)
    down = PureState.basis_state(basis, 0)
    weights = spin_length_weights(down)
    assert weights[1.0] == pytest.approx(1.0)
    assert weights[0.0] == pytest.approx(0.0, abs=1e-12)

    singlet = PureState(basis, np.array([0, 1, -1, 0]) / np.sqrt(2))
    weights = spin_length_weights(singlet)
    assert weights[0.0] == pytest.approx(1.0)
    assert weights[1.0] == pytest.approx(0.0, abs=1e-12)

    with pytest.raises(BasisMismatchError):
        spin_length_weights(PureState.basis_state(HilbertBasis.dicke(2), 0))


def test_permutation_isometry():
    iso = permutation_isometry(3).toarray()
    assert iso.shape == (64, 20)
    np.testing.assert_allclose(iso.conj().T @ iso, np.eye(20), atol=1e-12)
    identity = vectorize(np.eye(8))
    np.testing.assert_allclose(iso @ (iso.conj().T @ identity), identity, atol=1e-12)
    one_site = vectorize(site_ops(3).sz[0].to_dense())
    assert np.linalg.norm(iso.conj().T @ one_site) < np.linalg.norm(one_site)
