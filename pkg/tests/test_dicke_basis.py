import numpy as np
import pytest

from steady_squeeze.bases.dicke_basis import (
    DickeLadderTable,
    collective_ops,
    dicke_state,
    dicke_xxz_energy,
)
from steady_squeeze.bases.full_basis import restrict_to_symmetric, site_ops
from steady_squeeze.errors import InvalidSpinError
from steady_squeeze.models.emitter_models import collective_hamiltonian


def test_ladder_coefficients():
    table = DickeLadderTable.from_spin(1.0)
    np.testing.assert_allclose(table.coeff_plus, [np.sqrt(2), np.sqrt(2)])
    np.testing.assert_allclose(table.m_values, [-1, 0, 1])


def test_raising_from_the_bottom(dicke4):
    basis = dicke4.basis
    raised = dicke4.jplus.apply(dicke_state(basis, -2))
    np.testing.assert_allclose(raised, 2 * dicke_state(basis, -1))
    np.testing.assert_allclose(dicke4.jminus.apply(dicke_state(basis, -2)), np.zeros(5))
    np.testing.assert_allclose(np.diag(dicke4.jz.to_dense()).real, [-2, -1, 0, 1, 2])


@pytest.mark.parametrize("m", [0.5, 3, -2.5])
def test_dicke_state_rejects_missing_levels(dicke4, m):
    with pytest.raises(InvalidSpinError):
        dicke_state(dicke4.basis, m)


def test_lower_spin_manifolds():
    ops = collective_ops(3, spin=0.5)
    assert ops.basis.dimension == 2
    np.testing.assert_allclose(ops.casimir().to_dense(), 0.75 * np.eye(2), atol=1e-12)
    with pytest.raises(InvalidSpinError):
        collective_ops(4, spin=0.5)


def test_xxz_energies_match_the_hamiltonian(dicke4):
    j_mean, j_z = -0.8, 1.0
    h = collective_hamiltonian(dicke4, (j_mean, j_mean, j_z))
    expected = [dicke_xxz_energy(4, j_mean, j_z, 2.0, m) for m in range(-2, 3)]
    np.testing.assert_allclose(h.to_dense(), np.diag(expected), atol=1e-12)
    with pytest.raises(InvalidSpinError):
        dicke_xxz_energy(4, j_mean, j_z, 2.0, 3.0)


@pytest.mark.parametrize("name", ["jx", "jy", "jz", "jplus", "jminus"])
def test_manifold_matches_symmetric_restriction(name):
    full = getattr(site_ops(3).collective(), name)
    manifold = getattr(collective_ops(3), name)
    np.testing.assert_allclose(restrict_to_symmetric(full).to_dense(), manifold.to_dense(), atol=1e-12)
