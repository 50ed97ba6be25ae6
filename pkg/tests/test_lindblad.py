import numpy as np
import pytest

from steady_squeeze.bases.full_basis import lift_matrix
from steady_squeeze.errors import (
    BasisMismatchError,
    DimensionCapError,
    ModelError,
    NonUniqueSteadyStateError,
    StateNormalizationError,
)
from steady_squeeze.models.emitter_models import (
    DICKE,
    FULL,
    PERTURBATIVE,
    DickeParams,
    XyzParams,
    build_dicke,
    build_xyz,
)
from steady_squeeze.solvers.lindblad import (
    DensityMatrix,
    Jump,
    LindbladModel,
    SolverSettings,
    check_liouvillian_caps,
    lindblad_rhs,
    liouvillian,
    require_physical,
    steady_state,
    trace_row,
)
from steady_squeeze.utils.operator_core import HilbertBasis, PureState, devectorize, vectorize, zero


def test_jump_rates_validated(dicke4):
    with pytest.raises(ModelError):
        Jump(dicke4.jminus, -1.0)
    with pytest.raises(ModelError):
        Jump(dicke4.jminus, float("nan"))


def test_model_validation(dicke4, sites3):
    with pytest.raises(BasisMismatchError):
        LindbladModel(dicke4.basis, dicke4.jz, sites3.sz[0])
    with pytest.raises(ModelError):
        LindbladModel(dicke4.basis, dicke4.jz, dicke4.jx, u1_symmetric=True)
    with pytest.raises(ModelError):
        LindbladModel(dicke4.basis, dicke4.jx, dicke4.jx, u1_symmetric=True, jz=dicke4.jz)


def test_liouvillian_matches_master_equation(random_rho):
    model = build_dicke(DickeParams(3, 0.3, 1.0), DICKE)
    rho = random_rho(model.dimension)
    np.testing.assert_allclose(
        liouvillian(model) @ vectorize(rho), vectorize(lindblad_rhs(model, rho)), atol=1e-12
    )


def test_liouvillian_preserves_trace():
    model = build_xyz(XyzParams.from_mean(3, -0.8, 0.1, 1.0))
    superop = liouvillian(model).toarray()
    np.testing.assert_allclose(superop[trace_row(model.dimension)].sum(axis=0), 0, atol=1e-12)


def test_effective_models_have_no_liouvillian():
    model = build_xyz(XyzParams.from_mean(6, -0.8, 0.1, 1.0), PERTURBATIVE)
    with pytest.raises(ModelError):
        liouvillian(model)


def test_liouvillian_caps():
    with pytest.raises(DimensionCapError):
        check_liouvillian_caps(HilbertBasis.tensor(9))
    with pytest.raises(DimensionCapError):
        check_liouvillian_caps(HilbertBasis.dicke(600))
    check_liouvillian_caps(HilbertBasis.dicke(300))


def test_solver_settings_reject_unknown_method():
    with pytest.raises(ValueError):
        SolverSettings(method="magic")


@pytest.mark.parametrize("n", [3, 5])
def test_unperturbed_xyz_decays_to_all_down(n):
    rho = steady_state(build_xyz(XyzParams.from_mean(n, -0.8, 0.0, 1.0)))
    expected = np.zeros((2**n, 2**n))
    expected[0, 0] = 1
    np.testing.assert_allclose(rho.matrix, expected, atol=1e-10)
    assert not rho.solver_info.flagged


def test_solver_methods_agree():
    model = build_dicke(DickeParams(6, 0.3, 1.0), DICKE)
    dense = steady_state(model, SolverSettings(method="dense"))
    direct = steady_state(model, SolverSettings(method="direct"))
    iterative = steady_state(model, SolverSettings(method="iterative"))
    np.testing.assert_allclose(direct.matrix, dense.matrix, atol=1e-9)
    np.testing.assert_allclose(iterative.matrix, dense.matrix, atol=1e-8)
    assert dense.solver_info.method == "dense"
    assert direct.solver_info.method == "direct"
    assert iterative.solver_info.iterations is not None


def test_steady_state_quality():
    model = build_dicke(DickeParams(20, 0.2, 1.0), DICKE)
    rho = steady_state(model)
    info = rho.solver_info
    assert info.residual < 1e-10 * model.dimension
    assert rho.diagnostics.trace_dev < 1e-10
    assert rho.diagnostics.min_eigenvalue > -1e-8
    assert 0 < rho.purity <= 1
    assert require_physical(rho) is rho
    residual = lindblad_rhs(model, np.asarray(rho.matrix))
    assert np.max(np.abs(residual)) < 1e-9


@pytest.mark.parametrize("method", ["dense", "direct"])
def test_degenerate_null_space_is_flagged(dicke4, method):
    model = LindbladModel(dicke4.basis, dicke4.jz, zero(dicke4.basis))
    rho = steady_state(model, SolverSettings(method=method))
    assert rho.solver_info.unique is False
    assert rho.solver_info.flagged
    expected = np.zeros((5, 5))
    expected[0, 0] = 1
    np.testing.assert_allclose(rho.matrix, expected, atol=1e-8)
    with pytest.raises(NonUniqueSteadyStateError):
        steady_state(model, SolverSettings(method=method, require_unique=True))


def test_density_matrix_diagnostics(dicke4):
    down = PureState.basis_state(dicke4.basis, 0)
    rho = DensityMatrix.from_pure(down)
    assert rho.purity == pytest.approx(1.0)
    assert rho.diagnostics.violations() == []
    bad = DensityMatrix(dicke4.basis, np.diag([1.5, -0.5, 0, 0, 0]))
    assert any("negative eigenvalue" in v for v in bad.diagnostics.violations())
    with pytest.raises(StateNormalizationError):
        require_physical(bad)
    round_trip = DensityMatrix.from_vector(dicke4.basis, vectorize(rho))
    np.testing.assert_allclose(round_trip.matrix, devectorize(vectorize(rho)))


def test_symmetric_reduction_matches_dense():
    model = build_xyz(XyzParams.from_mean(3, -0.8, 0.1, 1.0), FULL)
    dense = steady_state(model, SolverSettings(method="dense"))
    reduced = steady_state(model)
    assert reduced.solver_info.method == "symmetric"
    assert reduced.solver_info.unique
    np.testing.assert_allclose(reduced.matrix, dense.matrix, atol=1e-9)
    assert reduced.solver_info.residual < 1e-10 * model.dimension


def test_symmetric_method_needs_permutation_invariance(sites3):
    model = LindbladModel(
        sites3.basis, sites3.sz[0], sites3.sx[1], coupling=0.1, jumps=[Jump(sites3.sminus[0], 1.0)]
    )
    with pytest.raises(ModelError):
        steady_state(model, SolverSettings(method="symmetric"))
    assert steady_state(model).solver_info.method == "dense"


def test_degenerate_full_space_agrees_across_methods():
    n = 3
    full = build_dicke(DickeParams(n, 0.3, 1.0), FULL)
    manifold = steady_state(build_dicke(DickeParams(n, 0.3, 1.0), DICKE))
    expected = lift_matrix(manifold.matrix, n)
    for method in ("dense", "symmetric", "direct"):
        rho = steady_state(full, SolverSettings(method=method))
        assert rho.solver_info.unique is False, method
        assert rho.solver_info.null_dimension > 1, method
        np.testing.assert_allclose(rho.matrix, expected, atol=1e-8, err_msg=method)
