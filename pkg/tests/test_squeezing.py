import math

import numpy as np
import pytest
from scipy.linalg import expm

from steady_squeeze.analysis.squeezing import (
    angle_scan,
    pair_correlations,
    qfi,
    squeezing_report,
    symmetric_moment,
    theorem_condition,
    transverse_components,
    transverse_frame,
)
from steady_squeeze.bases.dicke_basis import collective_ops
from steady_squeeze.bases.full_basis import lift_state
from steady_squeeze.errors import BasisMismatchError, FrameUndefinedError, HermiticityError
from steady_squeeze.models.emitter_models import PERTURBATIVE, TfiParams, XyzParams, build_tfi, build_xyz
from steady_squeeze.solvers.lindblad import DensityMatrix
from steady_squeeze.solvers.perturbation import build_eigensystem, perturb_general
from steady_squeeze.utils.operator_core import Operator, PureState


def test_frame_for_a_spin_pointing_down():
    e1, e2 = transverse_frame(np.array([0.0, 0.0, -2.0]))
    np.testing.assert_allclose(e1, [1, 0, 0])
    np.testing.assert_allclose(e2, [0, 1, 0])
    e1, e2 = transverse_frame(np.array([3.0, 0.0, 0.0]))
    np.testing.assert_allclose(e1, [0, 1, 0])


def test_coherent_spin_state_is_not_squeezed(dicke4):
    down = PureState.basis_state(dicke4.basis, 0)
    report = squeezing_report(down, dicke4)
    assert report.xi2 == pytest.approx(1.0)
    assert report.var_min == pytest.approx(1.0)
    assert report.uncertainty_product == pytest.approx(1.0)
    assert report.qfi_anti == pytest.approx(4.0)
    assert report.qfi_bound_gap == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(report.mean_spin, [0, 0, -2], atol=1e-12)
    assert report.mean_spin_length == pytest.approx(2.0)


def test_maximally_mixed_state_has_no_frame(dicke4):
    rho = DensityMatrix(dicke4.basis, np.eye(5) / 5)
    with pytest.raises(FrameUndefinedError):
        squeezing_report(rho, dicke4)


def test_report_checks_basis(dicke4):
    other = PureState.basis_state(collective_ops(3).basis, 0)
    with pytest.raises(BasisMismatchError):
        squeezing_report(other, dicke4)


def test_qfi_pure_and_mixed_agree(dicke4, rng):
    vector = rng.normal(size=5) + 1j * rng.normal(size=5)
    state = PureState(dicke4.basis, vector / np.linalg.norm(vector))
    mixed = DensityMatrix.from_pure(state)
    assert qfi(mixed, dicke4.jx) == pytest.approx(qfi(state, dicke4.jx), rel=1e-8)


def test_qfi_of_mixed_state_is_bounded(dicke4, random_rho):
    rho = DensityMatrix(dicke4.basis, random_rho(5))
    variance = symmetric_moment(dicke4.jx, dicke4.jx, rho) - np.trace(dicke4.jx.to_dense() @ rho.matrix).real ** 2
    assert 0 <= qfi(rho, dicke4.jx) <= 4 * variance + 1e-12


def test_qfi_rejects_non_hermitian_generator(dicke4):
    down = PureState.basis_state(dicke4.basis, 0)
    with pytest.raises(HermiticityError):
        qfi(down, Operator(dicke4.basis, dicke4.jplus.to_dense()))


def test_angle_scan_matches_eigen_angle(driven_dicke10):
    eig = build_eigensystem(driven_dicke10)
    state = perturb_general(eig, driven_dicke10.h1, driven_dicke10.jumps).state(2)
    ops = driven_dicke10.collective
    report = squeezing_report(state, ops)
    scan = angle_scan(state, ops, step_deg=0.25)
    d = (scan.theta_min - report.theta_min) % math.pi
    assert min(d, math.pi - d) < math.radians(0.5)
    assert scan.var_min == pytest.approx(report.var_min, rel=1e-4)


def test_perturbed_dicke_squeezing(driven_dicke10):
    eig = build_eigensystem(driven_dicke10)
    state = perturb_general(eig, driven_dicke10.h1, driven_dicke10.jumps).state(2)
    report = squeezing_report(state, driven_dicke10.collective)
    assert report.xi2 == pytest.approx(1 - 2 * 0.05**2, abs=5e-4)
    assert report.qfi_bound_gap >= -1e-9


def test_pair_correlations_need_tensor_states(dicke4, sites3):
    down = PureState.basis_state(dicke4.basis, 0)
    with pytest.raises(BasisMismatchError):
        pair_correlations(down, sites3)


def test_pair_correlations_of_a_w_state(sites3):
    basis = collective_ops(3).basis
    w = lift_state(PureState.basis_state(basis, 1))
    corr = pair_correlations(w, sites3)
    # <S_i^x S_j^x> = 1/6 for every pair of the W state
    assert corr.mean_xx == pytest.approx(1 / 6)
    assert corr.mean_yy == pytest.approx(1 / 6)
    assert corr.spread == pytest.approx(0.0, abs=1e-12)
    assert np.isnan(corr.xx[0, 0])


def test_transverse_components_site_and_collective(sites3):
    collective = sites3.collective()
    for theta in (0.0, 0.3, 2.0):
        site_j1, site_j2 = transverse_components(sites3, theta)
        j1, j2 = transverse_components(collective, theta)
        np.testing.assert_allclose(site_j1.to_dense(), j1.to_dense(), atol=1e-12)
        np.testing.assert_allclose(site_j2.to_dense(), j2.to_dense(), atol=1e-12)
    staggered, _ = transverse_components(sites3, [0.0, math.pi / 2, 0.0])
    expected = sites3.sx[0] + sites3.sy[1] + sites3.sx[2]
    np.testing.assert_allclose(staggered.to_dense(), expected.to_dense(), atol=1e-12)


def test_theorem_condition(xyz6_manifold):
    eig = build_eigensystem(xyz6_manifold)
    state = perturb_general(eig, xyz6_manifold.h1, xyz6_manifold.jumps, order=1)
    check = theorem_condition(state, xyz6_manifold.collective)
    assert check.squeezes
    assert check.re_f_max > 0


def test_qfi_reference_values():
    ops = collective_ops(10)
    css = PureState.basis_state(ops.basis, 0)
    assert qfi(css, ops.jy) == pytest.approx(10.0)
    qubit = collective_ops(1)
    mixed = DensityMatrix(qubit.basis, np.eye(2) / 2)
    assert qfi(mixed, qubit.jx) == pytest.approx(0.0, abs=1e-12)


@pytest.fixture
def dicke_second_order(driven_dicke10):
    eig = build_eigensystem(driven_dicke10)
    return perturb_general(eig, driven_dicke10.h1, driven_dicke10.jumps).state(2)


def test_report_is_invariant_under_collective_rotation(driven_dicke10, dicke_second_order):
    ops = driven_dicke10.collective
    before = squeezing_report(dicke_second_order, ops)
    rotation = expm(-1j * ops.along((0.4, -0.7, 1.1)).to_dense())
    rotated = PureState(ops.basis, rotation @ dicke_second_order.vector)
    after = squeezing_report(rotated, ops)
    for field in ("xi2", "var_min", "var_max", "qfi_anti", "mean_spin_length"):
        assert getattr(after, field) == pytest.approx(getattr(before, field), rel=1e-9)
    assert not np.allclose(after.mean_spin, before.mean_spin)


def test_anti_squeezing_complement(driven_dicke10, dicke_second_order):
    ops = driven_dicke10.collective
    report = squeezing_report(dicke_second_order, ops)
    # pure state: the quantum Fisher information is four times the variance
    assert report.qfi_anti == pytest.approx(4 * report.var_max, rel=1e-9)
    assert report.qfi_anti == pytest.approx(qfi(dicke_second_order, ops.along(report.direction_max)), rel=1e-12)
    assert report.var_max > report.var_min
    assert np.dot(report.direction_max, report.direction_min) == pytest.approx(0.0, abs=1e-12)
    assert np.dot(report.direction_max, report.mean_spin) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize(
    "build",
    [
        lambda: build_xyz(XyzParams.from_mean(6, -0.8, 0.05, 1.0), PERTURBATIVE),
        lambda: build_tfi(TfiParams(6, 0.05, -6.0), PERTURBATIVE),
    ],
    ids=["xyz", "tfi"],
)
def test_minimal_uncertainty_defects_shrink_with_the_drive(build):
    model = build()
    ops = model.collective
    perturbed = perturb_general(build_eigensystem(model), model.h1, model.jumps)

    def product_defect(lam):
        return abs(squeezing_report(perturbed.state(2, coupling=lam), ops).uncertainty_product - 1.0)

    def qfi_gap(lam):
        return abs(squeezing_report(perturbed.state(2, coupling=lam), ops).qfi_bound_gap)

    for measure in (product_defect, qfi_gap):
        coarse, fine = measure(1.0), measure(0.5)
        assert fine <= 1e-12 or coarse / fine >= 3.5
