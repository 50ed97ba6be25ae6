import numpy as np
import pytest

from steady_squeeze.bases.full_basis import site_ops
from steady_squeeze.errors import ModelError
from steady_squeeze.models.emitter_models import (
    DICKE,
    FULL,
    PERTURBATIVE,
    DickeParams,
    TfiParams,
    XyzParams,
    build_dicke,
    build_tfi,
    build_xyz,
    single_emitter_drive,
    tfi_direct_hamiltonian,
    two_emitter_drive,
    xyz_direct_hamiltonian,
)


def _dense(op):
    return op.to_dense()


@pytest.mark.parametrize("backend", [FULL, PERTURBATIVE])
def test_xyz_split_matches_direct_hamiltonian(backend):
    p = XyzParams(4, -0.6, -1.0, 1.0)
    model = build_xyz(p, backend)
    np.testing.assert_allclose(_dense(model.hamiltonian), _dense(xyz_direct_hamiltonian(p, backend)), atol=1e-12)
    assert model.effective is (backend == PERTURBATIVE)


@pytest.mark.parametrize("backend", [FULL, PERTURBATIVE])
def test_tfi_split_matches_direct_hamiltonian(backend):
    p = TfiParams(4, 0.3, -2.0)
    model = build_tfi(p, backend)
    np.testing.assert_allclose(_dense(model.hamiltonian), _dense(tfi_direct_hamiltonian(p, backend)), atol=1e-12)


def test_tfi_as_two_emitter_drive():
    n, jx = 4, 0.3
    sites = site_ops(n)
    ops = sites.collective()
    h_diag = (-(jx / (2 * n)) * ops.jz).as_hermitian()
    drive = two_emitter_drive(sites, jx / (4 * n), jx / (4 * n), h_diag)
    model = build_tfi(TfiParams(n, jx, 0.0), FULL)
    np.testing.assert_allclose(_dense(drive), _dense(model.h1), atol=1e-12)


def test_xyz_as_two_emitter_drive():
    n, delta_j = 4, 0.1
    sites = site_ops(n)
    drive = two_emitter_drive(sites, 0.0, delta_j / (2 * n))
    model = build_xyz(XyzParams.from_mean(n, -0.8, delta_j, 1.0), FULL)
    np.testing.assert_allclose(_dense(drive), _dense(model.h1), atol=1e-12)


def test_uniform_single_emitter_drive_is_collective():
    sites = site_ops(3)
    drive = single_emitter_drive(sites, 0.4)
    np.testing.assert_allclose(_dense(drive), -0.4 * _dense(sites.collective().jx), atol=1e-12)
    phased = single_emitter_drive(sites, 0.4, np.pi / 2)
    np.testing.assert_allclose(_dense(phased), 0.4 * _dense(sites.collective().jy), atol=1e-12)


def test_dicke_models():
    model = build_dicke(DickeParams(5, 0.2, 2.0))
    assert model.basis.kind == "dicke"
    assert model.jumps[0].rate == pytest.approx(0.4)
    full = build_dicke(DickeParams(3, 0.2, 2.0), FULL)
    assert full.basis.kind == "tensor"
    np.testing.assert_allclose(_dense(full.h1), -0.2 * _dense(full.collective.jx), atol=1e-12)


def test_emission_on_the_manifold_matches_sum_of_site_decays():
    manifold = build_xyz(XyzParams(4, 0.0, 0.0, 0.0), PERTURBATIVE)
    jump = manifold.jumps[0]
    effective = jump.rate * _dense(jump.operator).conj().T @ _dense(jump.operator)
    np.testing.assert_allclose(np.diag(effective).real, [0, 1, 2, 3, 4], atol=1e-12)


@pytest.mark.parametrize(
    "build",
    [
        lambda: XyzParams(0, 0.1, 0.1, 1.0),
        lambda: XyzParams(4, float("nan"), 0.1, 1.0),
        lambda: TfiParams(4, 0.1, 1.0, gamma=-1.0),
        lambda: DickeParams(4, 0.1, 0.0),
        lambda: DickeParams(0, 0.1, 1.0),
    ],
)
def test_invalid_parameters(build):
    with pytest.raises(ModelError):
        build()


def test_backend_errors():
    with pytest.raises(ModelError):
        build_xyz(XyzParams(4, 0.1, 0.1, 1.0), DICKE)
    with pytest.raises(ModelError):
        build_tfi(TfiParams(4, 0.1, 1.0), "lattice")
    with pytest.raises(ModelError):
        build_dicke(DickeParams(4, 0.1), PERTURBATIVE)
