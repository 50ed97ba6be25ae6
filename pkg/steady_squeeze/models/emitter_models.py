"""Constructors for the built-in dissipative emitter models.

Coupling constants are folded into H1 and the perturbative coupling is set
to 1. Energies are in units of the decay rate (gamma, or Gamma for Dicke).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from steady_squeeze.bases.dicke_basis import collective_ops
from steady_squeeze.bases.full_basis import SiteOperatorSet, site_ops
from steady_squeeze.errors import ModelError
from steady_squeeze.solvers.lindblad import Jump, LindbladModel
from steady_squeeze.utils.operator_core import CollectiveOps, Operator, zero

logger = logging.getLogger(__name__)

FULL = "full"
PERTURBATIVE = "perturbative"
DICKE = "dicke"


def _require_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise ModelError(f"Parameter {name} must be finite, got {value}")


@dataclass(frozen=True)
class XyzParams:
    n: int
    jx: float
    jy: float
    jz: float
    gamma: float = 1.0

    def __post_init__(self):
        _require_finite(jx=self.jx, jy=self.jy, jz=self.jz, gamma=self.gamma)
        if self.n < 1 or self.gamma < 0:
            raise ModelError(f"Invalid XYZ parameters: N={self.n}, gamma={self.gamma}")

    @property
    def j_mean(self) -> float:
        return 0.5 * (self.jx + self.jy)

    @property
    def delta_j(self) -> float:
        return 0.5 * (self.jx - self.jy)

    @classmethod
    def from_mean(cls, n: int, j_mean: float, delta_j: float, jz: float, gamma: float = 1.0):
        return cls(n, j_mean + delta_j, j_mean - delta_j, jz, gamma)


@dataclass(frozen=True)
class TfiParams:
    n: int
    jx: float
    delta: float
    gamma: float = 1.0

    def __post_init__(self):
        _require_finite(jx=self.jx, delta=self.delta, gamma=self.gamma)
        if self.n < 1 or self.gamma < 0:
            raise ModelError(f"Invalid TFI parameters: N={self.n}, gamma={self.gamma}")


@dataclass(frozen=True)
class DickeParams:
    n: int
    omega: float
    big_gamma: float = 1.0

    def __post_init__(self):
        _require_finite(omega=self.omega, big_gamma=self.big_gamma)
        if self.n < 1:
            raise ModelError(f"Invalid emitter count N={self.n}")
        if self.big_gamma <= 0:
            raise ModelError(f"Collective decay rate must be positive, got {self.big_gamma}")


def collective_hamiltonian(
    ops: CollectiveOps, couplings: Sequence[float], fields: Sequence[float] = (0.0, 0.0, 0.0), n: int | None = None
) -> Operator:
    """sum_a (J_a / N)(J^a)^2 + h_a J^a."""
    n = ops.n_emitters if n is None else n
    total = zero(ops.basis)
    for component, coupling, field in zip((ops.jx, ops.jy, ops.jz), couplings, fields):
        if coupling:
            total = total + (coupling / n) * (component @ component)
        if field:
            total = total + field * component
    return total.as_hermitian()


def two_emitter_drive(
    sites: SiteOperatorSet, j_lm: np.ndarray, k_lm: np.ndarray, h_diag: Operator | None = None
) -> Operator:
    """sum_lm (J_lm S_l^+ S_m^- + h.c.) + H_diag + sum_lm (K_lm S_l^+ S_m^+ + h.c.)."""
    n = sites.n_emitters
    j_lm = np.broadcast_to(np.asarray(j_lm, dtype=complex), (n, n))
    k_lm = np.broadcast_to(np.asarray(k_lm, dtype=complex), (n, n))
    total = zero(sites.basis).to_sparse()
    for l in range(n):
        for m in range(n):
            up = sites.splus[l].to_sparse()
            if j_lm[l, m]:
                term = j_lm[l, m] * (up @ sites.sminus[m].to_sparse())
                total = total + term + term.conj().T
            if k_lm[l, m] and l != m:
                term = k_lm[l, m] * (up @ sites.splus[m].to_sparse())
                total = total + term + term.conj().T
    if h_diag is not None:
        total = total + h_diag.to_sparse()
    return Operator(sites.basis, total, True)


def single_emitter_drive(
    sites: SiteOperatorSet, omegas: Sequence[float] | float, phases: Sequence[float] | float = 0.0
) -> Operator:
    """-1/2 sum_i Omega_i (e^{i phi_i} S_i^+ + e^{-i phi_i} S_i^-)."""
    n = sites.n_emitters
    omegas = np.broadcast_to(np.asarray(omegas, dtype=float), (n,))
    phases = np.broadcast_to(np.asarray(phases, dtype=float), (n,))
    total = zero(sites.basis).to_sparse()
    for i in range(n):
        term = np.exp(1j * phases[i]) * sites.splus[i].to_sparse()
        total = total - 0.5 * omegas[i] * (term + term.conj().T)
    return Operator(sites.basis, total, True)


def _collective_space(n: int, backend: str) -> tuple[CollectiveOps, SiteOperatorSet | None]:
    if backend == FULL:
        sites = site_ops(n)
        return sites.collective(), sites
    if backend in (PERTURBATIVE, DICKE):
        return collective_ops(n), None
    raise ModelError(f"Unknown backend '{backend}'")


def _xx_plus_yy(ops: CollectiveOps) -> Operator:
    """(J^x)^2 + (J^y)^2 written through the ladder operators."""
    ladder = ops.jplus @ ops.jminus + ops.jminus @ ops.jplus
    return (0.5 * ladder).as_hermitian()


def _pair_ladder(ops: CollectiveOps) -> Operator:
    """(J^+)^2 + (J^-)^2."""
    return (ops.jplus @ ops.jplus + ops.jminus @ ops.jminus).as_hermitian()


def _emission_jumps(n: int, gamma: float, ops: CollectiveOps, sites: SiteOperatorSet | None) -> tuple[Jump, ...]:
    if sites is not None:
        return tuple(Jump(s, gamma) for s in sites.sminus)
    # symmetric-sector image of sum_i S_i^+ S_i^- = J^z + N/2
    excitations = np.real(np.diag(ops.jz.to_dense())) + n / 2
    effective = Operator(ops.basis, np.diag(np.sqrt(np.clip(excitations, 0.0, None))))
    return (Jump(effective, gamma),)


def _check_two_emitter_backend(backend: str):
    if backend not in (FULL, PERTURBATIVE):
        raise ModelError(f"Two-emitter models support the 'full' and 'perturbative' backends, got '{backend}'")


def build_xyz(p: XyzParams, backend: str = FULL) -> LindbladModel:
    """H0 = (J/N)[(J^x)^2 + (J^y)^2] + (Jz/N)(J^z)^2, H1 = (dJ/2N)[(J^+)^2 + (J^-)^2]."""
    _check_two_emitter_backend(backend)
    ops, sites = _collective_space(p.n, backend)
    h0 = (p.j_mean / p.n) * _xx_plus_yy(ops) + (p.jz / p.n) * (ops.jz @ ops.jz).as_hermitian()
    h1 = (p.delta_j / (2 * p.n)) * _pair_ladder(ops)
    return LindbladModel(
        basis=ops.basis,
        h0=h0.as_hermitian(),
        h1=h1.as_hermitian(),
        coupling=1.0,
        jumps=_emission_jumps(p.n, p.gamma, ops, sites),
        u1_symmetric=True,
        jz=ops.jz,
        effective=sites is None,
        name=f"xyz-{backend}",
        collective=ops,
        site=sites,
    )


def build_tfi(p: TfiParams, backend: str = FULL) -> LindbladModel:
    """H0 = Delta J^z, H1 = (Jx/4N)[(J^+)^2 + (J^-)^2 + J^+J^- + J^-J^+]."""
    _check_two_emitter_backend(backend)
    ops, sites = _collective_space(p.n, backend)
    h1 = (p.jx / (4 * p.n)) * (_pair_ladder(ops) + 2 * _xx_plus_yy(ops))
    return LindbladModel(
        basis=ops.basis,
        h0=(p.delta * ops.jz).as_hermitian(),
        h1=h1.as_hermitian(),
        coupling=1.0,
        jumps=_emission_jumps(p.n, p.gamma, ops, sites),
        u1_symmetric=True,
        jz=ops.jz,
        effective=sites is None,
        name=f"tfi-{backend}",
        collective=ops,
        site=sites,
    )


def build_dicke(p: DickeParams, backend: str = DICKE) -> LindbladModel:
    """H0 = 0, H1 = -Omega J^x, one collective jump J^- at rate Gamma/N."""
    if backend not in (DICKE, FULL):
        raise ModelError(f"Driven Dicke supports the 'dicke' and 'full' backends, got '{backend}'")
    ops, sites = _collective_space(p.n, backend)
    if sites is not None:
        h1 = single_emitter_drive(sites, p.omega)
    else:
        h1 = (-p.omega * ops.jx).as_hermitian()
    return LindbladModel(
        basis=ops.basis,
        h0=zero(ops.basis),
        h1=h1,
        coupling=1.0,
        jumps=(Jump(ops.jminus, p.big_gamma / p.n),),
        u1_symmetric=True,
        jz=ops.jz,
        name=f"dicke-{backend}",
        collective=ops,
        site=sites,
    )


def xyz_direct_hamiltonian(p: XyzParams, backend: str = FULL) -> Operator:
    """(1/N) sum_ij (Jx S^x S^x + Jy S^y S^y + Jz S^z S^z), including i = j."""
    ops, _ = _collective_space(p.n, backend)
    return collective_hamiltonian(ops, (p.jx, p.jy, p.jz))


def tfi_direct_hamiltonian(p: TfiParams, backend: str = FULL) -> Operator:
    """(Jx/N) sum_ij S^x S^x + Delta sum_i S^z."""
    ops, _ = _collective_space(p.n, backend)
    return collective_hamiltonian(ops, (p.jx, 0.0, 0.0), (0.0, 0.0, p.delta))
