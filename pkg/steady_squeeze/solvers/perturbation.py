"""Pure-state perturbation theory for steady states.

The steady state of H0 + lambda*H1 with jumps that annihilate |phi0> is
expanded as |phi0> + lambda |psi1> + lambda^2 |psi2>. With c_n, d_n the
components of psi1, psi2 in the eigenbasis of H0 and D = sum_j g_j L_j^+ L_j:

    (E_n - E0) c_n + <n|H1|0> - i/2 sum_m D_nm c_m = 0
    (E_n - E0) d_n + <n|H1|psi1> - c_n <0|H1|0>
        + i sum_j g_j <n|L_j|psi1><psi1|L_j^+|0> - i/2 sum_m D_nm d_m = 0

for n != 0, with c_0 = 0 and d_0 = -<psi1|psi1>/2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from steady_squeeze.config import constants
from steady_squeeze.errors import BasisMismatchError, PerturbationError
from steady_squeeze.utils.operator_core import HilbertBasis, Operator, PureState

logger = logging.getLogger(__name__)


def _groups(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Index runs of sorted values that agree within tol."""
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    splits = np.flatnonzero(np.diff(values) > tol * scale) + 1
    return np.split(np.arange(values.size), splits)


def _split(vectors: np.ndarray, operators: list[np.ndarray], tol: float) -> list[np.ndarray]:
    if not operators or vectors.shape[1] == 1:
        return [vectors]
    sub = vectors.conj().T @ (operators[0] @ vectors)
    sub = 0.5 * (sub + sub.conj().T)
    values, rotation = np.linalg.eigh(sub)
    rotated = vectors @ rotation
    blocks = []
    for group in _groups(values, tol):
        blocks.extend(_split(rotated[:, group], operators[1:], tol))
    return blocks


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of every column real positive."""
    out = np.array(vectors, dtype=complex)
    for k in range(out.shape[1]):
        pivot = out[np.argmax(np.abs(out[:, k])), k]
        out[:, k] *= np.conj(pivot) / abs(pivot)
    return out


def simultaneous_eigenbasis(
    operators: Sequence[Operator], tol: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize the first operator, refining degenerate groups with the rest.

    Returns (values, vectors): values[k, n] = <n|A_k|n>, vectors as columns.
    """
    if not operators:
        raise ValueError("Need at least one operator")
    basis = operators[0].basis
    for op in operators:
        if op.basis != basis:
            raise BasisMismatchError("All operators must share a basis")
        if not op.hermitian_hint:
            raise PerturbationError("Simultaneous diagonalization needs Hermitian operators")
    tol = constants.DEGENERACY_TOL if tol is None else tol
    dense = [op.to_dense() for op in operators]
    blocks = _split(np.eye(basis.dimension, dtype=complex), dense, tol)
    vectors = fix_phases(np.hstack(blocks))
    values = np.array([np.real(np.einsum("in,ij,jn->n", vectors.conj(), a, vectors)) for a in dense])
    return values, vectors


@dataclass(frozen=True, eq=False)
class Eigensystem:
    """Eigenbasis of H0 around the unperturbed steady state |phi0>."""

    basis: HilbertBasis
    energies: np.ndarray
    states: np.ndarray
    index0: int
    dissipator: np.ndarray
    commutator_defect: float

    @property
    def dimension(self) -> int:
        return self.energies.size

    @property
    def e0(self) -> float:
        return float(self.energies[self.index0])

    @property
    def phi0(self) -> np.ndarray:
        return self.states[:, self.index0]

    @property
    def dissipator_diag(self) -> np.ndarray:
        return np.diag(self.dissipator).copy()

    @property
    def commuting(self) -> bool:
        return self.commutator_defect < constants.PERTURBATION_TOL

    def nh_energies(self) -> np.ndarray:
        """<H0_NH>_n = E_n - i/2 D_nn."""
        return self.energies - 0.5j * np.real(self.dissipator_diag)

    def to_eigenbasis(self, op: Operator) -> np.ndarray:
        if op.basis != self.basis:
            raise BasisMismatchError(f"Operator basis {op.basis} vs eigensystem basis {self.basis}")
        return self.states.conj().T @ op.apply(self.states)

    def check(self) -> dict[str, float]:
        """Largest deviation of the eigenvector Gram matrix from identity."""
        gram = self.states.conj().T @ self.states
        return {"orthonormality": float(np.max(np.abs(gram - np.eye(self.dimension))))}


def _jump_terms(jumps) -> list[tuple[Operator, float]]:
    terms = []
    for jump in jumps:
        op, rate = (jump.operator, jump.rate) if hasattr(jump, "operator") else jump
        terms.append((op, float(rate)))
    return terms


def _dissipator(basis: HilbertBasis, jumps) -> Operator:
    total = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    for op, rate in _jump_terms(jumps):
        dense = op.to_dense()
        total += rate * (dense.conj().T @ dense)
    return Operator(basis, 0.5 * (total + total.conj().T), True)


def build_eigensystem(model, phi0: np.ndarray | None = None) -> Eigensystem:
    """Eigenbasis of H0 refined by D, J^z and J^2 around |phi0> (default all down)."""
    basis = model.basis
    dissipator = _dissipator(basis, model.jumps)
    refiners = [model.h0, dissipator]
    if model.jz is not None:
        refiners.append(model.jz)
    if model.collective is not None:
        refiners.append(model.collective.casimir())
    energies_all, vectors = simultaneous_eigenbasis(refiners)
    energies = energies_all[0]

    if phi0 is None:
        phi0 = PureState.basis_state(basis, 0).vector
    phi0 = np.asarray(phi0, dtype=complex)
    overlaps = np.abs(vectors.conj().T @ phi0)
    index0 = int(np.argmax(overlaps))
    if abs(overlaps[index0] - 1.0) > 1e-8:
        raise PerturbationError(
            f"|phi0> is not an eigenvector of H0 (best overlap {overlaps[index0]:.6f})"
        )
    overlap = np.vdot(vectors[:, index0], phi0)
    vectors[:, index0] *= overlap / abs(overlap)

    for k, (op, rate) in enumerate(_jump_terms(model.jumps)):
        leak = np.linalg.norm(op.apply(phi0)) * np.sqrt(rate)
        if leak > constants.PERTURBATION_TOL:
            raise PerturbationError(f"Jump {k} does not annihilate |phi0> (|L phi0| = {leak:.3e})")

    h0 = model.h0.to_dense()
    d_dense = dissipator.to_dense()
    defect = float(np.max(np.abs(d_dense @ h0 - h0 @ d_dense))) if basis.dimension else 0.0
    d_eig = vectors.conj().T @ d_dense @ vectors
    eigen_residual = float(np.max(np.abs(h0 @ vectors - vectors * energies)))
    if eigen_residual > 1e-8:
        raise PerturbationError(f"H0 eigenvector residual {eigen_residual:.3e} too large")
    logger.debug(
        "Eigensystem of '%s': dim=%d, index0=%d, [D, H0] defect %.2e",
        model.name, basis.dimension, index0, defect,
    )
    return Eigensystem(basis, energies, vectors, index0, d_eig, defect)


@dataclass(frozen=True, eq=False)
class PerturbedState:
    """|phi0> + lambda |psi1> + lambda^2 |psi2>; c, d are eigenbasis components."""

    basis: HilbertBasis
    phi0: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    coupling: float
    order: int
    c: np.ndarray
    d: np.ndarray
    eigensystem: Eigensystem
    engine: str
    residuals: dict = field(default_factory=dict)

    def vector(self, order: int | None = None, coupling: float | None = None) -> np.ndarray:
        order = self.order if order is None else order
        lam = self.coupling if coupling is None else coupling
        if order not in (0, 1, 2) or order > self.order:
            raise PerturbationError(f"Order {order} not available (computed to {self.order})")
        vec = self.phi0.copy()
        if order >= 1:
            vec = vec + lam * self.psi1
        if order >= 2:
            vec = vec + lam**2 * self.psi2
        return vec

    def state(
        self, order: int | None = None, normalize: bool = True, coupling: float | None = None
    ) -> PureState:
        vec = self.vector(order, coupling)
        if normalize:
            vec = vec / np.linalg.norm(vec)
        return PureState(self.basis, vec)

    def norm_defect(self, coupling: float | None = None) -> float:
        """| ||phi0'|| - 1 | of the unnormalized second-order state."""
        return float(abs(np.linalg.norm(self.vector(2, coupling)) - 1.0))

    def components(self, order: int) -> np.ndarray:
        return self.c if order == 1 else self.d


def _coupled_sector(rhs: np.ndarray, dissipator: np.ndarray, skip: int) -> np.ndarray:
    """Closure of the rhs support under the nonzero pattern of D, without index skip."""
    scale = max(1.0, float(np.max(np.abs(dissipator)))) if dissipator.size else 1.0
    linked = np.abs(dissipator) > 1e-14 * scale
    seed_scale = max(1.0, float(np.max(np.abs(rhs))))
    active = np.abs(rhs) > 1e-14 * seed_scale
    active[skip] = False
    frontier = active.copy()
    while frontier.any():
        reached = linked[:, frontier].any(axis=1) & ~active
        reached[skip] = False
        active |= reached
        frontier = reached
    return np.flatnonzero(active)


def _solve_sector(matrix: np.ndarray, rhs: np.ndarray, sector: np.ndarray, label: str) -> np.ndarray:
    out = np.zeros(rhs.size, dtype=complex)
    if sector.size == 0:
        return out
    block = matrix[np.ix_(sector, sector)]
    condition = np.linalg.cond(block)
    if not np.isfinite(condition) or condition > 1e12:
        raise PerturbationError(
            f"{label} system is singular on the coupled sector (condition number {condition:.3e}); "
            f"states {sector.tolist()[:8]} are degenerate with |phi0>"
        )
    out[sector] = np.linalg.solve(block, rhs[sector])
    return out


def _jump_term(eig: Eigensystem, jumps, psi1: np.ndarray) -> np.ndarray:
    """i sum_j g_j <n|L_j|psi1><psi1|L_j^+|phi0> in the eigenbasis."""
    total = np.zeros(eig.dimension, dtype=complex)
    for op, rate in _jump_terms(jumps):
        moved = op.apply(psi1)
        amplitude = np.vdot(moved, eig.phi0)
        if amplitude != 0:
            total += 1j * rate * amplitude * (eig.states.conj().T @ moved)
    return total


def _residual(matrix, vector, rhs, skip) -> float:
    res = matrix @ vector - rhs
    res[skip] = 0
    return float(np.max(np.abs(res))) if res.size else 0.0


def perturb_general(
    eig: Eigensystem, h1: Operator, jumps, coupling: float = 1.0, order: int = 2
) -> PerturbedState:
    """Solve the coupled c_n, d_n equations over the sector H1 and D reach from |phi0>."""
    dissipator = eig.to_eigenbasis(_dissipator(eig.basis, jumps))
    h = eig.to_eigenbasis(h1)
    zero = eig.index0
    system = np.diag(eig.energies - eig.e0).astype(complex) - 0.5j * dissipator

    rhs1 = -h[:, zero].copy()
    rhs1[zero] = 0
    c = _solve_sector(system, rhs1, _coupled_sector(rhs1, dissipator, zero), "First-order")
    residuals = {"first_order": _residual(system, c, rhs1, zero)}
    psi1 = eig.states @ c

    d = np.zeros_like(c)
    if order == 2:
        rhs2 = -(h @ c - c * h[zero, zero] + _jump_term(eig, jumps, psi1))
        rhs2[zero] = 0
        d = _solve_sector(system, rhs2, _coupled_sector(rhs2, dissipator, zero), "Second-order")
        residuals["second_order"] = _residual(system, d, rhs2, zero)
        d[zero] = -0.5 * np.vdot(c, c).real
    psi2 = eig.states @ d

    worst = max(residuals.values())
    if worst > constants.PERTURBATION_TOL * max(1.0, float(np.max(np.abs(h)))):
        raise PerturbationError(f"Perturbative equations left a residual of {worst:.3e}")
    return PerturbedState(
        eig.basis, eig.phi0.copy(), psi1, psi2, float(coupling), order, c, d, eig, "general", residuals
    )


def perturb_commuting(
    eig: Eigensystem, h1: Operator, jumps, coupling: float = 1.0, order: int = 2
) -> PerturbedState:
    """Closed-form psi1, psi2 when D commutes with H0 (D diagonal in the eigenbasis)."""
    dissipator = eig.to_eigenbasis(_dissipator(eig.basis, jumps))
    scale = max(1.0, float(np.max(np.abs(dissipator)))) if dissipator.size else 1.0
    if eig.commutator_defect >= constants.PERTURBATION_TOL * scale:
        raise PerturbationError(
            f"[D, H0] = {eig.commutator_defect:.3e}; the commuting closed forms do not apply"
        )
    off_diagonal = dissipator - np.diag(np.diag(dissipator))
    if np.max(np.abs(off_diagonal), initial=0.0) > constants.PERTURBATION_TOL * scale:
        raise PerturbationError("D is not diagonal in the eigenbasis")

    h = eig.to_eigenbasis(h1)
    zero = eig.index0
    denominators = eig.energies - 0.5j * np.real(np.diag(dissipator)) - eig.e0

    def _inverse(numerator: np.ndarray, label: str) -> np.ndarray:
        numerator = numerator.copy()
        numerator[zero] = 0
        needed = np.abs(numerator) > 1e-14 * max(1.0, float(np.max(np.abs(numerator))))
        vanishing = needed & (np.abs(denominators) < constants.PERTURBATION_TOL)
        if vanishing.any():
            n = int(np.flatnonzero(vanishing)[0])
            raise PerturbationError(
                f"{label}: <H0_NH> of eigenstate {n} equals E0 while the state is coupled to |phi0>"
            )
        out = np.zeros_like(numerator)
        out[needed] = numerator[needed] / denominators[needed]
        return out

    c = _inverse(-h[:, zero], "First order")
    psi1 = eig.states @ c
    d = np.zeros_like(c)
    if order == 2:
        # two-step H1 path, first-order energy shift, dissipative feed-back
        d = _inverse(-(h @ c), "Second order")
        d += _inverse(c * h[zero, zero], "Second order")
        d += _inverse(-_jump_term(eig, jumps, psi1), "Second order")
        d[zero] = -0.5 * np.vdot(c, c).real
    psi2 = eig.states @ d

    system = np.diag(denominators)
    rhs1 = -h[:, zero].copy()
    rhs1[zero] = 0
    residuals = {"first_order": _residual(system, c, rhs1, zero)}
    return PerturbedState(
        eig.basis, eig.phi0.copy(), psi1, psi2, float(coupling), order, c, d, eig, "commuting", residuals
    )


def sector_weights(state_vector: np.ndarray, jz: Operator) -> dict[float, float]:
    """Weight of a vector in each J^z eigenvalue sector (J^z diagonal in both basis kinds)."""
    diag = np.real(np.diag(jz.to_dense()))
    weights: dict[float, float] = {}
    for m in np.unique(np.round(diag * 2) / 2):
        mask = np.abs(diag - m) < 1e-9
        weight = float(np.sum(np.abs(state_vector[mask]) ** 2))
        if weight > 0:
            weights[float(m)] = weight
    return weights
