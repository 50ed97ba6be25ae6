"""Single-emitter operators on the 2**N tensor-product space.

Site 0 is the most significant bit; down = 0 and up = 1. Every operator is
assembled as a sparse Kronecker chain I_(2^i) x s x I_(2^(N-i-1)).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.special import comb

from steady_squeeze.config import constants
from steady_squeeze.errors import BasisMismatchError, DimensionCapError
from steady_squeeze.utils.operator_core import (
    CollectiveOps,
    HilbertBasis,
    Operator,
    PureState,
    kron_all,
)

logger = logging.getLogger(__name__)

SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
SPIN_Z = np.diag([-0.5, 0.5]).astype(complex)


def check_emitter_cap(n_emitters: int, cap: int | None = None) -> None:
    cap = constants.MAX_TENSOR_EMITTERS if cap is None else cap
    if not 1 <= n_emitters <= cap:
        raise DimensionCapError(
            f"N={n_emitters} outside the tensor-space range 1..{cap}"
        )


def _embed(single: np.ndarray, site: int, n_emitters: int) -> sp.csr_matrix:
    left = sp.identity(2**site, dtype=complex, format="csr")
    right = sp.identity(2 ** (n_emitters - site - 1), dtype=complex, format="csr")
    return kron_all([left, single, right])


@dataclass(frozen=True, eq=False)
class SiteOperatorSet:
    """Per-site S^x, S^y, S^z, S^+, S^- (tuples indexed by site)."""

    basis: HilbertBasis
    sx: tuple[Operator, ...]
    sy: tuple[Operator, ...]
    sz: tuple[Operator, ...]
    splus: tuple[Operator, ...]
    sminus: tuple[Operator, ...]

    @property
    def n_emitters(self) -> int:
        return self.basis.n_emitters

    def site(self, index: int) -> dict[str, Operator]:
        return {
            "x": self.sx[index],
            "y": self.sy[index],
            "z": self.sz[index],
            "+": self.splus[index],
            "-": self.sminus[index],
        }

    def collective(self) -> CollectiveOps:
        """Sum over sites of every component."""

        def total(ops, hermitian):
            matrix = sum((op.to_sparse() for op in ops[1:]), ops[0].to_sparse())
            return Operator(self.basis, matrix, hermitian)

        return CollectiveOps(
            n_emitters=self.n_emitters,
            jx=total(self.sx, True),
            jy=total(self.sy, True),
            jz=total(self.sz, True),
            jplus=total(self.splus, False),
            jminus=total(self.sminus, False),
        )


@lru_cache(maxsize=16)
def site_ops(n_emitters: int) -> SiteOperatorSet:
    check_emitter_cap(n_emitters)
    basis = HilbertBasis.tensor(n_emitters)
    plus = [_embed(SIGMA_PLUS, i, n_emitters) for i in range(n_emitters)]
    minus = [_embed(SIGMA_MINUS, i, n_emitters) for i in range(n_emitters)]
    zs = [_embed(SPIN_Z, i, n_emitters) for i in range(n_emitters)]
    return SiteOperatorSet(
        basis=basis,
        sx=tuple(Operator(basis, (p + m) * 0.5, True) for p, m in zip(plus, minus)),
        sy=tuple(Operator(basis, (p - m) * (-0.5j), True) for p, m in zip(plus, minus)),
        sz=tuple(Operator(basis, z, True) for z in zs),
        splus=tuple(Operator(basis, p) for p in plus),
        sminus=tuple(Operator(basis, m) for m in minus),
    )


def _bit_counts(values: np.ndarray, n_bits: int) -> np.ndarray:
    counts = np.zeros_like(values)
    for bit in range(n_bits):
        counts += (values >> bit) & 1
    return counts


def popcounts(n_emitters: int) -> np.ndarray:
    """Number of up spins in each basis bit-string."""
    return _bit_counts(np.arange(2**n_emitters), n_emitters)


@lru_cache(maxsize=8)
def permutation_isometry(n_emitters: int) -> sp.csr_matrix:
    """Orthonormal basis of the site-permutation-invariant operators, acting on vec(rho).

    Column k is the normalized sum of |a><b| over all bit-string pairs with
    the same numbers of (up, up), (up, down) and (down, up) sites, which gives
    (N+3 choose 3) columns. Rows follow column stacking, entry a + b * 2**N.
    """
    check_emitter_cap(n_emitters)
    dim = 2**n_emitters
    index = np.arange(dim * dim)
    ket, bra = index % dim, index // dim
    mask = dim - 1
    both = _bit_counts(ket & bra, n_emitters)
    ket_only = _bit_counts(ket & ~bra & mask, n_emitters)
    bra_only = _bit_counts(~ket & bra & mask, n_emitters)
    label = (both * (n_emitters + 1) + ket_only) * (n_emitters + 1) + bra_only
    _, column, sizes = np.unique(label, return_inverse=True, return_counts=True)
    column = column.ravel()
    data = 1.0 / np.sqrt(sizes[column])
    return sp.csr_matrix((data.astype(complex), (index, column)), shape=(dim * dim, sizes.size))


@lru_cache(maxsize=16)
def symmetric_isometry(n_emitters: int) -> sp.csr_matrix:
    """V with columns |N/2, M> written in the tensor basis (shape 2**N x N+1)."""
    check_emitter_cap(n_emitters)
    ups = popcounts(n_emitters)
    data = 1.0 / np.sqrt(comb(n_emitters, ups, exact=False))
    rows = np.arange(2**n_emitters)
    return sp.csr_matrix(
        (data.astype(complex), (rows, ups)), shape=(2**n_emitters, n_emitters + 1)
    )


def restrict_to_symmetric(op: Operator) -> Operator:
    """V^dagger A V as an operator on the J = N/2 Dicke manifold."""
    n = op.basis.n_emitters
    if op.basis.kind != "tensor":
        raise BasisMismatchError("Only tensor-space operators can be restricted")
    iso = symmetric_isometry(n)
    matrix = iso.conj().T @ op.to_sparse() @ iso
    return Operator(HilbertBasis.dicke(n), matrix, op.hermitian_hint)


def lift_state(state: PureState) -> PureState:
    """Embed a J = N/2 Dicke-manifold state into the tensor space."""
    basis = state.basis
    if basis.kind != "dicke" or basis.spin != basis.n_emitters / 2:
        raise BasisMismatchError("Only states of the maximal Dicke manifold can be lifted")
    iso = symmetric_isometry(basis.n_emitters)
    return PureState(HilbertBasis.tensor(basis.n_emitters), iso @ state.vector)


def lift_matrix(matrix: np.ndarray, n_emitters: int) -> np.ndarray:
    """V rho V^dagger for a Dicke-manifold density matrix."""
    iso = symmetric_isometry(n_emitters).toarray()
    return iso @ np.asarray(matrix) @ iso.conj().T


def allowed_spins(n_emitters: int) -> list[float]:
    """J = N/2, N/2 - 1, ... down to 0 or 1/2."""
    return [n_emitters / 2 - k for k in range(n_emitters // 2 + 1)]


def spin_length_weights(state, n_emitters: int | None = None) -> dict[float, float]:
    """Weight of a tensor-space state in each total-spin sector J.

    Projectors onto J^2 = J(J+1) are applied as Lagrange polynomials in the
    sparse Casimir, so no dense 2**N x 2**N intermediate is formed.
    """
    basis = state.basis
    if basis.kind != "tensor":
        raise BasisMismatchError("Spin-length weights need a tensor-space state")
    n = basis.n_emitters if n_emitters is None else n_emitters
    casimir = site_ops(n).collective().casimir().to_sparse()
    spins = allowed_spins(n)
    eigen = {j: j * (j + 1) for j in spins}
    if hasattr(state, "vector"):
        block = np.asarray(state.vector).reshape(-1, 1)
    else:
        block = np.asarray(state.matrix)

    weights = {}
    for j in spins:
        projected = block.copy()
        for k in spins:
            if k == j:
                continue
            projected = (casimir @ projected - eigen[k] * projected) / (eigen[j] - eigen[k])
        if hasattr(state, "vector"):
            weights[j] = float(np.vdot(block[:, 0], projected[:, 0]).real)
        else:
            weights[j] = float(np.trace(projected).real)
    return weights
