"""Operator algebra over finite Hilbert spaces with explicit basis metadata.

Superoperators use column stacking throughout:

    vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from numbers import Number
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp

from steady_squeeze.config import constants
from steady_squeeze.errors import (
    BasisMismatchError,
    HermiticityError,
    InvalidSpinError,
    StateNormalizationError,
)

logger = logging.getLogger(__name__)

DICKE = "dicke"
TENSOR = "tensor"

Matrix = Union[np.ndarray, sp.spmatrix]


@dataclass(frozen=True)
class HilbertBasis:
    """Basis metadata.

    Dicke bases hold |J, M> for M = -J ... J in ascending order. Tensor bases
    hold 2**N bit-strings in lexicographic order, site 0 most significant,
    with down = 0 and up = 1, so index 0 is the all-down state in both kinds.
    """

    kind: str
    n_emitters: int
    spin: float | None = None

    def __post_init__(self):
        if self.kind not in (DICKE, TENSOR):
            raise ValueError(f"Unknown basis kind '{self.kind}'")
        if self.n_emitters < 1:
            raise InvalidSpinError(f"Emitter count must be positive, got {self.n_emitters}")
        if self.kind == DICKE:
            if self.spin is None:
                raise InvalidSpinError("Dicke basis needs a spin length J")
            twice = 2 * self.spin
            if abs(twice - round(twice)) > 1e-12 or twice < 0:
                raise InvalidSpinError(f"2J must be a non-negative integer, got J={self.spin}")
            if round(twice) > self.n_emitters or (self.n_emitters - round(twice)) % 2:
                raise InvalidSpinError(
                    f"J={self.spin} is not reachable with N={self.n_emitters} spin-1/2 emitters"
                )
            object.__setattr__(self, "spin", round(twice) / 2)
        elif self.spin is not None:
            raise InvalidSpinError("Tensor-product bases carry no spin length")

    @classmethod
    def dicke(cls, n_emitters: int, spin: float | None = None) -> "HilbertBasis":
        return cls(DICKE, n_emitters, n_emitters / 2 if spin is None else spin)

    @classmethod
    def tensor(cls, n_emitters: int) -> "HilbertBasis":
        return cls(TENSOR, n_emitters)

    @property
    def dimension(self) -> int:
        if self.kind == DICKE:
            return int(round(2 * self.spin)) + 1
        return 2 ** self.n_emitters

    @cached_property
    def labels(self) -> tuple:
        if self.kind == DICKE:
            return tuple(-self.spin + k for k in range(self.dimension))
        n = self.n_emitters
        return tuple(
            format(k, f"0{n}b").replace("0", "↓").replace("1", "↑")
            for k in range(self.dimension)
        )


def hermitian_deviation(matrix: Matrix) -> float:
    """Max-norm of A - A^dagger."""
    diff = matrix - matrix.conj().T
    if sp.issparse(diff):
        return float(abs(diff).max()) if diff.nnz else 0.0
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def max_abs(matrix: Matrix) -> float:
    if sp.issparse(matrix):
        return float(abs(matrix).max()) if matrix.nnz else 0.0
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0


def _store(matrix: Matrix, dimension: int) -> Matrix:
    """Dense below the crossover dimension, CSR at or above it."""
    if dimension < constants.DENSE_CROSSOVER:
        dense = matrix.toarray() if sp.issparse(matrix) else np.array(matrix, dtype=complex)
        dense = dense.astype(complex, copy=False)
        dense.setflags(write=False)
        return dense
    csr = sp.csr_matrix(matrix, dtype=complex)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    return csr


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix on a basis; validated on construction."""

    basis: HilbertBasis
    matrix: Matrix
    hermitian_hint: bool = False

    def __post_init__(self):
        dim = self.basis.dimension
        if self.matrix.shape != (dim, dim):
            raise BasisMismatchError(
                f"Matrix shape {self.matrix.shape} does not match basis dimension {dim}"
            )
        object.__setattr__(self, "matrix", _store(self.matrix, dim))
        if self.hermitian_hint:
            scale = max(1.0, max_abs(self.matrix))
            deviation = hermitian_deviation(self.matrix)
            if deviation >= constants.HERMITIAN_TOL * scale:
                raise HermiticityError(f"Operator flagged Hermitian deviates by {deviation:.3e}")

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.array(self.matrix)

    def to_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.matrix)

    def dag(self) -> "Operator":
        return Operator(self.basis, self.matrix.conj().T, self.hermitian_hint)

    def as_hermitian(self) -> "Operator":
        return Operator(self.basis, self.matrix, True)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return np.asarray(self.matrix @ vector)

    def _check(self, other: "Operator"):
        if other.basis != self.basis:
            raise BasisMismatchError(f"Basis mismatch: {self.basis} vs {other.basis}")

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(
            self.basis, self.matrix + other.matrix, self.hermitian_hint and other.hermitian_hint
        )

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(
            self.basis, self.matrix - other.matrix, self.hermitian_hint and other.hermitian_hint
        )

    def __neg__(self) -> "Operator":
        return Operator(self.basis, -self.matrix, self.hermitian_hint)

    def __mul__(self, scalar: Number) -> "Operator":
        if not isinstance(scalar, Number):
            return NotImplemented
        keeps = self.hermitian_hint and complex(scalar).imag == 0
        return Operator(self.basis, self.matrix * scalar, keeps)

    __rmul__ = __mul__

    def __truediv__(self, scalar: Number) -> "Operator":
        return self * (1.0 / scalar)

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.basis, self.matrix @ other.matrix)

    def __repr__(self) -> str:
        storage = "sparse" if self.is_sparse else "dense"
        return f"Operator({self.basis.kind}, dim={self.dimension}, {storage}, hermitian={self.hermitian_hint})"


@dataclass(frozen=True, eq=False)
class PureState:
    """State vector on a basis."""

    basis: HilbertBasis
    vector: np.ndarray

    def __post_init__(self):
        vec = np.array(self.vector, dtype=complex).reshape(-1)
        if vec.size != self.basis.dimension:
            raise BasisMismatchError(
                f"Vector length {vec.size} does not match basis dimension {self.basis.dimension}"
            )
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def normalized(self) -> "PureState":
        norm = self.norm
        if norm == 0:
            raise StateNormalizationError("Cannot normalize the zero vector")
        return PureState(self.basis, self.vector / norm)

    def projector(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())

    @classmethod
    def basis_state(cls, basis: HilbertBasis, index: int = 0) -> "PureState":
        vec = np.zeros(basis.dimension, dtype=complex)
        vec[index] = 1.0
        return cls(basis, vec)


def identity(basis: HilbertBasis) -> Operator:
    return Operator(basis, sp.identity(basis.dimension, dtype=complex, format="csr"), True)


def zero(basis: HilbertBasis) -> Operator:
    return Operator(basis, sp.csr_matrix((basis.dimension, basis.dimension), dtype=complex), True)


def kron_all(matrices: Sequence[Matrix]) -> sp.csr_matrix:
    """Sparse Kronecker product of a chain, leftmost factor most significant."""
    out = sp.csr_matrix(matrices[0], dtype=complex)
    for mat in matrices[1:]:
        out = sp.kron(out, sp.csr_matrix(mat, dtype=complex), format="csr")
    return out


def commutator(a: Operator, b: Operator) -> Operator:
    a._check(b)
    return Operator(a.basis, a.matrix @ b.matrix - b.matrix @ a.matrix)


def anticommutator(a: Operator, b: Operator) -> Operator:
    a._check(b)
    return Operator(a.basis, a.matrix @ b.matrix + b.matrix @ a.matrix)


def _trace_product(op: Matrix, rho: np.ndarray) -> complex:
    """Tr(op @ rho) without forming the product."""
    if sp.issparse(op):
        return complex(op.multiply(rho.T).sum())
    return complex(np.sum(op * rho.T))


def expectation(op: Operator, state) -> complex:
    """<op> on a PureState or a DensityMatrix."""
    if state.basis != op.basis:
        raise BasisMismatchError(f"Basis mismatch: {op.basis} vs {state.basis}")
    if hasattr(state, "vector"):
        norm = np.linalg.norm(state.vector)
        if abs(norm - 1.0) > constants.TRACE_TOL:
            raise StateNormalizationError(f"State norm is {norm:.12f}, expected 1")
        value = complex(np.vdot(state.vector, op.apply(state.vector)))
    else:
        rho = np.asarray(state.matrix)
        trace = np.trace(rho)
        if abs(trace - 1.0) > constants.TRACE_TOL:
            raise StateNormalizationError(f"Density matrix trace is {trace:.12f}, expected 1")
        value = _trace_product(op.matrix, rho)
    if op.hermitian_hint and abs(value.imag) > constants.EXPECTATION_IMAG_TOL * max(1.0, abs(value)):
        raise HermiticityError(
            f"Hermitian operator has complex expectation value {value} on this state"
        )
    return value


def expectation_real(op: Operator, state) -> float:
    return expectation(op, state).real


def vectorize(rho) -> np.ndarray:
    """Column-stacked vec(rho)."""
    matrix = np.asarray(getattr(rho, "matrix", rho))
    return matrix.reshape(-1, order="F").astype(complex, copy=True)


def devectorize(vector: np.ndarray, basis: HilbertBasis | None = None):
    """Inverse of vectorize; returns a DensityMatrix when a basis is given."""
    vector = np.asarray(vector).reshape(-1)
    dim = int(round(np.sqrt(vector.size)))
    if dim * dim != vector.size:
        raise ValueError(f"Vector length {vector.size} is not a perfect square")
    matrix = vector.reshape((dim, dim), order="F").copy()
    if basis is None:
        return matrix
    from steady_squeeze.solvers.lindblad import DensityMatrix

    return DensityMatrix(basis, matrix)


def spre(a: Matrix) -> sp.csr_matrix:
    """Superoperator of rho -> a @ rho."""
    dim = a.shape[0]
    return sp.kron(sp.identity(dim, format="csr"), sp.csr_matrix(a), format="csr")


def spost(b: Matrix) -> sp.csr_matrix:
    """Superoperator of rho -> rho @ b."""
    dim = b.shape[0]
    return sp.kron(sp.csr_matrix(b).T, sp.identity(dim, format="csr"), format="csr")


def sprepost(a: Matrix, b: Matrix) -> sp.csr_matrix:
    """Superoperator of rho -> a @ rho @ b."""
    return sp.kron(sp.csr_matrix(b).T, sp.csr_matrix(a), format="csr")


AXES = ("x", "y", "z", "+", "-")


@dataclass(frozen=True, eq=False)
class CollectiveOps:
    """Collective spin components J^x, J^y, J^z, J^+, J^- on one basis."""

    n_emitters: int
    jx: Operator
    jy: Operator
    jz: Operator
    jplus: Operator
    jminus: Operator

    @property
    def basis(self) -> HilbertBasis:
        return self.jz.basis

    def component(self, axis: str) -> Operator:
        lookup = dict(zip(AXES, (self.jx, self.jy, self.jz, self.jplus, self.jminus)))
        if axis not in lookup:
            raise ValueError(f"Unknown spin axis '{axis}', expected one of {AXES}")
        return lookup[axis]

    def along(self, direction: Sequence[float]) -> Operator:
        """n . J for a real 3-vector n."""
        nx, ny, nz = (float(c) for c in direction)
        return (nx * self.jx + ny * self.jy + nz * self.jz).as_hermitian()

    def casimir(self) -> Operator:
        squares = self.jx @ self.jx + self.jy @ self.jy + self.jz @ self.jz
        return squares.as_hermitian()
