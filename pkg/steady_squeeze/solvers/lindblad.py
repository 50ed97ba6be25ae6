"""Liouvillian assembly and steady-state solvers.

The generator acting on column-stacked density matrices is

    L = -i (I x H - H^T x I)
        + sum_j g_j [conj(L_j) x L_j - 1/2 I x L_j^+ L_j - 1/2 (L_j^+ L_j)^T x I]

with H = H0 + lambda * H1.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components

from steady_squeeze.bases.full_basis import permutation_isometry
from steady_squeeze.config import constants
from steady_squeeze.errors import (
    BasisMismatchError,
    DimensionCapError,
    HermiticityError,
    ModelError,
    NonUniqueSteadyStateError,
    SolverConvergenceError,
    StateNormalizationError,
)
from steady_squeeze.utils.operator_core import (
    HilbertBasis,
    Operator,
    PureState,
    commutator,
    devectorize,
    hermitian_deviation,
    max_abs,
    spost,
    spre,
    sprepost,
    vectorize,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Jump:
    """Jump operator L with its rate (gamma for S_i^-, Gamma/N for J^-)."""

    operator: Operator
    rate: float

    def __post_init__(self):
        if not np.isfinite(self.rate) or self.rate < 0:
            raise ModelError(f"Jump rates must be finite and non-negative, got {self.rate}")


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """H0 + coupling * H1 with weighted jump operators.

    ``effective`` marks models whose jumps only reproduce the no-jump
    dynamics on a restricted sector; they feed the perturbative engines but
    have no Liouvillian.
    """

    basis: HilbertBasis
    h0: Operator
    h1: Operator
    coupling: float = 1.0
    jumps: tuple[Jump, ...] = ()
    u1_symmetric: bool = False
    jz: Operator | None = None
    effective: bool = False
    name: str = "model"
    collective: object = None
    site: object = None

    def __post_init__(self):
        object.__setattr__(self, "jumps", tuple(self.jumps))
        for label, op in [("H0", self.h0), ("H1", self.h1)] + [
            (f"jump {k}", jump.operator) for k, jump in enumerate(self.jumps)
        ]:
            if op.basis != self.basis:
                raise BasisMismatchError(f"{label} lives on {op.basis}, model on {self.basis}")
        for label, op in (("H0", self.h0), ("H1", self.h1)):
            if not op.hermitian_hint:
                deviation = hermitian_deviation(op.matrix)
                if deviation >= constants.HERMITIAN_TOL * max(1.0, max_abs(op.matrix)):
                    raise HermiticityError(f"{label} is not Hermitian (deviation {deviation:.3e})")
        if self.u1_symmetric:
            if self.jz is None:
                raise ModelError("A U(1)-symmetric model needs its J^z operator")
            defect = max_abs(commutator(self.h0, self.jz).matrix)
            if defect >= constants.HERMITIAN_TOL * max(1.0, max_abs(self.h0.matrix)):
                raise ModelError(f"H0 does not conserve J^z: ||[H0, Jz]|| = {defect:.3e}")

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def hamiltonian(self) -> Operator:
        return (self.h0 + self.coupling * self.h1).as_hermitian()

    def dissipator_sum(self) -> Operator:
        """sum_j gamma_j L_j^+ L_j."""
        total = sp.csr_matrix((self.dimension, self.dimension), dtype=complex)
        for jump in self.jumps:
            op = jump.operator.to_sparse()
            total = total + jump.rate * (op.conj().T @ op)
        return Operator(self.basis, total, True)

    def with_coupling(self, coupling: float) -> "LindbladModel":
        return dataclasses.replace(self, coupling=float(coupling))


@dataclass(frozen=True)
class StateDiagnostics:
    trace_dev: float
    herm_dev: float
    min_eigenvalue: float
    purity: float

    def violations(self) -> list[str]:
        problems = []
        if self.trace_dev >= constants.TRACE_TOL:
            problems.append(f"trace deviation {self.trace_dev:.3e}")
        if self.herm_dev >= constants.TRACE_TOL:
            problems.append(f"Hermiticity deviation {self.herm_dev:.3e}")
        if self.min_eigenvalue <= -constants.POSITIVITY_TOL:
            problems.append(f"negative eigenvalue {self.min_eigenvalue:.3e}")
        if not 0 < self.purity <= 1 + constants.TRACE_TOL:
            problems.append(f"purity {self.purity:.12f} outside (0, 1]")
        return problems

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class SolverInfo:
    method: str
    residual: float
    unique: bool | None = None
    null_dimension: int | None = None
    iterations: int | None = None
    flagged: bool = False
    message: str = ""


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    basis: HilbertBasis
    matrix: np.ndarray
    solver_info: SolverInfo | None = None

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        dim = self.basis.dimension
        if matrix.shape != (dim, dim):
            raise BasisMismatchError(f"Density matrix shape {matrix.shape} vs basis dimension {dim}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityMatrix":
        return cls(state.basis, state.projector())

    @classmethod
    def from_vector(cls, basis: HilbertBasis, vector: np.ndarray) -> "DensityMatrix":
        return cls(basis, devectorize(vector))

    @cached_property
    def diagnostics(self) -> StateDiagnostics:
        return diagnostics(self)

    @property
    def purity(self) -> float:
        return self.diagnostics.purity


def diagnostics(rho) -> StateDiagnostics:
    """Trace, Hermiticity, positivity and purity of a density matrix."""
    matrix = np.asarray(getattr(rho, "matrix", rho))
    herm = 0.5 * (matrix + matrix.conj().T)
    return StateDiagnostics(
        trace_dev=float(abs(np.trace(matrix) - 1.0)),
        herm_dev=hermitian_deviation(matrix),
        min_eigenvalue=float(np.linalg.eigvalsh(herm)[0]),
        purity=float(np.sum(matrix * matrix.T).real),
    )


@dataclass(frozen=True)
class SolverSettings:
    """Per-solve overrides of the configured solver defaults.

    method: "dense" takes the SVD null space of the whole generator.
    "symmetric" does the same on the site-permutation-invariant operators of a
    tensor space. "direct" factorizes the bordered sparse system with SuperLU
    and "iterative" runs ILU-preconditioned LGMRES on it. "auto" picks
    symmetric when the generator maps invariant operators to invariant
    operators, then dense when dim**2 <= dense_max, then direct, except
    iterative for tensor spaces with more than sparse_direct_max unknowns
    left after block reduction. The symmetric method decides uniqueness
    among permutation-invariant states only.
    """

    method: str = "auto"
    tol: float = field(default_factory=lambda: constants.SOLVER_TOL)
    max_iter: int = field(default_factory=lambda: constants.SOLVER_MAX_ITER)
    uniqueness_tol: float = field(default_factory=lambda: constants.UNIQUENESS_TOL)
    propagation_time: float = field(default_factory=lambda: constants.PROPAGATION_TIME)
    dense_max: int = field(default_factory=lambda: constants.DENSE_LIOUVILLIAN_MAX)
    sparse_direct_max: int = field(default_factory=lambda: constants.SPARSE_DIRECT_MAX)
    require_unique: bool = False

    def __post_init__(self):
        if self.method not in ("auto", "dense", "symmetric", "direct", "iterative"):
            raise ValueError(f"Unknown solver method '{self.method}'")


def check_liouvillian_caps(basis: HilbertBasis) -> None:
    if basis.kind == "tensor" and basis.n_emitters > constants.MAX_LIOUVILLIAN_EMITTERS:
        raise DimensionCapError(
            f"Full-space Liouvillian needs N <= {constants.MAX_LIOUVILLIAN_EMITTERS}, "
            f"got N={basis.n_emitters}"
        )
    if basis.kind == "dicke" and basis.dimension > constants.MAX_LIOUVILLIAN_DIM:
        raise DimensionCapError(
            f"Dicke Liouvillian needs dimension <= {constants.MAX_LIOUVILLIAN_DIM}, "
            f"got {basis.dimension}"
        )


def liouvillian(model: LindbladModel) -> sp.csr_matrix:
    """Sparse generator of side dim**2 acting on vec(rho)."""
    if model.effective:
        raise ModelError(
            f"'{model.name}' carries an effective sector dissipator and has no exact Liouvillian"
        )
    check_liouvillian_caps(model.basis)
    ham = model.hamiltonian.to_sparse()
    superop = -1j * (spre(ham) - spost(ham))
    for jump in model.jumps:
        if jump.rate == 0:
            continue
        op = jump.operator.to_sparse()
        decay = op.conj().T @ op
        superop = superop + jump.rate * (
            sprepost(op, op.conj().T) - 0.5 * spre(decay) - 0.5 * spost(decay)
        )
    return superop.tocsr()


def lindblad_rhs(model: LindbladModel, rho: np.ndarray) -> np.ndarray:
    """d rho / dt evaluated directly from the master equation."""
    ham = model.hamiltonian.to_dense()
    out = -1j * (ham @ rho - rho @ ham)
    for jump in model.jumps:
        op = jump.operator.to_dense()
        decay = op.conj().T @ op
        out = out + jump.rate * (op @ rho @ op.conj().T - 0.5 * (decay @ rho + rho @ decay))
    return out


def trace_row(dimension: int) -> np.ndarray:
    """Positions of the diagonal entries inside vec(rho)."""
    return np.arange(dimension) * (dimension + 1)


def ground_projector_vector(dimension: int) -> np.ndarray:
    """vec of |0><0|, the all-down state in both basis kinds."""
    vec = np.zeros(dimension * dimension, dtype=complex)
    vec[0] = 1.0
    return vec


def _propagate(generator, start: np.ndarray, settings: SolverSettings) -> np.ndarray:
    logger.debug("Propagating the all-down state for t=%s", settings.propagation_time)
    if sp.issparse(generator):
        generator = generator.tocsc()
    return spla.expm_multiply(generator * settings.propagation_time, start)


def _project(null_basis: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the span of orthonormal columns."""
    return null_basis @ (null_basis.conj().T @ vector)


def _dense_null_space(matrix: np.ndarray, start: np.ndarray, settings: SolverSettings):
    """SVD null vector; a degenerate null space keeps the projection of the state propagated from start."""
    _, singular, vh = np.linalg.svd(matrix)
    scale = singular[0] if singular[0] > 0 else 1.0
    null_dim = max(1, int(np.sum(singular <= settings.uniqueness_tol * scale)))
    if null_dim == 1:
        return vh[-1].conj(), True, null_dim
    null_basis = vh[-null_dim:].conj().T
    return _project(null_basis, _propagate(matrix, start, settings)), False, null_dim


def _sparse_null_space(superop: sp.csr_matrix, settings: SolverSettings) -> np.ndarray:
    """Orthonormal kernel basis from shift-invert Arnoldi at a small positive shift.

    Every nonzero eigenvalue of a Lindblad generator has Re < 0 or is
    imaginary, so the kernel holds the eigenvalues nearest a positive real shift.
    """
    size = superop.shape[0]
    scale = max(float(abs(superop).max()), 1.0)
    matrix = superop.tocsc()
    k = min(4, size - 2)
    while True:
        values, vectors = spla.eigs(matrix, k=k, sigma=1e-3 * scale, which="LM")
        zero = np.abs(values) <= settings.uniqueness_tol * scale
        if zero.sum() < k or k >= size - 2:
            break
        k = min(2 * k, size - 2)
    if not zero.any():
        raise SolverConvergenceError("Shift-invert Arnoldi found no null vector of the Liouvillian")
    left, singular, _ = np.linalg.svd(vectors[:, zero], full_matrices=False)
    return left[:, singular > 1e-8 * singular[0]]


def _symmetric_block(superop: sp.csr_matrix, basis: HilbertBasis):
    """Generator restricted to permutation-invariant operators, or None when it leaks out of them."""
    if basis.kind != "tensor":
        return None
    iso = permutation_isometry(basis.n_emitters)
    image = (superop @ iso).tocsr()
    reduced = (iso.conj().T @ image).toarray()
    trial = np.random.default_rng(0).standard_normal(reduced.shape[0])
    mapped = image @ trial
    leak = float(np.linalg.norm(mapped - iso @ (reduced @ trial)))
    if leak > constants.PERMUTATION_TOL * max(1.0, float(np.linalg.norm(mapped))):
        logger.debug("Generator leaks out of the permutation-invariant operators (%.3e)", leak)
        return None
    return iso, reduced


def _symmetric_solve(iso: sp.csr_matrix, reduced: np.ndarray, dimension: int, settings: SolverSettings):
    start = iso.conj().T @ ground_projector_vector(dimension)
    vector, unique, null_dim = _dense_null_space(reduced, start, settings)
    return iso @ vector, unique, null_dim


def _bordered_system(superop: sp.csr_matrix, diagonal: np.ndarray) -> sp.csc_matrix:
    """Replace the rho_00 equation of L by the trace constraint."""
    size = superop.shape[0]
    keep = np.ones(size)
    keep[0] = 0.0
    border = sp.csr_matrix(
        (np.ones(diagonal.size, dtype=complex), (np.zeros(diagonal.size, dtype=int), diagonal)),
        shape=(size, size),
    )
    return (sp.diags(keep) @ superop + border).tocsc()


def _populated_block(superop: sp.csr_matrix, dimension: int) -> np.ndarray | None:
    """Entries of vec(rho) coupled to the populations, when L is block diagonal.

    Returns None when L does not split or the populations span several blocks.
    """
    pattern = abs(superop)
    count, labels = connected_components(pattern + pattern.T, directed=False)
    if count == 1:
        return None
    diagonal = trace_row(dimension)
    if np.any(labels[diagonal] != labels[0]):
        return None
    return np.flatnonzero(labels == labels[0])


def _sparse_solve(superop, basis, method, settings):
    """Bordered solve on the populated block; returns (vector, unique, iterations, null_dim, method)."""
    dimension = basis.dimension
    size = dimension * dimension
    block = _populated_block(superop, dimension)
    if block is None:
        reduced, diagonal = superop, trace_row(dimension)
    else:
        logger.debug("Solving on the %d of %d entries coupled to the populations", block.size, size)
        reduced = superop[block][:, block]
        diagonal = np.searchsorted(block, trace_row(dimension))
    if method == "auto":
        large = basis.kind == "tensor" and reduced.shape[0] > settings.sparse_direct_max
        method = "iterative" if large else "direct"
    vector, unique, iterations = _solve_bordered(reduced, diagonal, method, settings)
    if unique is False:
        null_basis = _sparse_null_space(superop, settings)
        start = _propagate(superop, ground_projector_vector(dimension), settings)
        null_dim = null_basis.shape[1]
        return _project(null_basis, start), null_dim == 1, iterations, null_dim, method
    if block is not None:
        full = np.zeros(size, dtype=complex)
        full[block] = vector
        vector = full
    return vector, unique, iterations, None, method


def _solve_bordered(superop, diagonal, method, settings):
    system = _bordered_system(superop, diagonal)
    rhs = np.zeros(superop.shape[0], dtype=complex)
    rhs[0] = 1.0
    if method == "direct":
        try:
            lu = spla.splu(system, permc_spec="COLAMD")
        except RuntimeError as exc:
            logger.warning("Bordered system is singular (%s); steady state is not unique", exc)
            return None, False, None
        pivots = np.abs(lu.U.diagonal())
        if pivots.min() <= settings.uniqueness_tol * pivots.max():
            logger.warning(
                "Bordered system is numerically singular (pivot ratio %.3e); steady state is not unique",
                pivots.min() / pivots.max(),
            )
            return None, False, None
        vector = lu.solve(rhs)
        if not np.all(np.isfinite(vector)):
            logger.warning("Bordered solve returned non-finite entries; steady state is not unique")
            return None, False, None
        return vector, None, None

    try:
        ilu = spla.spilu(system, drop_tol=1e-8, fill_factor=20, permc_spec="COLAMD")
    except RuntimeError as exc:
        logger.warning("ILU preconditioner failed (%s); steady state is not unique", exc)
        return None, False, None
    preconditioner = spla.LinearOperator(system.shape, ilu.solve, dtype=complex)
    counter = {"n": 0}

    def _count(_):
        counter["n"] += 1

    vector, status = spla.lgmres(
        system, rhs, M=preconditioner, rtol=settings.tol, atol=0.0,
        maxiter=settings.max_iter, callback=_count,
    )
    if status != 0:
        raise SolverConvergenceError(
            f"LGMRES did not converge within {settings.max_iter} iterations (status {status})"
        )
    return vector, None, counter["n"]


def steady_state(model: LindbladModel, settings: SolverSettings | None = None) -> DensityMatrix:
    """Null vector of the Liouvillian normalized to unit trace.

    A degenerate null space returns the projection of the state propagated
    from all-down onto it, whichever method found the degeneracy.
    """
    settings = settings or SolverSettings()
    superop = liouvillian(model)
    dimension = model.dimension
    method = settings.method
    symmetric = None
    if method in ("auto", "symmetric"):
        symmetric = _symmetric_block(superop, model.basis)
        if symmetric is None and method == "symmetric":
            raise ModelError(
                f"'{model.name}' is not invariant under site permutations; use another solver method"
            )
    if symmetric is not None:
        method = "symmetric"
    elif method == "auto" and dimension**2 <= settings.dense_max:
        method = "dense"
    logger.debug("Solving '%s' (dim=%d) with the %s method", model.name, dimension, method)

    iterations = None
    null_dim = None
    if method == "symmetric":
        vector, unique, null_dim = _symmetric_solve(*symmetric, dimension, settings)
    elif method == "dense":
        vector, unique, null_dim = _dense_null_space(
            superop.toarray(), ground_projector_vector(dimension), settings
        )
    else:
        vector, unique, iterations, null_dim, method = _sparse_solve(superop, model.basis, method, settings)

    if unique is False:
        message = f"'{model.name}': multi-dimensional null space; returning the state reached from all-down"
        if settings.require_unique:
            raise NonUniqueSteadyStateError(message)
        logger.warning(message)

    matrix = devectorize(vector)
    trace = np.trace(matrix)
    if abs(trace) < 1e-14:
        raise SolverConvergenceError(f"'{model.name}': null vector has vanishing trace")
    matrix = matrix / trace
    matrix = 0.5 * (matrix + matrix.conj().T)
    residual = float(np.linalg.norm(superop @ vectorize(matrix)))

    flagged = residual >= settings.tol * dimension
    if flagged:
        logger.warning(
            "'%s': steady-state residual %.3e exceeds %.3e", model.name, residual, settings.tol * dimension
        )
    info = SolverInfo(
        method=method,
        residual=residual,
        unique=unique,
        null_dimension=null_dim,
        iterations=iterations,
        flagged=flagged or unique is False,
        message="non-unique steady state" if unique is False else ("residual above tolerance" if flagged else ""),
    )
    rho = DensityMatrix(model.basis, matrix, info)
    problems = rho.diagnostics.violations()
    if problems:
        logger.warning("'%s': steady state fails diagnostics: %s", model.name, "; ".join(problems))
    return rho


def require_physical(rho: DensityMatrix) -> DensityMatrix:
    """Raise when a density matrix fails trace, Hermiticity or positivity bounds."""
    problems = rho.diagnostics.violations()
    if problems:
        raise StateNormalizationError("; ".join(problems))
    return rho
