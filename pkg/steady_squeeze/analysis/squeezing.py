"""Spin squeezing, quantum Fisher information and pair correlations.

Transverse frame: e1 is x projected orthogonal to the mean-spin direction n
(y when x is parallel to n) and e2 = e1 x n, so a mean spin along -z gives
e1 = x, e2 = y and angles are measured in the x-y plane from x.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from steady_squeeze.config import constants
from steady_squeeze.errors import BasisMismatchError, FrameUndefinedError, HermiticityError
from steady_squeeze.utils.operator_core import (
    CollectiveOps,
    Operator,
    expectation_real,
    hermitian_deviation,
    max_abs,
)

logger = logging.getLogger(__name__)

MIN_MEAN_SPIN = 1e-6


@dataclass(frozen=True, eq=False)
class SqueezingReport:
    n_emitters: int
    mean_spin: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    covariance: np.ndarray
    var_min: float
    var_max: float
    theta_min: float
    direction_min: np.ndarray
    direction_max: np.ndarray
    xi2: float
    xi2_anti: float
    qfi_anti: float
    uncertainty_product: float

    @property
    def mean_spin_length(self) -> float:
        return float(np.linalg.norm(self.mean_spin))

    @property
    def qfi_bound_gap(self) -> float:
        """QFI(J2_perp)/N - 1/xi^2; non-negative up to rounding."""
        return self.qfi_anti / self.n_emitters - 1.0 / self.xi2

    def as_dict(self) -> dict:
        return {
            "xi2": self.xi2,
            "xi2_anti": self.xi2_anti,
            "theta_min": self.theta_min,
            "var_min": self.var_min,
            "var_max": self.var_max,
            "qfi_anti": self.qfi_anti,
            "uncertainty_product": self.uncertainty_product,
            "mean_spin": self.mean_spin.tolist(),
        }


def _vector_of(state) -> np.ndarray | None:
    return np.asarray(state.vector) if hasattr(state, "vector") else None


def symmetric_moment(a: Operator, b: Operator, state) -> float:
    """<(AB + BA)/2> for Hermitian A, B."""
    vec = _vector_of(state)
    if vec is not None:
        return float(np.vdot(a.apply(vec), b.apply(vec)).real)
    rho = np.asarray(state.matrix)
    return float(np.trace(np.asarray(a.matrix @ (b.matrix @ rho))).real)


def transverse_frame(mean_spin: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    length = float(np.linalg.norm(mean_spin))
    if length <= MIN_MEAN_SPIN:
        raise FrameUndefinedError(f"Mean spin length {length:.3e} too small to define a frame")
    n = mean_spin / length
    for seed in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
        e1 = seed - np.dot(seed, n) * n
        if np.linalg.norm(e1) > 1e-8:
            e1 = e1 / np.linalg.norm(e1)
            return e1, np.cross(e1, n)
    raise FrameUndefinedError("Could not build a transverse frame")


def mean_spin_vector(state, ops: CollectiveOps) -> np.ndarray:
    return np.array([expectation_real(op, state) for op in (ops.jx, ops.jy, ops.jz)])


def squeezing_report(state, ops: CollectiveOps) -> SqueezingReport:
    """Squeezing parameter N Var_min / |<J>|^2 from the transverse covariance."""
    if state.basis != ops.basis:
        raise BasisMismatchError(f"State basis {state.basis} vs operator basis {ops.basis}")
    mean = mean_spin_vector(state, ops)
    e1, e2 = transverse_frame(mean)
    perp = [ops.along(e1), ops.along(e2)]
    means = [expectation_real(op, state) for op in perp]
    cov = np.empty((2, 2))
    for a in range(2):
        for b in range(a, 2):
            cov[a, b] = cov[b, a] = symmetric_moment(perp[a], perp[b], state) - means[a] * means[b]
    values, vectors = np.linalg.eigh(cov)
    u_min, u_max = vectors[:, 0], vectors[:, 1]
    dir_min = u_min[0] * e1 + u_min[1] * e2
    dir_max = u_max[0] * e1 + u_max[1] * e2
    length2 = float(np.dot(mean, mean))
    n = ops.n_emitters
    return SqueezingReport(
        n_emitters=n,
        mean_spin=mean,
        e1=e1,
        e2=e2,
        covariance=cov,
        var_min=float(values[0]),
        var_max=float(values[1]),
        theta_min=math.atan2(u_min[1], u_min[0]) % math.pi,
        direction_min=dir_min,
        direction_max=dir_max,
        xi2=n * float(values[0]) / length2,
        xi2_anti=n * float(values[1]) / length2,
        qfi_anti=qfi(state, ops.along(dir_max)),
        uncertainty_product=float(values[0] * values[1]) / (length2 / 4),
    )


@dataclass(frozen=True)
class AngleScan:
    thetas: np.ndarray
    variances: np.ndarray

    @property
    def theta_min(self) -> float:
        return float(self.thetas[np.argmin(self.variances)])

    @property
    def var_min(self) -> float:
        return float(np.min(self.variances))


def angle_scan(state, ops: CollectiveOps, step_deg: float = 0.5) -> AngleScan:
    """Transverse variance on a grid of angles from e1, for cross-checking the eigen-angle."""
    report = squeezing_report(state, ops)
    thetas = np.deg2rad(np.arange(0.0, 180.0, step_deg))
    cov = report.covariance
    c, s = np.cos(thetas), np.sin(thetas)
    variances = c * c * cov[0, 0] + s * s * cov[1, 1] + 2 * c * s * cov[0, 1]
    return AngleScan(thetas, variances)


def qfi(state, generator: Operator) -> float:
    """QFI of a state for rotations generated by a Hermitian operator.

    Pure states give 4 Var(G); mixed states use the spectral sum
    2 sum (p_k - p_l)^2 / (p_k + p_l) |G_kl|^2 over p_k + p_l > 1e-12.
    """
    if not generator.hermitian_hint:
        deviation = hermitian_deviation(generator.matrix)
        if deviation >= constants.HERMITIAN_TOL * max(1.0, max_abs(generator.matrix)):
            raise HermiticityError(f"QFI generator is not Hermitian (deviation {deviation:.3e})")
    if generator.basis != state.basis:
        raise BasisMismatchError("QFI generator and state live on different bases")
    vec = _vector_of(state)
    if vec is not None:
        mean = expectation_real(generator, state)
        applied = generator.apply(vec)
        return float(4 * (np.vdot(applied, applied).real - mean**2))
    rho = np.asarray(state.matrix)
    probs, eigvecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    g = eigvecs.conj().T @ np.asarray(generator.matrix @ eigvecs)
    total = probs[:, None] + probs[None, :]
    diff = probs[:, None] - probs[None, :]
    mask = total > 1e-12
    weights = np.zeros_like(total)
    weights[mask] = diff[mask] ** 2 / total[mask]
    return float(2 * np.sum(weights * np.abs(g) ** 2))


@dataclass(frozen=True)
class PairCorrelations:
    xx: np.ndarray
    yy: np.ndarray

    @staticmethod
    def _off_diagonal_mean(matrix: np.ndarray) -> float:
        mask = ~np.eye(matrix.shape[0], dtype=bool)
        return float(matrix[mask].mean())

    @property
    def mean_xx(self) -> float:
        return self._off_diagonal_mean(self.xx)

    @property
    def mean_yy(self) -> float:
        return self._off_diagonal_mean(self.yy)

    @property
    def spread(self) -> float:
        """Range (max - min) of the pair correlations over all i != j."""
        mask = ~np.eye(self.xx.shape[0], dtype=bool)
        return float(max(np.ptp(self.xx[mask]), np.ptp(self.yy[mask])))


def pair_correlations(state, site_ops) -> PairCorrelations:
    """<S_i^x S_j^x> and <S_i^y S_j^y> for every pair i != j (diagonal left NaN)."""
    if state.basis.kind != "tensor":
        raise BasisMismatchError(
            "Pair correlations need a tensor-space state; on the Dicke manifold derive them "
            "from collective moments, e.g. (<(J^x)^2> - N/4) / (N(N-1))"
        )
    if state.basis != site_ops.basis:
        raise BasisMismatchError("State and site operators live on different bases")
    n = site_ops.n_emitters
    out = {}
    for label, ops in (("xx", site_ops.sx), ("yy", site_ops.sy)):
        table = np.full((n, n), np.nan)
        for i in range(n):
            for j in range(i + 1, n):
                table[i, j] = table[j, i] = symmetric_moment(ops[i], ops[j], state)
        out[label] = table
    return PairCorrelations(**out)


def transverse_components(ops, theta) -> tuple[Operator, Operator]:
    """J1_perp = sum cos(t_i) S_i^x + sin(t_i) S_i^y and J2_perp = sum -sin(t_i) S_i^x + cos(t_i) S_i^y.

    ``ops`` is a CollectiveOps (uniform scalar angle) or a SiteOperatorSet
    (one angle per site, or a scalar broadcast to every site).
    """
    if isinstance(ops, CollectiveOps):
        t = float(np.asarray(theta))
        j1 = (math.cos(t) * ops.jx + math.sin(t) * ops.jy).as_hermitian()
        j2 = (-math.sin(t) * ops.jx + math.cos(t) * ops.jy).as_hermitian()
        return j1, j2
    angles = np.broadcast_to(np.asarray(theta, dtype=float), (ops.n_emitters,))
    j1 = sum(
        (math.cos(t) * sx + math.sin(t) * sy for t, sx, sy in zip(angles, ops.sx, ops.sy)),
        0 * ops.sx[0],
    )
    j2 = sum(
        (-math.sin(t) * sx + math.cos(t) * sy for t, sx, sy in zip(angles, ops.sx, ops.sy)),
        0 * ops.sx[0],
    )
    return j1.as_hermitian(), j2.as_hermitian()


def squeezing_function(perturbed, ops, theta) -> complex:
    """F = -<phi0|(J1_perp)^2|psi1> for the transverse angle(s) theta."""
    j1, _ = transverse_components(ops, theta)
    squared = j1.apply(j1.apply(perturbed.psi1))
    return complex(-np.vdot(perturbed.phi0, squared))


def first_order_covariance(perturbed, ops) -> np.ndarray:
    """(J^x, J^y) covariance of |phi0> + lambda |psi1> kept to first order in lambda.

    The unperturbed mean spin points along -z, so this is the transverse
    covariance in the frame e1 = x, e2 = y.
    """
    lam = perturbed.coupling
    phi0, psi1 = perturbed.phi0, perturbed.psi1
    perp = [ops.jx, ops.jy]
    cov = np.empty((2, 2))
    for a in range(2):
        for b in range(a, 2):
            left, right = perp[a].apply(phi0), perp[b].apply(phi0)
            zeroth = np.vdot(left, right).real
            first = np.vdot(left, perp[b].apply(psi1)) + np.vdot(right, perp[a].apply(psi1))
            cov[a, b] = cov[b, a] = zeroth + lam * first.real
    return cov


def covariance_angle(cov: np.ndarray, isotropic_tol: float = 0.0) -> float:
    """Angle in [0, pi) of the minimal-variance axis; NaN when the eigenvalues differ by at most isotropic_tol."""
    values, vectors = np.linalg.eigh(cov)
    if values[1] - values[0] <= isotropic_tol:
        return math.nan
    return math.atan2(vectors[1, 0], vectors[0, 0]) % math.pi


def first_order_xi2(perturbed, ops, theta, n_emitters: int | None = None) -> float:
    """1 - (8 lambda / N) Re F(theta)."""
    n = ops.n_emitters if n_emitters is None else n_emitters
    return 1.0 - 8.0 * perturbed.coupling * squeezing_function(perturbed, ops, theta).real / n


@dataclass(frozen=True)
class TheoremCheck:
    theta_best: float
    re_f_max: float

    @property
    def squeezes(self) -> bool:
        return self.re_f_max > 0


def theorem_condition(perturbed, ops, step_deg: float = 0.5) -> TheoremCheck:
    """Scan uniform angles for the largest Re F; first-order squeezing needs it positive."""
    thetas = np.deg2rad(np.arange(0.0, 180.0, step_deg))
    values = np.array([squeezing_function(perturbed, ops, t).real for t in thetas])
    best = int(np.argmax(values))
    return TheoremCheck(float(thetas[best]), float(values[best]))

