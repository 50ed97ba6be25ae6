"""Quality gates for solved steady states and perturbative expansions."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from steady_squeeze.config import constants
from steady_squeeze.solvers.lindblad import DensityMatrix, SolverSettings, steady_state
from steady_squeeze.solvers.perturbation import PerturbedState, sector_weights

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InvariantCheck:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def state_quality_gate(rho: DensityMatrix, label: str = "") -> tuple[bool, str, dict]:
    """Solver flags plus trace, Hermiticity, positivity and purity bounds."""
    info = rho.solver_info
    diag = rho.diagnostics
    details = diag.as_dict()
    problems = diag.violations()
    if info is not None:
        details.update(residual=info.residual, method=info.method, unique=info.unique)
        if info.flagged:
            problems.append(info.message or "solver flagged the state")
    if problems:
        message = "; ".join(problems)
        logger.warning("Quality gate failed for %s: %s", label or "state", message)
        return False, message, details
    return True, "OK", details


def _max_delta(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))


def check_cross_engine(
    general: PerturbedState, commuting: PerturbedState, tol: float = 1e-12
) -> InvariantCheck:
    delta = max(_max_delta(general.c, commuting.c), _max_delta(general.d, commuting.d))
    scale = max(1.0, float(np.max(np.abs(general.d), initial=0.0)), float(np.max(np.abs(general.c), initial=0.0)))
    return InvariantCheck("cross_engine", delta <= tol * scale, delta, tol * scale,
                          "general vs commuting coefficients")


def check_orthogonality(perturbed: PerturbedState, tol: float = 1e-10) -> InvariantCheck:
    """<phi0|psi1> = 0 and <phi0|psi2> = -<psi1|psi1>/2."""
    first = abs(np.vdot(perturbed.phi0, perturbed.psi1))
    second = abs(np.vdot(perturbed.phi0, perturbed.psi2) + 0.5 * np.vdot(perturbed.psi1, perturbed.psi1))
    measured = float(max(first, second))
    return InvariantCheck("normalization_structure", measured <= tol, measured, tol)


def check_sector_restriction(
    vector: np.ndarray, jz, allowed: set[float], name: str, tol: float = 1e-10
) -> InvariantCheck:
    """Norm of the part of ``vector`` outside the allowed J^z sectors."""
    weights = sector_weights(vector, jz)
    total = sum(weights.values())
    outside = sum(w for m, w in weights.items() if not any(abs(m - a) < 1e-9 for a in allowed))
    measured = float(np.sqrt(outside / total)) if total > 0 else 0.0
    stray = sorted(m for m, w in weights.items() if w > 0 and not any(abs(m - a) < 1e-9 for a in allowed))
    return InvariantCheck(name, measured <= tol, measured, tol,
                          f"allowed M={sorted(allowed)}" + (f", stray M={stray}" if stray else ""))


def _ratio(coarse: float, fine: float) -> float:
    if fine <= 1e-15:
        return float("inf") if coarse > 1e-15 else float("nan")
    return coarse / fine


def check_halving(
    name: str, measure: Callable[[float], float], coupling: float, min_ratio: float, floor: float = 1e-14
) -> InvariantCheck:
    """measure(lambda) / measure(lambda/2) must reach min_ratio unless both sit below floor."""
    coarse = measure(coupling)
    fine = measure(coupling / 2)
    ratio = _ratio(coarse, fine)
    passed = (coarse <= floor and fine <= floor) or ratio >= min_ratio
    return InvariantCheck(name, bool(passed), ratio, min_ratio, f"{coarse:.3e} -> {fine:.3e}")


def check_bound(name: str, measured: float, tol: float, detail: str = "") -> InvariantCheck:
    return InvariantCheck(name, bool(measured <= tol), float(measured), tol, detail)


def check_norm_scaling(perturbed: PerturbedState, coupling: float, min_ratio: float = 7.0) -> InvariantCheck:
    """| ||phi0'|| - 1 | drops as lambda^3 when lambda is halved."""
    return check_halving("norm_scaling", perturbed.norm_defect, coupling, min_ratio)


def exact_mismatch(model, perturbed: PerturbedState, coupling: float, order: int,
                   settings: SolverSettings | None = None) -> float:
    """max |rho_ss - |phi0'><phi0'|| at the given coupling."""
    rho = steady_state(model.with_coupling(coupling), settings)
    approx = perturbed.state(order, normalize=True, coupling=coupling).projector()
    return float(np.max(np.abs(rho.matrix - approx)))


def check_exact_convergence(model, perturbed: PerturbedState, coupling: float, order: int,
                            min_ratio: float, settings: SolverSettings | None = None) -> InvariantCheck:
    """Mismatch ratio between lambda and lambda/2 against the exact steady state."""
    return check_halving(
        f"exact_convergence_order{order}",
        lambda lam: exact_mismatch(model, perturbed, lam, order, settings),
        coupling,
        min_ratio,
        floor=1e-13,
    )


def check_residuals(perturbed: PerturbedState) -> InvariantCheck:
    measured = max(perturbed.residuals.values(), default=0.0)
    return InvariantCheck("equation_residuals", measured <= constants.PERTURBATION_TOL, measured,
                          constants.PERTURBATION_TOL)


def summarize(checks: list[InvariantCheck]) -> tuple[bool, str, dict]:
    """(all passed, message, details) in the shape of the state gate."""
    failed = [c.name for c in checks if not c.passed]
    details = {c.name: c.as_dict() for c in checks}
    if failed:
        return False, "failed: " + ", ".join(failed), details
    return True, "OK", details
