"""Invariant suites for the perturbative engines, written as a JSON report.

Each suite builds one model, expands its steady state with both engines and
checks the expansion against closed forms, the exact solver and its own
structure. Failures are report content, never exceptions.
"""

from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np

from steady_squeeze.analysis.squeezing import squeezing_function, squeezing_report, symmetric_moment
from steady_squeeze.bases.full_basis import lift_matrix, spin_length_weights
from steady_squeeze.config import constants
from steady_squeeze.config.scan_config import ScanConfig
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
)
from steady_squeeze.scans.common import ROW_ERRORS
from steady_squeeze.solvers.closed_forms import (
    dicke_observables,
    dicke_perturbed_amplitudes,
    dicke_spin_angle,
    tfi_closed_form,
    xyz_closed_form,
)
from steady_squeeze.solvers.lindblad import SolverSettings, steady_state
from steady_squeeze.solvers.perturbation import build_eigensystem, perturb_commuting, perturb_general
from steady_squeeze.utils.file_utils import write_json_report
from steady_squeeze.utils.operator_core import Operator, expectation_real
from steady_squeeze.utils.quality_checks import (
    InvariantCheck,
    check_bound,
    check_cross_engine,
    check_exact_convergence,
    check_halving,
    check_norm_scaling,
    check_orthogonality,
    check_residuals,
    check_sector_restriction,
    summarize,
)

logger = logging.getLogger(__name__)

# drive strengths (units of the decay rate) at which the suites expand
PERTURBATION_STRENGTH = 0.05
DICKE_SUITE_EMITTERS = 10
COEFFICIENT_TOL = 1e-12
# error exponents when the coupling is halved: 2 -> ratio 4, 3 -> ratio 8
QUADRATIC_RATIO = 3.5
CUBIC_RATIO = 7.0
CHECK_ANGLES = (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8)
FAULT_LADDER = "ladder"


def _expand(model):
    eig = build_eigensystem(model)
    general = perturb_general(eig, model.h1, model.jumps, coupling=model.coupling)
    commuting = perturb_commuting(eig, model.h1, model.jumps, coupling=model.coupling)
    return general, commuting


def _uncertainty_checks(perturbed, ops) -> list[InvariantCheck]:
    def product_defect(lam):
        report = squeezing_report(perturbed.state(2, coupling=lam), ops)
        return abs(report.uncertainty_product - 1.0)

    def qfi_gap(lam):
        return abs(squeezing_report(perturbed.state(2, coupling=lam), ops).qfi_bound_gap)

    return [
        check_halving("minimal_uncertainty", product_defect, 1.0, QUADRATIC_RATIO, floor=1e-12),
        check_halving("qfi_matches_squeezing", qfi_gap, 1.0, QUADRATIC_RATIO, floor=1e-12),
    ]


def _common_checks(general, commuting, jz, low: float, first_sectors: set, second_sectors: set):
    return [
        check_cross_engine(general, commuting, COEFFICIENT_TOL),
        check_residuals(general),
        check_orthogonality(general),
        check_norm_scaling(general, 1.0, CUBIC_RATIO),
        check_sector_restriction(general.psi1, jz, {low + s for s in first_sectors}, "first_order_sectors"),
        check_sector_restriction(general.psi2, jz, {low + s for s in second_sectors}, "second_order_sectors"),
    ]


def _closed_form_f_check(perturbed, ops, closed) -> InvariantCheck:
    delta = max(abs(squeezing_function(perturbed, ops, t) - complex(closed.F(t))) for t in CHECK_ANGLES)
    scale = max(1.0, abs(closed.alpha) / abs(closed.denominator))
    return check_bound("closed_form_F", delta, COEFFICIENT_TOL * 100 * scale, "max |F_num - F_closed| over the check angles")


def two_emitter_suite(name: str, model, closed, settings: SolverSettings) -> list[InvariantCheck]:
    """Checks for a full-space XYZ or TFI model (individual emission)."""
    n = model.basis.n_emitters
    ops = model.collective
    general, commuting = _expand(model)
    checks = _common_checks(general, commuting, model.jz, -n / 2, {2}, {0, 2, 4})
    weights = spin_length_weights(general.state(2), n)
    outside = sum(w for j, w in weights.items() if abs(j - n / 2) > 1e-9)
    checks.append(check_bound("symmetric_sector", max(outside, 0.0), 1e-10, "weight outside J = N/2"))
    checks.append(_closed_form_f_check(general, ops, closed))
    checks.extend(_uncertainty_checks(general, ops))
    for order in (1, 2):
        checks.append(check_exact_convergence(model, general, 1.0, order, QUADRATIC_RATIO, settings))
    logger.debug("Suite %s: %d checks", name, len(checks))
    return checks


def dicke_suite(n: int, omega: float, big_gamma: float, settings: SolverSettings) -> list[InvariantCheck]:
    """Checks for the driven Dicke model on the (N+1)-dimensional manifold."""
    model = build_dicke(DickeParams(n, omega, big_gamma), DICKE)
    ops = model.collective
    general, commuting = _expand(model)
    checks = _common_checks(general, commuting, model.jz, -n / 2, {1}, {0, 2})

    expected = np.zeros(model.dimension, dtype=complex)
    for m, amplitude in dicke_perturbed_amplitudes(n, omega, big_gamma).items():
        expected[int(round(m + n / 2))] = amplitude
    delta = float(np.max(np.abs(general.vector(2) - expected)))
    checks.append(check_bound("closed_form_state", delta, COEFFICIENT_TOL, "second-order amplitudes"))

    def observable_residual(lam):
        state = general.state(2, coupling=lam)
        return max(abs(value - expected_value) for value, expected_value in
                   zip(dicke_moments(state, ops, n, omega * lam, big_gamma),
                       dicke_observables(n, omega * lam, big_gamma).values()))

    checks.append(check_halving("closed_form_observables", observable_residual, 1.0, CUBIC_RATIO, floor=1e-13))
    checks.extend(_uncertainty_checks(general, ops))
    checks.append(check_exact_convergence(model, general, 1.0, 1, QUADRATIC_RATIO, settings))
    checks.append(check_exact_convergence(model, general, 1.0, 2, CUBIC_RATIO, settings))
    checks.append(check_backend_agreement(n, omega, big_gamma, settings))
    return checks


def check_backend_agreement(n: int, omega: float, big_gamma: float, settings: SolverSettings) -> InvariantCheck:
    """Driven Dicke steady state on the manifold, lifted, against the full tensor-space solve."""
    n = min(n, constants.MAX_LIOUVILLIAN_EMITTERS)
    params = DickeParams(n, omega, big_gamma)
    manifold = steady_state(build_dicke(params, DICKE), settings)
    full = steady_state(build_dicke(params, FULL), settings)
    delta = float(np.max(np.abs(lift_matrix(manifold.matrix, n) - full.matrix)))
    return check_bound("backend_agreement", delta, 1e-8, f"max |rho_full - V rho_dicke V^+| at N={n}")


def dicke_moments(state, ops, n: int, omega: float, big_gamma: float) -> list[float]:
    """Numerical values in the order of the closed-form observable table."""
    jx, jy, jz = ops.jx, ops.jy, ops.jz
    mean_z = expectation_real(jz, state)
    cos_phi, sin_phi = dicke_spin_angle(n, omega, big_gamma)
    perp = ops.along((0.0, -sin_phi, cos_phi))
    return [
        expectation_real(jx, state),
        expectation_real(jy, state),
        mean_z,
        mean_z**2,
        symmetric_moment(jx, jx, state),
        symmetric_moment(jy, jy, state),
        symmetric_moment(jz, jz, state),
        2 * symmetric_moment(jx, jy, state),
        2 * symmetric_moment(jx, jz, state),
        2 * symmetric_moment(jy, jz, state),
        symmetric_moment(perp, perp, state),
    ]


def corrupt_ladder(model, strength: float, entry: tuple[int, int] = (2, 0), value: float = 0.1):
    """Dicke-manifold model whose pair drive strength * ((J^+)^2 + h.c.) uses a J^+ with a stray Delta M = 2 element."""
    jplus = np.array(model.collective.jplus.to_dense(), dtype=complex)
    jplus[entry] += value
    raised = Operator(model.basis, jplus)
    pair = (raised @ raised + raised.dag() @ raised.dag()).as_hermitian()
    return dataclasses.replace(model, h1=(strength * pair).as_hermitian(), name=f"{model.name}-corrupted")


def fault_suite(n: int, cfg: ScanConfig) -> list[InvariantCheck]:
    params = XyzParams.from_mean(n, cfg.j_mean, PERTURBATION_STRENGTH, cfg.jz, cfg.gamma)
    model = corrupt_ladder(build_xyz(params, PERTURBATIVE), params.delta_j / (2 * n))
    general = perturb_general(build_eigensystem(model), model.h1, model.jumps)
    return [check_sector_restriction(general.psi1, model.jz, {-n / 2 + 2}, "first_order_sectors")]


def _run_suite(build) -> dict:
    try:
        checks = build()
    except ROW_ERRORS as exc:
        logger.warning("Suite aborted: %s", exc)
        return {"passed": False, "message": f"{type(exc).__name__}: {exc}", "checks": {}}
    passed, message, details = summarize(checks)
    return {"passed": passed, "message": message, "checks": details}


def cmd_perturb_check(cfg: ScanConfig) -> dict:
    """Run the requested suites and write a machine-readable pass/fail report."""
    settings = SolverSettings(tol=cfg.tol)
    n = cfg.n[0]
    suites = {}
    if cfg.model in ("xyz", "all"):
        suites[f"xyz-N{n}"] = lambda: two_emitter_suite(
            "xyz",
            build_xyz(XyzParams.from_mean(n, cfg.j_mean, PERTURBATION_STRENGTH, cfg.jz, cfg.gamma), FULL),
            xyz_closed_form(n, cfg.j_mean + PERTURBATION_STRENGTH, cfg.j_mean - PERTURBATION_STRENGTH,
                            cfg.jz, cfg.gamma),
            settings,
        )
    if cfg.model in ("tfi", "all"):
        suites[f"tfi-N{n}"] = lambda: two_emitter_suite(
            "tfi",
            build_tfi(TfiParams(n, PERTURBATION_STRENGTH, cfg.delta, cfg.gamma), FULL),
            tfi_closed_form(n, PERTURBATION_STRENGTH, cfg.delta, cfg.gamma),
            settings,
        )
    if cfg.model in ("dicke", "all"):
        n_dicke = n if cfg.model == "dicke" else DICKE_SUITE_EMITTERS
        suites[f"driven-dicke-N{n_dicke}"] = lambda: dicke_suite(
            n_dicke, PERTURBATION_STRENGTH * cfg.gamma, cfg.gamma, SolverSettings(tol=cfg.tol)
        )
    if cfg.fault == FAULT_LADDER:
        suites[f"xyz-corrupted-ladder-N{n}"] = lambda: fault_suite(n, cfg)

    results = {}
    for name, build in suites.items():
        results[name] = _run_suite(build)
        logger.info("Suite %s: %s", name, results[name]["message"])
    report = {
        "config": cfg.header(),
        "passed": all(r["passed"] for r in results.values()),
        "suites": results,
    }
    report["path"] = str(write_json_report(report, cfg.output_path))
    return report
