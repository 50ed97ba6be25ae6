"""XYZ and transverse-field Ising scans: squeezing curves and optimal-angle maps."""

from __future__ import annotations

import logging
import math
from functools import partial

import numpy as np

from steady_squeeze.analysis.squeezing import covariance_angle, first_order_covariance, first_order_xi2
from steady_squeeze.config.scan_config import ScanConfig
from steady_squeeze.errors import ConfigError
from steady_squeeze.models.emitter_models import (
    FULL,
    PERTURBATIVE,
    TfiParams,
    XyzParams,
    build_tfi,
    build_xyz,
)
from steady_squeeze.scans.common import (
    ISOTROPIC_TOL,
    ScanResult,
    exact_point,
    finalize,
    merge_parts,
    run_points,
)
from steady_squeeze.solvers.closed_forms import TwoEmitterClosedForm, tfi_closed_form, xyz_closed_form
from steady_squeeze.solvers.perturbation import build_eigensystem, perturb_general

logger = logging.getLogger(__name__)

CURVE_COLUMNS = [
    "xi2_exact", "xi2_pert", "xi2_closed_form", "theta_min_exact", "theta_min_pert",
    "theta_closed_form", "purity", "backend", "residual", "pert_residual", "flag",
]
ANGLE_COLUMNS = [
    "alpha", "beta", "quadrant", "theta_pert", "theta_exact", "backend", "residual", "flag",
]


def quadrant(alpha: float, beta: float) -> str:
    """Sign quadrant of (beta, alpha): I (+,+), II (-,+), III (-,-), IV (+,-)."""
    if alpha == 0 or beta == 0:
        return "boundary"
    if alpha > 0:
        return "I" if beta > 0 else "II"
    return "III" if beta < 0 else "IV"


def perturbative_point(model, closed: TwoEmitterClosedForm) -> dict:
    """First-order xi^2 and squeezing angle from the numerical engine, with the closed forms beside them."""
    eig = build_eigensystem(model)
    perturbed = perturb_general(eig, model.h1, model.jumps, coupling=model.coupling, order=1)
    ops = model.collective
    theta = covariance_angle(first_order_covariance(perturbed, ops), ISOTROPIC_TOL * ops.n_emitters)
    xi2 = first_order_xi2(perturbed, ops, 0.0 if math.isnan(theta) else theta)
    return {
        "xi2_pert": xi2,
        "xi2_closed_form": closed.xi2(),
        "theta_min_pert": theta,
        "theta_closed_form": closed.squeezing_angle,
        "pert_residual": max(perturbed.residuals.values()),
    }


def _backend_label(cfg: ScanConfig) -> str:
    return {"exact": "exact:full", "pert": "pert:dicke", "both": "exact:full+pert:dicke"}[cfg.backend]


def _curve_row(cfg: ScanConfig, build, params, closed_form) -> dict:
    parts = []
    if cfg.wants_exact:
        parts.append(lambda: exact_point(build(params(), FULL), cfg.solver_settings))
    if cfg.wants_pert:
        parts.append(lambda: perturbative_point(build(params(), PERTURBATIVE), closed_form()))
    row = merge_parts(*parts)
    row.pop("mean_spin", None)
    row.pop("method", None)
    row["backend"] = _backend_label(cfg)
    return row


def _xyz_row(cfg: ScanConfig, n: int, delta_J: float) -> dict:
    return _curve_row(
        cfg,
        build_xyz,
        lambda: XyzParams.from_mean(n, cfg.j_mean, delta_J, cfg.jz, cfg.gamma),
        lambda: xyz_closed_form(n, cfg.j_mean + delta_J, cfg.j_mean - delta_J, cfg.jz, cfg.gamma),
    )


def _tfi_row(cfg: ScanConfig, n: int, jx: float) -> dict:
    row = _curve_row(
        cfg,
        build_tfi,
        lambda: TfiParams(n, jx, cfg.delta, cfg.gamma),
        lambda: tfi_closed_form(n, jx, cfg.delta, cfg.gamma),
    )
    row["delta"] = cfg.delta
    return row


def _axis(cfg: ScanConfig) -> np.ndarray:
    return np.linspace(cfg.start, cfg.stop, cfg.steps)


def cmd_xyz_scan(cfg: ScanConfig) -> ScanResult:
    """xi^2 against delta_J = (Jx - Jy)/2 at fixed J = (Jx + Jy)/2 and Jz."""
    points = [{"n": n, "delta_J": float(d)} for n in cfg.n for d in _axis(cfg)]
    rows = run_points(partial(_xyz_row, cfg), points, cfg.n_jobs, desc="xyz-scan")
    header = {**cfg.header(), "model": "xyz"}
    return finalize(rows, ["n", "delta_J", *CURVE_COLUMNS], cfg.output_path, header)


def cmd_tfi_scan(cfg: ScanConfig) -> ScanResult:
    """xi^2 against the Ising coupling Jx at fixed transverse field Delta."""
    points = [{"n": n, "jx": float(j)} for n in cfg.n for j in _axis(cfg)]
    rows = run_points(partial(_tfi_row, cfg), points, cfg.n_jobs, desc="tfi-scan")
    header = {**cfg.header(), "model": "tfi"}
    return finalize(rows, ["n", "jx", "delta", *CURVE_COLUMNS], cfg.output_path, header)


def _angle_row(cfg: ScanConfig, n: int, x: float, y: float) -> dict:
    if cfg.model == "xyz":
        closed = xyz_closed_form(n, x, y, cfg.jz, cfg.gamma)
        params = XyzParams(n, x, y, cfg.jz, cfg.gamma)
        build = build_xyz
    else:
        closed = tfi_closed_form(n, x, y, cfg.gamma)
        params = TfiParams(n, x, y, cfg.gamma)
        build = build_tfi
    row = {
        "alpha": closed.alpha,
        "beta": closed.beta,
        "quadrant": quadrant(closed.alpha, closed.beta),
        "theta_pert": closed.squeezing_angle,
        "backend": "closed-form+exact:full" if cfg.wants_exact else "closed-form",
    }
    if cfg.wants_exact:
        exact = merge_parts(lambda: exact_point(build(params, FULL), cfg.solver_settings))
        row.update(theta_exact=exact.get("theta_min_exact", math.nan), residual=exact.get("residual"))
        row["flag"] = exact["flag"]
    return row


def cmd_angle_map(cfg: ScanConfig) -> ScanResult:
    """Optimal squeezing angle over a (Jx, Jy) grid for XYZ or a (Jx, Delta) grid for TFI."""
    if cfg.model not in ("xyz", "tfi"):
        raise ConfigError(f"angle-map supports the xyz and tfi models, got '{cfg.model}'")
    axis_x, axis_y = ("jx", "jy") if cfg.model == "xyz" else ("jx", "delta")
    grid = _axis(cfg)
    points = [
        {"n": n, "x": float(x), "y": float(y)} for n in cfg.n for y in grid for x in grid
    ]
    rows = run_points(partial(_angle_row, cfg), points, cfg.n_jobs, desc="angle-map")
    for row in rows:
        row[axis_x] = row.pop("x")
        row[axis_y] = row.pop("y")
    header = {**cfg.header(), "model": cfg.model}
    return finalize(rows, ["n", axis_x, axis_y, *ANGLE_COLUMNS], cfg.output_path, header)
