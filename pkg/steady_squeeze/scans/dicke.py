"""Driven Dicke sweep: squeezing against the drive up to the super-radiant point."""

from __future__ import annotations

import math
from functools import partial

import numpy as np

from steady_squeeze.config.scan_config import ScanConfig
from steady_squeeze.errors import ConfigError
from steady_squeeze.models.emitter_models import DICKE, DickeParams, build_dicke
from steady_squeeze.scans.common import ScanResult, exact_point, finalize, merge_parts, run_points
from steady_squeeze.solvers.closed_forms import dicke_spin_angle, dicke_xi2

MODEL_LABEL = "driven-dicke"
COLUMNS = [
    "n", "two_omega_over_gamma", "xi2_exact", "xi2_pert", "phi", "phi_pert",
    "purity", "backend", "residual", "flag",
]


def mean_spin_angle(mean_spin: np.ndarray) -> float:
    """phi with <J> proportional to (0, cos phi, sin phi)."""
    return math.atan2(float(mean_spin[2]), float(mean_spin[1]))


def _exact(cfg: ScanConfig, n: int, omega: float) -> dict:
    row = exact_point(build_dicke(DickeParams(n, omega, cfg.gamma), DICKE), cfg.solver_settings)
    row["phi"] = mean_spin_angle(row.pop("mean_spin"))
    row.pop("method", None)
    return row


def _pert(cfg: ScanConfig, n: int, omega: float) -> dict:
    cos_phi, sin_phi = dicke_spin_angle(n, omega, cfg.gamma)
    return {
        "xi2_pert": dicke_xi2(omega, cfg.gamma, 0.0),
        "phi_pert": math.atan2(sin_phi, cos_phi),
    }


def _dicke_row(cfg: ScanConfig, n: int, two_omega_over_gamma: float) -> dict:
    omega = 0.5 * two_omega_over_gamma * cfg.gamma
    parts = []
    if cfg.wants_exact:
        parts.append(partial(_exact, cfg, n, omega))
    if cfg.wants_pert:
        parts.append(partial(_pert, cfg, n, omega))
    row = merge_parts(*parts)
    row["backend"] = {"exact": "exact:dicke", "pert": "closed-form", "both": "exact:dicke+closed-form"}[cfg.backend]
    return row


def cmd_dicke_scan(cfg: ScanConfig) -> ScanResult:
    """xi^2 against 2 Omega / Gamma from 0 to omega_max for each N, solved on the Dicke manifold."""
    if cfg.gamma <= 0:
        raise ConfigError(f"The collective decay rate must be positive, got {cfg.gamma}")
    axis = np.linspace(0.0, cfg.omega_max, cfg.steps)
    points = [{"n": n, "two_omega_over_gamma": float(x)} for n in cfg.n for x in axis]
    rows = run_points(partial(_dicke_row, cfg), points, cfg.n_jobs, desc="dicke-scan")
    header = {**cfg.header(), "model": MODEL_LABEL}
    return finalize(rows, COLUMNS, cfg.output_path, header)
