"""Row runner shared by the scan commands."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from steady_squeeze.analysis.squeezing import squeezing_report
from steady_squeeze.errors import SteadySqueezeError
from steady_squeeze.solvers.lindblad import LindbladModel, SolverSettings, steady_state
from steady_squeeze.utils.file_utils import write_csv
from steady_squeeze.utils.quality_checks import state_quality_gate

logger = logging.getLogger(__name__)

# failures recorded in the flag column instead of aborting the scan
ROW_ERRORS = (SteadySqueezeError, np.linalg.LinAlgError, ArithmeticError)

# transverse variances closer than this (per emitter) leave the squeezing angle undefined
ISOTROPIC_TOL = 1e-10


@dataclass(frozen=True)
class ScanResult:
    frame: pd.DataFrame
    path: Path
    flagged: int

    @property
    def rows(self) -> int:
        return len(self.frame)


def join_flags(*flags: str) -> str:
    return "; ".join(f for f in flags if f)


def guarded(func: Callable[..., dict], point: dict) -> dict:
    """Evaluate one scan point; errors become a flagged row with the point's axes."""
    try:
        row = func(**point)
    except ROW_ERRORS as exc:
        logger.warning("Scan point %s failed: %s", point, exc)
        row = {"flag": f"{type(exc).__name__}: {exc}"}
    return {**point, **row}


def run_points(func: Callable[..., dict], points: Iterable[dict], n_jobs: int = 1, desc: str = "scan") -> list[dict]:
    """Rows in the order of ``points`` whatever the completion order."""
    points = list(points)
    if n_jobs == 1:
        return [guarded(func, p) for p in tqdm(points, desc=f"{desc:<20}", leave=False)]
    return Parallel(n_jobs=n_jobs)(delayed(guarded)(func, p) for p in points)


def exact_point(model: LindbladModel, settings: SolverSettings | None = None) -> dict:
    """Exact steady state of a model reduced to the scan columns."""
    rho = steady_state(model, settings)
    ok, message, _ = state_quality_gate(rho, model.name)
    report = squeezing_report(rho, model.collective)
    info = rho.solver_info
    isotropic = report.var_max - report.var_min <= ISOTROPIC_TOL * report.n_emitters
    return {
        "xi2_exact": report.xi2,
        "theta_min_exact": math.nan if isotropic else report.theta_min,
        "purity": rho.purity,
        "mean_spin": report.mean_spin,
        "residual": info.residual,
        "method": info.method,
        "flag": "" if ok else message,
    }


def finalize(rows: list[dict], columns: list[str], path: Path, header: dict) -> ScanResult:
    """Order columns, fill missing cells with NaN and write the CSV."""
    for row in rows:
        row.setdefault("flag", "")
    frame = pd.DataFrame(rows).reindex(columns=columns)
    frame["flag"] = frame["flag"].fillna("")
    flagged = int((frame["flag"] != "").sum())
    written = write_csv(frame, path, header)
    if flagged:
        logger.warning("%d of %d rows flagged in %s", flagged, len(frame), written)
    return ScanResult(frame, written, flagged)


def nan_if_none(value) -> float:
    return math.nan if value is None else float(value)


def merge_parts(*parts: Callable[[], dict]) -> dict:
    """Run independent row parts; a failing part only blanks its own columns."""
    row: dict = {}
    flags = []
    for part in parts:
        try:
            values = part()
        except ROW_ERRORS as exc:
            logger.warning("Row part failed: %s", exc)
            flags.append(f"{type(exc).__name__}: {exc}")
            continue
        flags.append(values.pop("flag", ""))
        row.update(values)
    row["flag"] = join_flags(*flags)
    return row
