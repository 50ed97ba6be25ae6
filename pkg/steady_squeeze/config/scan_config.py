"""Scan configuration: defaults <- key=value file <- command-line flags."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import dotenv_values

from steady_squeeze import __version__
from steady_squeeze.config import constants
from steady_squeeze.errors import ConfigError
from steady_squeeze.solvers.lindblad import SolverSettings
from steady_squeeze.utils.file_utils import ensure_output_dir

COMMANDS = ("xyz-scan", "angle-map", "tfi-scan", "dicke-scan", "perturb-check")
MODELS = ("xyz", "tfi", "dicke", "all")
BACKENDS = ("exact", "pert", "both")

# Per-command defaults (energies in units of the decay rate)
COMMAND_DEFAULTS = {
    "xyz-scan": dict(model="xyz", n=(8,), j_mean=-0.8, jz=1.0, start=-0.1, stop=0.1, steps=21),
    "angle-map": dict(model="xyz", n=(8,), jz=1.0, start=-2.0, stop=2.0, steps=5),
    "tfi-scan": dict(model="tfi", n=(8,), delta=-6.0, start=0.0, stop=0.5, steps=11),
    "dicke-scan": dict(model="dicke", n=(50, 100, 200, 300), omega_max=1.0, steps=21),
    "perturb-check": dict(model="all", n=(6,), j_mean=-0.8, jz=1.0, delta=-6.0, steps=2),
}


@dataclass
class ScanConfig:
    command: str
    model: str = "xyz"
    n: tuple[int, ...] = (8,)
    jx: float = 0.0
    jy: float = 0.0
    jz: float = 1.0
    j_mean: float = -0.8
    delta: float = -6.0
    gamma: float = 1.0
    omega_max: float = 1.0
    start: float = 0.0
    stop: float = 0.1
    steps: int = 11
    backend: str = "both"
    out: str | None = None
    tol: float = field(default_factory=lambda: constants.SOLVER_TOL)
    n_jobs: int = field(default_factory=lambda: constants.N_JOBS)
    fault: str | None = None

    @property
    def output_path(self) -> Path:
        if self.out:
            return Path(self.out)
        suffix = "json" if self.command == "perturb-check" else "csv"
        return Path(constants.OUTPUT_DIR) / f"{self.command}.{suffix}"

    @property
    def wants_exact(self) -> bool:
        return self.backend in ("exact", "both")

    @property
    def wants_pert(self) -> bool:
        return self.backend in ("pert", "both")

    @property
    def solver_settings(self) -> SolverSettings:
        return SolverSettings(tol=self.tol)

    def validate(self) -> "ScanConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command '{self.command}'")
        if self.model not in MODELS:
            raise ConfigError(f"Unknown model '{self.model}', expected one of {MODELS}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"Unknown backend '{self.backend}', expected one of {BACKENDS}")
        if self.steps < 2:
            raise ConfigError(f"steps must be at least 2, got {self.steps}")
        if not self.n or any(n < 1 for n in self.n):
            raise ConfigError(f"Emitter counts must be positive, got {self.n}")
        for name in ("jx", "jy", "jz", "j_mean", "delta", "gamma", "omega_max", "start", "stop", "tol"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite, got {getattr(self, name)}")
        if self.tol <= 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.command in ("xyz-scan", "tfi-scan", "angle-map") and self.wants_exact:
            too_big = [n for n in self.n if n > constants.MAX_LIOUVILLIAN_EMITTERS]
            if too_big:
                raise ConfigError(
                    f"Exact backend needs N <= {constants.MAX_LIOUVILLIAN_EMITTERS}; "
                    f"got N={too_big}. Use --backend pert for larger N"
                )
        parent = self.output_path.parent
        try:
            ensure_output_dir(parent)
        except OSError as exc:
            raise ConfigError(f"Cannot use output directory {parent}: {exc}") from exc
        return self

    def header(self) -> dict:
        values = dataclasses.asdict(self)
        values["out"] = str(self.output_path)
        return {"steady_squeeze": __version__, **values}


def _coerce(name: str, raw):
    """Convert a file or flag value to the type of the ScanConfig field."""
    if raw is None:
        return None
    try:
        if name == "n":
            if isinstance(raw, (list, tuple)):
                return tuple(int(v) for v in raw)
            return tuple(int(v) for v in str(raw).replace(";", ",").split(",") if v.strip())
        if name in ("steps", "n_jobs"):
            return int(raw)
        if name in ("command", "model", "backend", "out", "fault"):
            return str(raw)
        return float(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid value for {name}: {raw!r}") from exc


def read_config_file(path: str | Path) -> dict:
    """key=value file; keys match ScanConfig fields (dashes allowed)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    known = {f.name for f in dataclasses.fields(ScanConfig)}
    values = {}
    for key, raw in dotenv_values(path).items():
        name = key.strip().lower().replace("-", "_")
        if name not in known:
            raise ConfigError(f"Unknown config key '{key}' in {path}")
        values[name] = _coerce(name, raw)
    return values


def load_scan_config(command: str, config_file: str | None = None, **flags) -> ScanConfig:
    """Merge defaults, the optional config file and non-None flags, then validate."""
    if command not in COMMANDS:
        raise ConfigError(f"Unknown command '{command}'")
    values = dict(COMMAND_DEFAULTS[command])
    if config_file:
        values.update(read_config_file(config_file))
    for name, raw in flags.items():
        if raw is not None:
            values[name] = _coerce(name, raw)
    values.pop("command", None)
    return ScanConfig(command=command, **values).validate()
