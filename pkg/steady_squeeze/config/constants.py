"""Configuration constants for the steady-state toolkit."""

import os
from dotenv import load_dotenv

load_dotenv()


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(f"STEADY_SQUEEZE_{name}", default))


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(f"STEADY_SQUEEZE_{name}", default))


# === CONFIGURATION ===

# Operator storage: dense below this dimension, CSR sparse at or above it
DENSE_CROSSOVER = _env_int("DENSE_CROSSOVER", 64)

# Algebra tolerances
HERMITIAN_TOL = 1e-12
EXPECTATION_IMAG_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8

# Steady-state solver
DENSE_LIOUVILLIAN_MAX = _env_int("DENSE_LIOUVILLIAN_MAX", 4096)   # dim**2 threshold for SVD
SOLVER_TOL = _env_float("SOLVER_TOL", 1e-10)
SOLVER_MAX_ITER = _env_int("SOLVER_MAX_ITER", 5000)
UNIQUENESS_TOL = _env_float("UNIQUENESS_TOL", 1e-8)
PROPAGATION_TIME = _env_float("PROPAGATION_TIME", 50.0)
SPARSE_DIRECT_MAX = _env_int("SPARSE_DIRECT_MAX", 20000)          # unknowns; LGMRES above
PERMUTATION_TOL = 1e-10                                            # relative leak out of the invariant operators

# Hilbert-space caps
MAX_TENSOR_EMITTERS = 12
MAX_LIOUVILLIAN_EMITTERS = 8
MAX_LIOUVILLIAN_DIM = _env_int("MAX_LIOUVILLIAN_DIM", 512)

# Perturbation engines
PERTURBATION_TOL = 1e-10
DEGENERACY_TOL = 1e-9

# Output
OUTPUT_DIR = os.getenv("STEADY_SQUEEZE_OUTPUT_DIR", "output")
CSV_FLOAT_FORMAT = "%.17g"
LOG_LEVEL = os.getenv("STEADY_SQUEEZE_LOG_LEVEL", "WARNING")
N_JOBS = _env_int("N_JOBS", 1)
