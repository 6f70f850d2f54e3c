import os
from pathlib import Path
from dotenv import load_dotenv

# Configuration
PROJECT_ROOT = Path(__file__).resolve().parent.parent
load_dotenv(PROJECT_ROOT / ".env")
LOG_DIR = Path(os.getenv("IWALAB_LOG_DIR") or PROJECT_ROOT / "logs")
VERSION = "0.1.0"


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value) if value else default


LOG_KEEP = _env_int("IWALAB_LOG_KEEP", 50)


# Precision Defaults
DEFAULT_PRIME = _env_int("IWALAB_PRIME", 3)
DEFAULT_COEFF_PRECISION = _env_int("IWALAB_COEFF_PRECISION", 8)
DEFAULT_T_PRECISION = _env_int("IWALAB_T_PRECISION", 32)
WORD_BOUND = 2 ** 63
MAX_RESIDUAL_DEPTH = 512

# Growth Constants
DEFAULT_N_RANGES = {3: (0, 4), 5: (0, 3)}
FALLBACK_N_RANGE = (0, 3)
DEFAULT_MATRIX_BUDGET = _env_int("IWALAB_MATRIX_BUDGET", 4096)
MIN_STABLE_LAYERS = 4
LAMBDA_METHODS = ("residual", "growth")
DET_CROSS_CHECK_LIMIT = _env_int("IWALAB_DET_CROSS_CHECK_LIMIT", 64)

# Group Constants
MAX_GROUP_ORDER = 64

# Batch Constants
DEFAULT_JOBS = _env_int("IWALAB_JOBS", 1)
MAX_UNSTABLE_FRACTION = 0.10

# Schema Tags
SCHEMA_ELEMENT = "iwalab-element-1"
SCHEMA_MODULE = "iwalab-module-1"
SCHEMA_GROUP = "iwalab-group-1"
SCHEMA_COMPLEX = "iwalab-complex-1"
SCHEMA_FORMULA = "iwalab-formula-1"
SCHEMA_REPORT = "iwalab-report-1"

# Exit Codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_SCHEMA = 2
EXIT_PRECISION = 3
EXIT_VIOLATION = 4


def default_n_range(p: int) -> tuple[int, int]:
    return DEFAULT_N_RANGES.get(p, FALLBACK_N_RANGE)
