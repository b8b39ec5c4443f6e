import logging
import os

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)


def env(key: str, default: str = "") -> str:
    return os.getenv(key, default)


# Locations read from the environment
OUTPUT_DIR = env("RMGAUSS_OUTPUT_DIR", "runs")
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
# "file:<name>" potentials resolve here unless the path exists as given
POTENTIALS_DIR = env("RMGAUSS_POTENTIALS_DIR", os.path.join(PROJECT_ROOT, "custom_potentials"))

# CSV numerics carry full double precision
CSV_FLOAT_FORMAT = "%.17g"

# Engine / oracle defaults
DEFAULT_SIGMA_CAP = 10**6
DEFAULT_BVP_TOL = 1e-10
DEFAULT_BVP_MAX_ITERS = 100
DEFAULT_MAX_HALVINGS = 30
# largest nodal change of one Newton step
DEFAULT_BVP_MAX_STEP = 1.0
GAUSS_HERMITE_NODES = 64

# Sweeps
DEFAULT_SWEEP_WORKERS = max(1, min(8, os.cpu_count() or 1))

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(verbosity: int = 0) -> None:
    """Configure the root logger once; -v gives INFO, -vv gives DEBUG."""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)


def validate_output_dir(path: str | None = None) -> bool:
    """Warn about an output directory that exists but cannot be written."""
    target = path or OUTPUT_DIR
    warnings = []

    if os.path.exists(target) and not os.path.isdir(target):
        warnings.append(f"output path {target!r} exists and is not a directory")
    elif os.path.isdir(target) and not os.access(target, os.W_OK):
        warnings.append(f"output directory {target!r} is not writable")

    for warning in warnings:
        logger.warning(warning)

    return len(warnings) == 0
