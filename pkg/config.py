import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Run settings
LOG_LEVEL = os.getenv("COSSERAT_LOG_LEVEL", "INFO").upper()
OUTPUT_DIR = os.getenv("COSSERAT_OUTPUT_DIR", "cosserat_output")
THREADS = int(os.getenv("COSSERAT_THREADS", "1"))
SEED = int(os.getenv("COSSERAT_SEED", "20240917"))
LEVEL = os.getenv("COSSERAT_LEVEL", "quick")

# Rotation handling
# Frames drifting further than this from orthogonal are re-projected
ORTHO_DRIFT_TOL = float(os.getenv("COSSERAT_ORTHO_DRIFT_TOL", "1e-12"))
# Frames drifting further than this are rejected as corrupted input
ORTHO_REJECT_TOL = float(os.getenv("COSSERAT_ORTHO_REJECT_TOL", "1e-6"))
# Pointwise tolerance for microrotation fields of a configuration
ROTATION_FIELD_TOL = float(os.getenv("COSSERAT_ROTATION_FIELD_TOL", "1e-10"))
# Below this angle the Rodrigues coefficients use their Taylor series
SMALL_ANGLE = float(os.getenv("COSSERAT_SMALL_ANGLE", "1e-6"))
# The logarithm refuses angles closer than this to pi
LOG_BRANCH_MARGIN = float(os.getenv("COSSERAT_LOG_BRANCH_MARGIN", "1e-9"))

# Forms and connections
COFRAME_DET_MIN = float(os.getenv("COSSERAT_COFRAME_DET_MIN", "1e-8"))
SE3_PROJECTION_TOL = float(os.getenv("COSSERAT_SE3_PROJECTION_TOL", "1e-9"))

# Solver settings
CG_MAX_ITER_FACTOR = int(os.getenv("COSSERAT_CG_MAX_ITER_FACTOR", "10"))
CG_RTOL = float(os.getenv("COSSERAT_CG_RTOL", "1e-12"))
SOLVER_RTOL = float(os.getenv("COSSERAT_SOLVER_RTOL", "1e-10"))
DEFAULT_SOLVER_METHOD = os.getenv("COSSERAT_SOLVER_METHOD", "direct")

# Constitutive checks
FD_STEP = float(os.getenv("COSSERAT_FD_STEP", "1e-6"))
CYCLE_STEPS = int(os.getenv("COSSERAT_CYCLE_STEPS", "1000"))

# Verification suite sizes
QUICK_SAMPLES = int(os.getenv("COSSERAT_QUICK_SAMPLES", "1000"))
FULL_SAMPLES = int(os.getenv("COSSERAT_FULL_SAMPLES", "10000"))
QUICK_GRIDS = [int(n) for n in os.getenv("COSSERAT_QUICK_GRIDS", "8,16").split(",")]
FULL_GRIDS = [int(n) for n in os.getenv("COSSERAT_FULL_GRIDS", "8,16,32").split(",")]

# Output formatting
FLOAT_FORMAT = "%.17g"
