import os

from dotenv import load_dotenv

load_dotenv()

# Runtime
THREADS = int(os.getenv("QUADSCREEN_THREADS", "1"))
LOG_LEVEL = os.getenv("QUADSCREEN_LOG_LEVEL", "INFO")
COLUMN_BLOCK = int(os.getenv("QUADSCREEN_COLUMN_BLOCK", "4096"))

# Nonlinear correlation test
HASH_COUNT = int(os.getenv("QUADSCREEN_HASH_COUNT", "10"))
HASH_RANGE = int(os.getenv("QUADSCREEN_HASH_RANGE", "1000"))
HASH_REDRAWS = int(os.getenv("QUADSCREEN_HASH_REDRAWS", "8"))

# Logistic solver
SOLVER_TOL = float(os.getenv("QUADSCREEN_SOLVER_TOL", "1e-8"))
SOLVER_MAX_ITER = int(os.getenv("QUADSCREEN_SOLVER_MAX_ITER", "10000"))
CV_FOLDS = 4
CV_LAMBDAS = tuple(10.0 ** (-4 + 8 * k / 14) for k in range(15))

# Oracle
ENUMERATION_MAX_VARS = int(os.getenv("QUADSCREEN_ENUMERATION_MAX_VARS", "24"))
ENUMERATION_MAX_ASSIGNMENTS = 2 ** ENUMERATION_MAX_VARS
ENUMERATION_BLOCK = 1 << 16
GAMMA_GRID = int(os.getenv("QUADSCREEN_GAMMA_GRID", "100000"))
VALUE_TOL = 1e-9
PMF_TOL = 1e-12

# Benchmarks
SCALING_BAND = (1.4, 2.6)
