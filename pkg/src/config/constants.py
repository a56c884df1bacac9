"""
Centralized constants for the testimation toolkit.
"""

import math

# --- Noise estimation ---
MAD_NORMAL_SCALE = 0.6745          # median |Z| for standard normal Z

# --- Wavelet transform ---
DEFAULT_FILTER = "coif3"
DEFAULT_J0 = 4                     # primary resolution level
SUPPORTED_FILTERS = (
    ["haar"]
    + [f"db{k}" for k in range(2, 11)]
    + [f"coif{k}" for k in range(1, 6)]
)
FILTER_TOLERANCE = 1e-10

# --- Empirical Bayes fitting ---
GAMMA_HAT_MIN = 1e-3
GAMMA_HAT_MAX = 1e3
Q_HAT_FLOOR = 1e-6                 # q̂(0) = 0 is not a valid geometric parameter
SIGMA_ZERO_RTOL = 1e-12            # sigma_hat below this fraction of the signal RMS counts as zero

# --- Prior / risk zones ---
ALPHA_DEFAULT = math.exp(-4.5)
PRIOR_SUM_TOLERANCE = 1e-10

# --- Simulation protocol ---
DEFAULT_REPLICATIONS = 100
DEFAULT_RSNR_LEVELS = [3.0, 5.0, 7.0]
DEFAULT_ESTIMATORS = ["map-levelwise", "map-global", "universal-hard"]
DEFAULT_SEED = 0
RATE_MIN_GRID = 3

# --- Reports ---
REPORT_SCHEMA_VERSION = 1
CSV_FLOAT_FORMAT = "%.10g"

# --- Runtime ---
THREADS_ENV_VAR = "TESTIMATION_THREADS"
DB_PATH_ENV_VAR = "TESTIMATION_DB_PATH"
