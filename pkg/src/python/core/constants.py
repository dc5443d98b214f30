"""Numerical defaults used across heteronet"""

import numpy as np

# Mathematical constants
PI = np.pi
TWO_PI = 2.0 * np.pi

# Model defaults
DEFAULT_EPS = 1.0             # section radius
DEFAULT_EPS_IN = 0.1          # half-width of the in-windows C_i^in
DEFAULT_EPS_OUT = 0.1         # half-width of the out-windows C_i^out
DEFAULT_THETA1 = 0.0
DEFAULT_THETA2 = np.pi

# Diophantine scan
DEFAULT_DIOPHANTINE_D1 = 0.01
DEFAULT_DIOPHANTINE_D2 = 2.0
DEFAULT_DIOPHANTINE_BOUND = 200

# Tolerances
XI_DELTA_IDENTITY_RTOL = 1e-12
ROUND_TRIP_TOL = 1e-10
BOUNDARY_TOL = 1e-9
EPS_MACHINE = float(np.finfo(float).eps)
ROUNDING_FLOOR_ULPS = 2.0     # ulps of the lifted angles allowed through a boundary round trip
BISECTION_XTOL = 1e-12
BOX_DIAMETER_TOL = 1e-9
SHOOTING_SWEEP_TOL = 1e-12
FD_RELATIVE_STEP = 1e-7
FD_RTOL = 1e-5

# Spiral classification
SPIRAL_MIN_SAMPLES = 100
SPIRAL_MIN_SPAN = 6.0 * np.pi
SPIRAL_ENVELOPE_TOL = 1e-6

# Horseshoe
DEFAULT_GRID = 16
DEFAULT_N_RANGE = (10, 15)
MAX_SHOOTING_SWEEPS = 200
SHOOTING_SEEDS = 24
SHELL_EDGE_MARGIN = 0.03      # fraction of the shell width kept clear of its edges
WORD_PADDING = 6              # periodic past/future symbols around a realized word
PERIODIC_HEAD_STEPS = 64      # transient steps discarded before a periodic block
PERIODIC_TAIL_STEPS = 16
COVER_MARGIN = 0.25           # relative growth of each cylinder hull
NU_SLOPE_RTOL = 0.15

# Flow
MIN_INTEGRATION_TOL = 1e-13
MAX_INTEGRATION_TOL = 1e-3
DEFAULT_INTEGRATION_TOL = 1e-10
DEFAULT_METHOD = "DOP853"
BLOWUP_BOUND = 1e6
RECTANGULAR_SWITCH_RADIUS = 1e-6
EVENT_TOL = 1e-12
HET_BRACKET_FRACTION = 0.1
HET_START_OFFSET = 1e-6       # relative offset from a saddle along its eigendirection
EQUILIBRIUM_RESIDUAL = 1e-12
EQUILIBRIUM_SEEDS = 8         # interior Newton seeds per axis
EQUIVARIANCE_SAMPLES = 8
LOCAL_SAMPLE_GAP_MIN = 1e-8
DEFAULT_LOCAL_SAMPLES = 1000
LOCAL_DEVIATION_TOL = 1e-8
HET_DEFECT_TOL = 1e-6
HET_FIRST_ORDER_TOL = 1e-4     # |mu2 - first-order mu2| allowed after shooting
