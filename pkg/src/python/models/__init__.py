"""Return-map model, geometry, horseshoes and the ODE backend"""

from .local_maps import pi0, pi1, pi2, pi_inverse
from .global_maps import TransverseUnfolding, RectangularShiftUnfolding, psi21
from .return_map import g_closed, return_map
from .horseshoe import verify_conley_moser, realize_word, lambda_cover
from .flow import HHCoefficients, integrate, poincare_cross
