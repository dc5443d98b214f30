"""Utility functions for heteronet"""

from .box import Box, grow
from .utilities import angle_offset, log_grid, file_digest, make_rng
