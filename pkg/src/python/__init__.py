"""
heteronet
=========

A numerical laboratory for a heteroclinic network in R^4 joining a bifocus
and two periodic orbits.

This package provides modules for:
- Closed-form local and global transition maps and the return map
- Spiralling sheets, scrolls and subsidiary heteroclinic connections
- Conley-Moser horseshoes and switching along prescribed itineraries
- An ODE backend for the truncated Hopf-Hopf system and its unfoldings
"""

__version__ = '1.0.0'
__author__ = 'heteronet developers'

from . import core
from . import file_io
from . import models
from . import utils
