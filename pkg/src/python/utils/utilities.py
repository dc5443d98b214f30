"""Utility functions for angle arithmetic, grids and digests"""

import hashlib
from pathlib import Path
from typing import Union

import numpy as np

from ..core.constants import PI, TWO_PI


def angle_offset(phi: Union[float, np.ndarray], theta: float) -> Union[float, np.ndarray]:
    """
    Signed offset of phi from theta, reduced to [-pi, pi).

    Args:
        phi: Lifted angle(s)
        theta: Reference angle

    Returns:
        phi - theta - 2*pi*k for the integer k putting the result in [-pi, pi)
    """
    d = np.asarray(phi, dtype=float) - theta
    d = d - TWO_PI * np.floor((d + PI) / TWO_PI)
    if np.ndim(d) == 0:
        return float(d)
    return d


def log_grid(lo: float, hi: float, num: int) -> np.ndarray:
    """Logarithmically spaced points between two positive bounds"""
    if lo <= 0 or hi <= 0:
        raise ValueError("log_grid bounds must be positive")
    return np.exp(np.linspace(np.log(lo), np.log(hi), num))


def file_digest(path: Union[str, Path]) -> str:
    """SHA-256 hex digest of a file's bytes"""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def make_rng(seed: int) -> np.random.Generator:
    """Seeded random generator used by every sampling routine"""
    return np.random.default_rng(seed)
