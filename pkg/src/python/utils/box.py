"""Axis-aligned boxes for covers of invariant sets"""

from typing import Sequence, Union

import numpy as np


class Box:
    """
    Closed axis-aligned box.

    lower, upper : corner coordinates, one entry per dimension
    """

    def __init__(self, lower: Sequence[float], upper: Sequence[float]):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if self.lower.shape != self.upper.shape:
            raise ValueError("lower and upper must have the same dimension")

    @classmethod
    def hull(cls, points: np.ndarray) -> "Box":
        """Smallest box containing every row of points"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(points.min(axis=0), points.max(axis=0))

    @property
    def ndim(self) -> int:
        return self.lower.size

    def __mul__(self, box2: "Box") -> "Box":
        """
        return the box resulting from the intersection
        of box2 with self. No intersection returns None
        """
        inter = Box(np.maximum(self.lower, box2.lower), np.minimum(self.upper, box2.upper))
        if np.any(inter.upper < inter.lower):
            return None
        return inter

    def extent(self) -> np.ndarray:
        """Edge length in each direction"""
        return self.upper - self.lower

    def content(self) -> float:
        """Lebesgue measure of the box"""
        return float(np.prod(self.extent()))

    def diameter(self) -> float:
        return float(np.linalg.norm(self.extent()))

    def __str__(self):
        return "[ {lower},{upper} ]".format(lower=self.lower.tolist(), upper=self.upper.tolist())

    def __repr__(self):
        return self.__str__()

    def __contains__(self, elt: Union["Box", Sequence[float]]) -> bool:
        if isinstance(elt, Box):
            return bool(np.all(elt.lower >= self.lower) and np.all(elt.upper <= self.upper))
        point = np.asarray(elt, dtype=float)
        return bool(np.all(point >= self.lower) and np.all(point <= self.upper))

    def __eq__(self, other):
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)


def grow(box: Box, size: Union[float, Sequence[float]]) -> Box:
    # size may be a scalar or one margin per direction
    size = np.asarray(size, dtype=float)
    if np.any(size < 0):
        raise ValueError("size must be >0")
    return Box(box.lower - size, box.upper + size)

