"""Planar point geometry and point-set distances used for REM entry matching.

All four set distances work on sets of different cardinality. They are
computed from a dense pairwise distance matrix; at the scale of a cell
(tens of UEs) that is cheaper than any spatial index.
"""

from __future__ import annotations

import enum
import math
from typing import Iterable, NamedTuple, Union

import numpy as np


class Position(NamedTuple):
    x: float
    y: float


class PositionSet:
    """Immutable, non-empty collection of 2-D positions in meters.

    Order of the points carries no meaning, but is preserved so that the
    same UE keeps the same row across copies.
    """

    __slots__ = ("_xy",)

    def __init__(self, points: Union["PositionSet", np.ndarray, Iterable]):
        if isinstance(points, PositionSet):
            xy = points._xy
        else:
            xy = np.array(points, dtype=float)
            if xy.ndim == 1 and xy.size == 0:
                xy = xy.reshape(0, 2)
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise ValueError(f"positions must have shape (n, 2), got {xy.shape}")
        if xy.shape[0] == 0:
            raise ValueError("position set must not be empty")
        if not np.all(np.isfinite(xy)):
            raise ValueError("positions must be finite")
        xy = np.array(xy, dtype=float)
        xy.setflags(write=False)
        self._xy = xy

    @property
    def xy(self) -> np.ndarray:
        return self._xy

    def __len__(self) -> int:
        return self._xy.shape[0]

    def __iter__(self):
        for x, y in self._xy:
            yield Position(float(x), float(y))

    def __getitem__(self, i: int) -> Position:
        x, y = self._xy[i]
        return Position(float(x), float(y))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PositionSet):
            return NotImplemented
        return self._xy.shape == other._xy.shape and bool(np.array_equal(self._xy, other._xy))

    def __hash__(self) -> int:
        return hash(self._xy.tobytes())

    def __repr__(self) -> str:
        return f"PositionSet(n={len(self)})"

    def translated(self, dx: float, dy: float) -> "PositionSet":
        return PositionSet(self._xy + np.array([dx, dy]))

    def centroid(self) -> Position:
        cx, cy = self._xy.mean(axis=0)
        return Position(float(cx), float(cy))

    def tolist(self) -> list[list[float]]:
        return self._xy.tolist()


class MetricKind(str, enum.Enum):
    HAUSDORFF = "hausdorff"
    MEAN = "mean"
    AVERAGE = "average"
    SUM_OF_MINIMUMS = "som"

    @classmethod
    def parse(cls, name: Union[str, "MetricKind"]) -> "MetricKind":
        if isinstance(name, MetricKind):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {
            "hausdorff": cls.HAUSDORFF,
            "hd": cls.HAUSDORFF,
            "mean": cls.MEAN,
            "average": cls.AVERAGE,
            "avg": cls.AVERAGE,
            "som": cls.SUM_OF_MINIMUMS,
            "sum_of_minimums": cls.SUM_OF_MINIMUMS,
            "sumofminimums": cls.SUM_OF_MINIMUMS,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown metric kind {name!r}") from None


PointsLike = Union[PositionSet, np.ndarray, Iterable]


def _as_set(points: PointsLike) -> PositionSet:
    return points if isinstance(points, PositionSet) else PositionSet(points)


def euclidean(a, b) -> float:
    """Distance in meters between two points given as (x, y) pairs."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


def pairwise_distances(a: PointsLike, b: PointsLike) -> np.ndarray:
    """Matrix D with D[i, j] = distance from a[i] to b[j]."""
    pa, pb = _as_set(a).xy, _as_set(b).xy
    dx = pa[:, 0, None] - pb[None, :, 0]
    dy = pa[:, 1, None] - pb[None, :, 1]
    return np.sqrt(dx * dx + dy * dy)


def directed_hausdorff(a: PointsLike, b: PointsLike) -> float:
    """Largest distance from a point of `a` to its nearest point of `b`."""
    return float(pairwise_distances(a, b).min(axis=1).max())


def hausdorff(a: PointsLike, b: PointsLike) -> float:
    d = pairwise_distances(a, b)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def mean_distance(a: PointsLike, b: PointsLike) -> float:
    """Distance between the centroids of the two sets."""
    return euclidean(_as_set(a).centroid(), _as_set(b).centroid())


def average_distance(a: PointsLike, b: PointsLike) -> float:
    """Mean over all |a|*|b| point pairs. Not zero for a set against itself."""
    return float(pairwise_distances(a, b).mean())


def sum_of_minimums(a: PointsLike, b: PointsLike) -> float:
    """Half the sum of the mean nearest-neighbour distance in each direction."""
    d = pairwise_distances(a, b)
    return float(0.5 * (d.min(axis=1).mean() + d.min(axis=0).mean()))


_DISPATCH = {
    MetricKind.HAUSDORFF: hausdorff,
    MetricKind.MEAN: mean_distance,
    MetricKind.AVERAGE: average_distance,
    MetricKind.SUM_OF_MINIMUMS: sum_of_minimums,
}


def set_distance(kind: Union[MetricKind, str], a: PointsLike, b: PointsLike) -> float:
    return _DISPATCH[MetricKind.parse(kind)](a, b)
