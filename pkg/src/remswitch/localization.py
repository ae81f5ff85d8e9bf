"""Gaussian position-reporting error for RTK- and GPS-grade receivers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import PositionSet

RTK_SIGMA = 0.01
GPS_SIGMA = 6.0


@dataclass(frozen=True)
class LocalizationModel:
    """``sigma`` is the total 2-D RMS error unless ``per_axis`` is set."""

    sigma: float
    per_axis: bool = False

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")

    @property
    def axis_sigma(self) -> float:
        return self.sigma if self.per_axis else self.sigma / math.sqrt(2.0)


PRESETS = {
    "rtk": LocalizationModel(RTK_SIGMA),
    "gps": LocalizationModel(GPS_SIGMA),
}


def preset(name: str) -> LocalizationModel:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown localization preset {name!r}") from None


def report_positions(truth, model: LocalizationModel, rng: np.random.Generator) -> PositionSet:
    truth = PositionSet(truth)
    if model.sigma == 0:
        return truth
    noise = rng.normal(0.0, model.axis_sigma, size=truth.xy.shape)
    return PositionSet(truth.xy + noise)
