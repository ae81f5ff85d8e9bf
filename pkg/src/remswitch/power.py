"""Base-station power consumption and the energy-efficiency objective."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .actions import as_mask


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * np.log10(watts) + 30.0


@dataclass(frozen=True)
class PowerParams:
    amplifier_efficiency: float = 0.5
    per_antenna_power: float = 0.4  # W, per transceiver chain
    oscillator_power: float = 0.2  # W
    fix_power: float = 10.0  # W
    standby_power: float = 10.0  # W

    def __post_init__(self):
        if not 0.0 < self.amplifier_efficiency <= 1.0:
            raise ValueError("amplifier_efficiency must lie in (0, 1]")
        for name in ("per_antenna_power", "oscillator_power", "fix_power", "standby_power"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class BsPowerProfile:
    antenna_count: int
    transmit_power: float  # W

    def __post_init__(self):
        if self.antenna_count < 1:
            raise ValueError("antenna_count must be >= 1")
        if self.transmit_power < 0:
            raise ValueError("transmit_power must be non-negative")

    @classmethod
    def from_dbm(cls, antenna_count: int, tx_power_dbm: float) -> "BsPowerProfile":
        return cls(antenna_count, dbm_to_watts(tx_power_dbm))


def effective_transmitted_power(profile: BsPowerProfile, params: PowerParams) -> float:
    return profile.transmit_power / params.amplifier_efficiency


def transceiver_chain_power(profile: BsPowerProfile, params: PowerParams) -> float:
    return profile.antenna_count * params.per_antenna_power + params.oscillator_power


def bs_total_power(profile: BsPowerProfile, params: PowerParams, active: bool) -> float:
    if not active:
        return params.standby_power
    return (
        effective_transmitted_power(profile, params)
        + transceiver_chain_power(profile, params)
        + params.fix_power
    )


def network_power(profiles: Sequence[BsPowerProfile], params: PowerParams, action) -> float:
    """Total network power in watts.

    ``profiles[0]`` is the macro BS and is always counted as active; bit
    ``b`` of ``action`` switches pico BS ``profiles[b + 1]``.
    """
    if len(profiles) < 1:
        raise ValueError("at least the macro BS profile is required")
    mask = as_mask(action, len(profiles) - 1)
    total = bs_total_power(profiles[0], params, True)
    for b, profile in enumerate(profiles[1:]):
        total += bs_total_power(profile, params, bool(mask >> b & 1))
    return total


def energy_efficiency(median_bitrate: float, avg_power: float) -> float:
    """Median UE bitrate per watt of average network power (bit/s/W)."""
    if not avg_power > 0:
        raise ValueError(f"average power must be positive, got {avg_power}")
    if median_bitrate < 0:
        raise ValueError("median bitrate must be non-negative")
    return median_bitrate / avg_power
