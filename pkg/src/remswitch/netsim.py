"""Desk-scale downlink simulator for a macro + pico HetNet.

The radio channel is log-distance path loss plus a frozen, spatially
correlated shadowing field and an antenna-count beamforming gain. Every UE
attaches to the active BS with the strongest RSS above the coverage
threshold, each BS splits its band equally among its UEs, and residual
inter-cell interference is attenuated by a fixed suppression factor that
stands in for multi-antenna precoding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .actions import as_mask, all_on
from .geometry import Position, PositionSet
from .power import BsPowerProfile, PowerParams, energy_efficiency, network_power

UNSERVED = -1


class BsKind(str, enum.Enum):
    MACRO = "macro"
    PICO = "pico"


@dataclass(frozen=True)
class BsConfig:
    position: Position
    kind: BsKind
    antenna_count: int
    tx_power_dbm: float
    carrier_hz: float = 3.55e9
    bandwidth_hz: float = 300e6

    def __post_init__(self):
        object.__setattr__(self, "position", Position(*map(float, self.position)))
        object.__setattr__(self, "kind", BsKind(self.kind))
        if self.antenna_count < 1:
            raise ValueError("antenna_count must be >= 1")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")

    def power_profile(self) -> BsPowerProfile:
        return BsPowerProfile.from_dbm(self.antenna_count, self.tx_power_dbm)


@dataclass(frozen=True)
class Area:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("area must have positive width and height")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class NetworkLayout:
    """Index 0 is the macro BS; the rest are picos, in action-bit order."""

    bss: tuple[BsConfig, ...]
    area: Area

    def __post_init__(self):
        object.__setattr__(self, "bss", tuple(self.bss))
        kinds = [bs.kind for bs in self.bss]
        if not kinds or kinds[0] is not BsKind.MACRO or kinds.count(BsKind.MACRO) != 1:
            raise ValueError("layout needs exactly one macro BS, at index 0")
        for i, bs in enumerate(self.bss):
            if not self.area.contains(*bs.position):
                raise ValueError(f"BS {i} at {tuple(bs.position)} lies outside the area")

    @property
    def pbs_count(self) -> int:
        return len(self.bss) - 1

    def power_profiles(self) -> list[BsPowerProfile]:
        return [bs.power_profile() for bs in self.bss]

    def positions(self) -> np.ndarray:
        return np.array([bs.position for bs in self.bss], dtype=float)

    def active_flags(self, action) -> np.ndarray:
        mask = as_mask(action, self.pbs_count)
        return np.array([True] + [bool(mask >> b & 1) for b in range(self.pbs_count)])


def default_layout(side: float = 500.0, pico_ring: float = 170.0) -> NetworkLayout:
    """Macro in the centre of a square, five picos evenly spaced on a ring."""
    c = side / 2
    bss = [BsConfig(Position(c, c), BsKind.MACRO, 128, 46.0)]
    for k in range(5):
        ang = math.pi / 2 + 2 * math.pi * k / 5
        bss.append(BsConfig(Position(c + pico_ring * math.cos(ang), c + pico_ring * math.sin(ang)),
                            BsKind.PICO, 32, 30.0))
    return NetworkLayout(tuple(bss), Area(0.0, 0.0, side, side))


def _gain_log10(m: int) -> float:
    return 10.0 * math.log10(m)


def _gain_none(m: int) -> float:
    return 0.0


GAIN_RULES = {"log10": _gain_log10, "none": _gain_none}


@dataclass(frozen=True)
class ChannelParams:
    pathloss_exponent_macro: float = 3.5
    pathloss_exponent_pico: float = 3.5
    reference_loss_db: float = 43.4  # free space at 1 m, 3.55 GHz
    shadowing_sigma_db: float = 8.0
    shadowing_decorrelation_m: float = 3.0
    beamforming_gain_rule: str = "log10"
    noise_figure_db: float = 7.0
    thermal_noise_dbm_per_hz: float = -174.0
    rss_threshold_dbm: float = -120.0
    interference_suppression_db: float = 0.0  # no inter-cell nulling
    max_spectral_efficiency: float = 7.4  # bit/s/Hz

    def __post_init__(self):
        if self.pathloss_exponent_macro < 2 or self.pathloss_exponent_pico < 2:
            raise ValueError("path-loss exponents must be >= 2")
        if not math.isfinite(self.rss_threshold_dbm):
            raise ValueError("rss_threshold_dbm must be finite")
        if self.shadowing_sigma_db < 0 or self.shadowing_decorrelation_m <= 0:
            raise ValueError("invalid shadowing parameters")
        if self.beamforming_gain_rule not in GAIN_RULES:
            raise ValueError(f"unknown beamforming gain rule {self.beamforming_gain_rule!r}")

    def beamforming_gain_db(self, antenna_count: int) -> float:
        return GAIN_RULES[self.beamforming_gain_rule](antenna_count)

    def exponent(self, kind: BsKind) -> float:
        return self.pathloss_exponent_macro if kind is BsKind.MACRO else self.pathloss_exponent_pico

    def noise_dbm(self, bandwidth_hz: float) -> float:
        return self.thermal_noise_dbm_per_hz + 10 * math.log10(bandwidth_hz) + self.noise_figure_db


# -- shadowing ----------------------------------------------------------------

_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & _M64
    x = ((x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _M64
    x = ((x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _M64
    return x ^ (x >> np.uint64(31))


def _hash_uniform(key: int, ix: np.ndarray, iy: np.ndarray, bs: np.ndarray, salt: int) -> np.ndarray:
    ix, iy, bs = np.broadcast_arrays(ix, iy, bs)
    with np.errstate(over="ignore"):
        h = np.full(ix.shape, np.uint64(key & 0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
        for part in (ix.astype(np.int64), iy.astype(np.int64), bs.astype(np.int64), salt):
            h = _splitmix64(h ^ np.asarray(part).astype(np.uint64))
    # 53 high bits -> (0, 1)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) / float(1 << 53)


@dataclass(frozen=True)
class ShadowingField:
    """Frozen lognormal shadowing, a deterministic function of (position, BS).

    Standard-normal values are hashed onto a square lattice with the given
    spacing and bilinearly interpolated, renormalised so the marginal
    standard deviation is ``sigma_db`` everywhere. Revisiting a location
    therefore reproduces its shadowing exactly.
    """

    key: int
    sigma_db: float
    spacing_m: float = 3.0

    @classmethod
    def from_channel(cls, key: int, channel: ChannelParams) -> "ShadowingField":
        return cls(key, channel.shadowing_sigma_db, channel.shadowing_decorrelation_m)

    def _node(self, ix: np.ndarray, iy: np.ndarray, bs: np.ndarray) -> np.ndarray:
        u1 = _hash_uniform(self.key, ix, iy, bs, 1)
        u2 = _hash_uniform(self.key, ix, iy, bs, 2)
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def matrix(self, xy, n_bs: int) -> np.ndarray:
        """(n_points, n_bs) shadowing in dB."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        if self.sigma_db == 0:
            return np.zeros((xy.shape[0], n_bs))
        g = xy / self.spacing_m
        i0 = np.floor(g)
        f = g - i0
        # corners stacked on axis 0: (4, n, 1) against bs (1, 1, n_bs)
        dx = np.array([0, 1, 0, 1])[:, None, None]
        dy = np.array([0, 0, 1, 1])[:, None, None]
        fx, fy = f[None, :, 0, None], f[None, :, 1, None]
        w = np.where(dx == 1, fx, 1 - fx) * np.where(dy == 1, fy, 1 - fy)
        nodes = self._node(i0[None, :, 0, None] + dx, i0[None, :, 1, None] + dy,
                           np.arange(n_bs)[None, None, :])
        acc = (w * nodes).sum(axis=0)
        norm = np.sqrt((w * w).sum(axis=0))
        return self.sigma_db * acc / norm

    def draw(self, xy, bs: int) -> np.ndarray:
        """Shadowing in dB toward BS ``bs`` for each row of ``xy``."""
        return self.matrix(xy, bs + 1)[:, bs]


# -- UEs ------------------------------------------------------------------------


@dataclass(frozen=True)
class UeState:
    x: float
    y: float
    heading: float
    speed: float = 1.5

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("speed must be non-negative")

    @property
    def position(self) -> Position:
        return Position(self.x, self.y)


UesLike = Union[Sequence[UeState], PositionSet, np.ndarray]


def positions_of(ues: UesLike) -> np.ndarray:
    if isinstance(ues, PositionSet):
        return ues.xy
    if isinstance(ues, np.ndarray):
        return np.atleast_2d(ues.astype(float))
    ues = list(ues)
    if ues and isinstance(ues[0], UeState):
        return np.array([[u.x, u.y] for u in ues], dtype=float).reshape(-1, 2)
    return np.array(ues, dtype=float).reshape(-1, 2)


def generate_scenario(seed: int, n_ues: int, layout: NetworkLayout, area: Optional[Area] = None,
                      speed: float = 1.5) -> list[UeState]:
    """Uniformly placed UEs with uniform headings; identical for equal seeds."""
    if n_ues < 1:
        raise ValueError("n_ues must be >= 1")
    area = area or layout.area
    rng = np.random.default_rng(seed)
    xs = rng.uniform(area.x_min, area.x_max, n_ues)
    ys = rng.uniform(area.y_min, area.y_max, n_ues)
    hs = rng.uniform(0.0, 2 * math.pi, n_ues)
    return [UeState(float(x), float(y), float(h), speed) for x, y, h in zip(xs, ys, hs)]


def _reflect(pos: float, lo: float, hi: float) -> tuple[float, bool]:
    flipped = False
    while pos < lo or pos > hi:
        pos = 2 * lo - pos if pos < lo else 2 * hi - pos
        flipped = not flipped
    return pos, flipped


def step_mobility(ues: Sequence[UeState], dt: float, area: Area, rng: np.random.Generator,
                  mean_heading_hold: float = 10.0) -> list[UeState]:
    """Advance every UE by ``speed * dt`` along its heading.

    Heading changes arrive as a Poisson process with mean spacing
    ``mean_heading_hold`` seconds; a new heading is uniform. Walls reflect.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    p_turn = 1.0 - math.exp(-dt / mean_heading_hold) if mean_heading_hold > 0 else 1.0
    turns = rng.random(len(ues)) < p_turn
    new_headings = rng.uniform(0.0, 2 * math.pi, len(ues))
    out = []
    for ue, turn, h_new in zip(ues, turns, new_headings):
        x = ue.x + ue.speed * dt * math.cos(ue.heading)
        y = ue.y + ue.speed * dt * math.sin(ue.heading)
        x, fx = _reflect(x, area.x_min, area.x_max)
        y, fy = _reflect(y, area.y_min, area.y_max)
        heading = ue.heading
        if fx:
            heading = math.pi - heading
        if fy:
            heading = -heading
        if turn:
            heading = float(h_new)
        out.append(UeState(x, y, heading % (2 * math.pi), ue.speed))
    return out


def trajectory(ues: Sequence[UeState], n_snapshots: int, dt: float, area: Area,
               rng: np.random.Generator, mean_heading_hold: float = 10.0) -> list[list[UeState]]:
    """States at ``n_snapshots`` instants spaced ``dt`` apart, starting with ``ues``."""
    snaps = [list(ues)]
    for _ in range(n_snapshots - 1):
        snaps.append(step_mobility(snaps[-1], dt, area, rng, mean_heading_hold))
    return snaps


# -- link level ---------------------------------------------------------------


def rss(ue, bs: BsConfig, channel: ChannelParams, shadowing_draw: float = 0.0) -> float:
    """Received power in dBm at ``ue`` from ``bs``; distance clamped to 1 m."""
    d = max(math.hypot(ue[0] - bs.position.x, ue[1] - bs.position.y), 1.0)
    loss = channel.reference_loss_db + 10 * channel.exponent(bs.kind) * math.log10(d)
    return bs.tx_power_dbm + channel.beamforming_gain_db(bs.antenna_count) - loss - shadowing_draw


def rss_matrix(ues: UesLike, layout: NetworkLayout, channel: ChannelParams,
               shadowing: Optional[ShadowingField] = None) -> np.ndarray:
    """(n_ue, n_bs) RSS in dBm, vectorised form of :func:`rss`."""
    xy = positions_of(ues)
    bs_xy = layout.positions()
    d = np.hypot(xy[:, None, 0] - bs_xy[None, :, 0], xy[:, None, 1] - bs_xy[None, :, 1])
    d = np.maximum(d, 1.0)
    expo = np.array([channel.exponent(bs.kind) for bs in layout.bss])
    eirp = np.array([bs.tx_power_dbm + channel.beamforming_gain_db(bs.antenna_count) for bs in layout.bss])
    out = eirp[None, :] - channel.reference_loss_db - 10 * expo[None, :] * np.log10(d)
    if shadowing is not None:
        out = out - shadowing.matrix(xy, len(layout.bss))
    return out


def _associate_rss(rss_dbm: np.ndarray, active: np.ndarray, threshold: float) -> np.ndarray:
    masked = np.where(active[None, :], rss_dbm, -np.inf)
    best = np.argmax(masked, axis=1)
    best_rss = masked[np.arange(len(best)), best]
    return np.where(best_rss >= threshold, best, UNSERVED)


def associate(ues: UesLike, layout: NetworkLayout, action, channel: ChannelParams,
              shadowing: Optional[ShadowingField] = None) -> np.ndarray:
    """Serving BS index per UE (``UNSERVED`` = -1 when every RSS is below threshold)."""
    active = layout.active_flags(action)
    return _associate_rss(rss_matrix(ues, layout, channel, shadowing), active, channel.rss_threshold_dbm)


def _throughput_rss(assignment: np.ndarray, rss_dbm: np.ndarray, layout: NetworkLayout,
                    active: np.ndarray, channel: ChannelParams) -> np.ndarray:
    n_ue, n_bs = rss_dbm.shape
    rates = np.zeros(n_ue)
    served = assignment != UNSERVED
    if not served.any():
        return rates
    rx_w = 10.0 ** (rss_dbm / 10.0)  # mW
    rx_w = np.where(active[None, :], rx_w, 0.0)
    supp = 10.0 ** (channel.interference_suppression_db / 10.0)
    loads = np.bincount(assignment[served], minlength=n_bs)
    idx = np.flatnonzero(served)
    srv = assignment[idx]
    signal = rx_w[idx, srv]
    interference = (rx_w[idx].sum(axis=1) - signal) * supp
    bw_bs = np.array([bs.bandwidth_hz for bs in layout.bss])
    noise_bs = 10.0 ** (np.array([channel.noise_dbm(b) for b in bw_bs]) / 10.0)
    bw, noise = bw_bs[srv], noise_bs[srv]
    se = np.minimum(np.log2(1.0 + signal / (noise + interference)), channel.max_spectral_efficiency)
    rates[idx] = bw / loads[srv] * se
    return rates


def throughput(assignment, ues: UesLike, layout: NetworkLayout, action, channel: ChannelParams,
               shadowing: Optional[ShadowingField] = None) -> np.ndarray:
    """Per-UE downlink bit/s under equal bandwidth sharing at each BS."""
    active = layout.active_flags(action)
    return _throughput_rss(np.asarray(assignment), rss_matrix(ues, layout, channel, shadowing),
                           layout, active, channel)


@dataclass(frozen=True)
class EvalOutcome:
    median_bitrate: float
    avg_power: float
    ee: float
    served_ues: int
    per_ue_bitrates: tuple[float, ...] = field(repr=False)


def _score(mean_rates: np.ndarray, served: np.ndarray, layout: NetworkLayout, action: int,
           power_params: PowerParams) -> EvalOutcome:
    c50 = float(np.median(mean_rates))
    p_avg = network_power(layout.power_profiles(), power_params, action)
    return EvalOutcome(c50, p_avg, energy_efficiency(c50, p_avg), int(served.sum()),
                       tuple(float(v) for v in mean_rates))


def evaluate_configuration(ues: UesLike, layout: NetworkLayout, action, channel: ChannelParams,
                           power_params: PowerParams, rng: Optional[np.random.Generator] = None, *,
                           shadowing: Optional[ShadowingField] = None, steps: int = 1,
                           dt: float = 1.0, mean_heading_hold: float = 10.0) -> EvalOutcome:
    """Hold ``action`` for ``steps`` snapshots and score it.

    UEs move ``dt`` seconds between snapshots (needs ``rng`` and UeState
    input when ``steps > 1``); association is redone at each snapshot. A UE
    counts as served only if it was served at every snapshot.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    mask = as_mask(action, layout.pbs_count)
    active = layout.active_flags(mask)
    snaps: list = [ues]
    if steps > 1:
        if rng is None:
            raise ValueError("rng is required to move UEs between snapshots")
        snaps = trajectory(list(ues), steps, dt, layout.area, rng, mean_heading_hold)
    rate_sum = None
    served_all = None
    for snap in snaps:
        r = rss_matrix(snap, layout, channel, shadowing)
        assignment = _associate_rss(r, active, channel.rss_threshold_dbm)
        rates = _throughput_rss(assignment, r, layout, active, channel)
        rate_sum = rates if rate_sum is None else rate_sum + rates
        ok = assignment != UNSERVED
        served_all = ok if served_all is None else served_all & ok
    return _score(rate_sum / len(snaps), served_all, layout, mask, power_params)


def evaluate_all_actions(ues: UesLike, layout: NetworkLayout, channel: ChannelParams,
                         power_params: PowerParams, shadowing: Optional[ShadowingField] = None
                         ) -> list[EvalOutcome]:
    """Single-snapshot outcome for every action, indexed by mask.

    Same result as calling :func:`evaluate_configuration` per action, with
    the RSS matrix computed once.
    """
    r = rss_matrix(ues, layout, channel, shadowing)
    out = []
    for a in range(all_on(layout.pbs_count) + 1):
        active = layout.active_flags(a)
        assignment = _associate_rss(r, active, channel.rss_threshold_dbm)
        rates = _throughput_rss(assignment, r, layout, active, channel)
        out.append(_score(rates, assignment != UNSERVED, layout, a, power_params))
    return out


def oracle_action(outcomes: Sequence[EvalOutcome]) -> int:
    """Best-EE action among those serving as many UEs as all-on."""
    full = outcomes[-1].served_ues
    feasible = [a for a, o in enumerate(outcomes) if o.served_ues == full]
    return max(feasible, key=lambda a: (outcomes[a].ee, -bin(a).count("1"), -a))


def scenario_document(snapshots: Sequence[Sequence[UeState]], dt: float) -> dict:
    return {
        "dt": dt,
        "snapshots": [[[u.x, u.y, u.heading, u.speed] for u in snap] for snap in snapshots],
    }
