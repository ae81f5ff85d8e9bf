"""JSON experiment configuration.

Every key is optional; omitted keys take the library defaults. Errors name
the offending field path, e.g. ``layout.bss[2].antenna_count``.
"""

from __future__ import annotations

import dataclasses
import json
import os
from pathlib import Path
from typing import Any, Union

from . import bandit
from .experiment import ExperimentConfig
from .geometry import MetricKind, Position
from .localization import LocalizationModel, preset
from .netsim import Area, BsConfig, BsKind, ChannelParams, NetworkLayout
from .power import PowerParams


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path or '<root>'}: {message}")


class ConfigReadError(OSError):
    pass


def _join(path: str, key) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else str(key)


def _number(value, path: str, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {type(value).__name__}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(path, "expected an integer")
        return int(value)
    return float(value)


def _object(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected an object, got {type(value).__name__}")
    return value


def _flat_dataclass(cls, data, path: str):
    """Build a dataclass whose fields are numbers, strings or booleans."""
    data = _object(data, path)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        sub = _join(path, key)
        if key not in fields:
            raise ConfigError(sub, "unknown field")
        default = fields[key].default
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError(sub, "expected true or false")
            kwargs[key] = value
        elif isinstance(default, str):
            if not isinstance(value, str):
                raise ConfigError(sub, "expected a string")
            kwargs[key] = value
        else:
            kwargs[key] = _number(value, sub, integer=isinstance(default, int))
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _point(value, path: str) -> Position:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(path, "expected [x, y]")
    return Position(_number(value[0], _join(path, 0)), _number(value[1], _join(path, 1)))


def _layout(data, path: str) -> NetworkLayout:
    data = _object(data, path)
    for key in data:
        if key not in ("area", "bss"):
            raise ConfigError(_join(path, key), "unknown field")
    area_raw = data.get("area", [0.0, 0.0, 500.0, 500.0])
    apath = _join(path, "area")
    if not isinstance(area_raw, list) or len(area_raw) != 4:
        raise ConfigError(apath, "expected [x_min, y_min, x_max, y_max]")
    try:
        area = Area(*(_number(v, _join(apath, i)) for i, v in enumerate(area_raw)))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(apath, str(exc)) from exc
    bpath = _join(path, "bss")
    raw_bss = data.get("bss")
    if not isinstance(raw_bss, list) or not raw_bss:
        raise ConfigError(bpath, "expected a non-empty list of base stations")
    bss = []
    for i, raw in enumerate(raw_bss):
        p = _join(bpath, i)
        raw = dict(_object(raw, p))
        if "position" not in raw:
            raise ConfigError(_join(p, "position"), "missing field")
        pos = _point(raw.pop("position"), _join(p, "position"))
        kind = raw.pop("kind", "pico")
        try:
            kind = BsKind(kind)
        except ValueError:
            raise ConfigError(_join(p, "kind"), "expected 'macro' or 'pico'") from None
        allowed = {"antenna_count": True, "tx_power_dbm": False, "carrier_hz": False, "bandwidth_hz": False}
        kwargs = {}
        for key, value in raw.items():
            if key not in allowed:
                raise ConfigError(_join(p, key), "unknown field")
            kwargs[key] = _number(value, _join(p, key), integer=allowed[key])
        for req in ("antenna_count", "tx_power_dbm"):
            if req not in kwargs:
                raise ConfigError(_join(p, req), "missing field")
        try:
            bss.append(BsConfig(pos, kind, **kwargs))
        except ValueError as exc:
            raise ConfigError(p, str(exc)) from exc
    try:
        return NetworkLayout(tuple(bss), area)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _localization(data, path: str) -> dict[str, LocalizationModel]:
    data = _object(data, path)
    out = {}
    for name, raw in data.items():
        p = _join(path, name)
        if isinstance(raw, str):
            try:
                out[name] = preset(raw)
            except ValueError as exc:
                raise ConfigError(p, str(exc)) from exc
        elif isinstance(raw, (int, float)) and not isinstance(raw, bool):
            try:
                out[name] = LocalizationModel(float(raw))
            except ValueError as exc:
                raise ConfigError(p, str(exc)) from exc
        else:
            if "sigma" not in _object(raw, p):
                raise ConfigError(_join(p, "sigma"), "missing field")
            out[name] = _flat_dataclass(LocalizationModel, raw, p)
    return out


def _policy(data, path: str) -> bandit.ExplorationPolicy:
    data = _object(data, path)
    for key in data:
        if key not in ("kind", "epsilon", "c"):
            raise ConfigError(_join(path, key), "unknown field")
    try:
        return bandit.parse_policy(data)
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from exc


_SCALARS = {
    "seed": True, "n_total_ues": True, "n_subgroup": True, "learning_runs": True,
    "rem_entries_target": True, "eval_runs": True, "decision_steps": True,
    "snapshot_interval_s": False, "ue_speed": False, "mean_heading_hold_s": False,
}


def config_from_dict(data: Any) -> ExperimentConfig:
    data = _object(data, "")
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in _SCALARS:
            kwargs[key] = _number(value, key, integer=_SCALARS[key])
        elif key == "metrics":
            if not isinstance(value, list):
                raise ConfigError(key, "expected a list of metric names")
            try:
                kwargs[key] = [MetricKind.parse(m) for m in value]
            except ValueError as exc:
                raise ConfigError(key, str(exc)) from exc
        elif key == "localization":
            kwargs[key] = _localization(value, key)
        elif key == "policy":
            kwargs[key] = _policy(value, key)
        elif key == "layout":
            kwargs[key] = _layout(value, key)
        elif key == "channel":
            kwargs[key] = _flat_dataclass(ChannelParams, value, key)
        elif key == "power":
            kwargs[key] = _flat_dataclass(PowerParams, value, key)
        elif key.startswith("_"):
            continue  # comments
        else:
            raise ConfigError(key, "unknown field")
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError("", str(exc)) from exc


def load_config(path: Union[str, os.PathLike]) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigReadError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigReadError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    def policy_doc(p):
        if isinstance(p, bandit.EpsilonGreedy):
            return {"kind": "epsilon_greedy", "epsilon": p.epsilon}
        if isinstance(p, bandit.UCB):
            return {"kind": "ucb", "c": p.c}
        return {"kind": "sweep"}

    return {
        **{k: getattr(cfg, k) for k in _SCALARS},
        "metrics": [m.value for m in cfg.metrics],
        "localization": {k: dataclasses.asdict(v) for k, v in cfg.localization.items()},
        "policy": policy_doc(cfg.policy),
        "layout": {
            "area": [cfg.layout.area.x_min, cfg.layout.area.y_min, cfg.layout.area.x_max, cfg.layout.area.y_max],
            "bss": [
                {"position": list(bs.position), "kind": bs.kind.value, "antenna_count": bs.antenna_count,
                 "tx_power_dbm": bs.tx_power_dbm, "carrier_hz": bs.carrier_hz, "bandwidth_hz": bs.bandwidth_hz}
                for bs in cfg.layout.bss
            ],
        },
        "channel": dataclasses.asdict(cfg.channel),
        "power": dataclasses.asdict(cfg.power),
    }
