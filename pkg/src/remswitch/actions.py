"""Pico-BS on/off configurations encoded as integer bit masks.

Bit ``b`` set means pico BS ``b`` is active. The macro BS is not part of
the mask; it is always on. The all-on action is ``2**pbs_count - 1``.
"""

from __future__ import annotations

import numbers
from typing import Sequence, Union

ActionLike = Union[int, Sequence[bool]]


def action_count(pbs_count: int) -> int:
    return 1 << pbs_count


def all_on(pbs_count: int) -> int:
    return (1 << pbs_count) - 1


def as_mask(action: ActionLike, pbs_count: int) -> int:
    """Normalise an int mask or a per-PBS bool sequence, checking its size."""
    if isinstance(action, numbers.Integral) and not isinstance(action, bool):
        if not 0 <= action < (1 << pbs_count):
            raise ValueError(f"action {action} out of range for {pbs_count} pico BSs")
        return int(action)
    bits = list(action)
    if len(bits) != pbs_count:
        raise ValueError(f"action has {len(bits)} entries, expected {pbs_count}")
    return sum(1 << b for b, on in enumerate(bits) if on)


def active_count(action: int) -> int:
    return bin(action).count("1")


def to_bits(action: int, pbs_count: int) -> tuple[bool, ...]:
    return tuple(bool(action >> b & 1) for b in range(pbs_count))


def is_subset(a: int, b: int) -> bool:
    """True when every PBS active in ``a`` is also active in ``b``."""
    return a & ~b == 0


def bitstring(action: int, pbs_count: int) -> str:
    """PBS 0 first, e.g. ``'10100'`` for PBSs 0 and 2 active."""
    return "".join("1" if on else "0" for on in to_bits(action, pbs_count))
