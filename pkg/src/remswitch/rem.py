"""Radio Environment Map: position-tagged tables of per-action statistics.

Each entry holds, for every pico on/off configuration, the running mean
reward (action value), the number of visits and the number of UEs that
configuration served when last tried.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Union

import numpy as np

from .actions import action_count, active_count, all_on
from .geometry import MetricKind, PositionSet, set_distance

SCHEMA_VERSION = 1
UNKNOWN = -1
Q_INIT = 0.0


class RemError(ValueError):
    """Raised on an invalid REM operation or a malformed REM document."""


class ActionStats(NamedTuple):
    q_value: float
    visit_count: int
    served_ues: Optional[int]


@dataclass(eq=False)
class RemEntry:
    tag: PositionSet
    pbs_count: int
    q: np.ndarray = field(default=None)
    n: np.ndarray = field(default=None)
    served: np.ndarray = field(default=None)

    def __post_init__(self):
        self.tag = PositionSet(self.tag)
        size = action_count(self.pbs_count)
        if self.q is None:
            self.q = np.full(size, Q_INIT)
        if self.n is None:
            self.n = np.zeros(size, dtype=np.int64)
        if self.served is None:
            self.served = np.full(size, UNKNOWN, dtype=np.int64)
        self.q = np.asarray(self.q, dtype=float)
        self.n = np.asarray(self.n, dtype=np.int64)
        self.served = np.asarray(self.served, dtype=np.int64)
        for name in ("q", "n", "served"):
            if getattr(self, name).shape != (size,):
                raise RemError(f"{name} table must have {size} slots for {self.pbs_count} pico BSs")

    @property
    def all_on(self) -> int:
        return all_on(self.pbs_count)

    def stats(self, action: int) -> ActionStats:
        s = int(self.served[action])
        return ActionStats(float(self.q[action]), int(self.n[action]), None if s == UNKNOWN else s)

    def fully_visited(self) -> bool:
        return bool(np.all(self.n >= 1))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RemEntry):
            return NotImplemented
        return (
            self.pbs_count == other.pbs_count
            and self.tag == other.tag
            and np.array_equal(self.q, other.q)
            and np.array_equal(self.n, other.n)
            and np.array_equal(self.served, other.served)
        )


@dataclass(eq=False)
class Rem:
    pbs_count: int
    entries: list[RemEntry] = field(default_factory=list)

    def __post_init__(self):
        if self.pbs_count < 1:
            raise RemError("pbs_count must be positive")
        for e in self.entries:
            if e.pbs_count != self.pbs_count:
                raise RemError("entry action table does not match REM pbs_count")

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> RemEntry:
        return self.entries[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Rem):
            return NotImplemented
        return self.pbs_count == other.pbs_count and self.entries == other.entries


def add_entry(rem: Rem, tag) -> int:
    rem.entries.append(RemEntry(PositionSet(tag), rem.pbs_count))
    return len(rem.entries) - 1


def entry_distances(rem: Rem, query, kind: Union[MetricKind, str]) -> np.ndarray:
    query = PositionSet(query)
    return np.array([set_distance(kind, e.tag, query) for e in rem.entries])


def match_entry(rem: Rem, query, kind: Union[MetricKind, str]) -> int:
    """Index of the entry whose tag is closest to ``query``; lowest index wins ties."""
    if not rem.entries:
        raise RemError("cannot match against an empty REM")
    return int(np.argmin(entry_distances(rem, query, kind)))


def action_space_reduction(entry: RemEntry) -> list[int]:
    """Actions known to serve as many UEs as the all-on configuration.

    Unvisited actions are dropped because nothing certifies their coverage.
    """
    full = int(entry.served[entry.all_on])
    if full == UNKNOWN:
        raise RemError("all-on action has never been visited in this entry")
    return [int(a) for a in np.flatnonzero(entry.served == full)]


def greedy_action(entry: RemEntry, reduced: Iterable[int]) -> int:
    """Highest action value in ``reduced``; ties go to fewer active PBSs, then lower mask."""
    candidates = list(reduced)
    if not candidates:
        raise RemError("reduced action set is empty")
    size = action_count(entry.pbs_count)
    for a in candidates:
        if not 0 <= a < size:
            raise RemError(f"action {a} outside the entry's action space")
    return max(candidates, key=lambda a: (entry.q[a], -active_count(a), -a))


def update_entry(entry: RemEntry, action: int, reward: float, served: int) -> RemEntry:
    """Fold one observation into the running sample mean of ``action``."""
    if not 0 <= action < action_count(entry.pbs_count):
        raise RemError(f"action {action} outside the entry's action space")
    entry.n[action] += 1
    entry.q[action] += (reward - entry.q[action]) / entry.n[action]
    entry.served[action] = served
    return entry


# -- persistence -------------------------------------------------------------


def to_document(rem: Rem) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "pbs_count": rem.pbs_count,
        "entries": [
            {
                "tag": e.tag.tolist(),
                "stats": [
                    {
                        "q": float(e.q[a]),
                        "n": int(e.n[a]),
                        "served": None if e.served[a] == UNKNOWN else int(e.served[a]),
                    }
                    for a in range(len(e.q))
                ],
            }
            for e in rem.entries
        ],
    }


def from_document(doc) -> Rem:
    if not isinstance(doc, dict):
        raise RemError("REM document must be a JSON object")
    if doc.get("version") != SCHEMA_VERSION:
        raise RemError(f"unsupported REM version {doc.get('version')!r}, expected {SCHEMA_VERSION}")
    pbs_count = doc.get("pbs_count")
    if not isinstance(pbs_count, int) or isinstance(pbs_count, bool) or pbs_count < 1:
        raise RemError("pbs_count must be a positive integer")
    entries = doc.get("entries")
    if not isinstance(entries, list):
        raise RemError("entries must be a list")
    size = action_count(pbs_count)
    rem = Rem(pbs_count)
    for i, raw in enumerate(entries):
        try:
            stats = raw["stats"]
            if len(stats) != size:
                raise RemError(f"entries[{i}]: action table has {len(stats)} slots, expected {size}")
            q = [float(s["q"]) for s in stats]
            n = [int(s["n"]) for s in stats]
            served = [UNKNOWN if s["served"] is None else int(s["served"]) for s in stats]
            if any(v < 0 for v in n) or any(not math.isfinite(v) for v in q):
                raise RemError(f"entries[{i}]: invalid statistics")
            rem.entries.append(RemEntry(PositionSet(raw["tag"]), pbs_count, q, n, served))
        except RemError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise RemError(f"entries[{i}]: malformed entry ({exc})") from exc
    return rem


def save(rem: Rem, destination: Union[str, os.PathLike]) -> None:
    # json writes floats with repr(), which round-trips exactly
    Path(destination).write_text(json.dumps(to_document(rem), indent=1) + "\n", encoding="utf-8")


def load(source: Union[str, os.PathLike]) -> Rem:
    try:
        doc = json.loads(Path(source).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RemError(f"{source}: not valid JSON ({exc})") from exc
    return from_document(doc)
