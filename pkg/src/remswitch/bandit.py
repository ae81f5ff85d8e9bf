"""Reward shaping and exploration policies for the REM learning phase."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .actions import action_count
from .rem import RemEntry, greedy_action


@dataclass(frozen=True)
class RewardObservation:
    ee: float
    served_under_action: int
    served_under_all_on: int


def reward(obs: RewardObservation) -> float:
    """EE if the action kept every UE the all-on configuration serves, else 0."""
    if obs.served_under_action == obs.served_under_all_on:
        return obs.ee
    return 0.0


@dataclass(frozen=True)
class EpsilonGreedy:
    epsilon: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")


@dataclass(frozen=True)
class UCB:
    c: float = 1.0

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("c must be non-negative")


@dataclass(frozen=True)
class ExhaustiveSweep:
    """Try every action once in index order, then act greedily."""


ExplorationPolicy = Union[EpsilonGreedy, UCB, ExhaustiveSweep]


def parse_policy(spec: dict) -> ExplorationPolicy:
    kind = str(spec.get("kind", "sweep")).lower()
    if kind in ("sweep", "exhaustive", "exhaustive_sweep"):
        return ExhaustiveSweep()
    if kind in ("epsilon_greedy", "egreedy", "epsilon"):
        return EpsilonGreedy(float(spec.get("epsilon", 0.1)))
    if kind == "ucb":
        return UCB(float(spec.get("c", 1.0)))
    raise ValueError(f"unknown exploration policy {kind!r}")


def _full_greedy(entry: RemEntry) -> int:
    return greedy_action(entry, range(action_count(entry.pbs_count)))


def select_learning_action(entry: RemEntry, policy: ExplorationPolicy, step: int,
                           rng: np.random.Generator) -> int:
    if isinstance(policy, ExhaustiveSweep):
        unvisited = np.flatnonzero(entry.n == 0)
        if unvisited.size:
            return int(unvisited[0])
        return _full_greedy(entry)

    if isinstance(policy, EpsilonGreedy):
        if rng.random() < policy.epsilon:
            return int(rng.integers(action_count(entry.pbs_count)))
        return _full_greedy(entry)

    if isinstance(policy, UCB):
        unvisited = np.flatnonzero(entry.n == 0)
        if unvisited.size:
            return int(unvisited[0])
        bonus = policy.c * np.sqrt(math.log(max(step, 1)) / entry.n)
        score = entry.q + bonus
        # lowest index among exact ties
        return int(np.argmax(score))

    raise TypeError(f"unsupported policy {policy!r}")
