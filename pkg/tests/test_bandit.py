import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2

from remswitch.actions import all_on
from remswitch.bandit import (
    UCB,
    EpsilonGreedy,
    ExhaustiveSweep,
    RewardObservation,
    parse_policy,
    reward,
    select_learning_action,
)
from remswitch.rem import RemEntry, update_entry


def test_reward_examples():
    assert reward(RewardObservation(9.1, 40, 40)) == 9.1
    assert reward(RewardObservation(9.1, 39, 40)) == 0.0
    assert reward(RewardObservation(0.0, 40, 40)) == 0.0


def test_reward_law_random_cases():
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        full = int(rng.integers(1, 60))
        served = int(rng.integers(0, full))
        ee = float(rng.uniform(0, 1e7))
        assert reward(RewardObservation(ee, served, full)) == 0.0
        assert reward(RewardObservation(ee, full, full)) == ee


@given(st.floats(0, 1e9), st.integers(0, 100), st.integers(0, 100))
def test_reward_never_positive_when_disconnecting(ee, served, full):
    r = reward(RewardObservation(ee, served, full))
    if served < full:
        assert r == 0.0
    assert r in (0.0, ee)


def _entry(q=None, pbs=5):
    e = RemEntry([(0, 0)], pbs)
    if q is not None:
        for a, v in enumerate(q):
            update_entry(e, a, v, 1)
    return e


def test_epsilon_zero_is_greedy():
    q = np.linspace(1.0, 2.0, 32)
    q[9] = 10.0
    e = _entry(q)
    rng = np.random.default_rng(1)
    assert all(select_learning_action(e, EpsilonGreedy(0.0), s, rng) == 9 for s in range(50))


def test_ucb_prefers_unvisited():
    e = _entry(np.ones(32))
    e.n[17] = 0
    assert select_learning_action(e, UCB(1.0), 40, np.random.default_rng(0)) == 17


def test_ucb_bonus_favours_rarely_tried():
    e = _entry(np.full(32, 5.0))
    e.n[:] = 10
    e.n[4] = 1
    assert select_learning_action(e, UCB(2.0), 100, np.random.default_rng(0)) == 4
    assert select_learning_action(e, UCB(0.0), 100, np.random.default_rng(0)) == 0


def test_sweep_starts_at_zero_and_covers_everything():
    e = _entry()
    rng = np.random.default_rng(0)
    assert select_learning_action(e, ExhaustiveSweep(), 0, rng) == 0
    seen = []
    for step in range(32):
        a = select_learning_action(e, ExhaustiveSweep(), step, rng)
        seen.append(a)
        update_entry(e, a, float(a == 20), 1)
    assert seen == list(range(32))
    assert e.fully_visited()
    assert select_learning_action(e, ExhaustiveSweep(), 32, rng) == 20


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 50))
def test_sweep_full_coverage_property(pbs, extra):
    e = _entry(pbs=pbs)
    rng = np.random.default_rng(0)
    for step in range((1 << pbs) + extra):
        update_entry(e, select_learning_action(e, ExhaustiveSweep(), step, rng), 1.0, 1)
    assert np.all(e.n >= 1)


def test_epsilon_one_is_uniform():
    e = _entry(np.arange(32.0))
    rng = np.random.default_rng(2024)
    draws = 20_000
    counts = np.bincount([select_learning_action(e, EpsilonGreedy(1.0), s, rng) for s in range(draws)],
                         minlength=32)
    expected = draws / 32
    stat = ((counts - expected) ** 2 / expected).sum()
    p = chi2.sf(stat, df=31)
    print(f"chi2={stat:.2f} p={p:.4f}")
    assert p > 0.001


@pytest.mark.parametrize("spec,expected", [
    ({}, ExhaustiveSweep()),
    ({"kind": "sweep"}, ExhaustiveSweep()),
    ({"kind": "epsilon_greedy", "epsilon": 0.25}, EpsilonGreedy(0.25)),
    ({"kind": "ucb", "c": 2}, UCB(2.0)),
])
def test_parse_policy(spec, expected):
    assert parse_policy(spec) == expected


@pytest.mark.parametrize("spec", [{"kind": "softmax"}, {"kind": "epsilon_greedy", "epsilon": 1.5},
                                  {"kind": "ucb", "c": -1}])
def test_parse_policy_rejects(spec):
    with pytest.raises(ValueError):
        parse_policy(spec)


def test_all_on_is_last_index():
    assert all_on(5) == 31
