import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from remswitch.actions import action_count, all_on
from remswitch.geometry import MetricKind
from remswitch.rem import (
    SCHEMA_VERSION,
    UNKNOWN,
    Rem,
    RemEntry,
    RemError,
    action_space_reduction,
    add_entry,
    from_document,
    greedy_action,
    load,
    match_entry,
    save,
    to_document,
    update_entry,
)

ALL_ON = all_on(5)
ZERO_SELF = [MetricKind.HAUSDORFF, MetricKind.MEAN, MetricKind.SUM_OF_MINIMUMS]


def random_rem(rng, entries=15, pbs=5, visited=True):
    rem = Rem(pbs)
    for _ in range(entries):
        i = add_entry(rem, rng.uniform(0, 500, (rng.integers(1, 41), 2)))
        e = rem[i]
        if visited:
            e.q[:] = rng.uniform(0, 1e6, action_count(pbs))
            e.n[:] = rng.integers(1, 5, action_count(pbs))
            e.served[:] = rng.integers(30, 41, action_count(pbs))
    return rem


def test_add_entry():
    rem = Rem(5)
    assert add_entry(rem, [(0, 0)]) == 0
    assert add_entry(rem, [(1, 1)]) == 1
    e = rem[0]
    assert len(e.q) == len(e.n) == len(e.served) == 32
    assert np.all(e.n == 0) and np.all(e.q == 0.0) and np.all(e.served == UNKNOWN)
    assert e.stats(3).served_ues is None


def test_match_entry_examples():
    rem = Rem(5)
    add_entry(rem, [(0, 0)])
    for kind in MetricKind:
        assert match_entry(rem, [(400, 400)], kind) == 0
    add_entry(rem, [(100, 100)])
    for kind in MetricKind:
        assert match_entry(rem, [(1, 1)], kind) == 0


def test_match_exact_tag():
    rng = np.random.default_rng(0)
    rem = random_rem(rng, entries=6, visited=False)
    for kind in ZERO_SELF:
        assert match_entry(rem, rem[3].tag, kind) == 3


def test_match_ties_go_to_lowest_index():
    rem = Rem(2)
    add_entry(rem, [(0, 0)])
    add_entry(rem, [(2, 0)])
    for kind in MetricKind:
        assert match_entry(rem, [(1, 0)], kind) == 0


def test_match_empty_rem_is_an_error():
    with pytest.raises(RemError):
        match_entry(Rem(5), [(0, 0)], "som")


def _entry_with(served: dict, q: dict | None = None) -> RemEntry:
    e = RemEntry([(0, 0)], 5)
    for a, s in served.items():
        update_entry(e, a, (q or {}).get(a, 1.0), s)
    return e


def test_asr_examples():
    e = _entry_with({a: 40 for a in range(32)})
    assert action_space_reduction(e) == list(range(32))
    assert action_space_reduction(_entry_with({ALL_ON: 40})) == [ALL_ON]
    a1, a2 = 0b00011, 0b01000
    assert sorted(action_space_reduction(_entry_with({ALL_ON: 40, a1: 40, a2: 39}))) == [a1, ALL_ON]


def test_asr_requires_all_on():
    with pytest.raises(RemError):
        action_space_reduction(_entry_with({3: 40}))


def test_greedy_examples():
    a1, a2 = 0b00011, 0b01111
    assert greedy_action(_entry_with({ALL_ON: 40}), [ALL_ON]) == ALL_ON
    e = _entry_with({a1: 40, 0b00100: 40, ALL_ON: 40}, {a1: 5.0, 0b00100: 7.0, ALL_ON: 6.0})
    assert greedy_action(e, [a1, 0b00100, ALL_ON]) == 0b00100
    tie = _entry_with({a1: 40, a2: 40}, {a1: 3.0, a2: 3.0})
    assert greedy_action(tie, [a2, a1]) == a1
    # equal q and equal active count: lower mask
    tie2 = _entry_with({0b00110: 1, 0b00011: 1}, {0b00110: 2.0, 0b00011: 2.0})
    assert greedy_action(tie2, [0b00110, 0b00011]) == 0b00011


def test_greedy_errors():
    e = RemEntry([(0, 0)], 5)
    with pytest.raises(RemError):
        greedy_action(e, [])
    with pytest.raises(RemError):
        greedy_action(e, [32])


def test_update_entry_examples():
    e = RemEntry([(0, 0)], 5)
    update_entry(e, 4, 8.0, 40)
    assert (e.q[4], e.n[4], e.served[4]) == (8.0, 1, 40)
    update_entry(e, 4, 6.0, 40)
    assert (e.q[4], e.n[4]) == (7.0, 2)
    update_entry(e, 4, 7.0, 39)
    assert (e.q[4], e.n[4], e.served[4]) == (7.0, 3, 39)
    with pytest.raises(RemError):
        update_entry(e, 32, 1.0, 1)


@given(st.lists(st.floats(0, 1e7), min_size=1, max_size=60))
def test_update_is_sample_mean(rewards):
    e = RemEntry([(0, 0)], 3)
    for r in rewards:
        update_entry(e, 5, r, 10)
    assert e.n[5] == len(rewards)
    assert e.q[5] == pytest.approx(sum(rewards) / len(rewards), rel=1e-9, abs=1e-6)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-6, 1e6))
def test_greedy_safety_and_argmax_invariance(seed, scale):
    rng = np.random.default_rng(seed)
    e = RemEntry([(0, 0)], 5)
    visited = rng.random(32) < 0.6
    visited[ALL_ON] = True
    e.n[visited] = 1
    e.q[visited] = rng.uniform(0, 10, visited.sum())
    e.served[visited] = rng.integers(35, 41, visited.sum())
    reduced = action_space_reduction(e)
    assert ALL_ON in reduced
    best = greedy_action(e, reduced)
    assert e.served[best] >= e.served[ALL_ON]
    scaled = RemEntry(e.tag, 5, e.q * scale, e.n, e.served)
    assert greedy_action(scaled, reduced) == best


def test_round_trip_empty_and_full(tmp_path):
    for rem in (Rem(5), random_rem(np.random.default_rng(1))):
        path = tmp_path / "rem.json"
        save(rem, path)
        back = load(path)
        assert back == rem
        for e, f in zip(rem.entries, back.entries):
            assert np.array_equal(e.n, f.n) and np.array_equal(e.served, f.served)
            assert np.array_equal(e.q, f.q)


def test_round_trip_keeps_unknown_served(tmp_path):
    rem = Rem(5)
    add_entry(rem, [(1.5, 2.5)])
    update_entry(rem[0], 7, 3.25, 12)
    save(rem, tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["version"] == SCHEMA_VERSION
    assert doc["entries"][0]["stats"][0]["served"] is None
    assert doc["entries"][0]["stats"][7] == {"q": 3.25, "n": 1, "served": 12}
    assert load(tmp_path / "r.json") == rem


def test_truncated_file_is_an_error(tmp_path):
    path = tmp_path / "rem.json"
    save(random_rem(np.random.default_rng(2), entries=3), path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(RemError):
        load(path)


def test_version_mismatch():
    doc = to_document(Rem(5))
    doc["version"] = 99
    with pytest.raises(RemError, match="version"):
        from_document(doc)


def test_table_length_mismatch():
    rem = random_rem(np.random.default_rng(3), entries=2)
    doc = to_document(rem)
    doc["entries"][1]["stats"].pop()
    with pytest.raises(RemError, match="slots"):
        from_document(doc)


@pytest.mark.parametrize("mutate", [
    lambda d: d["entries"][0].pop("tag"),
    lambda d: d["entries"][0].update(tag=[]),
    lambda d: d["entries"][0]["stats"][0].update(n=-1),
    lambda d: d.update(pbs_count="5"),
    lambda d: d.update(entries={}),
])
def test_malformed_documents(mutate):
    doc = to_document(random_rem(np.random.default_rng(4), entries=1))
    mutate(doc)
    with pytest.raises(RemError):
        from_document(doc)


def test_entry_table_size_checked():
    with pytest.raises(RemError):
        RemEntry([(0, 0)], 5, q=np.zeros(16))
    with pytest.raises(RemError):
        Rem(4, [RemEntry([(0, 0)], 5)])
