import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from manetsim.engine import (CancelResult, Engine, EventKind, SchedulingError, rng_stream,
                             seconds, to_seconds)

T = EventKind.TIMER_EXPIRY


def test_schedule_at_now_fires_first():
    eng, seen = Engine(), []
    eng.schedule(5, T, seen.append, "later")
    eng.schedule(0, T, seen.append, "now")
    eng.run_until(10)
    assert seen == ["now", "later"]


def test_ties_follow_insertion_order():
    eng, seen = Engine(), []
    eng.schedule(5, T, seen.append, "A")
    eng.schedule(5, T, seen.append, "B")
    eng.run_until(5)
    assert seen == ["A", "B"]


def test_scheduling_in_the_past_is_rejected():
    eng = Engine()
    eng.run_until(4)
    with pytest.raises(SchedulingError):
        eng.schedule(3, T, lambda: None)
    with pytest.raises(SchedulingError):
        eng.run_until(2)


def test_run_until_on_empty_queue_moves_clock():
    eng = Engine()
    assert eng.run_until(10) == 0
    assert eng.now == 10


def test_run_until_stops_at_end():
    eng = Engine()
    for t in (1, 2, 3):
        eng.schedule(t, T, lambda: None)
    assert eng.run_until(2) == 2
    assert eng.pending() == 1
    assert eng.run_until(3) == 1


def test_child_at_same_instant_runs_in_same_call():
    eng, seen = Engine(), []

    def parent():
        seen.append("parent")
        eng.schedule(eng.now, T, seen.append, "child")

    eng.schedule(7, T, parent)
    assert eng.run_until(7) == 2
    assert seen == ["parent", "child"]


def test_cancel_states():
    eng, seen = Engine(), []
    h = eng.schedule(3, T, seen.append, "x")
    assert eng.cancel(h) is CancelResult.NOT_FIRED
    assert eng.cancel(h) is CancelResult.ALREADY_CANCELLED
    eng.run_until(5)
    assert seen == []
    fired = eng.schedule(6, T, seen.append, "y")
    eng.run_until(6)
    assert eng.cancel(fired) is CancelResult.ALREADY_FIRED


def test_time_conversion_round_trip():
    assert seconds(1.5) == 1_500_000
    assert to_seconds(seconds(0.25)) == 0.25


@settings(max_examples=200)
@given(st.lists(st.integers(0, 1000), max_size=60))
def test_dispatch_order_is_sorted_by_time_then_seq(times):
    eng = Engine(record=True)
    clocks = []
    for t in times:
        eng.schedule(t, T, lambda: clocks.append(eng.now))
    eng.run_until(1000)
    expected = sorted((t, i) for i, t in enumerate(times))
    assert [(t, s) for t, s, _ in eng.log] == expected
    assert clocks == sorted(clocks)


def test_replay_gives_identical_logs():
    def build():
        eng = Engine(record=True)
        rng = rng_stream(42, "test")

        def spawn(depth):
            if depth < 4:
                for _ in range(2):
                    eng.schedule_in(rng.randrange(0, 50), T, spawn, depth + 1)

        eng.schedule(0, T, spawn, 0)
        eng.run_until(10_000)
        return eng.log

    assert build() == build()


def test_rng_streams_are_independent():
    a1 = rng_stream(7, "mobility").random()
    noisy = rng_stream(7, "adversary")
    for _ in range(100):
        noisy.random()
    assert rng_stream(7, "mobility").random() == a1
    assert rng_stream(7, "mobility").random() != rng_stream(8, "mobility").random()
    assert isinstance(rng_stream(0, "x"), random.Random)
    with pytest.raises(ValueError):
        rng_stream(-1, "x")
