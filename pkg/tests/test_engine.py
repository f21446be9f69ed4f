import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmbloat.engine import SimulationError, Simulator, to_seconds, to_ticks


def test_equal_time_events_fire_in_insertion_order():
    sim = Simulator()
    seen = []
    sim.schedule(0, seen.append, "A")
    sim.schedule(0, seen.append, "B")
    sim.run_until(1.0)
    assert seen == ["A", "B"]


def test_delay_is_added_to_clock():
    sim = Simulator()
    fired = []
    sim.schedule(1.0, lambda: sim.schedule(0.040, lambda: fired.append(sim.now)))
    sim.run_until(2.0)
    assert fired == [pytest.approx(1.040, abs=1e-12)]
    assert to_ticks(fired[0]) == 1_040_000_000


def test_cancelled_event_never_dispatches():
    sim = Simulator()
    seen = []
    h = sim.schedule(0.5, seen.append, "x")
    h.cancel()
    sim.run_until(1.0)
    assert seen == []
    assert sim.dispatched == 0


def test_empty_run_advances_clock():
    sim = Simulator()
    assert sim.run_until(10.0) == 10.0
    assert sim.now == 10.0
    assert sim.dispatched == 0


def test_run_until_is_inclusive_and_stops():
    sim = Simulator()
    seen = []
    for t in (1, 2, 3):
        sim.schedule(t, seen.append, t)
    sim.run_until(2)
    assert seen == [1, 2]
    assert sim.pending() == 1
    sim.run_until(5)
    assert seen == [1, 2, 3]


def test_negative_delay_rejected():
    sim = Simulator()
    with pytest.raises(SimulationError):
        sim.schedule(-0.001, lambda: None)


def test_schedule_after_terminate_rejected():
    sim = Simulator()
    sim.terminate()
    with pytest.raises(SimulationError):
        sim.schedule(0.1, lambda: None)


def test_run_until_in_past_rejected():
    sim = Simulator()
    sim.run_until(2.0)
    with pytest.raises(SimulationError):
        sim.run_until(1.0)


def test_tick_conversion_exact():
    assert to_ticks(0.1) == 100_000_000
    assert to_ticks(100e-6) == 100_000
    assert to_seconds(40_000_000) == 0.04


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5_000), st.booleans()), min_size=1, max_size=60))
def test_dispatch_order_is_total(items):
    """(fire_time, sequence) strictly increases across dispatches; clock never decreases."""
    sim = Simulator()
    log = []

    def fire(key):
        log.append((sim.now_ticks, key))

    handles = []
    for i, (us, nested) in enumerate(items):
        if nested:
            # schedule from inside another event at the same instant
            sim.schedule(us * 1e-6, lambda i=i: sim.schedule(0, fire, i))
        else:
            handles.append(sim.schedule(us * 1e-6, fire, i))
    sim.run_until(1.0)
    times = [t for t, _ in log]
    assert times == sorted(times)
    assert len(log) == len(items)
    # among directly scheduled events with equal time, insertion order wins
    direct = [(t, k) for t, k in log if not items[k][1]]
    for (t0, k0), (t1, k1) in zip(direct, direct[1:]):
        if t0 == t1:
            assert k0 < k1
