import pytest
from hypothesis import given, strategies as st

from srsim.engine import NS_PER_S, EventKind, EventQueue, SimulationError


def test_pop_order():
    q = EventQueue()
    q.schedule(5, EventKind.TIMEOUT, payload="a")
    q.schedule(3, EventKind.TIMEOUT, payload="b")
    assert [q.pop().payload, q.pop().payload] == ["b", "a"]
    assert q.pop() is None


def test_equal_times_fifo():
    q = EventQueue()
    for k in range(5):
        q.schedule(7, EventKind.FRAME_END, payload=k)
    assert [q.pop().payload for _ in range(5)] == list(range(5))


def test_cancel():
    q = EventQueue()
    fired = []
    ev = q.schedule(4, EventKind.TIMEOUT, lambda e: fired.append("x"))
    q.schedule(6, EventKind.TIMEOUT, lambda e: fired.append("y"))
    q.cancel(ev)
    q.cancel(None)
    q.run_until(100)
    assert fired == ["y"]


def test_past_schedule_aborts():
    q = EventQueue()
    q.schedule(10, EventKind.SLOT_TICK)
    q.run_until(20)
    with pytest.raises(SimulationError):
        q.schedule(5, EventKind.TIMEOUT)


def test_empty_queue():
    q = EventQueue()
    assert q.run_until(10 * NS_PER_S) == 0


def test_sim_end_sets_clock():
    q = EventQueue()
    q.schedule(10 * NS_PER_S, EventKind.SIM_END)
    assert q.run_until(10 * NS_PER_S) == 10 * NS_PER_S


def test_sim_end_stops_dispatch():
    q = EventQueue()
    fired = []
    q.schedule(10, EventKind.SIM_END)
    q.schedule(10, EventKind.TIMEOUT, lambda e: fired.append(1))
    q.run_until(10)
    assert fired == []


def test_events_past_end_not_dispatched():
    q = EventQueue()
    fired = []
    q.schedule(11, EventKind.TIMEOUT, lambda e: fired.append(1))
    assert q.run_until(10) == 0
    assert fired == []


def test_handler_errors_propagate():
    q = EventQueue()

    def boom(ev):
        raise SimulationError("bad state", ["t1 a", "t2 b"])
    q.schedule(1, EventKind.TIMEOUT, boom)
    with pytest.raises(SimulationError, match="recent trace"):
        q.run_until(5)


@given(st.lists(st.integers(0, 1000), max_size=60), st.sets(st.integers(0, 59)))
def test_total_order_and_monotone_clock(times, cancelled):
    q = EventQueue()
    seen = []
    handles = [q.schedule(t, EventKind.TIMEOUT, lambda e: seen.append((e.fire_time, e.seq)), None) for t in times]
    for k in cancelled:
        if k < len(handles):
            q.cancel(handles[k])
    q.run_until(10 ** 6)
    expect = sorted((h.fire_time, h.seq) for k, h in enumerate(handles) if k not in cancelled)
    assert seen == expect
    assert all(a[0] <= b[0] for a, b in zip(seen, seen[1:]))


@given(st.lists(st.integers(0, 50), min_size=1, max_size=30))
def test_handlers_may_schedule_future_events(delays):
    q = EventQueue()
    order = []

    def h(ev):
        order.append(ev.fire_time)
        if ev.payload:
            d = ev.payload[0]
            q.schedule(ev.fire_time + d, EventKind.SLOT_TICK, h, ev.payload[1:])
    q.schedule(0, EventKind.SLOT_TICK, h, delays)
    q.run_until(10 ** 6)
    assert order == sorted(order)
    assert len(order) == len(delays) + 1
