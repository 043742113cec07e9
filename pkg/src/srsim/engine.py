"""Deterministic discrete-event core.

Time is an integer count of nanoseconds. Events are ordered by
``(fire_time, seq)``; ``seq`` is a monotone insertion counter so equal-time
events pop in the order they were scheduled.
"""
from __future__ import annotations

import enum
import heapq
from typing import Any, Callable

NS_PER_US = 1_000
NS_PER_S = 1_000_000_000


class EventKind(enum.IntEnum):
    PACKET_ARRIVAL = 0
    SLOT_TICK = 1
    FRAME_START = 2
    FRAME_END = 3
    TIMEOUT = 4
    SIM_END = 5


class SimulationError(RuntimeError):
    """State-machine inconsistency; carries the most recent trace lines."""

    def __init__(self, message: str, trace_tail: list[str] | None = None):
        self.trace_tail = trace_tail or []
        if self.trace_tail:
            message = message + "\nrecent trace:\n" + "\n".join(self.trace_tail)
        super().__init__(message)


class Event:
    __slots__ = ("fire_time", "seq", "kind", "handler", "payload", "cancelled")

    def __init__(self, fire_time: int, seq: int, kind: EventKind, handler: Callable | None, payload: Any):
        self.fire_time = fire_time
        self.seq = seq
        self.kind = kind
        self.handler = handler
        self.payload = payload
        self.cancelled = False

    def __repr__(self):
        return f"Event(t={self.fire_time}, seq={self.seq}, {self.kind.name}, {self.payload!r})"


class EventQueue:
    def __init__(self):
        self._heap: list[tuple[int, int, Event]] = []
        self._seq = 0
        self.now = 0
        self.dispatched = 0

    def __len__(self):
        return len(self._heap)

    def schedule(self, fire_time: int, kind: EventKind, handler: Callable | None = None, payload: Any = None) -> Event:
        if fire_time < self.now:
            raise SimulationError(f"cannot schedule {kind.name} at {fire_time} ns before now={self.now} ns")
        ev = Event(fire_time, self._seq, kind, handler, payload)
        self._seq += 1
        heapq.heappush(self._heap, (fire_time, ev.seq, ev))
        return ev

    @staticmethod
    def cancel(event: Event | None) -> None:
        # lazy deletion: the entry stays in the heap and is skipped on pop
        if event is not None:
            event.cancelled = True

    def pop(self) -> Event | None:
        heap = self._heap
        while heap:
            _, _, ev = heapq.heappop(heap)
            if not ev.cancelled:
                return ev
        return None

    def peek_time(self) -> int | None:
        heap = self._heap
        while heap and heap[0][2].cancelled:
            heapq.heappop(heap)
        return heap[0][0] if heap else None

    def run_until(self, t_end: int) -> int:
        """Dispatch events in key order until the queue is empty or the next event is past ``t_end``."""
        heap = self._heap
        pop = heapq.heappop
        while heap:
            t, _, ev = heap[0]
            if ev.cancelled:
                pop(heap)
                continue
            if t > t_end:
                break
            pop(heap)
            if t < self.now:
                raise SimulationError(f"clock regression: event at {t} ns, now {self.now} ns")
            self.now = t
            self.dispatched += 1
            if ev.handler is not None:
                ev.handler(ev)
            if ev.kind is EventKind.SIM_END:
                break
        return self.now
