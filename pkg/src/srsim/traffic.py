"""Poisson downlink traffic and per-AP FIFO queueing."""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable

import numpy as np

from .engine import NS_PER_S

PACKET_BITS = 12_000
DEFAULT_QUEUE_CAPACITY = 100


class Enqueue(enum.Enum):
    ACCEPTED = "accepted"
    DROPPED = "dropped"


@dataclass
class Packet:
    id: int
    arrival_time: float
    size_bits: int = PACKET_BITS
    delivery_time: float | None = None
    dest: int = 0


def next_arrival_gap(rng: np.random.Generator, load_bps: float, packet_bits: int = PACKET_BITS,
                     u: float | None = None) -> float:
    """Exponential inter-arrival gap in seconds by inverse CDF; ``u`` may be forced for testing."""
    if load_bps <= 0:
        raise ValueError("load must be positive")
    lam = load_bps / packet_bits
    if u is None:
        u = 1.0 - rng.random()      # (0, 1]
    return -math.log(u) / lam


def arrival_times_ns(rng: np.random.Generator, load_bps: float, t_end_ns: int,
                     packet_bits: int = PACKET_BITS) -> np.ndarray:
    """All Poisson arrival instants in [0, t_end_ns], as int64 ns.

    Gaps are rounded to whole ns before the cumulative sum, so the sum of gaps
    equals the last arrival time exactly.
    """
    if load_bps <= 0:
        raise ValueError("load must be positive")
    lam = load_bps / packet_bits
    expected = lam * t_end_ns / NS_PER_S
    chunk = int(expected + 6.0 * math.sqrt(expected) + 16)
    parts = []
    last = 0
    while True:
        u = 1.0 - rng.random(chunk)
        gaps = np.rint(-np.log(u) / lam * NS_PER_S).astype(np.int64)
        times = last + np.cumsum(gaps)
        parts.append(times)
        last = int(times[-1])
        if last > t_end_ns:
            break
        chunk = max(16, chunk // 4)
    times = np.concatenate(parts)
    return times[: np.searchsorted(times, t_end_ns, side="right")]


class FifoQueue:
    """Bounded FIFO with tail drop. Items are opaque (Packet objects or packet ids)."""

    def __init__(self, capacity: int = DEFAULT_QUEUE_CAPACITY):
        if capacity < 1:
            raise ValueError("queue capacity must be >= 1")
        self.capacity = capacity
        self.contents: deque = deque()
        self.drop_count = 0

    def __len__(self):
        return len(self.contents)

    def enqueue(self, item) -> Enqueue:
        if len(self.contents) >= self.capacity:
            self.drop_count += 1
            return Enqueue.DROPPED
        self.contents.append(item)
        return Enqueue.ACCEPTED

    def admit_many(self, items: Iterable, n_items: int) -> int:
        """Tail-drop admission of a batch that arrived while the queue length was constant."""
        room = self.capacity - len(self.contents)
        accepted = min(room, n_items)
        if accepted > 0:
            it = iter(items)
            self.contents.extend(next(it) for _ in range(accepted))
        self.drop_count += n_items - max(accepted, 0)
        return max(accepted, 0)

    def build_ampdu(self, n_max: int, key: Callable[[object], Hashable] | None = None) -> list:
        """Peek up to ``n_max`` head items; nothing is removed until :meth:`remove` is called.

        With ``key``, only items sharing the head item's key (its destination) are taken.
        """
        if not self.contents:
            raise IndexError("build_ampdu on an empty queue")
        if key is None:
            n = min(n_max, len(self.contents))
            return [self.contents[i] for i in range(n)]
        head_key = key(self.contents[0])
        out = []
        for item in self.contents:
            if key(item) == head_key:
                out.append(item)
                if len(out) == n_max:
                    break
        return out

    def remove(self, items: list) -> None:
        n = len(items)
        if n == 0:
            return
        if all(self.contents[i] is items[i] or self.contents[i] == items[i] for i in range(n)):
            for _ in range(n):
                self.contents.popleft()
            return
        chosen = set(map(id, items)) if not isinstance(items[0], int) else None
        if chosen is None:
            drop = set(items)
            self.contents = deque(x for x in self.contents if x not in drop)
        else:
            self.contents = deque(x for x in self.contents if id(x) not in chosen)


def enqueue(queue: FifoQueue, packet) -> Enqueue:
    return queue.enqueue(packet)


def build_ampdu(queue: FifoQueue, n_max: int, key=None) -> list:
    return queue.build_ampdu(n_max, key)
