"""Deterministic discrete-event core: clock, event queue, named RNG streams."""

import hashlib
import heapq
import random
from dataclasses import dataclass, field
from typing import Any, Callable


class SchedulingError(Exception):
    """Event scheduled into the past, or run_until asked to move backwards."""


def derive_stream_seed(seed: int, stream_id: str) -> int:
    """Stable 64-bit sub-seed for (seed, stream_id).

    sha256 keeps this identical across platforms and sessions; builtin hash()
    of strings is salted per process and would break replay.
    """
    digest = hashlib.sha256(f"{seed}:{stream_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(order=True)
class Event:
    fire_time: float
    seq: int
    kind: str = field(compare=False)
    target: Any = field(compare=False)
    fn: Callable[[], None] = field(compare=False)
    cancelled: bool = field(default=False, compare=False)


class Engine:
    """Single-threaded event loop; one instance per simulation run.

    Events fire in (fire_time, seq) order, seq being a monotone insertion
    counter, so same-time events run in scheduling order.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.now = 0.0
        self._heap: list[Event] = []
        self._seq = 0
        self._rngs: dict[str, random.Random] = {}

    def rng(self, stream_id: str) -> random.Random:
        """Named RNG stream, lazily created, independent of other streams."""
        r = self._rngs.get(stream_id)
        if r is None:
            r = random.Random(derive_stream_seed(self.seed, stream_id))
            self._rngs[stream_id] = r
        return r

    def schedule(self, fire_time: float, fn: Callable[[], None],
                 kind: str = "timer", target: Any = None) -> Event:
        if fire_time < self.now:
            raise SchedulingError(
                f"cannot schedule at {fire_time} before now={self.now}")
        ev = Event(fire_time, self._seq, kind, target, fn)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def cancel(self, event: Event) -> None:
        event.cancelled = True

    def peek_time(self) -> float | None:
        while self._heap and self._heap[0].cancelled:
            heapq.heappop(self._heap)
        return self._heap[0].fire_time if self._heap else None

    def step(self) -> Event | None:
        """Process exactly one pending event; returns it, or None if idle."""
        while self._heap:
            ev = heapq.heappop(self._heap)
            if ev.cancelled:
                continue
            self.now = ev.fire_time
            ev.fn()
            return ev
        return None

    def run_until(self, t_end: float) -> int:
        """Process every event with fire_time <= t_end; clock lands on t_end."""
        if t_end < self.now:
            raise SchedulingError(f"t_end={t_end} is before now={self.now}")
        count = 0
        while self._heap and self._heap[0].fire_time <= t_end:
            ev = heapq.heappop(self._heap)
            if ev.cancelled:
                continue
            self.now = ev.fire_time
            ev.fn()
            count += 1
        self.now = t_end
        return count
