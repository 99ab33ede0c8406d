"""Discrete-event kernel: event calendar, clock, reproducible random streams.

The kernel knows nothing about emergency departments.  It provides a
future-event list with deterministic tie-breaking, the per-replication
clock, and a family of independent random substreams derived from a
single replication seed.
"""

import heapq
from dataclasses import dataclass

import numpy as np

# Event kinds (ints for cheap dispatch in the event loop).
ARRIVAL = 0
SERVICE_COMPLETE = 1
TRANSFER_COMPLETE = 2
SLOT_BOUNDARY = 3
END_OF_HORIZON = 4

KIND_NAMES = {
    ARRIVAL: "Arrival",
    SERVICE_COMPLETE: "ServiceComplete",
    TRANSFER_COMPLETE: "TransferComplete",
    SLOT_BOUNDARY: "SlotBoundary",
    END_OF_HORIZON: "EndOfHorizon",
}

# Purpose tags for random substreams, one code per purpose.
STREAM_PURPOSES = ("arrival-yellow", "arrival-red", "los", "routing")
_PURPOSE_CODES = {name: i for i, name in enumerate(STREAM_PURPOSES)}


class SimulationLogicError(RuntimeError):
    """An internal invariant of the event loop was violated."""


class EventCalendar:
    """Future-event list ordered by (time, insertion sequence number).

    Ties at equal timestamps are dispatched in insertion order, which
    makes every replication a pure function of its inputs.
    """

    def __init__(self):
        self._heap = []
        self._seq = 0
        self.clock = 0.0

    def schedule(self, time, kind, payload=None):
        if time < self.clock:
            raise SimulationLogicError(
                f"cannot schedule {KIND_NAMES.get(kind, kind)} at t={time:g} "
                f"before current clock t={self.clock:g}"
            )
        self._seq += 1
        heapq.heappush(self._heap, (time, self._seq, kind, payload))

    def pop(self):
        """Remove and return the next (time, seq, kind, payload); advances the clock."""
        ev = heapq.heappop(self._heap)
        self.clock = ev[0]
        return ev

    def __len__(self):
        return len(self._heap)


@dataclass
class ReplicationSpec:
    """Length, warm-up and seed of one simulation replication (minutes)."""

    horizon: float = 365 * 1440.0
    warmup: float = 48 * 60.0
    seed: int = 1

    def __post_init__(self):
        if not self.warmup < self.horizon:
            raise ValueError(
                f"warmup ({self.warmup}) must be shorter than horizon ({self.horizon})"
            )


class RandomStreams:
    """Independent substreams keyed by (ED index, purpose tag).

    Each substream is a PCG64 generator seeded from a SeedSequence over
    (replication seed, ED index, purpose code), so a stream's draw
    sequence depends only on the seed and its identifier, never on the
    order in which other streams are created or consumed.
    """

    def __init__(self, seed):
        self.seed = int(seed)
        self._streams = {}

    def get(self, ed, purpose):
        key = (ed, purpose)
        gen = self._streams.get(key)
        if gen is None:
            code = _PURPOSE_CODES[purpose]
            ss = np.random.SeedSequence([self.seed, ed, code])
            gen = np.random.Generator(np.random.PCG64(ss))
            self._streams[key] = gen
        return gen
