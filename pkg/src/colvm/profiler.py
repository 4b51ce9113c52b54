"""Run-time bookkeeping: when arrays become columnar and when functions get hot.

Transformation needs a large (min_size) and frequently read (min_reads) row
array; a verification rejection latches until the array grows by 25%. The
transform trigger fires at most once per arming; restoration re-arms it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


@dataclass
class Thresholds:
    min_size: int = 5000
    min_reads: int = 2500
    hot_backedges: int = 1000
    hot_calls: int = 10
    max_duplications_per_graph: int = 2

    def __post_init__(self):
        for f in (
            self.min_size,
            self.min_reads,
            self.hot_backedges,
            self.hot_calls,
            self.max_duplications_per_graph,
        ):
            if f <= 0:
                raise ValueError("thresholds must be strictly positive")


class Trigger(Enum):
    TRANSFORM = "transform"
    COMPILE = "compile"


def should_transform(stats, length, t: Thresholds) -> bool:
    return length >= t.min_size and stats.reads >= t.min_reads and not stats.rejected


class HotnessCounter:
    """Per-function call and per-loop back-edge counts; reset on compilation."""

    __slots__ = ("calls", "backedges", "fired")

    def __init__(self):
        self.calls = 0
        self.backedges = {}
        self.fired = False

    def reset(self):
        self.calls = 0
        self.backedges = {}


class Profiler:
    def __init__(self, thresholds: Thresholds | None = None, transform_enabled=True):
        self.thresholds = thresholds or Thresholds()
        self.transform_enabled = transform_enabled
        self._hotness = {}  # function name -> HotnessCounter

    def hotness(self, fn: str) -> HotnessCounter:
        h = self._hotness.get(fn)
        if h is None:
            h = HotnessCounter()
            self._hotness[fn] = h
        return h

    def unlatch_if_grown(self, arr):
        st = arr.stats
        if st.rejected and arr.length >= st.rejected_at_length * 1.25:
            st.rejected = False
            st.armed = True

    def note_read(self, arr):
        """Count one element read; returns Trigger.TRANSFORM on the read that
        crosses the thresholds (at most once per arming).

        `columnar.array_read` already counts, so execution paths built on it
        use `pending_transform` instead to avoid double counting.
        """
        arr.stats.reads += 1
        return Trigger.TRANSFORM if self.pending_transform(arr) else None

    def pending_transform(self, arr) -> bool:
        """Trigger check without counting; disarms on fire."""
        if not self.transform_enabled or arr.is_columnar:
            return False
        st = arr.stats
        if st.rejected:
            self.unlatch_if_grown(arr)
        if st.armed and should_transform(st, arr.length, self.thresholds):
            st.armed = False
            return True
        return False

    def note_backedge(self, fn: str, loop_id: int):
        h = self.hotness(fn)
        n = h.backedges.get(loop_id, 0) + 1
        h.backedges[loop_id] = n
        if n == self.thresholds.hot_backedges and not h.fired:
            h.fired = True
            return Trigger.COMPILE
        return None

    def note_call(self, fn: str):
        h = self.hotness(fn)
        h.calls += 1
        if h.calls == self.thresholds.hot_calls and not h.fired:
            h.fired = True
            return Trigger.COMPILE
        return None
