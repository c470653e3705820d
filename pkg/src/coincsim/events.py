"""Time-tagged detection events and the stream container shared by the toolkit.

All timestamps are integer picoseconds (int64) inside a half-open observation
interval [0, duration_ps).  Streams are kept in canonical order: sorted by
time, ties broken by channel code.  Generators and detector models are
required to emit canonical streams; :func:`validate_stream` reports (rather
than repairs) violations, which matters when checking externally supplied
time-tag files.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Channel",
    "Event",
    "EventStream",
    "SeedSpec",
    "StreamViolation",
    "ValidationReport",
    "derive_seed",
    "filter_min_separation",
    "merge_streams",
    "validate_stream",
]


class Channel(IntEnum):
    """Detector/electronics channels, ordered by their tie-break priority."""

    TRIGGER = 0  # heralding detector
    D1 = 1       # transmitted-path detector
    D2 = 2       # reflected-path detector
    GATE_GEN = 3  # gate pulse generator


class Event(NamedTuple):
    channel: Channel
    t_ps: int


def _as_times(times) -> np.ndarray:
    arr = np.asarray(times, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("timestamps must be one-dimensional")
    return arr


def _as_codes(codes, n: int) -> np.ndarray:
    arr = np.asarray(codes, dtype=np.uint8)
    if arr.shape != (n,):
        raise ValueError("channel codes must match timestamps in length")
    return arr


@dataclass(frozen=True, eq=False)
class EventStream:
    """Immutable, canonically ordered sequence of detection events.

    ``times`` and ``channels`` are parallel arrays.  The arrays are marked
    read-only on construction; ordering/range invariants are the producer's
    responsibility (see :func:`validate_stream`).
    """

    duration_ps: int
    times: np.ndarray
    channels: np.ndarray

    def __post_init__(self) -> None:
        if self.duration_ps <= 0:
            raise ValueError("duration_ps must be positive")
        t = _as_times(self.times)
        c = _as_codes(self.channels, len(t))
        t.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "channels", c)

    def __len__(self) -> int:
        return len(self.times)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.duration_ps == other.duration_ps
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.channels, other.channels)
        )

    @classmethod
    def from_events(cls, duration_ps: int, events: Iterable[Event | tuple]) -> "EventStream":
        """Build a stream from (channel, t_ps) pairs, preserving given order."""
        evs = list(events)
        times = np.fromiter((e[1] for e in evs), dtype=np.int64, count=len(evs))
        codes = np.fromiter((int(e[0]) for e in evs), dtype=np.uint8, count=len(evs))
        return cls(duration_ps, times, codes)

    def events(self) -> list[Event]:
        return [Event(Channel(int(c)), int(t)) for c, t in zip(self.channels, self.times)]

    def select_channel(self, channel: Channel) -> "EventStream":
        """Sub-stream containing only events on one channel (order kept)."""
        mask = self.channels == np.uint8(int(channel))
        return EventStream(self.duration_ps, self.times[mask], self.channels[mask])

    def counts_by_channel(self) -> dict[Channel, int]:
        return {ch: int(np.count_nonzero(self.channels == int(ch))) for ch in Channel}


def merge_streams(a: EventStream, b: EventStream) -> EventStream:
    """Multiset union of two streams over the same observation interval."""
    if a.duration_ps != b.duration_ps:
        raise ValueError(
            f"cannot merge streams with different durations "
            f"({a.duration_ps} != {b.duration_ps})"
        )
    times = np.concatenate([a.times, b.times])
    codes = np.concatenate([a.channels, b.channels])
    order = np.lexsort((codes, times))
    return EventStream(a.duration_ps, times[order], codes[order])


@dataclass(frozen=True)
class StreamViolation:
    index: int
    kind: str  # "ordering" or "range"
    message: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[StreamViolation, ...]


def validate_stream(stream) -> ValidationReport:
    """Check canonical ordering and timestamp range of a time-tag series.

    Accepts anything exposing ``duration_ps``, ``times`` and a parallel code
    array (``channels`` on event streams, ``arms`` on raw arrival streams).
    Returns a report listing every violating index; never raises.
    """
    times = stream.times
    codes = getattr(stream, "channels", None)
    if codes is None:
        codes = stream.arms
    duration = stream.duration_ps

    violations: list[StreamViolation] = []
    bad_range = np.nonzero((times < 0) | (times >= duration))[0]
    for i in bad_range:
        violations.append(
            StreamViolation(int(i), "range", f"t={int(times[i])} outside [0, {duration})")
        )
    if len(times) > 1:
        dt = np.diff(times)
        dc = np.diff(codes.astype(np.int16))
        bad_order = np.nonzero((dt < 0) | ((dt == 0) & (dc < 0)))[0] + 1
        for i in bad_order:
            violations.append(
                StreamViolation(
                    int(i),
                    "ordering",
                    f"event at index {int(i)} breaks (time, channel) order",
                )
            )
    violations.sort(key=lambda v: v.index)
    return ValidationReport(ok=not violations, violations=tuple(violations))


def filter_min_separation(times: np.ndarray, min_sep_ps: int) -> np.ndarray:
    """Greedy pass keeping events at least ``min_sep_ps`` after the last kept one.

    This is the non-paralyzable hold-off rule shared by detector dead time and
    gate-generator re-arm logic: the first event is kept, and each later event
    is kept iff it falls at or after (last kept time + min_sep_ps).

    Vectorized for the common sparse case: any event whose raw gap to its
    predecessor is >= min_sep_ps survives no matter what happened before it
    (dropping the predecessor only moves the comparison point earlier), so the
    greedy scan is only run inside runs of closer-than-min_sep events.
    """
    times = np.asarray(times, dtype=np.int64)
    n = len(times)
    if min_sep_ps <= 0 or n < 2:
        return times.copy()
    gap_ok = np.diff(times) >= min_sep_ps
    if gap_ok.all():
        return times.copy()
    keep = np.ones(n, dtype=bool)
    starts = np.nonzero(np.concatenate(([True], gap_ok)))[0]
    ends = np.concatenate((starts[1:], [n]))
    for s, e in zip(starts, ends):
        if e - s < 2:
            continue
        last = times[s]
        for i in range(s + 1, e):
            if times[i] - last >= min_sep_ps:
                last = times[i]
            else:
                keep[i] = False
    return times[keep]


_SEED_SEP = b"\x1f"


def derive_seed(*parts: int | str) -> int:
    """Stable 64-bit stream seed from a sequence of labels and indices.

    Uses blake2b so distinct (master seed, acquisition, stage) tuples get
    statistically independent generator states, reproducibly across runs,
    platforms and process boundaries.
    """
    payload = _SEED_SEP.join(str(p).encode("utf-8") for p in parts)
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus the labelled-substream derivation scheme."""

    master_seed: int = 0

    def seed_for(self, acquisition_index: int, stage: str) -> int:
        return derive_seed(self.master_seed, acquisition_index, stage)

    def rng_for(self, acquisition_index: int, stage: str) -> np.random.Generator:
        return np.random.default_rng(self.seed_for(acquisition_index, stage))
