"""Gate construction and windowed coincidence counting.

A gate is the half-open interval [open, open + window): an event exactly at
the opening time is inside, an event exactly at the close is not.  Counting
is binary per gate and channel, which models a gated counter that latches on
the first event in the window.

Two gate sources are supported: gates opened by trigger-channel events
(heralded operation) and strictly periodic gates from a pulse generator.
Overlap between consecutive gates is either forbidden by dropping the later
trigger (DROP_OVERLAPPING, the default, mirroring a re-triggerable gate
circuit that ignores triggers while busy) or allowed (ALLOW_OVERLAP).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import ConfigError
from .events import EventStream, filter_min_separation

__all__ = [
    "CountSummary",
    "Gate",
    "GateList",
    "GatePolicy",
    "Histogram",
    "count_gates",
    "make_gates_from_trigger",
    "make_gates_periodic",
    "time_difference_histogram",
]


class GatePolicy(Enum):
    DROP_OVERLAPPING = "drop_overlapping"
    ALLOW_OVERLAP = "allow_overlap"


class Gate(NamedTuple):
    open_ps: int
    close_ps: int


@dataclass(frozen=True, eq=False)
class GateList:
    """Sorted gate openings sharing one window length."""

    window_ps: int
    opens: np.ndarray

    def __post_init__(self) -> None:
        if self.window_ps <= 0:
            raise ConfigError("window_ps must be positive")
        opens = np.asarray(self.opens, dtype=np.int64)
        opens.setflags(write=False)
        object.__setattr__(self, "opens", opens)

    def __len__(self) -> int:
        return len(self.opens)

    @property
    def closes(self) -> np.ndarray:
        return self.opens + self.window_ps

    def gates(self) -> list[Gate]:
        return [Gate(int(o), int(o) + self.window_ps) for o in self.opens]


def make_gates_from_trigger(
    trigger_events: EventStream, window_ps: int, policy: GatePolicy = GatePolicy.DROP_OVERLAPPING
) -> GateList:
    """One gate per trigger event, optionally dropping overlapped openings.

    Under DROP_OVERLAPPING a trigger arriving before the previous accepted
    gate has closed is discarded (greedy, in time order), so accepted gates
    never overlap.
    """
    opens = trigger_events.times
    if policy is GatePolicy.DROP_OVERLAPPING:
        opens = filter_min_separation(opens, window_ps)
    else:
        opens = opens.copy()
    return GateList(window_ps, opens)


def make_gates_periodic(rate_hz: float, duration_ps: int, window_ps: int) -> GateList:
    """Strictly periodic gates from a pulse generator running at ``rate_hz``.

    The k-th opening sits at round(k * 1e12 / rate_hz), i.e. on the ideal
    periodic grid rounded to the picosecond tick, and openings at or beyond
    ``duration_ps`` are discarded.  Rounding per opening (rather than rounding
    one period and multiplying) keeps the long-run rate exact: 65 kHz over one
    second yields exactly 65000 gates.
    """
    if rate_hz <= 0 or not np.isfinite(rate_hz):
        raise ConfigError("gate rate_hz must be finite and > 0")
    if duration_ps <= 0:
        raise ConfigError("duration_ps must be positive")
    if window_ps <= 0:
        raise ConfigError("window_ps must be positive")
    period_ps = 1e12 / rate_hz
    if window_ps >= period_ps:
        raise ConfigError(
            f"gate window ({window_ps} ps) must be shorter than the gate period "
            f"({period_ps:.0f} ps): consecutive gates would overlap"
        )
    n = int(np.ceil(duration_ps / period_ps)) + 1
    k = np.arange(n, dtype=np.float64)
    opens = np.rint(k * period_ps).astype(np.int64)
    opens = opens[opens < duration_ps]
    return GateList(window_ps, opens)


@dataclass(frozen=True)
class CountSummary:
    """Binary per-gate counts: gates, singles on each channel, coincidences."""

    n_gates: int
    n1: int
    n2: int
    nc: int

    def __post_init__(self) -> None:
        for name in ("n_gates", "n1", "n2", "nc"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer")

    def __add__(self, other: "CountSummary") -> "CountSummary":
        if not isinstance(other, CountSummary):
            return NotImplemented
        return CountSummary(
            self.n_gates + other.n_gates,
            self.n1 + other.n1,
            self.n2 + other.n2,
            self.nc + other.nc,
        )


def _gate_hits(gates: GateList, times: np.ndarray) -> np.ndarray:
    """Boolean per gate: does [open, close) contain at least one event?"""
    lo = np.searchsorted(times, gates.opens, side="left")
    hi = np.searchsorted(times, gates.closes, side="left")
    return hi > lo


def count_gates(gates: GateList, d1: EventStream, d2: EventStream) -> CountSummary:
    """Count gates in which each channel fired, and both fired together.

    Counting is binary per gate: multiple events inside one window count
    once.  A coincidence is a gate in which both channels fired, regardless
    of their order inside the window.
    """
    h1 = _gate_hits(gates, d1.times)
    h2 = _gate_hits(gates, d2.times)
    return CountSummary(
        n_gates=len(gates),
        n1=int(np.count_nonzero(h1)),
        n2=int(np.count_nonzero(h2)),
        nc=int(np.count_nonzero(h1 & h2)),
    )


@dataclass(frozen=True, eq=False)
class Histogram:
    """Histogram of start-to-stop delays over [lo_ps, hi_ps) in fixed bins."""

    lo_ps: int
    hi_ps: int
    bin_width_ps: int
    counts: np.ndarray

    @property
    def edges_ps(self) -> np.ndarray:
        return self.lo_ps + self.bin_width_ps * np.arange(len(self.counts) + 1, dtype=np.int64)


def time_difference_histogram(
    starts: EventStream,
    stops: EventStream,
    lo_ps: int,
    hi_ps: int,
    bin_width_ps: int,
) -> Histogram:
    """Start-stop delay histogram with time-to-amplitude converter semantics.

    For each start event, only the *first* stop event at delay >= lo_ps
    contributes (a started converter is busy until its stop); the delay is
    binned if it falls in [lo_ps, hi_ps).  With Poisson stops at rate r the
    flat accidental floor is r * bin_width * n_starts counts per bin.
    """
    if bin_width_ps <= 0:
        raise ConfigError("bin_width_ps must be positive")
    if hi_ps <= lo_ps:
        raise ConfigError("hi_ps must exceed lo_ps")
    n_bins = -((lo_ps - hi_ps) // bin_width_ps)  # ceil((hi-lo)/width)
    stop_t = stops.times
    idx = np.searchsorted(stop_t, starts.times + lo_ps, side="left")
    valid = idx < len(stop_t)
    delays = stop_t[idx[valid]] - starts.times[valid]
    delays = delays[delays < hi_ps]  # >= lo_ps holds by construction
    bins = (delays - lo_ps) // bin_width_ps
    counts = np.bincount(bins, minlength=n_bins).astype(np.int64)
    return Histogram(lo_ps, hi_ps, bin_width_ps, counts)
