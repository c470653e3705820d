"""Reading and writing time-tag files.

Two interchange formats are supported:

CSV (text)
    Header line ``channel,t_ps`` followed by one row per event, channel
    spelled as T, D1, D2 or G and the timestamp in integer picoseconds.
    The observation duration is not stored; on parse it defaults to
    (last timestamp + 1) unless passed explicitly.

TTAG1 (binary)
    Little-endian throughout.  A 14-byte header: the 5 magic bytes
    ``TTAG1``, a 1-byte format version (currently 1), an 8-byte unsigned
    observation duration in picoseconds.  Then 9-byte records: 8-byte
    signed timestamp, 1-byte channel code (0=T, 1=D1, 2=D2, 3=G).

Parsing is strict: unknown channels, malformed rows, timestamps outside
[0, duration), truncated records and out-of-order events all raise
DataFormatError (an unsorted file is evidence of corruption or a wrong
clock, so it is reported rather than silently sorted).
"""

from __future__ import annotations

import struct
from enum import Enum

import numpy as np

from .errors import DataFormatError
from .events import Channel, EventStream, validate_stream

__all__ = ["TimetagFormat", "parse_timetag_file", "write_timetag_file"]

_MAGIC = b"TTAG1"
_VERSION = 1
_HEADER = struct.Struct("<5sBQ")
_RECORD_DTYPE = np.dtype([("t", "<i8"), ("ch", "u1")])

_CHANNEL_NAMES = {
    Channel.TRIGGER: "T",
    Channel.D1: "D1",
    Channel.D2: "D2",
    Channel.GATE_GEN: "G",
}
_NAME_TO_CHANNEL = {v: k for k, v in _CHANNEL_NAMES.items()}


class TimetagFormat(Enum):
    CSV = "csv"
    TTAG1 = "ttag1"


def _check_invariants(stream: EventStream, what: str) -> EventStream:
    report = validate_stream(stream)
    if not report.ok:
        v = report.violations[0]
        raise DataFormatError(f"{what}: {v.kind} violation at event {v.index}: {v.message}")
    return stream


def _parse_csv(text: str, duration_ps: int | None) -> EventStream:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "channel,t_ps":
        raise DataFormatError("CSV time-tag file must start with header 'channel,t_ps'")
    times: list[int] = []
    codes: list[int] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataFormatError(f"line {lineno}: expected 'channel,t_ps', got {line!r}")
        name, t_text = parts[0].strip(), parts[1].strip()
        channel = _NAME_TO_CHANNEL.get(name)
        if channel is None:
            raise DataFormatError(
                f"line {lineno}: unknown channel {name!r} (expected T, D1, D2 or G)"
            )
        try:
            t = int(t_text)
        except ValueError:
            raise DataFormatError(f"line {lineno}: bad timestamp {t_text!r}") from None
        times.append(t)
        codes.append(int(channel))
    t_arr = np.asarray(times, dtype=np.int64)
    if duration_ps is None:
        duration_ps = max(int(t_arr.max()) + 1, 1) if len(t_arr) else 1
    stream = EventStream(duration_ps, t_arr, np.asarray(codes, dtype=np.uint8))
    return _check_invariants(stream, "CSV time-tag file")


def _parse_ttag1(data: bytes, duration_ps: int | None) -> EventStream:
    if len(data) < _HEADER.size:
        raise DataFormatError("TTAG1 file shorter than its 14-byte header")
    magic, version, stored_duration = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise DataFormatError(f"bad magic {magic!r}: not a TTAG1 file")
    if version != _VERSION:
        raise DataFormatError(f"unsupported TTAG1 version {version}")
    body = data[_HEADER.size:]
    if len(body) % _RECORD_DTYPE.itemsize != 0:
        raise DataFormatError(
            f"TTAG1 body of {len(body)} bytes is not a whole number of "
            f"{_RECORD_DTYPE.itemsize}-byte records (truncated file?)"
        )
    records = np.frombuffer(body, dtype=_RECORD_DTYPE)
    codes = records["ch"]
    if len(codes) and int(codes.max()) > int(Channel.GATE_GEN):
        bad = int(np.nonzero(codes > int(Channel.GATE_GEN))[0][0])
        raise DataFormatError(f"record {bad}: unknown channel code {int(codes[bad])}")
    if duration_ps is None:
        duration_ps = int(stored_duration)
    if duration_ps <= 0:
        raise DataFormatError("TTAG1 duration must be positive")
    stream = EventStream(duration_ps, records["t"].astype(np.int64), codes.copy())
    return _check_invariants(stream, "TTAG1 file")


def parse_timetag_file(
    data: bytes | str,
    fmt: TimetagFormat | str,
    duration_ps: int | None = None,
) -> EventStream:
    """Parse raw file content into an event stream, validating invariants.

    ``duration_ps`` overrides the duration stored in (TTAG1) or inferred
    from (CSV) the file.
    """
    fmt = TimetagFormat(fmt) if not isinstance(fmt, TimetagFormat) else fmt
    if fmt is TimetagFormat.CSV:
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        return _parse_csv(text, duration_ps)
    if isinstance(data, str):
        raise DataFormatError("TTAG1 input must be bytes")
    return _parse_ttag1(data, duration_ps)


def write_timetag_file(stream: EventStream, fmt: TimetagFormat | str) -> bytes:
    """Serialize an event stream; the exact inverse of parse_timetag_file."""
    fmt = TimetagFormat(fmt) if not isinstance(fmt, TimetagFormat) else fmt
    _check_invariants(stream, "stream to serialize")
    if fmt is TimetagFormat.CSV:
        rows = ["channel,t_ps"]
        rows.extend(
            f"{_CHANNEL_NAMES[Channel(int(c))]},{int(t)}"
            for c, t in zip(stream.channels, stream.times)
        )
        return ("\n".join(rows) + "\n").encode("utf-8")
    header = _HEADER.pack(_MAGIC, _VERSION, stream.duration_ps)
    records = np.empty(len(stream), dtype=_RECORD_DTYPE)
    records["t"] = stream.times
    records["ch"] = stream.channels
    return header + records.tobytes()
