"""Event-trace data model and its line-delimited record format.

A trace is a sequence of records, one JSON object per line::

    {"k":"frame","id":1,"m":"main","f":"Main.java","l":1}
    {"k":"alloc","tid":1,"ts":5,"obj":7,"addr":4096,"size":64,"ctx":[1,2]}
    {"k":"acc","tid":1,"ts":6,"op":"ld","addr":4104,"w":8,"val":42,"ctx":[1,3]}
    {"k":"free","tid":1,"ts":9,"obj":7}
    {"k":"gt","obj":7,"grp":"g0"}

Contexts are frame-id lists ordered root first, leaf last.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO, Union

U64_MAX = (1 << 64) - 1
WIDTHS = (1, 2, 4, 8)


class MalformedRecord(ValueError):
    """A record could not be decoded or violates a field invariant."""


class InvariantViolation(ValueError):
    """An event object cannot be serialized because it is invalid."""


@dataclass(frozen=True)
class FrameDef:
    frame_id: int
    method: str
    file: str = ""
    line: int = 0

    kind = "frame"


@dataclass(frozen=True)
class Alloc:
    tid: int
    ts: int
    obj_id: int
    base_addr: int
    size: int
    ctx: tuple[int, ...]

    kind = "alloc"

    @property
    def end(self) -> int:
        return self.base_addr + self.size


@dataclass(frozen=True)
class Free:
    tid: int
    ts: int
    obj_id: int

    kind = "free"


@dataclass(frozen=True)
class Access:
    tid: int
    ts: int
    is_load: bool
    addr: int
    width: int
    value: int
    ctx: tuple[int, ...]

    kind = "acc"

    @property
    def op(self) -> str:
        return "ld" if self.is_load else "st"


@dataclass(frozen=True)
class GroundTruth:
    obj_id: int
    group: str = ""

    kind = "gt"


TraceEvent = Union[FrameDef, Alloc, Free, Access, GroundTruth]


def _int(rec: dict, key: str, *, minimum: int = 0) -> int:
    try:
        v = rec[key]
    except KeyError:
        raise MalformedRecord(f"missing key {key!r}") from None
    if isinstance(v, bool) or not isinstance(v, int):
        raise MalformedRecord(f"{key!r} must be an integer, got {v!r}")
    if v < minimum:
        raise MalformedRecord(f"{key!r} must be >= {minimum}, got {v}")
    return v


def _ctx(rec: dict) -> tuple[int, ...]:
    raw = rec.get("ctx")
    if not isinstance(raw, list) or not raw:
        raise MalformedRecord("'ctx' must be a non-empty list of frame ids")
    for f in raw:
        if isinstance(f, bool) or not isinstance(f, int) or f < 0:
            raise MalformedRecord(f"bad frame id {f!r} in ctx")
    return tuple(raw)


def decode(rec: dict) -> TraceEvent:
    """Build an event from an already-decoded record mapping."""
    if not isinstance(rec, dict):
        raise MalformedRecord("record is not an object")
    k = rec.get("k")
    if k == "alloc":
        size = _int(rec, "size", minimum=1)
        return Alloc(_int(rec, "tid"), _int(rec, "ts"), _int(rec, "obj"),
                     _int(rec, "addr"), size, _ctx(rec))
    if k == "acc":
        op = rec.get("op")
        if op not in ("ld", "st"):
            raise MalformedRecord(f"bad access op {op!r}")
        width = _int(rec, "w", minimum=1)
        if width not in WIDTHS:
            raise MalformedRecord(f"access width must be one of {WIDTHS}, got {width}")
        value = _int(rec, "val")
        if value > U64_MAX or value >= 1 << (8 * width):
            raise MalformedRecord(f"value {value} does not fit in {width} bytes")
        return Access(_int(rec, "tid"), _int(rec, "ts"), op == "ld",
                      _int(rec, "addr"), width, value, _ctx(rec))
    if k == "free":
        return Free(_int(rec, "tid"), _int(rec, "ts"), _int(rec, "obj"))
    if k == "frame":
        m = rec.get("m")
        f = rec.get("f", "")
        if not isinstance(m, str) or not isinstance(f, str):
            raise MalformedRecord("frame method/file must be strings")
        line = _int(rec, "l") if "l" in rec else 0
        return FrameDef(_int(rec, "id"), m, f, line)
    if k == "gt":
        grp = rec.get("grp", "")
        if not isinstance(grp, str):
            raise MalformedRecord("'grp' must be a string")
        return GroundTruth(_int(rec, "obj"), grp)
    raise MalformedRecord(f"unknown record kind {k!r}")


def parse_event(line: str) -> TraceEvent:
    """Decode one serialized record."""
    try:
        rec = json.loads(line)
    except (json.JSONDecodeError, RecursionError) as exc:
        raise MalformedRecord(f"bad syntax: {exc}") from None
    return decode(rec)


def encode(ev: TraceEvent) -> dict:
    """Inverse of :func:`decode`; raises InvariantViolation on invalid events."""
    if isinstance(ev, Alloc):
        if ev.size <= 0:
            raise InvariantViolation("alloc size must be positive")
        d = {"k": "alloc", "tid": ev.tid, "ts": ev.ts, "obj": ev.obj_id,
             "addr": ev.base_addr, "size": ev.size, "ctx": list(ev.ctx)}
    elif isinstance(ev, Access):
        if ev.width not in WIDTHS:
            raise InvariantViolation(f"bad width {ev.width}")
        if not 0 <= ev.value < 1 << (8 * ev.width):
            raise InvariantViolation(f"value {ev.value} does not fit in {ev.width} bytes")
        d = {"k": "acc", "tid": ev.tid, "ts": ev.ts, "op": ev.op, "addr": ev.addr,
             "w": ev.width, "val": ev.value, "ctx": list(ev.ctx)}
    elif isinstance(ev, Free):
        d = {"k": "free", "tid": ev.tid, "ts": ev.ts, "obj": ev.obj_id}
    elif isinstance(ev, FrameDef):
        d = {"k": "frame", "id": ev.frame_id, "m": ev.method, "f": ev.file, "l": ev.line}
    elif isinstance(ev, GroundTruth):
        d = {"k": "gt", "obj": ev.obj_id, "grp": ev.group}
    else:
        raise InvariantViolation(f"not a trace event: {ev!r}")
    if "ctx" in d and not d["ctx"]:
        raise InvariantViolation("empty context")
    for key, v in d.items():
        if isinstance(v, int) and v < 0:
            raise InvariantViolation(f"negative {key}")
    return d


def write_event(ev: TraceEvent) -> str:
    """Serialize one event as a compact single-line record (no newline)."""
    return json.dumps(encode(ev), separators=(",", ":"))


def read_trace(lines: Iterable[str], skip_budget: int = 0) -> Iterator[TraceEvent]:
    """Parse records lazily, tolerating at most ``skip_budget`` malformed lines.

    Blank lines are ignored.  Exceeding the budget re-raises the offending
    :class:`MalformedRecord` annotated with its line number.
    """
    skipped = 0
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            yield parse_event(line)
        except MalformedRecord as exc:
            skipped += 1
            if skipped > skip_budget:
                raise MalformedRecord(f"line {lineno}: {exc}") from None


def load_trace(path, skip_budget: int = 0) -> list[TraceEvent]:
    with open(path, encoding="utf-8") as fh:
        return list(read_trace(fh, skip_budget))


def dump_trace(events: Iterable[TraceEvent], out: TextIO) -> None:
    for ev in events:
        out.write(write_event(ev))
        out.write("\n")


def save_trace(events: Iterable[TraceEvent], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        dump_trace(events, fh)


@dataclass
class TraceStats:
    event_count: int = 0
    alloc_count: int = 0
    free_count: int = 0
    access_count: int = 0
    frame_count: int = 0
    gt_count: int = 0
    thread_count: int = 0
    malformed_count: int = 0
    untracked_access_count: int = 0
    diagnostics: list[str] = field(default_factory=list)

    @property
    def typed_count(self) -> int:
        return (self.alloc_count + self.free_count + self.access_count
                + self.frame_count + self.gt_count)


def validate_trace(events: Iterable[TraceEvent]) -> TraceStats:
    """Single pass consistency check of a decoded trace.

    An event that breaks a cross-record rule (overlapping live allocation,
    reused live object id, unknown free, access straddling an object end,
    per-thread timestamp regression, undefined frame) counts as malformed
    instead of under its kind.  Accesses that hit no live object are legal
    and only tallied in ``untracked_access_count``.
    """
    # local import keeps trace.py free of replay-state dependencies
    from .objects import ObjectIndex, OverlapError, UnknownObject

    stats = TraceStats()
    index = ObjectIndex()
    frames: set[int] = set()
    last_ts: dict[int, int] = {}

    def bad(msg: str) -> None:
        stats.malformed_count += 1
        stats.diagnostics.append(f"event {stats.event_count}: {msg}")

    for ev in events:
        stats.event_count += 1
        if isinstance(ev, FrameDef):
            if ev.frame_id in frames:
                bad(f"duplicate frame id {ev.frame_id}")
            else:
                frames.add(ev.frame_id)
                stats.frame_count += 1
            continue
        if isinstance(ev, GroundTruth):
            stats.gt_count += 1
            continue

        prev = last_ts.get(ev.tid)
        if prev is not None and ev.ts <= prev:
            bad(f"thread {ev.tid} timestamp {ev.ts} does not increase past {prev}")
            continue
        last_ts[ev.tid] = ev.ts

        if isinstance(ev, Alloc):
            missing = [f for f in ev.ctx if f not in frames]
            if missing:
                bad(f"alloc uses undefined frames {missing}")
                continue
            try:
                index.register_alloc(ev.obj_id, ev.base_addr, ev.size, ev.ctx)
            except OverlapError as exc:
                bad(str(exc))
                continue
            stats.alloc_count += 1
        elif isinstance(ev, Free):
            try:
                index.release(ev.obj_id)
            except UnknownObject as exc:
                bad(str(exc))
                continue
            stats.free_count += 1
        elif isinstance(ev, Access):
            missing = [f for f in ev.ctx if f not in frames]
            if missing:
                bad(f"access uses undefined frames {missing}")
                continue
            hit = index.resolve(ev.addr)
            if hit is None:
                stats.untracked_access_count += 1
            elif hit[1] + ev.width > hit[0].size:
                bad(f"access at {ev.addr} width {ev.width} straddles object {hit[0].obj_id}")
                continue
            stats.access_count += 1

    stats.thread_count = len(last_ts)
    return stats
