"""Trace replay: sampler -> detector -> watchpoint unit, one stream per thread."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Optional

from .cct import CallingContextTree
from .detector import DEFAULT_QUEUE_CAPACITY, ReplicaDetector
from .objects import ObjectIndex
from .profile import Profile
from .sampling import DEFAULT_PERIOD, LoadSampler, SamplerConfig, materialize
from .trace import Access, Alloc, FrameDef, Free, TraceEvent
from .watchpoints import DEFAULT_WATCHPOINTS, WatchpointUnit


@dataclass(frozen=True)
class DetectConfig:
    period: int = DEFAULT_PERIOD
    jitter: float = 0.25
    seed: int = 0
    watchpoints: Optional[int] = DEFAULT_WATCHPOINTS
    queue_capacity: Optional[int] = DEFAULT_QUEUE_CAPACITY

    def __post_init__(self):
        # raises on bad period/jitter
        self.sampler()
        if self.watchpoints is not None and self.watchpoints < 1:
            raise ValueError("watchpoints must be >= 1")
        if self.queue_capacity is not None and self.queue_capacity < 1:
            raise ValueError("queue capacity must be >= 1")

    def sampler(self) -> SamplerConfig:
        return SamplerConfig(self.period, self.jitter, self.seed)

    def meta(self) -> dict:
        return asdict(self)


EXHAUSTIVE = DetectConfig(period=1, jitter=0.0, watchpoints=None, queue_capacity=None)


class ThreadReplayer:
    """All replay state owned by one thread stream."""

    def __init__(self, tid: int, config: DetectConfig,
                 frames: Optional[dict[int, FrameDef]] = None) -> None:
        self.tid = tid
        self.config = config
        self.cct = CallingContextTree(frames)
        self.index = ObjectIndex()
        self.sampler = LoadSampler(config.sampler(), tid)
        self.unit = WatchpointUnit(config.watchpoints, config.seed, tid)
        self.detector = ReplicaDetector(self.index, self.unit, self.cct, config.queue_capacity)

    def feed(self, ev: TraceEvent) -> None:
        if isinstance(ev, Access):
            rec = self.index.lookup(ev.addr)
            if rec is not None:
                self.detector.note_access(rec)
            # a trap is taken before the access can be sampled
            for trap in self.unit.check_trap(ev):
                self.detector.on_trap(trap)
            if ev.is_load:
                trig = self.sampler.offer(ev)
                if trig is not None:
                    sample = materialize(trig, self.index, self.cct)
                    if sample is not None:
                        self.detector.on_sample(sample)
        elif isinstance(ev, Alloc):
            ctx = self.cct.intern_path(ev.ctx)
            rec = self.index.register_alloc(ev.obj_id, ev.base_addr, ev.size, ctx)
            self.detector.on_alloc(rec)
        elif isinstance(ev, Free):
            self.detector.on_free(ev.obj_id)
            self.index.release(ev.obj_id)
        elif isinstance(ev, FrameDef):
            self.cct.define_frame(ev)

    def profile(self) -> Profile:
        prof = Profile(frames=dict(self.cct.frames), meta={**self.config.meta(), "threads": [self.tid]})
        for c in self.detector.finalize():
            metrics = {
                "equivalent": c.equivalent, "different": c.different,
                "objects": c.objects, "samples": c.samples, "accesses": c.accesses,
                "access": {self.cct.path_of(a): {"equivalent": e, "different": d}
                           for a, (e, d) in c.by_access.items()},
            }
            prof.cct.add(self.cct.path_of(c.alloc_ctx_id), metrics)
        return prof


def split_threads(events: Iterable[TraceEvent]) -> tuple[dict[int, FrameDef], dict[int, list[TraceEvent]]]:
    frames: dict[int, FrameDef] = {}
    streams: dict[int, list[TraceEvent]] = {}
    for ev in events:
        if isinstance(ev, FrameDef):
            frames[ev.frame_id] = ev
        elif isinstance(ev, (Alloc, Free, Access)):
            streams.setdefault(ev.tid, []).append(ev)
    return frames, streams


def thread_profiles(events: Iterable[TraceEvent], config: DetectConfig) -> list[Profile]:
    """Replay each thread independently; result ordered by thread id."""
    frames, streams = split_threads(events)
    out = []
    for tid in sorted(streams):
        r = ThreadReplayer(tid, config, frames)
        for ev in streams[tid]:
            r.feed(ev)
        out.append(r.profile())
    return out


def detect(events: Iterable[TraceEvent], config: DetectConfig = DetectConfig()) -> Profile:
    """Replay a whole trace and merge the per-thread profiles."""
    from .profile import merge_profiles

    events = list(events)
    frames, _ = split_threads(events)
    merged = merge_profiles(thread_profiles(events, config))
    merged.frames.update(frames)
    merged.cct.frames.update(frames)
    if not merged.meta:
        merged.meta = {**config.meta(), "threads": []}
    return merged
