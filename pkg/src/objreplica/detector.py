"""Sampled replica detection state machine.

Per allocation context the detector keeps two FIFO queues of sample tuples:
``prev`` holds samples of the previously sampled object, ``curr`` those of
the newest sampled object.  Every sample taken from the newest object pops
one tuple from ``prev`` and asks the watchpoint unit to watch the same
offset in the newest object.  When the watchpoint fires on a load from the
same access context, the two values are compared.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .cct import CallingContextTree
from .objects import ObjectIndex, ObjectRecord, UnknownObject
from .sampling import Sample
from .watchpoints import ArmDecision, Trap, WatchpointSlot, WatchpointUnit


DEFAULT_QUEUE_CAPACITY = 64


@dataclass(frozen=True)
class SampleTuple:
    access_ctx_id: int
    offset: int
    width: int
    value: int
    obj_id: int
    generation: int


@dataclass(frozen=True)
class ComparisonOutcome:
    alloc_ctx_id: int
    access_ctx_id: int
    offset: int
    equal: bool
    old_value: int
    new_value: int
    old_obj_id: int
    new_obj_id: int


@dataclass
class ContextState:
    alloc_ctx_id: int
    queue_capacity: Optional[int]
    prev_queue: deque = field(init=False)
    curr_queue: deque = field(init=False)
    curr_obj: Optional[int] = None
    curr_generation: int = -1
    curr_size: int = 0
    prev_size: int = 0

    def __post_init__(self):
        self.prev_queue = deque(maxlen=self.queue_capacity)
        self.curr_queue = deque(maxlen=self.queue_capacity)


@dataclass
class RawContextCounters:
    alloc_ctx_id: int
    equivalent: int = 0
    different: int = 0
    objects: int = 0
    samples: int = 0
    accesses: int = 0
    # access ctx id -> [equivalent, different]
    by_access: dict = field(default_factory=dict)

    @property
    def comparisons(self) -> int:
        return self.equivalent + self.different


class ReplicaDetector:
    """Detector for one thread stream.

    ``queue_capacity=None`` gives unbounded queues.
    """

    def __init__(self, index: ObjectIndex, unit: WatchpointUnit, cct: CallingContextTree,
                 queue_capacity: Optional[int] = DEFAULT_QUEUE_CAPACITY) -> None:
        if queue_capacity is not None and queue_capacity < 1:
            raise ValueError("queue capacity must be positive")
        self.index = index
        self.unit = unit
        self.cct = cct
        self.queue_capacity = queue_capacity
        self.contexts: dict[int, ContextState] = {}
        self.counters: dict[int, RawContextCounters] = {}
        self.outcomes: list[ComparisonOutcome] = []
        self.keep_outcomes = False

    def _counters(self, ctx: int) -> RawContextCounters:
        c = self.counters.get(ctx)
        if c is None:
            c = self.counters[ctx] = RawContextCounters(ctx)
        return c

    def on_alloc(self, rec: ObjectRecord) -> None:
        ctx = rec.alloc_ctx_id
        if ctx not in self.contexts:
            self.contexts[ctx] = ContextState(ctx, self.queue_capacity)
        self._counters(ctx).objects += 1

    def note_access(self, rec: ObjectRecord) -> None:
        self._counters(rec.alloc_ctx_id).accesses += 1

    def on_sample(self, sample: Sample) -> list[ArmDecision]:
        state = self.contexts.get(sample.alloc_ctx_id)
        if state is None:
            state = self.contexts[sample.alloc_ctx_id] = ContextState(
                sample.alloc_ctx_id, self.queue_capacity)
        self._counters(sample.alloc_ctx_id).samples += 1
        tup = SampleTuple(sample.access_ctx_id, sample.offset, sample.width,
                          sample.value, sample.obj_id, sample.generation)

        if state.curr_obj is None:
            state.curr_obj = sample.obj_id
            state.curr_generation = sample.generation
            state.curr_size = sample.size
            state.curr_queue.append(tup)
            return []
        if sample.obj_id != state.curr_obj:
            if sample.generation < state.curr_generation:
                # a straggling older object; it cannot pair with anything newer
                return []
            state.prev_queue = state.curr_queue
            state.prev_size = state.curr_size
            state.curr_queue = deque(maxlen=self.queue_capacity)
            state.curr_obj = sample.obj_id
            state.curr_generation = sample.generation
            state.curr_size = sample.size
        state.curr_queue.append(tup)

        if not state.prev_queue or state.prev_size != state.curr_size:
            return []
        target = self.index.get(sample.obj_id)
        if target is None:
            return []
        old = state.prev_queue.popleft()
        if old.offset + old.width > target.size:
            return []
        slot = WatchpointSlot(
            target_obj_id=target.obj_id,
            target_addr=target.base_addr + old.offset,
            target_offset=old.offset,
            width=old.width,
            expected_value=old.value,
            origin_access_ctx_id=old.access_ctx_id,
            origin_alloc_ctx_id=sample.alloc_ctx_id,
            origin_obj_id=old.obj_id,
        )
        return [self.unit.request_arm(slot)]

    def on_trap(self, trap: Trap) -> Optional[ComparisonOutcome]:
        """Turn a fired watchpoint into a comparison, or drop it.

        Only a load from the slot's origin access context, at the watched
        address and width, is compared.  Anything else just consumes the slot.
        """
        slot, ev = trap.slot, trap.event
        if not ev.is_load or ev.addr != slot.target_addr or ev.width != slot.width:
            return None
        access_ctx = self.cct.intern_path(ev.ctx)
        if access_ctx != slot.origin_access_ctx_id:
            return None
        equal = ev.value == slot.expected_value
        out = ComparisonOutcome(slot.origin_alloc_ctx_id, access_ctx, slot.target_offset,
                                equal, slot.expected_value, ev.value,
                                slot.origin_obj_id, slot.target_obj_id)
        c = self._counters(slot.origin_alloc_ctx_id)
        pair = c.by_access.setdefault(access_ctx, [0, 0])
        if equal:
            c.equivalent += 1
            pair[0] += 1
        else:
            c.different += 1
            pair[1] += 1
        if self.keep_outcomes:
            self.outcomes.append(out)
        return out

    def on_free(self, obj_id: int) -> int:
        """Disarm watchpoints on a dying object.  Queues are kept."""
        if self.index.get(obj_id) is None:
            raise UnknownObject(obj_id)
        return self.unit.disarm_for_object(obj_id)

    def finalize(self) -> list[RawContextCounters]:
        return [self.counters[k] for k in sorted(self.counters)]
