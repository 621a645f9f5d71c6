"""Simulated debug-register watchpoints with reservoir replacement."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .trace import Access

DEFAULT_WATCHPOINTS = 4


@dataclass(frozen=True)
class WatchpointSlot:
    target_obj_id: int
    target_addr: int
    target_offset: int
    width: int
    expected_value: int
    origin_access_ctx_id: int
    origin_alloc_ctx_id: int
    origin_obj_id: int = -1
    armed: bool = True

    def overlaps(self, addr: int, width: int) -> bool:
        return addr < self.target_addr + self.width and self.target_addr < addr + width


class ArmOutcome(enum.Enum):
    ARMED_NEW_SLOT = "armed"
    REPLACED_SLOT = "replaced"
    REJECTED = "rejected"


@dataclass(frozen=True)
class ArmDecision:
    outcome: ArmOutcome
    slot: Optional[int] = None
    evicted: Optional[WatchpointSlot] = None


@dataclass(frozen=True)
class Trap:
    slot: WatchpointSlot
    event: Access

    @property
    def observed_value(self) -> int:
        return self.event.value


def reservoir_choice(t, capacity, u, j):
    """Replacement rule for the ``t``-th request against ``capacity`` full slots.

    ``u`` is uniform on [0, 1) and ``j`` uniform on ``{0..capacity-1}``.
    Returns the slot to overwrite, or -1 to reject.  Works elementwise on
    numpy arrays as well as on scalars.
    """
    keep = u * t < capacity
    if isinstance(keep, np.ndarray):
        return np.where(keep, j, -1)
    return j if keep else -1


class WatchpointUnit:
    """``capacity`` watchpoint registers; ``capacity=None`` means unlimited.

    ``requests`` counts every arm request seen so far (the reservoir's t).
    """

    def __init__(self, capacity: Optional[int] = DEFAULT_WATCHPOINTS, seed: int = 0,
                 tid: int = 0) -> None:
        if capacity is not None and capacity < 1:
            raise ValueError(f"watchpoint count must be >= 1, got {capacity}")
        self.capacity = capacity
        self.slots: list[Optional[WatchpointSlot]] = [] if capacity is None else [None] * capacity
        self.rng = random.Random(f"{seed}/{tid}/reservoir")
        self.requests = 0
        self.replaced = 0
        self.rejected = 0

    @property
    def armed(self) -> list[WatchpointSlot]:
        return [s for s in self.slots if s is not None]

    def __len__(self) -> int:
        return sum(1 for s in self.slots if s is not None)

    def request_arm(self, candidate: WatchpointSlot) -> ArmDecision:
        if candidate.width > 8:
            raise ValueError("watchpoints cover at most 8 bytes")
        self.requests += 1
        for i, s in enumerate(self.slots):
            if s is None:
                self.slots[i] = candidate
                return ArmDecision(ArmOutcome.ARMED_NEW_SLOT, i)
        if self.capacity is None:
            self.slots.append(candidate)
            return ArmDecision(ArmOutcome.ARMED_NEW_SLOT, len(self.slots) - 1)

        victim = reservoir_choice(self.requests, self.capacity,
                                  self.rng.random(), self.rng.randrange(self.capacity))
        if victim < 0:
            self.rejected += 1
            return ArmDecision(ArmOutcome.REJECTED)
        evicted = self.slots[victim]
        self.slots[victim] = candidate
        self.replaced += 1
        return ArmDecision(ArmOutcome.REPLACED_SLOT, victim, replace(evicted, armed=False))

    def check_trap(self, event: Access) -> list[Trap]:
        """Fire and disarm every slot whose bytes the access touches.

        Loads and stores both trap; the caller decides what a trap means.
        """
        traps = []
        for i, s in enumerate(self.slots):
            if s is not None and s.overlaps(event.addr, event.width):
                self.slots[i] = None
                traps.append(Trap(replace(s, armed=False), event))
        if traps and self.capacity is None:
            self.slots = [s for s in self.slots if s is not None]
        return traps

    def disarm_for_object(self, obj_id: int) -> int:
        n = 0
        for i, s in enumerate(self.slots):
            if s is not None and s.target_obj_id == obj_id:
                self.slots[i] = None
                n += 1
        if n and self.capacity is None:
            self.slots = [s for s in self.slots if s is not None]
        return n
