"""Simulated PMU load sampling.

Each thread owns a countdown of loads; when it reaches zero the current load
is sampled and the countdown reloads with a jittered gap.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .cct import CallingContextTree
from .objects import ObjectIndex
from .trace import Access

# Period used on real hardware.  Desk-scale traces are far shorter, so the
# library default is much smaller.
HARDWARE_PERIOD = 5_000_000
DEFAULT_PERIOD = 101


@dataclass(frozen=True)
class SamplerConfig:
    period: int = DEFAULT_PERIOD
    jitter_fraction: float = 0.25
    rng_seed: int = 0

    def __post_init__(self):
        if isinstance(self.period, bool) or not isinstance(self.period, int) or self.period < 1:
            raise ValueError(f"period must be a positive integer, got {self.period!r}")
        if not 0.0 <= self.jitter_fraction < 1.0:
            raise ValueError(f"jitter must be in [0, 1), got {self.jitter_fraction!r}")


def next_gap(config: SamplerConfig, rng: random.Random) -> int:
    """Draw the number of loads until the next sample.

    Uniform on ``[period*(1-j), period*(1+j)]``, rounded, at least 1.
    """
    p, j = config.period, config.jitter_fraction
    if j == 0.0 or p == 1:
        return p
    return max(1, round(rng.uniform(p * (1.0 - j), p * (1.0 + j))))


def thread_rng(seed: int, tid: int, stream: str) -> random.Random:
    """Independent deterministic stream per (seed, thread, purpose)."""
    return random.Random(f"{seed}/{tid}/{stream}")


@dataclass(frozen=True)
class SampleTrigger:
    event: Access


@dataclass(frozen=True)
class Sample:
    obj_id: int
    generation: int
    alloc_ctx_id: int
    access_ctx_id: int
    offset: int
    value: int
    width: int
    ts: int
    size: int


class LoadSampler:
    """Per-thread load countdown.  Stores never trigger."""

    def __init__(self, config: SamplerConfig, tid: int = 0) -> None:
        self.config = config
        self.rng = thread_rng(config.rng_seed, tid, "pmu")
        # counters start at an arbitrary phase; without this, small periods
        # lock onto loop strides identically for every seed
        self.countdown = self.rng.randint(1, next_gap(config, self.rng))
        self.loads_seen = 0
        self.triggers = 0

    def offer(self, event: Access) -> Optional[SampleTrigger]:
        if not event.is_load:
            return None
        self.loads_seen += 1
        self.countdown -= 1
        if self.countdown > 0:
            return None
        self.countdown = next_gap(self.config, self.rng)
        self.triggers += 1
        return SampleTrigger(event)


def materialize(trigger: SampleTrigger, index: ObjectIndex,
                cct: CallingContextTree) -> Optional[Sample]:
    """Attribute a sampled load to its enclosing live object, if any.

    The value is the one the load observed, so a store between two samples
    at the same address yields two distinct sampled values.
    """
    ev = trigger.event
    hit = index.resolve(ev.addr)
    if hit is None:
        return None
    rec, offset = hit
    if offset + ev.width > rec.size:
        return None
    return Sample(obj_id=rec.obj_id, generation=rec.generation,
                  alloc_ctx_id=rec.alloc_ctx_id,
                  access_ctx_id=cct.intern_path(ev.ctx),
                  offset=offset, value=ev.value, width=ev.width, ts=ev.ts,
                  size=rec.size)
