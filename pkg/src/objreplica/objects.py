"""Live-object map from memory intervals to allocation records."""

from __future__ import annotations

import bisect
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Iterator, Optional


class OverlapError(ValueError):
    pass


class UnknownObject(KeyError):
    def __str__(self) -> str:
        return f"unknown or dead object {self.args[0]!r}"


@dataclass
class ObjectRecord:
    obj_id: int
    base_addr: int
    size: int
    alloc_ctx_id: Hashable
    generation: int
    live: bool = True

    @property
    def end(self) -> int:
        return self.base_addr + self.size

    def contains(self, addr: int) -> bool:
        return self.base_addr <= addr < self.end


class ObjectIndex:
    """Ordered set of live ``[base, base+size)`` intervals.

    Identity is the object id; addresses may be reused after release.
    ``generation`` numbers allocations per allocation context from 0.
    """

    def __init__(self) -> None:
        self._bases: list[int] = []
        self._by_base: dict[int, ObjectRecord] = {}
        self._by_id: dict[int, ObjectRecord] = {}
        self._generations: dict[Hashable, int] = defaultdict(int)

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self) -> Iterator[ObjectRecord]:
        return (self._by_base[b] for b in self._bases)

    def get(self, obj_id: int) -> Optional[ObjectRecord]:
        return self._by_id.get(obj_id)

    def allocations_at(self, alloc_ctx_id: Hashable) -> int:
        """Number of objects ever registered at ``alloc_ctx_id``."""
        return self._generations.get(alloc_ctx_id, 0)

    def register_alloc(self, obj_id: int, base_addr: int, size: int,
                       alloc_ctx_id: Hashable) -> ObjectRecord:
        if size <= 0:
            raise ValueError(f"object size must be positive, got {size}")
        if obj_id in self._by_id:
            raise OverlapError(f"object id {obj_id} is already live")
        end = base_addr + size
        i = bisect.bisect_left(self._bases, base_addr)
        if i < len(self._bases) and self._bases[i] < end:
            other = self._by_base[self._bases[i]]
            raise OverlapError(f"[{base_addr}, {end}) overlaps live object {other.obj_id}")
        if i > 0:
            other = self._by_base[self._bases[i - 1]]
            if other.end > base_addr:
                raise OverlapError(f"[{base_addr}, {end}) overlaps live object {other.obj_id}")

        gen = self._generations[alloc_ctx_id]
        self._generations[alloc_ctx_id] = gen + 1
        rec = ObjectRecord(obj_id, base_addr, size, alloc_ctx_id, gen)
        self._bases.insert(i, base_addr)
        self._by_base[base_addr] = rec
        self._by_id[obj_id] = rec
        return rec

    def release(self, obj_id: int) -> ObjectRecord:
        rec = self._by_id.pop(obj_id, None)
        if rec is None:
            raise UnknownObject(obj_id)
        i = bisect.bisect_left(self._bases, rec.base_addr)
        del self._bases[i]
        del self._by_base[rec.base_addr]
        rec.live = False
        return rec

    def lookup(self, addr: int) -> Optional[ObjectRecord]:
        i = bisect.bisect_right(self._bases, addr) - 1
        if i < 0:
            return None
        rec = self._by_base[self._bases[i]]
        return rec if addr < rec.end else None

    def resolve(self, addr: int) -> Optional[tuple[ObjectRecord, int]]:
        """Return ``(record, offset)`` for the live object enclosing ``addr``."""
        rec = self.lookup(addr)
        if rec is None:
            return None
        return rec, addr - rec.base_addr
