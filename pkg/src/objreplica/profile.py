"""Profiles: a frame table, a CCT of allocation contexts with counters, run metadata."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .cct import CallingContextTree, FrameTableMismatch, merge
from .trace import FrameDef

PROFILE_VERSION = "v1"
COUNTER_KEYS = ("equivalent", "different", "objects", "samples", "accesses")
# metadata that must agree before two profiles can be summed
STRICT_META = ("period", "jitter", "watchpoints", "queue_capacity")


class ConfigConflict(ValueError):
    pass


@dataclass
class ContextCounters:
    alloc_path: tuple[int, ...]
    equivalent: int = 0
    different: int = 0
    objects: int = 0
    samples: int = 0
    accesses: int = 0
    access: dict = field(default_factory=dict)  # access path -> (equivalent, different)

    @property
    def comparisons(self) -> int:
        return self.equivalent + self.different


@dataclass
class Profile:
    frames: dict[int, FrameDef] = field(default_factory=dict)
    cct: CallingContextTree = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.cct is None:
            self.cct = CallingContextTree(self.frames)

    def contexts(self) -> list[ContextCounters]:
        out = []
        for path, m in sorted(self.cct.paths().items()):
            acc = {tuple(p): (v.get("equivalent", 0), v.get("different", 0))
                   for p, v in m.get("access", {}).items()}
            out.append(ContextCounters(path, *(m.get(k, 0) for k in COUNTER_KEYS), access=acc))
        return out

    def context(self, alloc_path) -> Optional[ContextCounters]:
        for c in self.contexts():
            if c.alloc_path == tuple(alloc_path):
                return c
        return None

    def add_context(self, alloc_path, equivalent=0, different=0, objects=0, samples=0,
                    accesses=0, access: Optional[dict] = None) -> None:
        metrics = {"equivalent": equivalent, "different": different, "objects": objects,
                   "samples": samples, "accesses": accesses,
                   "access": {tuple(p): {"equivalent": e, "different": d}
                              for p, (e, d) in (access or {}).items()}}
        self.cct.add(tuple(alloc_path), metrics)

    def to_dict(self) -> dict:
        meta = dict(self.meta)
        if "threads" in meta:
            meta["threads"] = sorted(meta["threads"])
        return {
            "version": PROFILE_VERSION,
            "meta": {k: meta[k] for k in sorted(meta)},
            "frames": [{"id": f.frame_id, "m": f.method, "f": f.file, "l": f.line}
                       for f in (self.frames[k] for k in sorted(self.frames))],
            "contexts": [
                {"alloc_path": list(c.alloc_path),
                 **{k: getattr(c, k) for k in COUNTER_KEYS},
                 "access_paths": [{"path": list(p), "equivalent": e, "different": d}
                                  for p, (e, d) in sorted(c.access.items())]}
                for c in self.contexts()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "Profile":
        if d.get("version") != PROFILE_VERSION:
            raise ValueError(f"unsupported profile version {d.get('version')!r}")
        frames = {f["id"]: FrameDef(f["id"], f["m"], f.get("f", ""), f.get("l", 0))
                  for f in d.get("frames", [])}
        prof = cls(frames=frames, meta=dict(d.get("meta", {})))
        for c in d.get("contexts", []):
            prof.add_context(c["alloc_path"], *(c.get(k, 0) for k in COUNTER_KEYS),
                             access={tuple(a["path"]): (a["equivalent"], a["different"])
                                     for a in c.get("access_paths", [])})
        return prof

    @classmethod
    def from_json(cls, text: str) -> "Profile":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "Profile":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def _merge_meta(a: dict, b: dict) -> dict:
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    out = dict(a)
    for k, v in b.items():
        if k == "threads":
            out["threads"] = sorted(set(a.get("threads", [])) | set(v))
        elif k in out and out[k] != v:
            if k in STRICT_META or k == "seed":
                raise ConfigConflict(f"profiles disagree on {k}: {out[k]!r} vs {v!r}")
        else:
            out[k] = v
    return out


def merge_two(a: Profile, b: Profile) -> Profile:
    frames = dict(a.frames)
    for fid, fd in b.frames.items():
        if fid in frames and frames[fid] != fd:
            raise FrameTableMismatch(f"frame {fid} differs between profiles")
        frames[fid] = fd
    tree = merge(a.cct, b.cct)
    tree.frames = frames
    return Profile(frames=frames, cct=tree, meta=_merge_meta(a.meta, b.meta))


def merge_profiles(profiles: Iterable[Profile]) -> Profile:
    """Sum counters of identical allocation paths across profiles."""
    out = Profile()
    for p in profiles:
        out = merge_two(out, p)
    return out
