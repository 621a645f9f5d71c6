"""Exhaustive ground truth for replica detection.

Two independent views of a trace:

* :func:`exhaustive_theta_alpha` replays the pairing rule with every load
  sampled, unlimited watchpoints and unbounded queues, using plain
  dictionaries and lists (none of the sampler/detector/watchpoint classes).
* :func:`exact_groups` partitions each allocation context's objects by
  lifetime equivalence: same size and the identical sequence of
  ``(access context, offset, width, value)`` loads.
"""

from __future__ import annotations

import bisect
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .trace import Access, Alloc, Free, GroundTruth, TraceEvent

REPORT_VERSION = "v1"


class LabelMismatch(ValueError):
    pass


@dataclass
class OracleContext:
    alloc_path: tuple[int, ...]
    objects: list[int] = field(default_factory=list)
    groups: list[list[int]] = field(default_factory=list)
    no_evidence: list[int] = field(default_factory=list)
    equivalent: int = 0
    different: int = 0
    # comparisons between objects that are not lifetime-equivalent
    alpha_equal: int = 0
    alpha_total: int = 0

    @property
    def X(self) -> int:
        return len(self.objects)

    @property
    def X_N(self) -> int:
        return max((len(g) for g in self.groups), default=0)

    @property
    def largest_ratio(self) -> Optional[float]:
        return self.X_N / self.X if self.X else None

    @property
    def theta_exact(self) -> Optional[float]:
        n = self.equivalent + self.different
        return self.equivalent / n if n else None

    @property
    def alpha_exact(self) -> float:
        return self.alpha_equal / self.alpha_total if self.alpha_total else 0.0

    @property
    def group_sizes(self) -> list[int]:
        return sorted(len(g) for g in self.groups)


@dataclass
class GroundTruthReport:
    contexts: dict[tuple[int, ...], OracleContext]

    def __getitem__(self, alloc_path) -> OracleContext:
        return self.contexts[tuple(alloc_path)]

    def alpha_by_path(self) -> dict[tuple[int, ...], float]:
        return {p: c.alpha_exact for p, c in self.contexts.items()}

    def to_dict(self) -> dict:
        rows = []
        for path in sorted(self.contexts):
            c = self.contexts[path]
            rows.append({
                "alloc_path": list(path),
                "X": c.X,
                "X_N": c.X_N,
                "largest_ratio": c.largest_ratio,
                "theta_exact": c.theta_exact,
                "alpha_exact": c.alpha_exact,
                "alpha_equal": c.alpha_equal,
                "alpha_total": c.alpha_total,
                "equivalent": c.equivalent,
                "different": c.different,
                "group_sizes": c.group_sizes,
                "groups": sorted(sorted(g) for g in c.groups),
                "no_evidence": sorted(c.no_evidence),
            })
        return {"version": REPORT_VERSION, "contexts": rows}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruthReport":
        out = {}
        for r in d.get("contexts", []):
            path = tuple(r["alloc_path"])
            c = OracleContext(path, equivalent=r.get("equivalent", 0),
                              different=r.get("different", 0),
                              alpha_equal=r.get("alpha_equal", 0),
                              alpha_total=r.get("alpha_total", 0))
            c.groups = [list(g) for g in r.get("groups", [])]
            c.objects = sorted(o for g in c.groups for o in g)
            c.no_evidence = list(r.get("no_evidence", []))
            out[path] = c
        return cls(out)

    @classmethod
    def load(cls, path) -> "GroundTruthReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class _Pending:
    addr: int
    width: int
    expected: int
    access_ctx: tuple
    alloc_ctx: tuple
    old_obj: int
    new_obj: int


def _replay_thread(stream: list, pairs: list, reads: dict, objinfo: dict) -> None:
    bases: list[int] = []
    live: dict[int, tuple] = {}        # base -> (obj, size, alloc ctx, generation)
    by_obj: dict[int, int] = {}        # obj -> base
    gen_count: dict[tuple, int] = defaultdict(int)
    state: dict[tuple, dict] = {}
    pending: list[_Pending] = []

    for ev in stream:
        if isinstance(ev, Alloc):
            g = gen_count[ev.ctx]
            gen_count[ev.ctx] += 1
            bisect.insort(bases, ev.base_addr)
            live[ev.base_addr] = (ev.obj_id, ev.size, ev.ctx, g)
            by_obj[ev.obj_id] = ev.base_addr
            objinfo[ev.obj_id] = (ev.ctx, ev.size)
            reads.setdefault(ev.obj_id, [])
            continue
        if isinstance(ev, Free):
            base = by_obj.pop(ev.obj_id)
            del live[base]
            bases.pop(bisect.bisect_left(bases, base))
            pending = [p for p in pending if p.new_obj != ev.obj_id]
            continue
        if not isinstance(ev, Access):
            continue

        hit = None
        i = bisect.bisect_right(bases, ev.addr) - 1
        if i >= 0:
            obj, size, actx, gen = live[bases[i]]
            off = ev.addr - bases[i]
            if off < size:
                hit = (obj, size, actx, gen, off)

        keep = []
        for p in pending:
            if ev.addr < p.addr + p.width and p.addr < ev.addr + ev.width:
                if (ev.is_load and ev.addr == p.addr and ev.width == p.width
                        and ev.ctx == p.access_ctx):
                    pairs.append((p.alloc_ctx, p.old_obj, p.new_obj, ev.value == p.expected))
            else:
                keep.append(p)
        pending = keep

        if not ev.is_load or hit is None:
            continue
        obj, size, actx, gen, off = hit
        if off + ev.width > size:
            continue
        reads[obj].append((ev.ctx, off, ev.width, ev.value))

        st = state.get(actx)
        tup = (ev.ctx, off, ev.width, ev.value, obj)
        if st is None:
            state[actx] = {"cur": obj, "gen": gen, "size": size, "q": [tup],
                           "prev": [], "prev_size": 0}
            continue
        if obj != st["cur"]:
            if gen < st["gen"]:
                continue
            st["prev"], st["prev_size"] = st["q"], st["size"]
            st["cur"], st["gen"], st["size"], st["q"] = obj, gen, size, []
        st["q"].append(tup)
        if st["prev"] and st["prev_size"] == size:
            o_ctx, o_off, o_w, o_val, o_obj = st["prev"].pop(0)
            pending.append(_Pending(bases[i] + o_off, o_w, o_val, o_ctx, actx, o_obj, obj))


def _analyze(events: Iterable[TraceEvent]) -> tuple[list, dict, dict, dict]:
    streams: dict[int, list] = defaultdict(list)
    labels: dict[int, str] = {}
    for ev in events:
        if isinstance(ev, GroundTruth):
            labels[ev.obj_id] = ev.group
        elif isinstance(ev, (Alloc, Free, Access)):
            streams[ev.tid].append(ev)
    pairs: list = []
    reads: dict = {}
    objinfo: dict = {}
    for tid in sorted(streams):
        _replay_thread(streams[tid], pairs, reads, objinfo)
    return pairs, reads, objinfo, labels


def _build(pairs, reads, objinfo, labels, check_labels: bool) -> GroundTruthReport:
    contexts: dict[tuple, OracleContext] = {}
    sig_of: dict[int, tuple] = {}
    for obj in sorted(objinfo):
        actx, size = objinfo[obj]
        c = contexts.setdefault(actx, OracleContext(actx))
        c.objects.append(obj)
        seq = reads.get(obj)
        if seq:
            sig_of[obj] = (size, tuple(seq))

    for c in contexts.values():
        by_sig: dict[tuple, list[int]] = {}
        for obj in c.objects:
            sig = sig_of.get(obj)
            if sig is None:
                c.no_evidence.append(obj)
                c.groups.append([obj])
            else:
                by_sig.setdefault(sig, []).append(obj)
        c.groups.extend(by_sig.values())
        c.groups.sort(key=lambda g: min(g))
        if check_labels:
            _check_labels(c, labels)

    for actx, old, new, equal in pairs:
        c = contexts[actx]
        if equal:
            c.equivalent += 1
        else:
            c.different += 1
        if sig_of.get(old) != sig_of.get(new):
            c.alpha_total += 1
            c.alpha_equal += equal
    return GroundTruthReport(contexts)


def _check_labels(c: OracleContext, labels: dict[int, str]) -> None:
    evidence = set(c.objects) - set(c.no_evidence)
    labelled = [o for o in c.objects if o in labels and o in evidence]
    if not labelled:
        return
    computed = {}
    for i, g in enumerate(c.groups):
        for o in g:
            computed[o] = i
    by_label: dict[str, set] = defaultdict(set)
    for o in labelled:
        by_label[labels[o]].add(computed[o])
    by_group: dict[int, set] = defaultdict(set)
    for o in labelled:
        by_group[computed[o]].add(labels[o])
    bad = [k for k, v in by_label.items() if len(v) > 1] + [k for k, v in by_group.items() if len(v) > 1]
    if bad:
        raise LabelMismatch(f"context {c.alloc_path}: computed groups disagree with labels {bad[:5]}")


def ground_truth(events: Iterable[TraceEvent], check_labels: bool = True) -> GroundTruthReport:
    """Full oracle report: exact groups plus exhaustive theta and alpha."""
    return _build(*_analyze(events), check_labels=check_labels)


def exhaustive_theta_alpha(events: Iterable[TraceEvent]) -> dict[tuple, tuple[Optional[float], float]]:
    rep = ground_truth(events, check_labels=False)
    return {p: (c.theta_exact, c.alpha_exact) for p, c in rep.contexts.items()}


def exact_groups(events: Iterable[TraceEvent]) -> GroundTruthReport:
    return ground_truth(events, check_labels=True)
