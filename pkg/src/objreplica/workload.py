"""Synthetic traces with a controlled replica-group structure.

Every object of a context goes through the same lifetime::

    alloc -> one store per word -> loads (pass 1) -> updates -> loads (pass 2) -> free

The load schedule (which word, from which access context) is shared by all
objects of a context, so objects of one group produce identical load
sequences, while objects of different groups differ in at least one word.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .trace import Access, Alloc, FrameDef, Free, GroundTruth, TraceEvent

WORD = 8
_MASK = (1 << 64) - 1
ORDERS = ("mixed", "shuffled", "blocked")


class ConfigInvalid(ValueError):
    pass


@dataclass(frozen=True)
class ContextSpec:
    group_sizes: tuple[int, ...]
    object_size: int = 64
    reads_per_object: Optional[int] = None   # default: two passes over every word
    writes_per_object: Optional[int] = None  # default: one store per word
    values: str = "distinct"
    order: str = "mixed"

    @property
    def words(self) -> int:
        return self.object_size // WORD

    @property
    def X(self) -> int:
        return sum(self.group_sizes)

    def validate(self) -> None:
        if not self.group_sizes or any(g < 1 for g in self.group_sizes):
            raise ConfigInvalid(f"group sizes must be positive, got {self.group_sizes}")
        if self.object_size <= 0 or self.object_size % WORD:
            raise ConfigInvalid(f"object size must be a positive multiple of {WORD}")
        if self.order not in ORDERS:
            raise ConfigInvalid(f"order must be one of {ORDERS}")
        if self.reads_per_object is not None and self.reads_per_object < 0:
            raise ConfigInvalid("reads_per_object must be >= 0")
        if self.writes_per_object is not None and self.writes_per_object < self.words:
            raise ConfigInvalid("writes_per_object must cover at least one store per word")
        parse_values(self.values)


@dataclass(frozen=True)
class GenConfig:
    contexts: int = 4
    objects_per_context: int = 100
    group_sizes: Optional[tuple[int, ...]] = None   # default: one group of all objects
    object_size: int = 64
    reads_per_object: Optional[int] = None
    writes_per_object: Optional[int] = None
    threads: int = 1
    values: str = "distinct"
    order: str = "mixed"
    seed: int = 0

    def context_specs(self) -> list[ContextSpec]:
        groups = tuple(self.group_sizes) if self.group_sizes else (self.objects_per_context,)
        if sum(groups) != self.objects_per_context:
            raise ConfigInvalid(
                f"group sizes sum to {sum(groups)}, expected {self.objects_per_context}")
        spec = ContextSpec(groups, self.object_size, self.reads_per_object,
                           self.writes_per_object, self.values, self.order)
        return [spec] * self.contexts


def parse_values(text: str) -> tuple[str, float]:
    """``distinct``, ``near`` or ``correlated:P`` / ``correlated(P)``."""
    if text in ("distinct", "near"):
        return text, 0.0
    m = re.fullmatch(r"correlated[:(]\s*([0-9.]+)\s*\)?", text)
    if m:
        p = float(m.group(1))
        if 0.0 <= p <= 1.0:
            return "correlated", p
    raise ConfigInvalid(f"unknown value model {text!r}")


# -- group arrangement ------------------------------------------------------

def adjacent_target(group_sizes: Sequence[int]) -> int:
    """Number of equal-group neighbours for the ``mixed`` order.

    Consecutive objects are the pairs a detector compares, while the group
    model counts identical pairs among all ``C(X, 2)`` pairs.  The target is
    the count whose neighbour rate is closest to the all-pairs rate while
    keeping that rate strictly inside the open interval that the largest
    group's share requires; ties go to the smaller count.
    """
    sizes = list(group_sizes)
    X, N, XN = sum(sizes), len(sizes), max(sizes)
    if N == 1:
        return X - 1
    kmin = max(0, 2 * XN - X - 1)
    kmax = X - N
    target = Fraction(sum(g * (g - 1) for g in sizes), X)
    lo = Fraction(XN * XN * (X - 1), X * X) - Fraction(XN, X)
    hi = Fraction((X - 1) * XN, X)
    ok = [k for k in range(kmin, kmax + 1) if lo < k < hi]
    pool = ok or list(range(kmin, kmax + 1))
    return min(pool, key=lambda k: (abs(k - target), k))


def _composition(n: int, parts: int, rng: random.Random) -> list[int]:
    cuts = sorted(rng.sample(range(1, n), parts - 1)) if parts > 1 else []
    bounds = [0, *cuts, n]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def arrange_groups(group_sizes: Sequence[int], order: str, rng: random.Random) -> list[int]:
    """Return group indices in allocation order."""
    sizes = list(group_sizes)
    if order == "blocked":
        return [g for g, n in enumerate(sizes) for _ in range(n)]
    if order == "shuffled":
        seq = [g for g, n in enumerate(sizes) for _ in range(n)]
        rng.shuffle(seq)
        return seq
    X = sum(sizes)
    k = adjacent_target(sizes)
    runs_total = X - k
    runs = [1] * len(sizes)
    extra = runs_total - len(sizes)
    while extra > 0:
        open_ = [g for g in range(len(sizes)) if runs[g] < sizes[g]]
        g = min(open_, key=lambda g: (runs[g], -sizes[g], g))
        runs[g] += 1
        extra -= 1

    remaining = list(runs)
    seq_runs: list[int] = []
    prev = -1
    for _ in range(runs_total):
        best = max(remaining[g] for g in range(len(sizes)) if g != prev)
        cands = [g for g in range(len(sizes)) if g != prev and remaining[g] == best and best > 0]
        g = rng.choice(cands)
        seq_runs.append(g)
        remaining[g] -= 1
        prev = g

    lengths = {g: _composition(sizes[g], runs[g], rng) for g in range(len(sizes))}
    seq: list[int] = []
    for g in seq_runs:
        seq.extend([g] * lengths[g].pop())
    assert sum(a == b for a, b in zip(seq, seq[1:])) == k
    return seq


# -- values -----------------------------------------------------------------

class _Fresh:
    def __init__(self, rng: random.Random) -> None:
        self.rng = rng
        self.used: set[int] = set()

    def __call__(self) -> int:
        while True:
            v = self.rng.getrandbits(64)
            if v not in self.used:
                self.used.add(v)
                return v


def group_vectors(n_groups: int, words: int, values: str, rng: random.Random) -> list[list[int]]:
    model, p = parse_values(values)
    fresh = _Fresh(rng)
    if model == "distinct":
        return [[fresh() for _ in range(words)] for _ in range(n_groups)]
    if model == "near":
        base = [fresh() for _ in range(words)]
        out = []
        for _ in range(n_groups):
            v = list(base)
            v[rng.randrange(words)] = fresh()
            out.append(v)
        return out
    shared = [rng.random() < p for _ in range(words)]
    if n_groups > 1 and all(shared):
        shared[rng.randrange(words)] = False
    common = [fresh() for _ in range(words)]
    return [[common[w] if shared[w] else fresh() for w in range(words)]
            for _ in range(n_groups)]


def _read_vectors(n_groups: int, words: int, read: Sequence[int], values: str,
                  rng: random.Random) -> list[list[int]]:
    """Group vectors whose differences all fall on words that are read.

    Unread words hold 0 in every group; otherwise two groups could differ
    only where no load ever looks.
    """
    if len(read) in (0, words):
        return group_vectors(n_groups, words, values, rng)
    cols = sorted(read)
    sub = group_vectors(n_groups, len(cols), values, rng)
    out = []
    for v in sub:
        full = [0] * words
        for w, x in zip(cols, v):
            full[w] = x
        out.append(full)
    return out


def _updated(value: int, step: int) -> int:
    # odd multiplier: injective, so distinct words stay distinct
    return (value * 0x9E3779B97F4A7C15 + step + 1) & _MASK


# -- trace assembly ----------------------------------------------------------

@dataclass
class _ContextPlan:
    index: int
    spec: ContextSpec
    alloc_path: tuple[int, ...]
    init_path: tuple[int, ...]
    update_path: tuple[int, ...]
    use_paths: list[tuple[int, ...]]
    schedule: list[int]                 # word index per load
    updates: list[int]                  # word index per update store
    vectors: list[list[int]]
    order: list[int] = field(default_factory=list)


class _Frames:
    def __init__(self) -> None:
        self.defs: list[FrameDef] = []

    def new(self, method: str, file: str, line: int) -> int:
        fid = len(self.defs) + 1
        self.defs.append(FrameDef(fid, method, file, line))
        return fid


def _plan(specs: Sequence[ContextSpec], seed: int) -> tuple[_Frames, list[_ContextPlan]]:
    frames = _Frames()
    root = frames.new("main", "Main.java", 1)
    plans = []
    for c, spec in enumerate(specs):
        spec.validate()
        rng = random.Random(f"{seed}/ctx{c}")
        cls = f"Site{c}"
        src = f"{cls}.java"
        run = frames.new(f"{cls}.run", src, 5)
        alloc = frames.new(f"{cls}.build", src, 10)
        init = frames.new(f"{cls}.init", src, 11)
        upd = frames.new(f"{cls}.update", src, 13)
        F = spec.words
        uses = [(root, run, frames.new(f"{cls}.use", src, 20 + w)) for w in range(F)]
        perm = list(range(F))
        rng.shuffle(perm)
        R = 2 * F if spec.reads_per_object is None else spec.reads_per_object
        W = F if spec.writes_per_object is None else spec.writes_per_object
        plans.append(_ContextPlan(
            index=c, spec=spec,
            alloc_path=(root, run, alloc), init_path=(root, run, init),
            update_path=(root, run, upd), use_paths=uses,
            schedule=[perm[i % F] for i in range(R)],
            updates=[rng.randrange(F) for _ in range(W - F)],
            vectors=_read_vectors(len(spec.group_sizes), F, perm[:min(R, F)], spec.values, rng),
            order=arrange_groups(spec.group_sizes, spec.order, rng),
        ))
    return frames, plans


def _lifetime(plan: _ContextPlan, group: int, obj: int, base: int, tid: int,
              ts: int) -> list[TraceEvent]:
    spec = plan.spec
    F = spec.words
    words = list(plan.vectors[group])
    evs: list[TraceEvent] = [Alloc(tid, ts, obj, base, spec.object_size, plan.alloc_path)]
    ts += 1
    for w in range(F):
        evs.append(Access(tid, ts, False, base + WORD * w, WORD, words[w], plan.init_path))
        ts += 1
    split = min(F, len(plan.schedule))
    for i, w in enumerate(plan.schedule):
        if i == split:
            for step, uw in enumerate(plan.updates):
                words[uw] = _updated(words[uw], step)
                evs.append(Access(tid, ts, False, base + WORD * uw, WORD, words[uw],
                                  plan.update_path))
                ts += 1
        evs.append(Access(tid, ts, True, base + WORD * w, WORD, words[w], plan.use_paths[w]))
        ts += 1
    if split == len(plan.schedule):
        for step, uw in enumerate(plan.updates):
            words[uw] = _updated(words[uw], step)
            evs.append(Access(tid, ts, False, base + WORD * uw, WORD, words[uw], plan.update_path))
            ts += 1
    evs.append(Free(tid, ts, obj))
    return evs


def generate_contexts(specs: Sequence[ContextSpec], threads: int = 1,
                      seed: int = 0) -> list[TraceEvent]:
    """Build a trace for explicit per-context specs.

    Each context's allocation sequence is cut into ``threads`` contiguous
    chunks; chunk ``t`` runs on thread ``t + 1``.
    """
    if threads < 1:
        raise ConfigInvalid("threads must be >= 1")
    frames, plans = _plan(specs, seed)
    rng = random.Random(f"{seed}/layout")

    # per-thread queues of (plan, group) in allocation order
    jobs: dict[int, list[list[tuple[_ContextPlan, int]]]] = {t: [] for t in range(1, threads + 1)}
    for plan in plans:
        n = len(plan.order)
        for t in range(threads):
            chunk = plan.order[n * t // threads: n * (t + 1) // threads]
            if chunk:
                jobs[t + 1].append([(plan, g) for g in chunk])

    per_thread: dict[int, list[list[TraceEvent]]] = {}
    labels: list[GroundTruth] = []
    next_obj = 1
    for tid in sorted(jobs):
        queues = [list(reversed(q)) for q in jobs[tid]]
        lifetimes = []
        ts = 0
        arena = tid << 40
        free_blocks: dict[int, list[int]] = {}
        bump = arena
        while queues:
            weights = [len(q) for q in queues]
            qi = rng.choices(range(len(queues)), weights)[0]
            plan, g = queues[qi].pop()
            if not queues[qi]:
                queues.pop(qi)
            size = plan.spec.object_size
            blocks = free_blocks.setdefault(size, [])
            if blocks:
                base = blocks.pop()
            else:
                base = bump
                bump += size
            evs = _lifetime(plan, g, next_obj, base, tid, ts)
            ts += len(evs)
            lifetimes.append(evs)
            labels.append(GroundTruth(next_obj, f"c{plan.index}g{g}"))
            blocks.append(base)
            next_obj += 1
        per_thread[tid] = lifetimes

    out: list[TraceEvent] = list(frames.defs)
    cursors = {tid: 0 for tid in per_thread if per_thread[tid]}
    while cursors:
        tid = rng.choice(sorted(cursors))
        out.extend(per_thread[tid][cursors[tid]])
        cursors[tid] += 1
        if cursors[tid] == len(per_thread[tid]):
            del cursors[tid]
    out.extend(labels)
    return out


def generate(config: GenConfig) -> list[TraceEvent]:
    """Deterministic trace for ``config``; embeds ground-truth group labels."""
    if config.contexts < 1 or config.objects_per_context < 1:
        raise ConfigInvalid("need at least one context and one object")
    return generate_contexts(config.context_specs(), config.threads, config.seed)


def random_specs(rng: random.Random, n_contexts: int = 1, x_range=(2, 500),
                 max_groups: int = 8, words=(1, 2, 3, 4)) -> list[ContextSpec]:
    """Random group structures for bound checks."""
    specs = []
    for _ in range(n_contexts):
        X = rng.randint(*x_range)
        N = rng.randint(1, min(max_groups, X))
        sizes = _composition(X, N, rng)
        model = rng.choice(["distinct", "near", f"correlated:{rng.choice([0.25, 0.5, 0.75])}"])
        specs.append(ContextSpec(tuple(sizes), WORD * rng.choice(words), values=model))
    return specs


# -- fixed scenarios ---------------------------------------------------------

def example1_trace() -> list[TraceEvent]:
    """Four objects allocated in one loop, replayed at period 1.

    The loop body is ``allocate O; initialize O; use O (line 5); update O
    (line 6); use O (line 7)``.  The trace keeps only the loads the narrative
    samples or traps on: O1 is sampled once at line 5 (offset 8, value V1),
    O2 is never sampled, O3 and O4 are read at line 5 (offsets 0 and 8) and
    twice at line 7 (offset 16).  O3 matches O1 at offset 8 and O4 differs
    from O3 at offset 16, so exhaustive replay finds one equal and one
    different comparison.
    """
    frames = [FrameDef(1, "main", "Example1.java", 1), FrameDef(2, "loop", "Example1.java", 3),
              FrameDef(3, "init", "Example1.java", 4), FrameDef(4, "use", "Example1.java", 5),
              FrameDef(5, "update", "Example1.java", 6), FrameDef(6, "use", "Example1.java", 7)]
    alloc, init, use5, upd, use7 = (1, 2), (1, 3), (1, 4), (1, 5), (1, 6)
    V0, V1, V2, V2b, V3 = 7, 42, 1000, 2000, 5
    size = 32
    layout = {1: (0x1000, [V0, V1, V2, V3], []),
              2: (0x2000, [V0, V1, V2, V3], None),
              3: (0x3000, [V0, V1, V2, V3], [0, 8, 16, 16]),
              4: (0x4000, [V0, V1, V2b, V3], [0, 8, 16, 16])}
    evs: list[TraceEvent] = list(frames)
    ts = 0

    def emit(e):
        nonlocal ts
        evs.append(e)
        ts += 1

    for obj, (base, words, loads) in layout.items():
        emit(Alloc(1, ts, obj, base, size, alloc))
        for i, v in enumerate(words):
            emit(Access(1, ts, False, base + 8 * i, 8, v, init))
        if obj == 1:
            emit(Access(1, ts, True, base + 8, 8, V1, use5))
        elif loads:
            emit(Access(1, ts, True, base + 0, 8, words[0], use5))
            emit(Access(1, ts, True, base + 8, 8, words[1], use5))
            emit(Access(1, ts, False, base + 24, 8, words[3], upd))
            emit(Access(1, ts, True, base + 16, 8, words[2], use7))
            emit(Access(1, ts, True, base + 16, 8, words[2], use7))
        emit(Free(1, ts, obj))
    return evs


EXAMPLE1_ALLOC_PATH = (1, 2)


@dataclass(frozen=True)
class CorpusContext:
    alloc_path: tuple[int, ...]
    replicated: bool
    kind: str


def false_positive_corpus(seed: int = 0, objects: int = 120) -> tuple[list[TraceEvent], list[CorpusContext]]:
    """59 contexts: 8 replicated, 51 not.

    Non-replicated contexts hold pairwise-distinct objects: 20 with unrelated
    contents and 31 near-duplicates, where every object is a shared base
    with one word replaced (so any two objects differ in at most two words).
    28 of the near-duplicates use 2-3 word objects; 3 use 16-word objects,
    where sampled words almost always agree.
    """
    rng = random.Random(f"{seed}/corpus")
    specs: list[tuple[ContextSpec, bool, str]] = []
    for i in range(8):
        if i % 2 == 0:
            groups = (objects,)
        else:
            big = objects * 9 // 10
            groups = (big, *([1] * (objects - big)))
        specs.append((ContextSpec(groups, WORD * rng.choice([4, 8]), values="distinct"),
                      True, "replicated"))
    singles = (1,) * objects
    for _ in range(20):
        specs.append((ContextSpec(singles, WORD * rng.choice([2, 4, 8]), values="distinct"),
                      False, "distinct"))
    for _ in range(28):
        specs.append((ContextSpec(singles, WORD * rng.choice([2, 3]), values="near"),
                      False, "near"))
    for _ in range(3):
        specs.append((ContextSpec(singles, WORD * 16, values="near"), False, "near-wide"))
    order = list(range(len(specs)))
    rng.shuffle(order)
    specs = [specs[i] for i in order]
    events = generate_contexts([s for s, _, _ in specs], threads=1, seed=seed)
    fids = {ev.method: ev.frame_id for ev in events if isinstance(ev, FrameDef)}
    info = [CorpusContext((fids["main"], fids[f"Site{c}.run"], fids[f"Site{c}.build"]), rep, kind)
            for c, (_, rep, kind) in enumerate(specs)]
    return events, info
