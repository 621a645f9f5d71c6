"""Compact calling-context tree with top-down merge."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .trace import FrameDef


class EmptyPath(ValueError):
    pass


class UnknownContext(KeyError):
    pass


class FrameTableMismatch(ValueError):
    pass


def add_metrics(into: dict, other: Mapping) -> dict:
    """Sum ``other`` into ``into``; nested mappings are summed key by key."""
    for k, v in other.items():
        if isinstance(v, Mapping):
            add_metrics(into.setdefault(k, {}), v)
        else:
            into[k] = into.get(k, 0) + v
    return into


@dataclass
class CCTNode:
    frame_id: int
    parent: int  # -1 for root
    children: dict[int, int] = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)


class CallingContextTree:
    """Prefix tree of frame-id paths; a context id is a node index.

    Node 0 is a synthetic root and never a valid context.
    """

    ROOT = 0

    def __init__(self, frames: Optional[Mapping[int, FrameDef]] = None) -> None:
        self.nodes: list[CCTNode] = [CCTNode(-1, -1)]
        self.frames: dict[int, FrameDef] = dict(frames or {})

    def __len__(self) -> int:
        """Number of non-root nodes."""
        return len(self.nodes) - 1

    def define_frame(self, frame: FrameDef) -> None:
        self.frames[frame.frame_id] = frame

    def intern_path(self, frames: Sequence[int]) -> int:
        if not frames:
            raise EmptyPath("cannot intern an empty calling context")
        node = self.ROOT
        nodes = self.nodes
        for f in frames:
            child = nodes[node].children.get(f)
            if child is None:
                child = len(nodes)
                nodes.append(CCTNode(f, node))
                nodes[node].children[f] = child
            node = child
        return node

    def find(self, frames: Sequence[int]) -> Optional[int]:
        node = self.ROOT
        for f in frames:
            node = self.nodes[node].children.get(f)
            if node is None:
                return None
        return node if frames else None

    def path_of(self, ctx_id: int) -> tuple[int, ...]:
        if not 0 < ctx_id < len(self.nodes):
            raise UnknownContext(ctx_id)
        path = []
        node = ctx_id
        while node != self.ROOT:
            n = self.nodes[node]
            path.append(n.frame_id)
            node = n.parent
        return tuple(reversed(path))

    def metrics(self, ctx_id: int) -> dict:
        if not 0 < ctx_id < len(self.nodes):
            raise UnknownContext(ctx_id)
        return self.nodes[ctx_id].metrics

    def add(self, frames: Sequence[int], metrics: Mapping) -> int:
        ctx = self.intern_path(frames)
        add_metrics(self.nodes[ctx].metrics, metrics)
        return ctx

    def walk(self) -> Iterator[tuple[tuple[int, ...], CCTNode]]:
        """Depth-first over non-root nodes, children in frame-id order."""
        stack = [(self.ROOT, ())]
        while stack:
            idx, path = stack.pop()
            node = self.nodes[idx]
            if idx != self.ROOT:
                yield path, node
            for f in sorted(node.children, reverse=True):
                stack.append((node.children[f], path + (f,)))

    def paths(self) -> dict[tuple[int, ...], dict]:
        """Every path that carries metrics, mapped to its metrics."""
        return {p: n.metrics for p, n in self.walk() if n.metrics}

    def copy(self) -> "CallingContextTree":
        return merge(self, CallingContextTree(self.frames))


def _check_frames(a: Mapping[int, FrameDef], b: Mapping[int, FrameDef]) -> dict[int, FrameDef]:
    out = dict(a)
    for fid, fd in b.items():
        mine = out.get(fid)
        if mine is not None and mine != fd:
            raise FrameTableMismatch(f"frame {fid} is {mine} in one tree and {fd} in the other")
        out[fid] = fd
    return out


def merge(a: CallingContextTree, b: CallingContextTree) -> CallingContextTree:
    """Coalesce identical paths top-down; metrics on coalesced nodes are summed.

    Neither input is modified.  The result interns ``a``'s nodes first, then
    ``b``'s, so node ids are deterministic for a given argument order.
    """
    out = CallingContextTree(_check_frames(a.frames, b.frames))
    for tree in (a, b):
        # node-id map avoids re-walking from the root for every node
        remap = {CallingContextTree.ROOT: CallingContextTree.ROOT}
        for idx in range(1, len(tree.nodes)):
            node = tree.nodes[idx]
            parent = remap[node.parent]
            child = out.nodes[parent].children.get(node.frame_id)
            if child is None:
                child = len(out.nodes)
                out.nodes.append(CCTNode(node.frame_id, parent))
                out.nodes[parent].children[node.frame_id] = child
            remap[idx] = child
            if node.metrics:
                add_metrics(out.nodes[child].metrics, node.metrics)
    return out


def merge_all(trees: Iterable[CallingContextTree]) -> CallingContextTree:
    out = CallingContextTree()
    for t in trees:
        out = merge(out, t)
    return out
