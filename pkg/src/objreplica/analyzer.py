"""Offline analysis: rank merged profiles and emit JSON, folded stacks or text."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Union

from .profile import ContextCounters, Profile
from .theory import (REPORT_THRESHOLD, BoundInterval, NoComparisons, ReplicationRatio,
                     bound_interval, is_suspect, replication_ratios)
from .trace import FrameDef

REPORT_VERSION = "v1"
TOP_ACCESS_PATHS = 5

AlphaSource = Union[None, float, Mapping[tuple, float]]


def fmt_float(x: Optional[float]) -> Optional[float]:
    """Round to 6 significant digits; keeps floats as floats (1 -> 1.0)."""
    if x is None:
        return None
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in report")
    return float(f"{x:.6g}")


def frame_label(frames: Mapping[int, FrameDef], fid: int) -> str:
    fd = frames.get(fid)
    if fd is None:
        label = f"0x{fid:x}"
    else:
        label = fd.method if fd.line == 0 else f"{fd.method}:{fd.line}"
    # folded stacks reserve ';' and whitespace
    return "".join("_" if ch == ";" or ch.isspace() else ch for ch in label) or "?"


@dataclass(frozen=True)
class AccessEntry:
    path: tuple[int, ...]
    equivalent: int
    different: int

    @property
    def comparisons(self) -> int:
        return self.equivalent + self.different


@dataclass(frozen=True)
class RankedContext:
    alloc_path: tuple[int, ...]
    X: int
    equivalent: int
    different: int
    samples: int
    accesses: int
    theta: float
    suspect: bool
    alpha: Optional[float] = None
    alpha_source: Optional[str] = None
    bounds: Optional[BoundInterval] = None
    access_paths: tuple[AccessEntry, ...] = ()

    @property
    def comparisons(self) -> int:
        return self.equivalent + self.different


@dataclass
class RankedReport:
    contexts: list[RankedContext] = field(default_factory=list)
    frames: dict[int, FrameDef] = field(default_factory=dict)
    threshold: float = REPORT_THRESHOLD
    ratio: Optional[ReplicationRatio] = None

    @property
    def suspects(self) -> list[RankedContext]:
        return [c for c in self.contexts if c.suspect]

    def labels(self, path) -> list[str]:
        return [frame_label(self.frames, f) for f in path]


def _alpha_for(source: AlphaSource, path: tuple) -> tuple[Optional[float], Optional[str]]:
    if source is None:
        return None, None
    if isinstance(source, (int, float)):
        return float(source), "default"
    if path in source:
        return float(source[path]), "oracle"
    return None, None


def _rank_key(c: ContextCounters):
    return (-Fraction(c.equivalent, c.comparisons), -c.equivalent, c.alloc_path)


def rank(profile: Profile, threshold: float = REPORT_THRESHOLD,
         alpha_source: AlphaSource = None, alpha_default: Optional[float] = None) -> RankedReport:
    """Order contexts by replication factor.

    ``alpha_source`` is either one value for every context or a mapping from
    allocation path to alpha (for example an oracle report).  Contexts missing
    from the mapping fall back to ``alpha_default``; without any alpha no
    bounds are attached.  Ties in theta go to the higher equivalent count,
    then to the lexicographically smaller allocation path.
    """
    counted = [c for c in profile.contexts() if c.comparisons > 0]
    counted.sort(key=_rank_key)
    out = []
    for c in counted:
        th = c.equivalent / c.comparisons
        alpha, src = _alpha_for(alpha_source, c.alloc_path)
        if alpha is None and alpha_default is not None:
            alpha, src = float(alpha_default), "default"
        bounds = bound_interval(th, alpha, c.objects) if alpha is not None and c.objects >= 2 else None
        acc = sorted((AccessEntry(p, e, d) for p, (e, d) in c.access.items() if e + d),
                     key=lambda a: (-a.comparisons, -a.equivalent, a.path))
        out.append(RankedContext(c.alloc_path, c.objects, c.equivalent, c.different,
                                 c.samples, c.accesses, th, is_suspect(th, threshold),
                                 alpha, src, bounds, tuple(acc)))
    ratio = None
    if out:
        try:
            ratio = replication_ratios((c.equivalent, c.different, c.X) for c in out)
        except NoComparisons:
            ratio = None
    return RankedReport(out, dict(profile.frames), threshold, ratio)


# -- emitters ---------------------------------------------------------------

def report_dict(report: RankedReport, top: int = TOP_ACCESS_PATHS) -> dict:
    if not report.contexts:
        return {"version": REPORT_VERSION, "contexts": []}
    rows = []
    for i, c in enumerate(report.contexts, 1):
        row = {
            "rank": i,
            "alloc_path": list(c.alloc_path),
            "alloc_frames": report.labels(c.alloc_path),
            "X": c.X,
            "equivalent": c.equivalent,
            "different": c.different,
            "samples": c.samples,
            "accesses": c.accesses,
            "theta": fmt_float(c.theta),
            "suspect": c.suspect,
        }
        if c.bounds is not None:
            b = c.bounds
            row["bounds"] = {
                "alpha": fmt_float(b.alpha),
                "alpha_source": c.alpha_source,
                "A": fmt_float(b.A),
                "omega": fmt_float(b.omega),
                "gamma": fmt_float(b.gamma),
                "omega_clamped": b.omega_clamped,
                "gamma_capped": b.gamma_capped,
                # alpha defaulted to 0 makes omega = theta, an optimistic bound
                "optimistic": c.alpha_source == "default",
            }
        row["access_paths"] = [
            {"path": list(a.path), "frames": report.labels(a.path),
             "equivalent": a.equivalent, "different": a.different}
            for a in c.access_paths[:top]
        ]
        rows.append(row)
    r = report.ratio
    return {
        "version": REPORT_VERSION,
        "threshold": fmt_float(report.threshold),
        "replication_ratio": {"pooled": fmt_float(r.pooled), "macro": fmt_float(r.macro),
                              "object_weighted": fmt_float(r.object_weighted)},
        "contexts": rows,
    }


def emit_json(report: RankedReport, top: int = TOP_ACCESS_PATHS) -> str:
    d = report_dict(report, top)
    if not report.contexts:
        return json.dumps(d, separators=(",", ":")) + "\n"
    return json.dumps(d, indent=1) + "\n"


def emit_folded(report: RankedReport) -> str:
    """``frame;frame;... count`` per (allocation path, access path) pair.

    Only the access path is printed; the count is the number of comparisons
    made there.
    """
    lines = []
    for c in report.contexts:
        for a in c.access_paths:
            lines.append(f"{';'.join(report.labels(a.path))} {a.comparisons}")
    return "".join(line + "\n" for line in lines)


def emit_text(report: RankedReport, top: int = 3) -> str:
    if not report.contexts:
        return "no comparisons recorded; nothing to report\n"
    r = report.ratio
    out = [f"replication ratio: pooled {r.pooled:.4f}  macro {r.macro:.4f}"
           f"  (threshold {report.threshold:g}, {len(report.suspects)} suspect"
           f" of {len(report.contexts)})", ""]
    for i, c in enumerate(report.contexts, 1):
        flag = "SUSPECT" if c.suspect else "ok"
        out.append(f"#{i} theta={c.theta:.4f} [{flag}] X={c.X} eq={c.equivalent}"
                   f" diff={c.different} samples={c.samples}")
        if c.bounds is not None:
            b = c.bounds
            note = " (alpha defaulted, optimistic)" if c.alpha_source == "default" else ""
            out.append(f"   X_N/X in ({b.omega:.4f}, {b.gamma:.4f}) with alpha={b.alpha:.4f}{note}")
        out.append("   alloc: " + " > ".join(report.labels(c.alloc_path)))
        for a in c.access_paths[:top]:
            out.append(f"   access: {' > '.join(report.labels(a.path))}"
                       f"  eq={a.equivalent} diff={a.different}")
    return "\n".join(out) + "\n"


FORMATS = {"json": emit_json, "folded": emit_folded, "text": emit_text}


def emit(report: RankedReport, fmt: str) -> str:
    try:
        return FORMATS[fmt](report)
    except KeyError:
        raise ValueError(f"unknown format {fmt!r}") from None
