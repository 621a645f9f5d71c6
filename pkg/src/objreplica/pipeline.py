"""One-call pipeline: generate, detect, run the oracle, rank, compare."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .analyzer import RankedReport, fmt_float, rank
from .oracle import GroundTruthReport, ground_truth
from .profile import Profile
from .replay import DetectConfig, detect
from .theory import REPORT_THRESHOLD, bound_interval
from .trace import TraceEvent
from .workload import GenConfig, generate


@dataclass(frozen=True)
class SummaryRow:
    alloc_path: tuple[int, ...]
    X: int
    X_N: int
    comparisons: int
    theta_est: Optional[float]
    theta_exact: Optional[float]
    alpha_exact: float
    contained_exact: Optional[bool]   # bounds from exact theta, alpha
    contained_est: Optional[bool]     # bounds from estimated theta, exact alpha

    @property
    def error(self) -> Optional[float]:
        if self.theta_est is None or self.theta_exact is None:
            return None
        return abs(self.theta_est - self.theta_exact)

    def to_dict(self) -> dict:
        return {
            "alloc_path": list(self.alloc_path), "X": self.X, "X_N": self.X_N,
            "comparisons": self.comparisons,
            "theta_est": fmt_float(self.theta_est), "theta_exact": fmt_float(self.theta_exact),
            "abs_error": fmt_float(self.error), "alpha_exact": fmt_float(self.alpha_exact),
            "contained_exact": self.contained_exact, "contained_est": self.contained_est,
        }


def _contained(theta_: Optional[float], alpha: float, X: int, ratio: float, strict: bool) -> Optional[bool]:
    if theta_ is None or X < 2 or not theta_ > alpha:
        return None
    return bound_interval(theta_, alpha, X).contains(ratio, strict_lower=strict)


def compare(profile: Profile, truth: GroundTruthReport) -> list[SummaryRow]:
    rows = []
    for path in sorted(truth.contexts):
        oc = truth.contexts[path]
        pc = profile.context(path)
        n = pc.comparisons if pc else 0
        est = pc.equivalent / n if n else None
        sizes = oc.group_sizes
        # lower bound is only strict when one group is strictly largest
        strict = len(sizes) > 1 and sizes.count(sizes[-1]) == 1
        ratio = oc.largest_ratio
        rows.append(SummaryRow(path, oc.X, oc.X_N, n, est, oc.theta_exact, oc.alpha_exact,
                               _contained(oc.theta_exact, oc.alpha_exact, oc.X, ratio, strict),
                               _contained(est, oc.alpha_exact, oc.X, ratio, strict)))
    return rows


def summary_json(rows: list[SummaryRow]) -> str:
    return json.dumps({"version": "v1", "contexts": [r.to_dict() for r in rows]}, indent=1) + "\n"


@dataclass
class EndToEnd:
    trace: list[TraceEvent]
    profile: Profile
    truth: GroundTruthReport
    report: RankedReport
    summary: list[SummaryRow]


def end_to_end(gen: GenConfig, config: DetectConfig = DetectConfig(),
               threshold: float = REPORT_THRESHOLD) -> EndToEnd:
    trace = generate(gen)
    profile = detect(trace, config)
    truth = ground_truth(trace)
    report = rank(profile, threshold, alpha_source=truth.alpha_by_path())
    return EndToEnd(trace, profile, truth, report, compare(profile, truth))
