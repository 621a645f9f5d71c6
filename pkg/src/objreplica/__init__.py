"""Sampled detection of object replicas in memory-access traces."""

from .analyzer import RankedReport, emit_folded, emit_json, emit_text, rank
from .oracle import GroundTruthReport, exact_groups, exhaustive_theta_alpha, ground_truth
from .pipeline import end_to_end
from .profile import Profile, merge_profiles
from .replay import EXHAUSTIVE, DetectConfig, detect
from .theory import (bound_interval, is_suspect, lower_bound, prob_A, replication_ratio,
                     replication_ratios, theta, upper_bound)
from .trace import load_trace, parse_event, save_trace, validate_trace, write_event
from .workload import GenConfig, example1_trace, generate

__version__ = "0.1.0"

__all__ = [
    "DetectConfig", "EXHAUSTIVE", "GenConfig", "GroundTruthReport", "Profile", "RankedReport",
    "bound_interval", "detect", "emit_folded", "emit_json", "emit_text", "end_to_end",
    "exact_groups", "example1_trace", "exhaustive_theta_alpha", "generate", "ground_truth",
    "is_suspect", "load_trace", "lower_bound", "merge_profiles", "parse_event", "prob_A", "rank",
    "replication_ratio", "replication_ratios", "save_trace", "theta", "upper_bound",
    "validate_trace", "write_event",
]
