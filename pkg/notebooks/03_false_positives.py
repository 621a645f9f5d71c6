"""
False positives on near-duplicate objects
=========================================

Objects that differ in one word look replicated if the samples never land
on that word.  Wide objects with a single differing word are the hard case.
"""

# %%
from collections import Counter

from objreplica.analyzer import rank
from objreplica.replay import DetectConfig, detect
from objreplica.workload import false_positive_corpus

events, info = false_positive_corpus(seed=0)
print(Counter(c.kind for c in info))

# %%
report = rank(detect(events, DetectConfig(period=5, seed=0)))
theta = {c.alloc_path: c.theta for c in report.contexts}
suspects = {c.alloc_path for c in report.suspects}

by_kind = {}
for c in info:
    by_kind.setdefault(c.kind, []).append(theta.get(c.alloc_path, float("nan")))
for kind, vals in sorted(by_kind.items()):
    print(f"{kind:>11}: theta from {min(vals):.2f} to {max(vals):.2f}")

# %%
fp = [c for c in info if not c.replicated and c.alloc_path in suspects]
fn = [c for c in info if c.replicated and c.alloc_path not in suspects]
negatives = sum(not c.replicated for c in info)
print(f"false positives {len(fp)}/{negatives} = {len(fp) / negatives:.1%} ({Counter(c.kind for c in fp)})")
print(f"false negatives {len(fn)}")
