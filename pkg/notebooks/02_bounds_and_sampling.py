"""
How tight are the bounds, and how fast does sampling converge?
===============================================================

For one allocation context split into identical groups, the comparison
success rate theta and the spurious-match rate alpha bracket the share of
the largest group.  This script checks the bracket on generated traces and
then watches the sampled estimate approach the exhaustive one.
"""

# %%
import random

import numpy as np

from objreplica.oracle import ground_truth
from objreplica.replay import DetectConfig, detect
from objreplica.theory import bound_interval
from objreplica.workload import GenConfig, generate, generate_contexts, random_specs

# %%
# Bracket width versus ground truth over a handful of random group structures.
print(f"{'groups':>28} {'theta':>6} {'alpha':>6} {'omega':>6} {'X_N/X':>6} {'gamma':>6}")
for i in range(12):
    rng = random.Random(f"nb/{i}")
    (spec,) = random_specs(rng, x_range=(20, 300), max_groups=5)
    (c,) = ground_truth(generate_contexts([spec], seed=i)).contexts.values()
    if not c.theta_exact > c.alpha_exact:
        continue
    b = bound_interval(c.theta_exact, c.alpha_exact, c.X)
    sizes = ",".join(map(str, sorted(c.group_sizes, reverse=True)[:4]))
    print(f"{sizes:>28} {c.theta_exact:6.3f} {c.alpha_exact:6.3f} {b.omega:6.3f}"
          f" {c.largest_ratio:6.3f} {b.gamma:6.3f}")

# %%
# Sampling error against period on a fixed trace, averaged over sampler seeds.
evs = generate(GenConfig(contexts=1, objects_per_context=300, group_sizes=(180, 80, 40),
                         object_size=32, seed=3))
(oc,) = ground_truth(evs).contexts.values()
print(f"exhaustive theta = {oc.theta_exact:.4f}")
for period in (64, 32, 16, 8, 4, 2, 1):
    est = []
    for seed in range(10):
        c = detect(evs, DetectConfig(period=period, seed=seed)).context(oc.alloc_path)
        if c is not None and c.comparisons:
            est.append(c.equivalent / c.comparisons)
    est = np.array(est)
    print(f"period {period:3d}: mean |error| {np.abs(est - oc.theta_exact).mean():.4f}"
          f"  spread {est.std():.4f}")
