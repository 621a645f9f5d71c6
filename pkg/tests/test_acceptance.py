"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run directly (``python3 tests/test_acceptance.py``) or through pytest; the
verdict lines are repeated in pytest's terminal summary.
"""

import filecmp
import random
import sys
import time
from functools import reduce
from pathlib import Path

import numpy as np
from scipy import stats

from objreplica.analyzer import emit_folded, emit_json, rank
from objreplica.cli import main
from objreplica.oracle import ground_truth
from objreplica.profile import merge_profiles, merge_two
from objreplica.replay import EXHAUSTIVE, DetectConfig, detect, thread_profiles
from objreplica.theory import bound_interval
from objreplica.watchpoints import reservoir_choice
from objreplica.workload import (EXAMPLE1_ALLOC_PATH, ContextSpec, GenConfig, example1_trace,
                                 false_positive_corpus, generate, generate_contexts, random_specs)

GOLDEN = Path(__file__).parent / "golden"
RESULTS: list[str] = []


def record(n, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {name} -- {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def test_c1_bound_containment():
    t0 = time.perf_counter()
    checked = violations = 0
    for i in range(1000):
        rng = random.Random(f"bounds/{i}")
        (spec,) = random_specs(rng, x_range=(2, 500), max_groups=8)
        (c,) = ground_truth(generate_contexts([spec], seed=i)).contexts.values()
        th, al = c.theta_exact, c.alpha_exact
        if th is None or not th > al:
            continue
        checked += 1
        sizes = c.group_sizes
        # the lower bound is strict only when one group is strictly the largest
        strict = len(sizes) > 1 and sizes.count(sizes[-1]) == 1
        if not bound_interval(th, al, c.X).contains(c.largest_ratio, strict_lower=strict):
            violations += 1
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and checked >= 900 and elapsed < 60
    assert record(1, "bound containment", ok,
                  f"{checked} configs with theta>alpha, {violations} violations, {elapsed:.1f}s")


def test_c2_oracle_equivalence():
    mismatches = contexts = 0
    for i in range(100):
        rng = random.Random(f"equiv/{i}")
        specs = []
        for spec in random_specs(rng, n_contexts=rng.randint(1, 3), x_range=(2, 60)):
            F = spec.words
            specs.append(ContextSpec(spec.group_sizes, spec.object_size,
                                     reads_per_object=rng.randint(0, 3 * F),
                                     writes_per_object=F + rng.randint(0, F),
                                     values=spec.values))
        evs = generate_contexts(specs, threads=rng.randint(1, 3), seed=i)
        prof = detect(evs, EXHAUSTIVE)
        for path, oc in ground_truth(evs).contexts.items():
            contexts += 1
            pc = prof.context(path)
            got = (pc.equivalent, pc.different) if pc else (0, 0)
            if got != (oc.equivalent, oc.different):
                mismatches += 1
    assert record(2, "oracle equivalence", mismatches == 0,
                  f"{contexts} contexts over 100 traces, {mismatches} counter mismatches")


def test_c3_sampling_convergence():
    errs, thin = [], 0
    for i in range(100):
        rng = random.Random(f"conv/{i}")
        specs = random_specs(rng, n_contexts=2, x_range=(200, 500), words=(4, 8))
        evs = generate_contexts(specs, threads=rng.choice([1, 2]), seed=i)
        prof = detect(evs, DetectConfig(period=4, seed=i))
        for path, oc in ground_truth(evs).contexts.items():
            pc = prof.context(path)
            n = pc.comparisons if pc else 0
            if n < 200:
                thin += 1
                continue
            errs.append(abs(pc.equivalent / n - oc.theta_exact))
    errs = np.array(errs)
    frac = float((errs <= 0.05).mean())
    ok = thin == 0 and frac >= 0.9
    assert record(3, "sampling convergence", ok,
                  f"{frac:.1%} of {len(errs)} contexts within 0.05 (max {errs.max():.3f}),"
                  f" {thin} under 200 comparisons")


def test_c4_false_positive_corpus():
    evs, info = false_positive_corpus(seed=0)
    report = rank(detect(evs, DetectConfig(period=5, seed=0)), threshold=0.6)
    suspects = {c.alloc_path for c in report.suspects}
    negatives = [c for c in info if not c.replicated]
    fp = sum(c.alloc_path in suspects for c in negatives)
    fn = sum(c.alloc_path not in suspects for c in info if c.replicated)
    rate = fp / len(negatives)
    ok = len(info) == 59 and len(negatives) == 51 and rate <= 0.08 and fn == 0
    assert record(4, "false positives / negatives", ok,
                  f"FP {fp}/{len(negatives)} = {rate:.1%}, FN {fn}/8")


def test_c5_reservoir_fairness():
    W, n, trials = 4, 1000, 100_000
    rng = np.random.default_rng(20240501)
    slots = np.tile(np.arange(W), (trials, 1))
    rows = np.arange(trials)
    for t in range(W + 1, n + 1):
        victim = reservoir_choice(t, W, rng.random(trials), rng.integers(0, W, trials))
        keep = victim >= 0
        slots[rows[keep], victim[keep]] = t - 1
    counts = np.bincount(slots.ravel(), minlength=n)
    p = stats.chisquare(counts).pvalue
    assert record(5, "reservoir fairness", p > 0.01,
                  f"chi-square p = {p:.3f} over {trials} trials, W={W}, n={n}")


def test_c6_example1():
    prof = detect(example1_trace(), DetectConfig(period=1, jitter=0.0, watchpoints=4))
    c = prof.context(EXAMPLE1_ALLOC_PATH)
    got = (c.equivalent, c.different)
    assert record(6, "Example 1 replay", got == (1, 1),
                  f"equivalent={got[0]}, different={got[1]}")


def test_c7_merge_algebra():
    evs = generate(GenConfig(contexts=3, objects_per_context=64, group_sizes=(40, 16, 8),
                             threads=8, values="correlated:0.5", seed=77))
    parts = thread_profiles(evs, DetectConfig(period=2, seed=77))
    assert len(parts) == 8
    shuffled = list(parts)
    random.Random(7).shuffle(shuffled)
    variants = [
        merge_profiles(parts),
        reduce(lambda acc, p: merge_two(p, acc), reversed(parts)),
        merge_two(merge_two(merge_two(shuffled[0], shuffled[1]), merge_two(shuffled[2], shuffled[3])),
                  merge_two(merge_two(shuffled[4], shuffled[5]), merge_two(shuffled[6], shuffled[7]))),
    ]
    outs = {(emit_json(rank(v)), emit_folded(rank(v))) for v in variants}
    assert record(7, "merge algebra", len(outs) == 1,
                  f"{len(variants)} parenthesizations, {len(outs)} distinct report(s)")


def _golden_run(d):
    trace, prof, orc = d / "corpus.jsonl", d / "profile.json", d / "oracle.json"
    main(["gen", "--contexts", "3", "--objects", "40", "--groups", "24,10,6", "--object-size",
          "32", "--values", "correlated:0.5", "--threads", "2", "--seed", "2024", "--out", str(trace)])
    main(["detect", "--in", str(trace), "--period", "3", "--seed", "2024", "--out", str(prof)])
    main(["oracle", "--in", str(trace), "--out", str(orc)])
    for fmt, name in [("json", "report.json"), ("folded", "report.folded")]:
        main(["report", "--in", str(prof), "--alpha-from", str(orc), "--format", fmt,
              "--out", str(d / name)])


def test_c8_golden_files(tmp_path):
    names = ["report.json", "report.folded"]
    runs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        _golden_run(d)
        runs.append(d)
    same = [(r / n).read_bytes() == (GOLDEN / n).read_bytes() for r in runs for n in names]
    assert record(8, "golden files", all(same),
                  f"{sum(same)}/{len(same)} outputs byte-identical to the frozen files")


def test_c9_e2e_determinism(tmp_path):
    argv = ["e2e", "--contexts", "3", "--objects", "80", "--groups", "50,20,10", "--threads", "2",
            "--values", "correlated:0.5", "--period", "3", "--seed", "9"]
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        assert main(argv + ["--out-dir", str(d)]) == 0
    names = sorted(p.name for p in dirs[0].iterdir())
    match, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
    assert record(9, "e2e determinism", not mismatch and not errors and len(match) == 6,
                  f"{len(match)}/{len(names)} artifacts byte-identical")


if __name__ == "__main__":
    import pytest
    sys.exit(pytest.main([__file__, "-q", "-s"]))
