"""Acceptance criteria, one test each.

Each test records a PASS/FAIL line, shown in the terminal summary.
Runtime budgets are asserted along with the values.
"""

from __future__ import annotations

import itertools
import random
import shutil
import time
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache

import pytest

from cli_runs import run_all, snapshot
from oracles import proper_subset_filter, stage1_reference, tally
from subsetminer.clustering import ClusterConfig, calibrate_num_ids, cluster, stage1_augment
from subsetminer.estimator import ArityProfile, enumerate_space, reduction_factor, redundancy, space_size
from subsetminer.evaluation import corpus_distributions, coverage_curve, measure_coverage
from subsetminer.subsetcore import dedupe, family, remove_proper_subsets
from subsetminer.synth import SynthConfig, synth_units

pytestmark = pytest.mark.acceptance

LETTERS = "abcdefghijklmno"


@lru_cache(maxsize=1)
def fixed_corpus():
    return synth_units(SynthConfig(units=10_000, seed=42))


def test_training_coverage_exact(report):
    start = time.perf_counter()
    worst = 100.0
    for seed in range(50):
        units = synth_units(SynthConfig(units=1000, seed=seed))
        for size in (10, 30):
            result = cluster(units, ClusterConfig(target_size=size))
            worst = min(worst, measure_coverage(result.ids, units, size).coverage_eligible)
    elapsed = time.perf_counter() - start
    ok = worst == 100.0 and elapsed < 60
    report("training coverage is exactly 100%", ok, f"min {worst:.2f}%, {elapsed:.1f}s")
    assert worst == 100.0
    assert elapsed < 60


def test_fixpoint_oracle(report):
    rng = random.Random(2024)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        universe = LETTERS[: rng.randint(1, 15)]
        subsets = [
            rng.sample(universe, rng.randint(1, len(universe))) for _ in range(rng.randint(0, 300))
        ]
        fam = dedupe(family(subsets))
        got = set(remove_proper_subsets(fam).subsets)
        if got != set(proper_subset_filter(fam.subsets)):
            mismatches += 1
    elapsed = time.perf_counter() - start
    report("fixpoint equals all-pairs filter", mismatches == 0 and elapsed < 30,
           f"{mismatches} mismatches, {elapsed:.1f}s")
    assert mismatches == 0
    assert elapsed < 30


def _antichain(fam) -> bool:
    sets = [frozenset(s) for s in fam]
    return not any(a < b for a, b in itertools.permutations(sets, 2))


def _stage1_cases(limit: int):
    """Reduced families over exactly n instructions, n and family size in 1..6.

    Buckets are drawn round-robin so the cap does not starve the larger ones.
    """

    def bucket(n, k):
        universe = LETTERS[:n]
        pool = [c for r in range(1, n + 1) for c in itertools.combinations(universe, r)]
        for fam in itertools.combinations(pool, k):
            if len({i for s in fam for i in s}) == n and _antichain(fam):
                yield fam

    live = [bucket(n, k) for n in range(1, 7) for k in range(1, 7)]
    produced = 0
    while live and produced < limit:
        for gen in list(live):
            fam = next(gen, None)
            if fam is None:
                live.remove(gen)
                continue
            yield fam
            produced += 1
            if produced >= limit:
                return


def test_stage1_oracle(report):
    cases = 0
    bad = 0
    for fam in _stage1_cases(10**5):
        cap = 2 + cases % 5
        steps = []
        out = stage1_augment(family(fam), cap, steps)
        final, ref = stage1_reference(fam, cap)
        got = [(s.subset, s.instruction, len(s.subsumed)) for s in steps]
        if got != ref or sorted(out.subsets) != sorted(final):
            bad += 1
        cases += 1
    report("stage-1 choice subsumes the maximum", bad == 0, f"{cases} families, {bad} disagreements")
    assert bad == 0


def test_estimator_grid(report):
    start = time.perf_counter()
    bad = []
    checked = 0
    for inputs, unary, binary, depth in itertools.product((1, 2, 3), range(3), range(3), range(4)):
        if unary == 0 and binary == 0:
            continue
        profile = ArityProfile(unary, binary, inputs)
        if space_size(profile, depth) != enumerate_space(profile, depth):
            bad.append((inputs, unary, binary, depth))
        checked += 1
    elapsed = time.perf_counter() - start
    report("recurrence equals enumeration", not bad and elapsed < 60,
           f"{checked} grid points, {len(bad)} mismatches, {elapsed:.1f}s")
    assert not bad
    assert elapsed < 60


def test_reduction_magnitude(report):
    start = time.perf_counter()
    r = reduction_factor(ArityProfile(0, 200), ArityProfile(0, 10), 1000, 5)
    elapsed = time.perf_counter() - start
    report("reduction factor above 10^6", r.log10 > 6 and elapsed < 1, f"log10 {r.log10:.2f}")
    assert r.log10 > 6
    assert elapsed < 1


def test_redundancy_decay(report):
    start = time.perf_counter()
    r = redundancy(2, ArityProfile(0, 10), 5)
    elapsed = time.perf_counter() - start
    decreasing = all(a > b for a, b in zip(r, r[1:]))
    ok = decreasing and r[4] < 0.01 and elapsed < 1
    report("redundancy decays below 1%", ok, "R = " + ", ".join(f"{float(x):.2e}" for x in r))
    assert decreasing
    assert r[4] < 0.01
    assert elapsed < 1


FRACTIONS = [round(0.1 * k, 1) for k in range(1, 11)]


def test_coverage_curve_trend(report):
    units = fixed_corpus()
    start = time.perf_counter()
    template = ClusterConfig(target_size=10, increment=100)
    by_fraction = {f: [] for f in FRACTIONS}
    for seed in range(5):
        for row in coverage_curve(units, [10], FRACTIONS, template, seed):
            by_fraction[row.fraction].append(row.coverage_eligible)
    means = [sum(by_fraction[f]) / len(by_fraction[f]) for f in FRACTIONS]
    elapsed = time.perf_counter() - start
    dips = [b - a for a, b in zip(means, means[1:]) if b < a]
    trend = all(d >= -1.0 for d in dips)
    full = all(v == 100.0 for v in by_fraction[1.0])
    ok = trend and full and elapsed < 300
    report("coverage non-decreasing in train fraction", ok,
           "means " + " ".join(f"{m:.1f}" for m in means) + f", {elapsed:.0f}s")
    assert trend, means
    assert full
    assert elapsed < 300


def _calibrate(size: int) -> int:
    return calibrate_num_ids(fixed_corpus(), ClusterConfig(target_size=size))


def test_subset_count_trend(report):
    start = time.perf_counter()
    sizes = [10, 20, 30, 40, 50]
    with ProcessPoolExecutor(max_workers=min(len(sizes), 8)) as pool:
        counts = list(pool.map(_calibrate, sizes))
    elapsed = time.perf_counter() - start
    ok = all(a >= b for a, b in zip(counts, counts[1:])) and elapsed < 600
    report("calibrated subset count non-increasing in M", ok,
           " ".join(f"M{m}:{c}" for m, c in zip(sizes, counts)) + f", {elapsed:.0f}s")
    assert all(a >= b for a, b in zip(counts, counts[1:])), counts
    assert elapsed < 600


def test_determinism_across_jobs(tmp_path, report):
    out = tmp_path / "run"
    run_all(out, jobs=1)
    serial = snapshot(out)
    shutil.rmtree(out)
    run_all(out, jobs=8)
    parallel = snapshot(out)
    differing = sorted(k for k in serial.keys() | parallel.keys() if serial.get(k) != parallel.get(k))
    report("outputs byte-identical for --jobs 1 and 8", not differing,
           f"{len(serial)} files compared" + (f", differ: {differing}" if differing else ""))
    assert not differing


def test_distribution_bookkeeping(report):
    rng = random.Random(7)
    bad = 0
    for _ in range(100):
        universe = LETTERS[: rng.randint(1, 15)]
        units = [
            tuple(sorted(rng.sample(universe, rng.randint(1, len(universe)))))
            for _ in range(rng.randint(1, 80))
        ]
        rep = corpus_distributions(units)
        sizes, instr, pairs = tally(units)
        freq = dict(rep.instruction_frequency)
        checks = [
            {s: c for s, c, _ in rep.size_histogram} == dict(sizes),
            sum(c for _, c, _ in rep.size_histogram) == len(units),
            freq == dict(instr),
            dict(rep.pair_frequency) == {k: v for k, v in pairs.items() if v},
            all(c <= min(freq[a], freq[b]) for (a, b), c in rep.pair_frequency),
        ]
        bad += not all(checks)
    report("distributions equal nested-loop tally", bad == 0, f"100 fixtures, {bad} bad")
    assert bad == 0
