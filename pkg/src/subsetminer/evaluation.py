"""Coverage of held-out code, train/test splits and corpus distributions."""

from __future__ import annotations

import math
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Sequence

import numpy as np

from .bitsets import Universe
from .clustering import ClusterConfig, cluster, default_headroom
from .corpus import UnitRecord
from .subsetcore import Subset, SubsetFamily, make_subset


def _members(u) -> Subset:
    return make_subset(getattr(u, "instructions", u))


def split_corpus(
    units: Sequence[UnitRecord], train_fraction: float, seed: int
) -> tuple[list[UnitRecord], list[UnitRecord]]:
    """Partition units by file: every unit of a file lands on the same side.

    ``round(train_fraction * files)`` files (at least one) are drawn for
    training after a seeded shuffle of the sorted file list.
    """
    if not 0 < train_fraction <= 1:
        raise ValueError(f"train fraction must be in (0, 1], got {train_fraction}")
    if not units:
        raise ValueError("cannot split an empty corpus")
    files = sorted({u.path for u in units})
    random.Random(seed).shuffle(files)
    n_train = min(len(files), max(1, math.floor(train_fraction * len(files) + 0.5)))
    train_files = set(files[:n_train])
    train = [u for u in units if u.path in train_files]
    test = [u for u in units if u.path not in train_files]
    return train, test


@dataclass
class CoverageReport:
    total_units: int
    eligible_units: int
    covered_units: int  # eligible units covered
    covered_any: int  # units of any size covered
    coverage_eligible: float
    coverage_all: float
    per_subset: list[tuple[int, int]]

    def ranked_subsets(self) -> list[tuple[int, int]]:
        """Subsets by number of eligible units covered, most useful first."""
        return sorted(self.per_subset, key=lambda p: (-p[1], p[0]))

    def summary(self) -> dict:
        return {
            "total_units": self.total_units,
            "eligible_units": self.eligible_units,
            "covered_units": self.covered_units,
            "covered_any": self.covered_any,
            "coverage_eligible": round(self.coverage_eligible, 6),
            "coverage_all": round(self.coverage_all, 6),
            "subsets": len(self.per_subset),
        }


def _pct(num: int, den: int) -> float:
    return 100.0 * num / den if den else 0.0


def coverage_matrix(fam: Sequence[Subset], units: Sequence[Subset]) -> np.ndarray:
    """Boolean (units x subsets) matrix: unit contained in subset."""
    out = np.zeros((len(units), len(fam)), dtype=bool)
    if not units or not fam:
        return out
    uni = Universe({i for s in fam for i in s} | {i for u in units for i in u})
    f = ~uni.encode(fam)
    u = uni.encode(units)
    chunk = max(1, 2_000_000 // (len(fam) * uni.words))
    for lo in range(0, len(units), chunk):
        block = u[lo : lo + chunk, None, :] & f[None, :, :]
        out[lo : lo + chunk] = ~block.any(axis=2)
    return out


def measure_coverage(ids: SubsetFamily | Sequence[Subset], units, size_limit: int) -> CoverageReport:
    """Coverage of ``units`` by ``ids``.

    Units with more than ``size_limit`` instructions are not eligible; the
    headline ``coverage_eligible`` is over eligible units only and
    ``coverage_all`` over every unit.
    """
    fam = list(ids.subsets if isinstance(ids, SubsetFamily) else ids)
    subsets = [_members(u) for u in units]
    hit = coverage_matrix(fam, subsets)
    eligible = np.array([len(s) <= size_limit for s in subsets], dtype=bool)
    covered = hit.any(axis=1) if fam else np.zeros(len(subsets), dtype=bool)
    n_elig = int(eligible.sum())
    n_cov = int((covered & eligible).sum())
    n_any = int(covered.sum())
    per = hit[eligible].sum(axis=0) if fam else np.zeros(0, dtype=np.int64)
    return CoverageReport(
        total_units=len(subsets),
        eligible_units=n_elig,
        covered_units=n_cov,
        covered_any=n_any,
        coverage_eligible=_pct(n_cov, n_elig),
        coverage_all=_pct(n_any, len(subsets)),
        per_subset=[(i, int(c)) for i, c in enumerate(per)],
    )


@dataclass
class DistributionReport:
    size_histogram: list[tuple[int, int, float]]  # size, units, cumulative %
    instruction_frequency: list[tuple[str, int]]
    pair_frequency: list[tuple[tuple[str, str], int]]


def _ranked(counter: Counter) -> list:
    return sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))


def corpus_distributions(units) -> DistributionReport:
    subsets = [_members(u) for u in units]
    sizes = Counter(len(s) for s in subsets)
    hist = []
    running = 0
    for size in sorted(sizes):
        running += sizes[size]
        hist.append((size, sizes[size], 100.0 * running / len(subsets)))
    instr: Counter[str] = Counter()
    pairs: Counter[tuple[str, str]] = Counter()
    for s in subsets:
        instr.update(s)
        pairs.update(combinations(s, 2))
    return DistributionReport(hist, _ranked(instr), _ranked(pairs))


@dataclass(frozen=True)
class CurveRow:
    size: int
    fraction: float
    seed: int
    train_units: int
    num_ids: int
    coverage_eligible: float
    coverage_all: float


def _curve_cell(args) -> CurveRow:
    units, size, fraction, template, seed = args
    config = replace(
        template,
        target_size=size,
        headroom=template.headroom if template.headroom is not None else default_headroom(size),
    )
    train, _ = split_corpus(units, fraction, seed)
    result = cluster(train, config)
    report = measure_coverage(result.ids, units, size)
    return CurveRow(
        size,
        fraction,
        seed,
        len(train),
        result.num_created,
        report.coverage_eligible,
        report.coverage_all,
    )


def coverage_curve(
    units: Sequence[UnitRecord],
    sizes: Sequence[int],
    fractions: Sequence[float],
    template: ClusterConfig,
    seed: int,
    jobs: int = 1,
) -> list[CurveRow]:
    """Train on a split for every (size, fraction) cell; test on all units.

    ``template`` supplies every clustering parameter except the target
    size; with no explicit headroom each size gets its default headroom.
    """
    if not sizes or not fractions:
        raise ValueError("need at least one size and one fraction")
    cells = [(list(units), m, f, template, seed) for m in sizes for f in fractions]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_curve_cell, cells))
    return [_curve_cell(c) for c in cells]
