"""Brute-force reference computations used as independent test oracles.

Nothing here imports the package's algorithms; only plain sets and ints.
"""

from __future__ import annotations

import itertools
from collections import Counter


def proper_subset_filter(subsets):
    """Quadratic all-pairs filter: keep s unless some other member strictly contains it."""
    sets = [frozenset(s) for s in subsets]
    keep = []
    for s in sets:
        if not any(s < t for t in sets):
            keep.append(tuple(sorted(s)))
    return keep


def order(subsets):
    return sorted(subsets, key=lambda s: (-len(s), tuple(sorted(s))))


def stage1_reference(subsets, cap):
    """Stage-1 loop by exhaustive search over every (IU, instruction) pair.

    Returns (final family, [(iu, chosen or None, max_count)]).
    """
    live = [set(s) for s in order(subsets)]
    alive = [True] * len(live)
    universe = sorted({i for s in live for i in s})
    steps = []
    for idx in range(len(live)):
        if not alive[idx]:
            continue
        iu = live[idx]
        best, best_count = None, 0
        for instr in universe:
            if instr in iu or len(iu) + 1 > cap:
                continue
            grown = iu | {instr}
            count = sum(
                1 for j in range(len(live)) if j != idx and alive[j] and live[j] <= grown
            )
            if count > best_count:
                best, best_count = instr, count
        steps.append((tuple(sorted(iu)), best, best_count))
        if best is not None:
            grown = iu | {best}
            for j in range(len(live)):
                if j != idx and alive[j] and live[j] <= grown:
                    alive[j] = False
            live[idx] = grown
    final = [tuple(sorted(live[k])) for k in range(len(live)) if alive[k]]
    return final, steps


def stage2_reference(subsets, num_ids, cap):
    """Direct simulation of the placement rule with Python sets."""
    ids = [set() for _ in range(num_ids)]
    extra = 0
    for iu in order(subsets):
        iu = set(iu)
        empty = [k for k, d in enumerate(ids) if not d]
        if empty:
            ids[empty[0]] = set(iu)
            continue
        cands = [k for k, d in enumerate(ids) if len(d | iu) <= cap]
        if not cands:
            ids.append(set(iu))
            extra += 1
            continue
        k = min(cands, key=lambda k: (-len(ids[k] & iu), len(ids[k]), k))
        ids[k] |= iu
    return [tuple(sorted(d)) for d in ids if d], extra


def tally(subsets):
    """Nested-loop counts: sizes, per-instruction and per-pair unit counts."""
    sizes = Counter()
    instr = Counter()
    pairs = Counter()
    universe = sorted({i for s in subsets for i in s})
    for s in subsets:
        sizes[len(set(s))] += 1
    for i in universe:
        for s in subsets:
            if i in s:
                instr[i] += 1
    for a, b in itertools.combinations(universe, 2):
        for s in subsets:
            if a in s and b in s:
                pairs[(a, b)] += 1
    return sizes, instr, pairs
