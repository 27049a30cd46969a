"""Greedy clustering of unit subsets into size-bounded derived subsets."""

from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable

import numpy as np

from .bitsets import Universe, popcount, single_bit_index

from .subsetcore import (
    Subset,
    FamilyMeta,
    SubsetFamily,
    amplify,
    dedupe,
    filter_by_size,
    make_subset,
    remove_proper_subsets,
)


def default_headroom(size: int) -> int:
    return math.ceil(0.2 * size)


@dataclass(frozen=True)
class ClusterConfig:
    target_size: int
    headroom: int | None = None  # None -> default_headroom(target_size)
    num_ids: int = 0  # 0 -> calibrate
    seed: int = 0
    amplify_factor: float = 0.5
    increment: int = 10  # calibration step when num_ids == 0

    def __post_init__(self):
        if self.target_size < 1:
            raise ValueError(f"target size must be >= 1, got {self.target_size}")
        if self.headroom is not None and self.headroom < 0:
            raise ValueError(f"headroom must be >= 0, got {self.headroom}")
        if self.num_ids < 0:
            raise ValueError(f"num_ids must be >= 0, got {self.num_ids}")
        if self.amplify_factor < 0:
            raise ValueError(f"amplify factor must be >= 0, got {self.amplify_factor}")
        if self.increment < 1:
            raise ValueError(f"increment must be >= 1, got {self.increment}")

    @property
    def effective_headroom(self) -> int:
        return default_headroom(self.target_size) if self.headroom is None else self.headroom

    @property
    def cap(self) -> int:
        return self.target_size + self.effective_headroom

    def resolved(self) -> dict:
        d = asdict(self)
        d["headroom"] = self.effective_headroom
        return d


TRACE_KEYS = (
    "input",
    "after_dedupe",
    "after_filter",
    "after_amplify",
    "after_reduce",
    "after_stage1",
    "after_stage2",
    "after_postmerge",
)


@dataclass
class ClusterResult:
    ids: SubsetFamily
    num_requested: int
    extra_created: int  # IDs stage 2 had to add beyond the requested number
    trace: dict[str, int] = field(default_factory=lambda: dict.fromkeys(TRACE_KEYS, 0))

    @property
    def num_created(self) -> int:
        return len(self.ids.subsets)

    @property
    def honoured(self) -> bool:
        return self.extra_created == 0


def processing_order(subsets: Iterable[Subset]) -> list[Subset]:
    """Descending size, ties in lexicographic order."""
    return sorted(subsets, key=lambda s: (-len(s), s))


@dataclass(frozen=True)
class AugmentStep:
    subset: Subset  # the IU before augmentation
    instruction: str | None  # None when nothing could be subsumed
    subsumed: tuple[Subset, ...]


def stage1_augment(
    fam: SubsetFamily, cap: int, steps: list[AugmentStep] | None = None
) -> SubsetFamily:
    """Grow each IU by the single instruction that subsumes the most other IUs.

    Input must be duplicate-free and contain no proper subsets.  IUs are
    visited in :func:`processing_order`; an instruction is added only if it
    subsumes at least one surviving IU and the result fits ``cap``.  Ties go
    to the lexicographically least instruction.  When ``steps`` is given,
    one :class:`AugmentStep` per visited IU is appended to it.

    Another survivor J becomes a subset of IU + {i} exactly when
    J - IU == {i}, so the candidates are the survivors missing IU by one bit.
    """
    order = processing_order(fam.subsets)
    if not order:
        return fam.with_subsets([])
    uni = Universe(fam.instructions())
    masks = uni.encode(order)
    sizes = np.array([len(s) for s in order], dtype=np.int64)
    alive = np.ones(len(order), dtype=bool)

    for idx in range(len(order)):
        if not alive[idx]:
            continue
        iu = uni.decode(masks[idx])
        if sizes[idx] >= cap:
            if steps is not None:
                steps.append(AugmentStep(iu, None, ()))
            continue
        outside = masks & ~masks[idx]
        cand = alive & (popcount(outside) == 1)
        cand[idx] = False
        rows = np.flatnonzero(cand)
        if len(rows) == 0:
            if steps is not None:
                steps.append(AugmentStep(iu, None, ()))
            continue
        extra = single_bit_index(outside[rows])
        counts = np.bincount(extra, minlength=len(uni))
        best = int(np.argmax(counts))  # first maximum = least instruction
        victims = rows[extra == best]
        alive[victims] = False
        masks[idx] |= uni.bit(best)
        sizes[idx] += 1
        if steps is not None:
            steps.append(
                AugmentStep(iu, uni.names[best], tuple(uni.decode(masks[j]) for j in victims))
            )

    survivors = [uni.decode(masks[k]) for k in np.flatnonzero(alive)]
    return fam.with_subsets(survivors)


def _stage2(
    order: list[Subset], num_ids: int, cap: int, stop_on_extra: bool = False
) -> tuple[list[Subset], int]:
    for s in order:
        if len(s) > cap:
            raise ValueError(f"subset of size {len(s)} exceeds cap {cap}; filter upstream")
    if not order:
        return [], 0
    uni = Universe({i for s in order for i in s})
    m = uni.encode(order)
    sizes = np.array([len(s) for s in order], dtype=np.int64)
    seeded = min(num_ids, len(order))
    ids = np.zeros((len(order), uni.words), dtype=np.uint64)
    id_sizes = np.zeros(len(order), dtype=np.int64)
    ids[:seeded] = m[:seeded]
    id_sizes[:seeded] = sizes[:seeded]
    k = seeded
    extra = 0
    for i in range(seeded, len(order)):
        inter = popcount(ids[:k] & m[i])
        union = id_sizes[:k] + sizes[i] - inter
        eligible = union <= cap
        if eligible.any():
            # max intersection, then min size, then lowest index
            score = np.where(eligible, inter * (cap + 1) + (cap - id_sizes[:k]), -1)
            j = int(np.argmax(score))
            ids[j] |= m[i]
            id_sizes[j] = union[j]
        else:
            ids[k] = m[i]
            id_sizes[k] = sizes[i]
            k += 1
            extra += 1
            if stop_on_extra:
                break
    return [uni.decode(ids[j]) for j in range(k)], extra


def stage2_merge(fam: SubsetFamily, num_ids: int, cap: int) -> SubsetFamily:
    """Place IUs (largest first) into ``num_ids`` pre-created IDs.

    An IU fills the next empty ID while one remains; afterwards it joins the
    ID it overlaps most among those it fits in (``|ID | IU| <= cap``),
    preferring the smaller ID, then the lower index.  An IU that fits
    nowhere opens a new ID; the count of such extras is recorded in
    ``meta.extra["extra_created"]``.  Unused empty IDs are discarded.
    """
    ids, extra = _stage2(processing_order(fam.subsets), num_ids, cap)
    meta = replace(fam.meta, extra={**fam.meta.extra, "extra_created": extra})
    return SubsetFamily(ids, meta)


def post_merge(fam: SubsetFamily, cap: int) -> SubsetFamily:
    """Merge IDs by size alone until no two fit together under ``cap``.

    The smallest ID that fits somewhere is merged into the partner giving
    the largest union (then the larger partner, then the lower index).  An
    ID that fits nowhere never will, since IDs only grow.
    """
    subsets = list(fam.subsets)
    if len(subsets) < 2:
        return fam.with_subsets(subsets)
    uni = Universe(fam.instructions())
    masks = uni.encode(subsets)
    sizes = np.array([len(s) for s in subsets], dtype=np.int64)
    alive = np.ones(len(subsets), dtype=bool)
    heap = [(int(sizes[i]), i) for i in range(len(subsets))]
    heapq.heapify(heap)
    while heap:
        size, s = heapq.heappop(heap)
        if not alive[s] or size != sizes[s]:
            continue
        union = sizes + sizes[s] - popcount(masks & masks[s])
        fits = alive & (union <= cap)
        fits[s] = False
        if not fits.any():
            continue
        fits &= union == union[fits].max()
        fits &= sizes == sizes[fits].max()
        t = int(np.argmax(fits))
        masks[t] |= masks[s]
        sizes[t] = union[t]
        alive[s] = False
        heapq.heappush(heap, (int(sizes[t]), t))
    return fam.with_subsets([uni.decode(masks[i]) for i in np.flatnonzero(alive)])


def _as_family(units) -> SubsetFamily:
    if isinstance(units, SubsetFamily):
        return units
    subsets = []
    for u in units:
        members = getattr(u, "instructions", u)
        subsets.append(make_subset(members))
    return SubsetFamily(subsets)


def prepare(units, config: ClusterConfig, trace: dict[str, int] | None = None) -> SubsetFamily:
    """Everything before stage 2: dedupe, size filter, amplify, reduce, stage 1."""
    trace = {} if trace is None else trace
    fam = _as_family(units)
    fam = fam.with_subsets([s for s in fam.subsets if s])
    trace["input"] = len(fam)
    fam = dedupe(fam)
    trace["after_dedupe"] = len(fam)
    fam = filter_by_size(fam, config.target_size)
    trace["after_filter"] = len(fam)
    fam = amplify(
        fam,
        config.amplify_factor,
        config.cap,
        config.seed,
        max_part=config.target_size // 2,
    )
    trace["after_amplify"] = len(fam)
    fam = remove_proper_subsets(fam)
    trace["after_reduce"] = len(fam)
    fam = stage1_augment(fam, config.cap)
    trace["after_stage1"] = len(fam)
    return fam


def calibrate_prepared(fam: SubsetFamily, cap: int, increment: int) -> int:
    order = processing_order(fam.subsets)
    if not order:
        return 0
    n = increment
    while True:
        _, extra = _stage2(order, n, cap, stop_on_extra=True)
        if extra == 0:
            return n
        n += increment


def calibrate_num_ids(units, config: ClusterConfig, increment: int | None = None) -> int:
    """Smallest multiple of ``increment`` whose request stage 2 can honour.

    A request for n IDs is honoured when stage 2 ends with exactly the n
    requested IDs, i.e. it never had to open an extra one.  Requesting at
    least one ID per prepared IU always succeeds, so the search ends.
    Returns 0 for an empty admitted family.
    """
    increment = config.increment if increment is None else increment
    if increment < 1:
        raise ValueError(f"increment must be >= 1, got {increment}")
    return calibrate_prepared(prepare(units, config), config.cap, increment)


def cluster(units, config: ClusterConfig, source: str = "") -> ClusterResult:
    trace = dict.fromkeys(TRACE_KEYS, 0)
    fam = prepare(units, config, trace)
    num_ids = config.num_ids
    if num_ids == 0:
        num_ids = calibrate_prepared(fam, config.cap, config.increment)
    order = processing_order(fam.subsets)
    ids, extra = _stage2(order, num_ids, config.cap)
    trace["after_stage2"] = len(ids)
    merged = post_merge(SubsetFamily(ids), config.cap)
    trace["after_postmerge"] = len(merged)
    meta = FamilyMeta(
        source=source,
        size_limit=config.target_size,
        headroom=config.effective_headroom,
        seed=config.seed,
        stage="derived",
        extra={
            "num_requested": num_ids,
            "extra_created": extra,
            "amplify_factor": config.amplify_factor,
            "trace": dict(trace),
        },
    )
    return ClusterResult(SubsetFamily(merged.subsets, meta), num_ids, extra, trace)
