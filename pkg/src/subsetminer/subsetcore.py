"""Set algebra over instruction-subset families.

Subsets are sorted tuples of instruction names.  Families keep their
subsets in a list so that every operation is order-preserving and
deterministic; canonical (sorted) order is only imposed on serialisation.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

FORMAT_VERSION = 1

Subset = tuple[str, ...]

STAGES = ("raw", "deduped", "reduced", "amplified", "derived")


def make_subset(members: Iterable[str]) -> Subset:
    return tuple(sorted(set(members)))


@dataclass(frozen=True)
class FamilyMeta:
    source: str = ""
    size_limit: int | None = None
    headroom: int = 0
    seed: int | None = None
    stage: str = "raw"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        extra = d.pop("extra")
        d.update(extra)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FamilyMeta":
        known = {"source", "size_limit", "headroom", "seed", "stage"}
        return cls(
            source=d.get("source", ""),
            size_limit=d.get("size_limit"),
            headroom=d.get("headroom", 0),
            seed=d.get("seed"),
            stage=d.get("stage", "raw"),
            extra={k: v for k, v in d.items() if k not in known},
        )


@dataclass(frozen=True)
class SubsetFamily:
    subsets: list[Subset]
    meta: FamilyMeta = field(default_factory=FamilyMeta)

    def __len__(self) -> int:
        return len(self.subsets)

    def __iter__(self):
        return iter(self.subsets)

    def with_subsets(self, subsets: list[Subset], **meta) -> "SubsetFamily":
        return SubsetFamily(subsets, replace(self.meta, **meta) if meta else self.meta)

    def instructions(self) -> set[str]:
        return {i for s in self.subsets for i in s}

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "meta": self.meta.to_dict(),
            "subsets": [list(s) for s in sorted(self.subsets)],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=None, separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "SubsetFamily":
        return cls([make_subset(s) for s in d["subsets"]], FamilyMeta.from_dict(d.get("meta", {})))

    @classmethod
    def loads(cls, text: str) -> "SubsetFamily":
        return cls.from_dict(json.loads(text))


def family(subsets: Iterable[Iterable[str]], **meta) -> SubsetFamily:
    """Convenience constructor normalising each member."""
    return SubsetFamily([make_subset(s) for s in subsets], FamilyMeta(**meta))


def _subsets(fam: SubsetFamily | Sequence[Subset]) -> list[Subset]:
    return list(fam.subsets) if isinstance(fam, SubsetFamily) else list(fam)


def covers(fam: SubsetFamily | Sequence[Subset], iu: Iterable[str]) -> bool:
    """True iff a single member of ``fam`` contains every instruction of ``iu``."""
    need = set(iu)
    return any(need.issubset(s) for s in _subsets(fam))


def dedupe(fam: SubsetFamily) -> SubsetFamily:
    out = list(dict.fromkeys(fam.subsets))
    return fam.with_subsets(out, stage=_advance(fam.meta.stage, "deduped"))


def _advance(current: str, new: str) -> str:
    return new if STAGES.index(new) > STAGES.index(current) else current


class ContainmentIndex:
    """Inverted index instruction -> ids of subsets containing it."""

    def __init__(self, subsets: Sequence[Subset]):
        self.subsets = list(subsets)
        self.postings: dict[str, set[int]] = {}
        for idx, s in enumerate(self.subsets):
            for i in s:
                self.postings.setdefault(i, set()).add(idx)

    def supersets(self, members: Iterable[str]) -> set[int]:
        """Ids of indexed subsets containing all of ``members``."""
        lists = []
        for i in members:
            p = self.postings.get(i)
            if not p:
                return set()
            lists.append(p)
        if not lists:
            return set(range(len(self.subsets)))
        lists.sort(key=len)
        result = set(lists[0])
        for p in lists[1:]:
            result &= p
            if not result:
                break
        return result


def remove_proper_subsets(fam: SubsetFamily) -> SubsetFamily:
    """Drop every member wholly contained in another member.

    Containment is transitive, so testing each member against the whole
    input reaches the fixpoint in one pass.  Duplicates are collapsed first.
    """
    subsets = list(dict.fromkeys(fam.subsets))
    index = ContainmentIndex(subsets)
    keep = []
    for idx, s in enumerate(subsets):
        sup = index.supersets(s)
        sup.discard(idx)
        if not sup:
            keep.append(s)
    return fam.with_subsets(keep, stage=_advance(fam.meta.stage, "reduced"))


def amplify(
    fam: SubsetFamily,
    factor: float,
    cap: int,
    seed: int | None,
    max_part: int | None = None,
) -> SubsetFamily:
    """Add up to ``ceil(factor * len(fam))`` unions of random member pairs.

    Pairs are drawn uniformly without replacement from members no larger
    than ``max_part`` (default ``cap // 2``); a pair is rejected when its
    union exceeds ``cap`` or already exists.  At most ``10 * target`` pairs
    are tried.
    """
    if factor < 0:
        raise ValueError(f"amplification factor must be >= 0, got {factor}")
    subsets = list(dict.fromkeys(fam.subsets))
    target = math.ceil(factor * len(subsets))
    if target == 0:
        return fam.with_subsets(subsets, stage=_advance(fam.meta.stage, "deduped"))
    if max_part is None:
        max_part = cap // 2
    pool = [s for s in subsets if len(s) <= max_part]
    rng = random.Random(seed)
    present = set(subsets)
    tried: set[tuple[int, int]] = set()
    max_pairs = len(pool) * (len(pool) - 1) // 2
    added: list[Subset] = []
    attempts = 0
    while len(added) < target and attempts < 10 * target and len(tried) < max_pairs:
        attempts += 1
        a, b = sorted(rng.sample(range(len(pool)), 2))
        if (a, b) in tried:
            continue
        tried.add((a, b))
        union = make_subset(pool[a] + pool[b])
        if len(union) > cap or union in present:
            continue
        present.add(union)
        added.append(union)
    return fam.with_subsets(subsets + added, stage=_advance(fam.meta.stage, "amplified"))


def filter_by_size(fam: SubsetFamily, limit: int) -> SubsetFamily:
    if limit < 1:
        raise ValueError(f"size limit must be >= 1, got {limit}")
    return fam.with_subsets([s for s in fam.subsets if len(s) <= limit], size_limit=limit)
