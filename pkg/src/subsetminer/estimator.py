"""Search-space size by levels of instruction application.

Inputs sit at level 0.  A value at level k is one instruction applied to an
argument tuple drawn from levels below k with at least one argument taken
from level k-1, so every value is created at the earliest level it can be.
With C_k the number of values through level k (inputs included) and
C_{-1} = 0, an instruction of arity a adds C_{k-1}**a - C_{k-2}**a values
at level k.  Counts are syntactic and exact (Python ints).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .catalog import InstructionCatalog


@dataclass(frozen=True)
class ArityProfile:
    unary_count: int = 0
    binary_count: int = 0
    inputs: int = 1
    higher: tuple[tuple[int, int], ...] = ()  # (arity, count) for arity > 2

    def __post_init__(self):
        if self.unary_count < 0 or self.binary_count < 0 or self.inputs < 0:
            raise ValueError("profile counts must be >= 0")
        for arity, count in self.higher:
            if arity < 3 or count < 0:
                raise ValueError(f"bad higher-arity entry ({arity}, {count})")

    @property
    def instructions(self) -> int:
        return self.unary_count + self.binary_count + sum(c for _, c in self.higher)

    def by_arity(self) -> dict[int, int]:
        out = {1: self.unary_count, 2: self.binary_count}
        for arity, count in self.higher:
            out[arity] = out.get(arity, 0) + count
        return {a: c for a, c in out.items() if c}

    @classmethod
    def from_catalog(
        cls, catalog: InstructionCatalog, inputs: int = 1, clamp: bool = True
    ) -> "ArityProfile":
        """Count catalog instructions by arity; arity-0 entries are ignored.

        With ``clamp`` arities above two count as binary.
        """
        counts = catalog.arity_counts()
        unary = counts.get(1, 0)
        binary = counts.get(2, 0)
        higher = []
        for arity, count in counts.items():
            if arity > 2:
                if clamp:
                    binary += count
                else:
                    higher.append((arity, count))
        return cls(unary, binary, inputs, tuple(higher))


@dataclass(frozen=True)
class SpaceEstimate:
    per_level: tuple[int, ...]

    @property
    def cumulative(self) -> int:
        return sum(self.per_level)

    def cumulative_by_level(self) -> list[int]:
        return list(itertools.accumulate(self.per_level))


def space_size(profile: ArityProfile, depth: int) -> SpaceEstimate:
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    arities = profile.by_arity()
    before, through = 0, profile.inputs  # C_{k-2}, C_{k-1}
    levels = []
    for _ in range(depth):
        new = sum(n * (through**a - before**a) for a, n in arities.items())
        levels.append(new)
        before, through = through, through + new
    return SpaceEstimate(tuple(levels))


class BudgetExceeded(RuntimeError):
    pass


def enumerate_space(profile: ArityProfile, depth: int, budget: int = 10**7) -> SpaceEstimate:
    """Count level-by-level applications by explicit enumeration.

    Every argument tuple over the values built so far is generated and kept
    when one of its arguments is a newest-level value.  Terms below the last
    level are materialised as ``(instruction, args)`` so that distinctness is
    checked, not assumed.  Raises :class:`BudgetExceeded` rather than
    returning a partial count once more than ``budget`` nodes are seen.
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    ops = [(f"u{k}", 1) for k in range(profile.unary_count)]
    ops += [(f"b{k}", 2) for k in range(profile.binary_count)]
    for arity, count in profile.higher:
        ops += [(f"h{arity}_{k}", arity) for k in range(count)]

    values: list = [("input", k) for k in range(profile.inputs)]
    level_of = [0] * len(values)
    total = 0
    levels = []
    for level in range(1, depth + 1):
        last = depth == level
        newest = {i for i, lv in enumerate(level_of) if lv == level - 1}
        seen: set = set()
        count = 0
        created = []
        for name, arity in ops:
            for args in itertools.product(range(len(values)), repeat=arity):
                if not any(a in newest for a in args):
                    continue
                count += 1
                if total + count > budget:
                    raise BudgetExceeded(f"more than {budget} nodes by level {level}")
                if not last:
                    term = (name, tuple(values[a] for a in args))
                    if term in seen:
                        raise AssertionError(f"duplicate term {term}")
                    seen.add(term)
                    created.append(term)
        values.extend(created)
        level_of.extend([level] * len(created))
        total += count
        levels.append(count)
    return SpaceEstimate(tuple(levels))


def log10_int(n: int) -> float:
    if n <= 0:
        raise ValueError("log10 of a non-positive count")
    bits = n.bit_length()
    if bits < 1000:
        return math.log10(n)
    shift = bits - 64
    return math.log10(n >> shift) + shift * math.log10(2)


@dataclass(frozen=True)
class Reduction:
    ratio: Fraction

    @property
    def log10(self) -> float:
        return log10_int(self.ratio.numerator) - log10_int(self.ratio.denominator)


def reduction_factor(
    full: ArityProfile, subset: ArityProfile, num_subsets: int, depth: int
) -> Reduction:
    """Full space over ``num_subsets`` copies of a subset space, at ``depth``."""
    if num_subsets < 1:
        raise ValueError(f"num_subsets must be >= 1, got {num_subsets}")
    num = space_size(full, depth).cumulative
    den = num_subsets * space_size(subset, depth).cumulative
    if den == 0:
        raise ZeroDivisionError("subset search space is empty")
    return Reduction(Fraction(num, den))


def overlap_profile(overlap: int, subset: ArityProfile) -> ArityProfile:
    """Split ``overlap`` shared instructions in the subset's unary/binary mix.

    The binary share is rounded up.
    """
    size = subset.unary_count + subset.binary_count
    if subset.higher:
        raise ValueError("overlap split supports unary/binary profiles only")
    if not 0 <= overlap <= size:
        raise ValueError(f"overlap must be within 0..{size}, got {overlap}")
    if size == 0:
        return ArityProfile(0, 0, subset.inputs)
    binary = min(subset.binary_count, -(-overlap * subset.binary_count // size))
    unary = overlap - binary
    return ArityProfile(unary, binary, subset.inputs)


def redundancy(overlap: int, subset: ArityProfile, depth: int) -> list[Fraction]:
    """Share of each level-1..``depth`` cumulative space reachable with shared instructions only."""
    shared = overlap_profile(overlap, subset)
    out = []
    for k in range(1, depth + 1):
        den = space_size(subset, k).cumulative
        if den == 0:
            raise ZeroDivisionError("subset search space is empty")
        out.append(Fraction(space_size(shared, k).cumulative, den))
    return out
