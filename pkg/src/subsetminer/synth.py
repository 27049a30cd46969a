"""Synthetic unit corpora with Zipf-ranked instruction use.

Unit sizes follow a geometric law truncated to the vocabulary; the default
success probability puts about 90% of units at 10 instructions or fewer.
Instructions are drawn without replacement with weight ``rank ** -exponent``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import UnitRecord

# 1 - (1 - p) ** 10 == 0.9
DEFAULT_SIZE_P = 1.0 - 0.1 ** (1.0 / 10.0)


@dataclass(frozen=True)
class SynthConfig:
    units: int = 1000
    vocabulary: int = 200
    exponent: float = 1.0
    size_p: float = DEFAULT_SIZE_P
    max_size: int = 80
    units_per_file: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.units < 0 or self.vocabulary < 1 or self.units_per_file < 1:
            raise ValueError("units >= 0, vocabulary >= 1 and units_per_file >= 1 required")
        if not 0 < self.size_p <= 1:
            raise ValueError(f"size_p must be in (0, 1], got {self.size_p}")
        if self.exponent < 0:
            raise ValueError(f"exponent must be >= 0, got {self.exponent}")


def instruction_names(vocabulary: int) -> list[str]:
    width = len(str(vocabulary - 1))
    return [f"i{r:0{width}d}" for r in range(vocabulary)]


def zipf_weights(vocabulary: int, exponent: float) -> np.ndarray:
    w = np.arange(1, vocabulary + 1, dtype=np.float64) ** -exponent
    return w / w.sum()


def synth_units(cfg: SynthConfig) -> list[UnitRecord]:
    rng = np.random.default_rng(cfg.seed)
    names = instruction_names(cfg.vocabulary)
    weights = zipf_weights(cfg.vocabulary, cfg.exponent)
    top = min(cfg.max_size, cfg.vocabulary)
    sizes = np.minimum(rng.geometric(cfg.size_p, size=cfg.units), top)
    nfiles = -(-cfg.units // cfg.units_per_file)
    width = len(str(max(nfiles - 1, 0)))
    records = []
    for u, k in enumerate(sizes):
        picks = rng.choice(cfg.vocabulary, size=int(k), replace=False, p=weights)
        file_no = u // cfg.units_per_file
        records.append(
            UnitRecord(
                path=f"synthetic/f{file_no:0{width}d}.py",
                kind="function",
                name=f"u{u}",
                instructions=tuple(sorted(names[p] for p in picks)),
            )
        )
    return records
