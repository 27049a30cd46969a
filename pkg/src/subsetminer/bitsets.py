"""Packed bitset encoding of instruction subsets over a sorted universe.

Bit ``k`` stands for the ``k``-th instruction in lexicographic order, so
lower bit index means lexicographically smaller instruction.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

WORD = 64


class Universe:
    def __init__(self, names: Iterable[str]):
        self.names: list[str] = sorted(set(names))
        self.index = {n: k for k, n in enumerate(self.names)}
        self.words = max(1, -(-len(self.names) // WORD))

    def __len__(self) -> int:
        return len(self.names)

    def encode(self, subsets: Sequence[Sequence[str]]) -> np.ndarray:
        out = np.zeros((len(subsets), self.words), dtype=np.uint64)
        for row, s in enumerate(subsets):
            for name in s:
                k = self.index[name]
                out[row, k // WORD] |= np.uint64(1) << np.uint64(k % WORD)
        return out

    def encode_one(self, subset: Sequence[str]) -> np.ndarray:
        return self.encode([subset])[0]

    def decode(self, mask: np.ndarray) -> tuple[str, ...]:
        names = []
        for w in range(self.words):
            word = int(mask[w])
            while word:
                low = word & -word
                names.append(self.names[w * WORD + low.bit_length() - 1])
                word ^= low
        return tuple(names)

    def bit(self, k: int) -> np.ndarray:
        out = np.zeros(self.words, dtype=np.uint64)
        out[k // WORD] = np.uint64(1) << np.uint64(k % WORD)
        return out


def popcount(masks: np.ndarray) -> np.ndarray:
    """Set-bit count along the last axis."""
    return np.bitwise_count(masks).sum(axis=-1, dtype=np.int64)


def single_bit_index(masks: np.ndarray) -> np.ndarray:
    """Index of the only set bit in each row (rows must have exactly one)."""
    word = np.argmax(masks != 0, axis=1)
    vals = masks[np.arange(len(masks)), word]
    # powers of two are exact in float64
    bit = np.log2(vals.astype(np.float64)).astype(np.int64)
    return word.astype(np.int64) * WORD + bit
