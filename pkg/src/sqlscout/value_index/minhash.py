"""MinHash signatures over character shingles.

A text's signature is, for each of k salted hash functions, the minimum hash
over the text's distinct shingles. The fraction of equal signature positions
estimates the Jaccard similarity of the underlying shingle sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation
from . import kernels

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class MinHashParams:
    num_permutations: int = 128
    bands: int = 16
    rows_per_band: int = 8
    shingle_size: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.bands * self.rows_per_band != self.num_permutations:
            raise ContractViolation("bands * rows_per_band must equal num_permutations")
        if self.shingle_size < 1:
            raise ContractViolation("shingle_size must be >= 1")


def permutation_salts(params: MinHashParams) -> np.ndarray:
    """The k salts that define the hash family; fixed by the seed."""
    rng = np.random.default_rng(params.seed)
    return rng.integers(0, 2**64, size=params.num_permutations, dtype=np.uint64)


def shingle_set(text: str, size: int = 3) -> set[bytes]:
    """Distinct character n-grams, utf-8 encoded. Short texts yield themselves."""
    if len(text) < size:
        return {text.encode("utf-8")}
    return {text[i : i + size].encode("utf-8") for i in range(len(text) - size + 1)}


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _U64
    return h


def shingle_hashes(text: str, size: int = 3) -> np.ndarray:
    hashes = sorted(fnv1a64(s) for s in shingle_set(text, size))
    return np.asarray(hashes, dtype=np.uint64)


def signature(text: str, salts: np.ndarray, shingle_size: int = 3) -> np.ndarray:
    """MinHash signature of `text` (case-sensitive; callers lowercase first)."""
    return kernels.mix_min(shingle_hashes(text, shingle_size), salts)


def estimate_jaccard(sig_a: np.ndarray, sig_b: np.ndarray) -> float:
    if sig_a.shape != sig_b.shape:
        raise ContractViolation("signatures have different lengths")
    return float(np.mean(sig_a == sig_b))
