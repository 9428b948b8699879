"""Numpy fallback for the signature and edit-distance kernels.

Must stay bit-identical to the compiled backend: all arithmetic is unsigned
64-bit with wraparound, and the mixing chain is the standard 64-bit avalanche
finalizer (xor-shift 33, two odd multipliers).
"""

from __future__ import annotations

import numpy as np

_M1 = np.uint64(0xFF51AFD7ED558CCD)
_M2 = np.uint64(0xC4CEB9FE1A85EC53)
_S33 = np.uint64(33)


def mix_min(hashes: np.ndarray, salts: np.ndarray) -> np.ndarray:
    """Per-salt minimum of mix(hash XOR salt) over all hashes.

    hashes: (s,) uint64 shingle hashes; salts: (k,) uint64. Returns (k,) uint64.
    """
    h = hashes.reshape(-1, 1) ^ salts.reshape(1, -1)
    h ^= h >> _S33
    h *= _M1
    h ^= h >> _S33
    h *= _M2
    h ^= h >> _S33
    return h.min(axis=0)


def levenshtein_u32(a: np.ndarray, b: np.ndarray) -> int:
    """Edit distance between two uint32 codepoint arrays (two-row dynamic program)."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = list(range(lb + 1))
    cur = [0] * (lb + 1)
    for i in range(1, la + 1):
        cur[0] = i
        ca = a[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ca == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev, cur = cur, prev
    return prev[lb]
