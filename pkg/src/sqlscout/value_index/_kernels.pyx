# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled signature and edit-distance kernels.

Semantics must match _kernels_py exactly: unsigned 64-bit wraparound
arithmetic and the standard 64-bit avalanche finalizer.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    """
    static inline unsigned long long sqlscout_mix64(unsigned long long x) {
        x ^= x >> 33;
        x *= 0xFF51AFD7ED558CCDULL;
        x ^= x >> 33;
        x *= 0xC4CEB9FE1A85EC53ULL;
        x ^= x >> 33;
        return x;
    }
    """
    unsigned long long sqlscout_mix64(unsigned long long x) nogil


def mix_min(cnp.ndarray[cnp.uint64_t, ndim=1] hashes,
            cnp.ndarray[cnp.uint64_t, ndim=1] salts):
    """Per-salt minimum of mix(hash XOR salt) over all hashes."""
    cdef Py_ssize_t s = hashes.shape[0]
    cdef Py_ssize_t k = salts.shape[0]
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(k, dtype=np.uint64)
    cdef Py_ssize_t i, j
    cdef unsigned long long best, mixed
    with nogil:
        for j in range(k):
            best = 0xFFFFFFFFFFFFFFFFULL
            for i in range(s):
                mixed = sqlscout_mix64(hashes[i] ^ salts[j])
                if mixed < best:
                    best = mixed
            out[j] = best
    return out


def levenshtein_u32(cnp.ndarray[cnp.uint32_t, ndim=1] a,
                    cnp.ndarray[cnp.uint32_t, ndim=1] b):
    """Edit distance between two uint32 codepoint arrays (two-row dynamic program)."""
    cdef Py_ssize_t la = a.shape[0]
    cdef Py_ssize_t lb = b.shape[0]
    if la == 0:
        return lb
    if lb == 0:
        return la
    cdef cnp.ndarray[cnp.int64_t, ndim=1] prev = np.arange(lb + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cur = np.zeros(lb + 1, dtype=np.int64)
    cdef Py_ssize_t i, j
    cdef long long cost, best
    cdef unsigned int ca
    with nogil:
        for i in range(1, la + 1):
            cur[0] = i
            ca = a[i - 1]
            for j in range(1, lb + 1):
                cost = 0 if ca == b[j - 1] else 1
                best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                if prev[j - 1] + cost < best:
                    best = prev[j - 1] + cost
                cur[j] = best
            for j in range(lb + 1):
                prev[j], cur[j] = cur[j], prev[j]
    return int(prev[lb])
