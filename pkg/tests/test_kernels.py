"""Compiled vs pure-Python kernel parity."""

import os
import subprocess
import sys

import numpy as np
import pytest

from sqlscout.value_index import _kernels_py
from sqlscout.value_index.kernels import BACKEND

compiled = pytest.importorskip(
    "sqlscout.value_index._kernels",
    reason="compiled extension not built; fallback covered elsewhere",
)


def oracle_levenshtein(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1,
                           prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def codepoints(s: str) -> np.ndarray:
    return np.asarray([ord(c) for c in s], dtype=np.uint32)


def test_backend_prefers_compiled_when_importable():
    if os.environ.get("SQLSCOUT_KERNELS", "").lower() == "python":
        assert BACKEND == "python"
    else:
        assert BACKEND == "compiled"


def test_mix_min_parity_random():
    rng = np.random.default_rng(11)
    for _ in range(50):
        hashes = rng.integers(0, 2**64, size=rng.integers(1, 40),
                              dtype=np.uint64)
        salts = rng.integers(0, 2**64, size=128, dtype=np.uint64)
        np.testing.assert_array_equal(
            compiled.mix_min(hashes, salts),
            _kernels_py.mix_min(hashes, salts),
        )


def test_mix_min_parity_edge_values():
    salts = np.asarray([0, 1, 2**64 - 1, 2**63], dtype=np.uint64)
    for hashes in ([0], [2**64 - 1], [0, 2**64 - 1, 12345]):
        arr = np.asarray(hashes, dtype=np.uint64)
        np.testing.assert_array_equal(
            compiled.mix_min(arr, salts), _kernels_py.mix_min(arr, salts))


def test_levenshtein_parity_and_oracle():
    rng = np.random.default_rng(13)
    alphabet = "abcde"
    for _ in range(200):
        a = "".join(alphabet[i] for i in rng.integers(0, 5, rng.integers(0, 15)))
        b = "".join(alphabet[i] for i in rng.integers(0, 5, rng.integers(0, 15)))
        want = oracle_levenshtein(a, b)
        assert compiled.levenshtein_u32(codepoints(a), codepoints(b)) == want
        assert _kernels_py.levenshtein_u32(codepoints(a), codepoints(b)) == want


def test_levenshtein_empty_sides():
    empty = codepoints("")
    abc = codepoints("abc")
    for impl in (compiled, _kernels_py):
        assert impl.levenshtein_u32(empty, empty) == 0
        assert impl.levenshtein_u32(empty, abc) == 3
        assert impl.levenshtein_u32(abc, empty) == 3


def test_env_override_forces_python_backend():
    code = ("import sqlscout.value_index.kernels as k; print(k.BACKEND)")
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={**os.environ, "SQLSCOUT_KERNELS": "python"},
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_signatures_identical_across_backends():
    from sqlscout.value_index.minhash import MinHashParams, permutation_salts, shingle_hashes

    salts = permutation_salts(MinHashParams())
    for text in ("san pablo ave", "thai", "a"):
        hashes = shingle_hashes(text)
        np.testing.assert_array_equal(
            compiled.mix_min(hashes, salts),
            _kernels_py.mix_min(hashes, salts),
        )
