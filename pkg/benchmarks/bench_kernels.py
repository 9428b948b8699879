"""Timing comparison: compiled signature/edit-distance kernels vs the numpy
fallback. Run from the repository root:

    python3 benchmarks/bench_kernels.py [--values 2000] [--repeats 5]
"""

from __future__ import annotations

import argparse
import random
import string
import time

import numpy as np

from sqlscout.value_index import _kernels_py
from sqlscout.value_index.minhash import MinHashParams, permutation_salts, shingle_hashes

try:
    from sqlscout.value_index import _kernels as _compiled
except ImportError:
    _compiled = None


def random_values(n: int, rng: random.Random) -> list[str]:
    alphabet = string.ascii_lowercase + " "
    return [
        "".join(rng.choice(alphabet) for _ in range(rng.randrange(4, 30)))
        for _ in range(n)
    ]


def time_run(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def bench_mix_min(values: list[str], repeats: int) -> dict[str, float]:
    salts = permutation_salts(MinHashParams())
    hashes = [shingle_hashes(v) for v in values]

    timings = {
        "python": time_run(
            lambda: [_kernels_py.mix_min(h, salts) for h in hashes], repeats
        )
    }
    if _compiled is not None:
        timings["compiled"] = time_run(
            lambda: [_compiled.mix_min(h, salts) for h in hashes], repeats
        )
        for py_sig, c_sig in zip(
            (_kernels_py.mix_min(h, salts) for h in hashes),
            (_compiled.mix_min(h, salts) for h in hashes),
        ):
            assert np.array_equal(py_sig, c_sig), "backends disagree"
    return timings


def bench_levenshtein(values: list[str], repeats: int) -> dict[str, float]:
    pairs = [
        (
            np.asarray([ord(c) for c in a], dtype=np.uint32),
            np.asarray([ord(c) for c in b], dtype=np.uint32),
        )
        for a, b in zip(values, reversed(values))
    ]

    timings = {
        "python": time_run(
            lambda: [_kernels_py.levenshtein_u32(a, b) for a, b in pairs], repeats
        )
    }
    if _compiled is not None:
        timings["compiled"] = time_run(
            lambda: [_compiled.levenshtein_u32(a, b) for a, b in pairs], repeats
        )
        for a, b in pairs[:50]:
            assert _compiled.levenshtein_u32(a, b) == _kernels_py.levenshtein_u32(a, b)
    return timings


def report(name: str, timings: dict[str, float], n: int) -> None:
    py = timings["python"]
    print(f"{name}  ({n} inputs)")
    print(f"  python    {py * 1e3:9.2f} ms")
    if "compiled" in timings:
        c = timings["compiled"]
        print(f"  compiled  {c * 1e3:9.2f} ms   ({py / c:5.1f}x faster)")
    else:
        print("  compiled  unavailable (extension not built)")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--values", type=int, default=2000,
                        help="number of synthetic values to process")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats; best run is reported")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    values = random_values(args.values, rng)
    report("mix_min (128 salts)", bench_mix_min(values, args.repeats), args.values)
    report("levenshtein_u32", bench_levenshtein(values, args.repeats), args.values)


if __name__ == "__main__":
    main()
