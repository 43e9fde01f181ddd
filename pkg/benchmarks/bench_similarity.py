"""Benchmark the compiled edit-distance kernel against the pure-Python fallback.

Pairwise name scoring is the hot loop of candidate generation, so this is the
one place a compiled kernel pays off. Run:

    python benchmarks/bench_similarity.py [--pairs 20000]
"""

import argparse
import random
import time

from concordia._kernels import BACKEND
from concordia._kernels.pyfallback import levenshtein as py_levenshtein
from concordia.fixtures import person_name
from concordia.matcher import normalize_name

try:
    from concordia._kernels._editdist import levenshtein as cy_levenshtein
except ImportError:
    cy_levenshtein = None


def build_pairs(count: int, seed: int = 1) -> list[tuple[str, str]]:
    rng = random.Random(seed)
    names = [normalize_name(person_name(i)).text for i in range(200)]
    pairs = []
    for _ in range(count):
        a = rng.choice(names)
        b = rng.choice(names)
        if rng.random() < 0.3:
            # perturb one side, the realistic near-match case
            pos = rng.randrange(len(b))
            b = b[:pos] + "x" + b[pos + 1 :]
        pairs.append((a, b))
    return pairs


def run(fn, pairs) -> tuple[float, int]:
    started = time.perf_counter()
    checksum = 0
    for a, b in pairs:
        checksum += fn(a, b)
    return time.perf_counter() - started, checksum


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=20_000)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    pairs = build_pairs(args.pairs, args.seed)
    print(f"active backend at import: {BACKEND}")
    print(f"{args.pairs} name pairs, mean length "
          f"{sum(len(a) + len(b) for a, b in pairs) / (2 * len(pairs)):.1f} chars\n")
    print(f"{'backend':<14}{'time':>10}{'pairs/s':>14}")

    py_time, py_sum = run(py_levenshtein, pairs)
    print(f"{'python':<14}{py_time:>9.3f}s{args.pairs / py_time:>14,.0f}")

    if cy_levenshtein is None:
        print(f"{'cython':<14}{'not built':>10}")
        return
    cy_time, cy_sum = run(cy_levenshtein, pairs)
    print(f"{'cython':<14}{cy_time:>9.3f}s{args.pairs / cy_time:>14,.0f}")
    if cy_sum != py_sum:
        raise SystemExit("backends disagree; the test suite should have caught this")
    print(f"\nspeedup: {py_time / cy_time:.1f}x (identical results on all pairs)")


if __name__ == "__main__":
    main()
