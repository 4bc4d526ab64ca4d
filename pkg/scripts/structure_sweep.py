"""Check the predicted graph structure on strictly stable outcomes of random
single-crossing table games, one line per taxonomy cell."""

import argparse
import time
from collections import Counter

import numpy as np

from endnet.families import CELLS, random_table_game
from endnet.stability import enumerate_stable
from endnet.structure import classify_game, verify_theorem1


def sweep(cell, games, rng, max_n, max_grid):
    stats = Counter()
    first_bad = None
    for _ in range(games):
        n = int(rng.integers(2, max_n + 1))
        m = int(rng.integers(2, max_grid + 1))
        game = random_table_game(rng, n, m, cell)
        tc = classify_game(game)
        for o in enumerate_stable(game, "strict"):
            v = verify_theorem1(game, o, cell=tc, check_stable=False)
            stats["outcomes"] += 1
            stats[f"orders {v.relation}"] += 1
            stats["aligned"] += bool(v.notes.get("aligned"))
            if not v.ok:
                stats["violations"] += 1
                first_bad = first_bad or (str(o), v.failures)
    return stats, first_bad


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--games", type=int, default=200)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--max-n", type=int, default=5)
    ap.add_argument("--max-grid", type=int, default=4)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    for cell in CELLS:
        stats, bad = sweep(cell, args.games, rng, args.max_n, args.max_grid)
        print(f"{cell[0]:>11}/{cell[1]:<8} " + "  ".join(f"{k}={v}" for k, v in sorted(stats.items())))
        if bad:
            print(f"  first violation: {bad}")
    print(f"elapsed {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
