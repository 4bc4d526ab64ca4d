"""Plot-ready CSV: closed-form threshold verdicts against exhaustive
enumeration of the peer-effects game over a range of alpha."""

import argparse
import csv
import sys
from fractions import Fraction

from endnet.analytics import complete_graph_conditions, empty_graph_stable
from endnet.families import make_lq_peer_game
from endnet.stability import enumerate_stable


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--b", default="1,3,7,15", help="comma-separated incentives, ascending")
    ap.add_argument("--steps", type=int, default=40, help="alpha = k/steps for k = 1..steps")
    args = ap.parse_args()
    b = [Fraction(x) for x in args.b.split(",")]
    w = csv.writer(sys.stdout)
    w.writerow(["alpha", "empty_test", "empty_in_set", "complete_exists_test", "complete_unique_test",
                "complete_impossible_test", "complete_in_set", "n_stable"])
    for k in range(1, args.steps + 1):
        alpha = Fraction(k, args.steps)
        outs = enumerate_stable(make_lq_peer_game(b, alpha), "pairwise")
        a, u, c = complete_graph_conditions(b, alpha)
        w.writerow([f"{float(alpha):.4f}", int(empty_graph_stable(b, alpha).notes["exact_verdict"]),
                    int(any(o.graph.is_empty() for o in outs)), int(a.verdict), int(u.verdict), int(c.verdict),
                    int(any(o.graph.is_complete() for o in outs)), len(outs)])


if __name__ == "__main__":
    main()
