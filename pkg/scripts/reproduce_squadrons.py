"""Stable outcomes of the three five-player squadrons, plus the one reached by
adding links one at a time from the empty graph."""

import argparse
from pathlib import Path

from endnet.dynamics import uncoordinated_outcomes
from endnet.export import fmt_vector, to_dot
from endnet.families import SQUADRONS, squadron
from endnet.stability import enumerate_stable
from endnet.structure import describe_structure


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=None, help="directory for DOT files")
    ap.add_argument("--concept", default="pairwise", choices=["pairwise", "strict", "pns"])
    args = ap.parse_args()
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for k in sorted(SQUADRONS):
        game = squadron(k)
        outs = enumerate_stable(game, args.concept)
        print(f"squadron {k}: b = {SQUADRONS[k]}, {len(outs)} stable outcome(s)")
        for m, o in enumerate(outs, 1):
            print(f"  {o.graph}  s = {fmt_vector(o.profile)}  [{describe_structure(o.graph, o.profile)}]")
            if out:
                (out / f"squadron{k}-{m}.dot").write_text(to_dot(o, game.model.b, name=f"squadron{k}_{m}"))
        picked = uncoordinated_outcomes(game)
        print("  reached from the empty graph: " + ", ".join(f"{o.graph} s = {fmt_vector(o.profile)}" for o in picked))


if __name__ == "__main__":
    main()
