"""Run the Poisson-clock revision dynamics from a config over many seeds and
tabulate where (and whether) they come to rest."""

import argparse
from collections import Counter

from endnet.config import load_config
from endnet.dynamics import simulate_revision
from endnet.export import fmt_vector
from endnet.families import make_lq_peer_game
from endnet.stability import check_pairwise


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", required=True)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--horizon", type=int, default=None)
    args = ap.parse_args()
    cfg = load_config(args.config)
    game = cfg.build_game()
    if cfg.family == "lq" and game.exact:
        game = make_lq_peer_game(cfg.params["b"], cfg.params["alpha"], exact=False)
    horizon = args.horizon or cfg.horizon
    ends = Counter()
    for seed in range(args.seeds):
        tr = simulate_revision(game, rate=cfg.rate, horizon=horizon, seed=seed, discount=cfg.discount)
        if tr.absorbed is None:
            ends["not absorbed"] += 1
            continue
        o = tr.absorbed
        s = fmt_vector(round(x, 3) if isinstance(x, float) else x for x in o.profile)
        ok = check_pairwise(game, o).stable
        ends[f"{o.graph} s={s} pairwise stable={ok}"] += 1
    print(f"{game.name}, {args.seeds} seeds, horizon {horizon}")
    for k, v in ends.most_common():
        print(f"  {v:4d}  {k}")


if __name__ == "__main__":
    main()
