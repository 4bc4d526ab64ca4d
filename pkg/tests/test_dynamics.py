import itertools
import json
from fractions import Fraction as F

import numpy as np
import pytest

from endnet.core import Graph, Outcome, PreconditionError, SizeGuardError, all_graphs
from endnet.dynamics import (check_existence_preconditions, epsilon_pns_check, lower_map, max_stable_graph,
                             min_stable_graph, outcome_leq, simulate_revision, state_hash, tarski_extremes,
                             uncoordinated_search, upper_map)
from endnet.families import (make_lq_peer_game, make_nonexistence_example, random_generic_game,
                             random_supermodular_game, random_table_game, squadron)
from endnet.stability import check_pairwise, check_pairwise_nash, enumerate_stable


def test_uncoordinated_selects_two_cliques():
    stable, paths = uncoordinated_search(squadron(3))
    two = Graph.cliques([(0, 1), (2, 3, 4)], 5)
    assert [o.graph for o in stable] == [two]
    path = paths[two.mask]
    assert path.states[0].graph.is_empty() and path.final == stable[0]
    assert len(path.steps) == 4
    for st in path.steps:
        assert min(st.gain_i, st.gain_j) >= 0 and max(st.gain_i, st.gain_j) > 0


def test_uncoordinated_reaches_complete_graph_for_squadron_one():
    stable, _ = uncoordinated_search(squadron(1))
    assert [o.graph for o in stable] == [Graph.complete(5)]


def test_stable_graph_maps_bracket_the_stable_graphs():
    rng = np.random.default_rng(3)
    game = random_supermodular_game(rng, 3, 3, ("complements", "positive"))
    for s in itertools.product(game.grid, repeat=3):
        hi, lo = max_stable_graph(game, s), min_stable_graph(game, s)
        assert lo.issubgraph(hi)


@pytest.mark.parametrize("cell", [("complements", "positive"), ("substitutes", "negative")])
def test_tarski_extremes_bound_enumeration(cell):
    rng = np.random.default_rng(7)
    reverse = cell[0] == "substitutes"
    for _ in range(10):
        game = random_supermodular_game(rng, 3, 3, cell)
        res = tarski_extremes(game, cell)
        lo, hi = res
        outs = enumerate_stable(game, "pairwise")
        assert lo in outs and hi in outs
        assert all(outcome_leq(lo, o, reverse) and outcome_leq(o, hi, reverse) for o in outs)
        # fixed points of the maps
        assert upper_map(game, hi, reverse) == hi and lower_map(game, lo, reverse) == lo


def test_tarski_requires_existence_cell():
    rng = np.random.default_rng(9)
    game = random_table_game(rng, 3, 3, ("complements", "negative"))
    with pytest.raises(PreconditionError):
        tarski_extremes(game, ("complements", "negative"), check=False)


def test_existence_precondition_sampling_catches_violation():
    # g decreasing in the partner's action breaks positive spillovers
    from endnet.families import make_table_game

    game = make_table_game([0, 1], [[0, 0]] * 3, [[1, -1], [2, -2]])
    with pytest.raises(PreconditionError):
        check_existence_preconditions(game, ("complements", "positive"), np.random.default_rng(0))


def test_revision_is_reproducible_and_absorbs_at_stable_outcome():
    game = make_lq_peer_game([4, 4, 6, 6, 9], 1, exact=False)
    a = simulate_revision(game, horizon=20_000, seed=5)
    b = simulate_revision(game, horizon=20_000, seed=5)
    assert a.to_jsonl() == b.to_jsonl()
    assert a.absorbed is not None and a.absorbed.graph.is_complete()
    assert check_pairwise(game, a.absorbed).stable


def test_revision_on_nonexistence_never_absorbs():
    game = make_nonexistence_example()
    for seed in range(5):
        tr = simulate_revision(game, horizon=2_000, seed=seed)
        assert tr.absorbed is None and len(tr.events) == 2_000


def test_revision_absorbs_on_grid_game_at_pairwise_stable_point():
    rng = np.random.default_rng(13)
    for _ in range(10):
        game = random_supermodular_game(rng, 3, 3, ("complements", "positive"))
        tr = simulate_revision(game, horizon=5_000, seed=1)
        if tr.absorbed is not None:
            assert check_pairwise(game, tr.absorbed).stable


def test_trace_format(tmp_path):
    game = make_nonexistence_example()
    tr = simulate_revision(game, horizon=50, seed=2)
    path = tmp_path / "trace.log"
    tr.write(path)
    lines = path.read_text().splitlines()
    head = json.loads(lines[0])
    assert head == {"seed": 2, "rate": 1.0, "discount": 0.9}
    rec = json.loads(lines[1])
    assert set(rec) == {"t", "clock", "decision", "state"}
    times = [json.loads(x)["t"] for x in lines[1:]]
    assert times == sorted(times)
    assert state_hash(Outcome(Graph.empty(2), (0, 0))) != state_hash(Outcome(Graph.complete(2), (0, 0)))


def test_epsilon_pns_matches_pns_on_generic_games():
    rng = np.random.default_rng(17)
    for _ in range(5):
        game = random_generic_game(rng, 3, 2)
        for g in all_graphs(3):
            for s in itertools.product(game.grid, repeat=3):
                o = Outcome(g, s)
                assert epsilon_pns_check(game, o) == check_pairwise_nash(game, o).stable


def test_epsilon_pns_size_guard():
    rng = np.random.default_rng(19)
    game = random_generic_game(rng, 5, 2)
    with pytest.raises(SizeGuardError):
        epsilon_pns_check(game, Outcome(Graph.empty(5), (0,) * 5))
