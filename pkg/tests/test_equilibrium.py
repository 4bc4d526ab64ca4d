import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from endnet.core import Graph, Outcome, PreconditionError, SizeGuardError, all_graphs
from endnet.equilibrium import (MAX_NASH_GRID, best_responses, clique_actions, extremal_nash, finite_nash,
                                is_nash, iterate_best_response, lq_foc_residual, lq_nash_on_graph,
                                status_max_equilibrium)
from endnet.families import (CELLS, make_lq_peer_game, make_nonexistence_example, make_status_game,
                             make_table_game, random_supermodular_game, random_table_game, squadron)


def brute_nash(game, graph):
    out = []
    for s in itertools.product(game.grid, repeat=game.n):
        if all(game.u(graph, s, i) >= max(game.u(graph, s[:i] + (a,) + s[i + 1:], i) for a in game.grid)
               for i in range(game.n)):
            out.append(s)
    return out


def test_isolated_players_play_b():
    game = make_lq_peer_game([4, 6, 9], F(1, 2))
    assert lq_nash_on_graph(game, Graph.empty(3)) == (4, 6, 9)


def test_squadron_two_cliques():
    s = lq_nash_on_graph(squadron(3), Graph.cliques([(0, 1), (2, 3, 4)], 5))
    assert s == (4, 4, 9, 9, 9)


def test_squadron_one_complete_graph_exact():
    s = lq_nash_on_graph(squadron(1), Graph.complete(5))
    assert s == (F(11, 2), F(11, 2), F(35, 6), F(35, 6), F(19, 3))
    assert all(isinstance(x, F) for x in s)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2 ** 15 - 1), st.lists(st.integers(1, 30), min_size=6, max_size=6),
       st.integers(0, 10))
def test_lq_solution_satisfies_first_order_conditions(n, mask, bs, a10):
    game = make_lq_peer_game(bs[:n], F(a10, 10))
    g = Graph.from_mask(n, mask % (1 << (n * (n - 1) // 2)))
    s = lq_nash_on_graph(game, g)
    assert lq_foc_residual(game, g, s) == 0
    assert is_nash(game, g, s)


def test_float_mode_residual_small():
    game = make_lq_peer_game([4.0, 6.5, 9.25, 3.0], 0.7)
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    s = lq_nash_on_graph(game, g)
    assert lq_foc_residual(game, g, s) <= 1e-10


@pytest.mark.parametrize("k", range(2, 8))
def test_clique_actions_match_linear_solve(k):
    rng = np.random.default_rng(k)
    b = [F(int(x)) for x in rng.integers(1, 20, size=k)]
    for alpha in (F(0), F(1, 3), F(1)):
        game = make_lq_peer_game(b, alpha)
        assert list(lq_nash_on_graph(game, Graph.complete(k))) == clique_actions(b, alpha)


def test_clique_actions_alpha_one_is_mean_plus_own():
    # alpha = 1: s_i = (b_i + k mean) / (1 + k)
    b = [F(4), F(4), F(9)]
    assert clique_actions(b, F(1)) == [(x + sum(b)) / 4 for x in b]


def test_status_max_equilibrium_values():
    assert status_max_equilibrium([2, 3], 1, F(1, 2)) == (F(3, 2),) * 2 + (F(2),) * 3


@pytest.mark.parametrize("cell", CELLS)
def test_finite_nash_matches_brute_force(cell):
    rng = np.random.default_rng(17)
    for _ in range(15):
        game = random_table_game(rng, 3, 3, cell)
        for g in all_graphs(3):
            want = brute_nash(game, g)
            assert finite_nash(game, g) == want
            # extremal dynamics only reach some equilibria
            assert set(finite_nash(game, g, method="iterate")) <= set(want)


def test_nonexistence_nash_sets():
    game = make_nonexistence_example()
    assert finite_nash(game, Graph.empty(2)) == [(1, 1)]
    assert finite_nash(game, Graph.complete(2)) == [(0, 0)]


def test_extremal_nash_bounds_all_equilibria():
    rng = np.random.default_rng(23)
    for _ in range(20):
        game = random_supermodular_game(rng, 3, 3, ("complements", "positive"))
        for g in all_graphs(3):
            eqs = brute_nash(game, g)
            hi = extremal_nash(game, g, top=True)
            lo = extremal_nash(game, g, top=False)
            assert hi in eqs and lo in eqs
            for s in eqs:
                assert all(x <= y for x, y in zip(s, hi)) and all(x >= y for x, y in zip(s, lo))


def test_status_clique_top_action():
    game = make_status_game(4, 1, F(1, 2))
    top = extremal_nash(game, Graph.complete(4), top=True)
    assert top == (F(5, 2),) * 4


def test_best_responses_and_iteration():
    game = make_table_game([0, 1], [[0, 1], [0, 1]], [[0, 0], [0, 0]])
    assert best_responses(game, Graph.empty(2), (0, 0), 0) == [1]
    assert iterate_best_response(game, Graph.empty(2), (0, 0)) == (1, 1)


def test_grid_size_guard():
    grid = list(range(MAX_NASH_GRID + 1))
    game = make_table_game(grid, [[0] * len(grid)] * 2, [[0] * len(grid)] * len(grid))
    with pytest.raises(SizeGuardError):
        finite_nash(game, Graph.empty(2))
