import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from endnet.core import Graph, Outcome, PreconditionError, all_graphs
from endnet.families import CELLS, make_status_game, make_table_game, random_table_game, squadron
from endnet.stability import check_strict_pairwise, enumerate_stable
from endnet.structure import (_dominates_in, _dominates_out, _sign_matrix, action_order, check_alignment,
                              check_consistency, classify_game, classify_single_crossing, closed_intervals,
                              degree_partition, derive_orders, describe_structure, find_overlapping_clique_order,
                              is_nested_split_graph, is_nested_split_graph_by_partition, is_overlapping_clique_order,
                              verify_theorem1)


def induced(g, vs):
    return frozenset((a, b) for a, b in itertools.combinations(vs, 2) if g.has_edge(a, b))


def threshold_oracle(g):
    """Threshold graphs are exactly those without induced P4, C4 or 2K2."""
    for vs in itertools.combinations(range(g.n), 4):
        e = induced(g, vs)
        degs = sorted(sum(v in pair for pair in e) for v in vs)
        if len(e) == 3 and degs == [1, 1, 2, 2]:      # P4
            return False
        if len(e) == 4 and degs == [2, 2, 2, 2]:      # C4
            return False
        if len(e) == 2 and degs == [1, 1, 1, 1]:      # 2K2
            return False
    return True


def ooc_oracle(g):
    return any(is_overlapping_clique_order(g, p).ok for p in itertools.permutations(range(g.n)))


@pytest.mark.parametrize("n", range(2, 6))
def test_nested_split_graph_matches_forbidden_subgraphs(n):
    for g in all_graphs(n):
        want = threshold_oracle(g)
        assert is_nested_split_graph(g).ok == want
        assert is_nested_split_graph_by_partition(g).ok == want


def test_nested_split_graph_examples():
    star = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    assert is_nested_split_graph(star)
    path = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert not is_nested_split_graph(path)
    assert not is_nested_split_graph(Graph.cliques([(0, 1), (2, 3)], 4))
    part = degree_partition(star)
    assert part.blocks == ((), (1, 2, 3), (0,))


@pytest.mark.parametrize("n", range(2, 6))
def test_order_search_matches_permutations(n):
    for g in all_graphs(n):
        found = find_overlapping_clique_order(g)
        assert (found is not None) == ooc_oracle(g)
        if found is not None:
            assert is_overlapping_clique_order(g, found)


def test_overlapping_clique_examples():
    path = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert is_overlapping_clique_order(path, [0, 1, 2, 3])
    assert closed_intervals(path, [0, 1, 2, 3]) == [(0, 1), (0, 2), (1, 3), (2, 3)]
    assert not is_overlapping_clique_order(path, [1, 0, 2, 3])
    cycle = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert find_overlapping_clique_order(cycle) is None
    claw = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    assert find_overlapping_clique_order(claw) is None


@settings(max_examples=80, deadline=None)
@given(st.integers(3, 7), st.data())
def test_closed_intervals_are_monotone_for_valid_orders(n, data):
    mask = data.draw(st.integers(0, (1 << (n * (n - 1) // 2)) - 1))
    g = Graph.from_mask(n, mask)
    order = find_overlapping_clique_order(g)
    if order is None:
        return
    iv = closed_intervals(g, order)
    assert all(a[0] <= b[0] and a[1] <= b[1] for a, b in zip(iv, iv[1:]))
    # every closed neighborhood is exactly its interval
    for k, p in enumerate(order):
        lo, hi = iv[k]
        assert set(order[lo:hi + 1]) == set(g.neighbors(p)) | {p}


def test_classify_single_crossing_examples():
    assert classify_single_crossing([[0, -1], [1, 2]]).cell == ("complements", "negative")
    assert classify_single_crossing([[-1, 0], [0, 1]]).cell == ("complements", "positive")
    assert classify_single_crossing([[1, 0], [0, -1]]).cell == ("substitutes", "negative")
    assert classify_single_crossing([[-1, 1], [-1, -1]]).cell == ("substitutes", "positive")
    assert classify_single_crossing([[1, -1], [-1, 1]]).cell == ("neither", "neither")
    flat = classify_single_crossing([[1, 1], [1, 1]])
    assert flat.degenerate and flat.cell == ("complements", "positive")


def test_status_game_cell():
    # g(x, y) = 1 - delta max(y - x, 0): rises in own action, falls in the partner's
    assert classify_game(make_status_game(3, 1, F(1, 2))).cell == ("complements", "negative")


def test_consistency_violation_example():
    game = make_table_game([0, 1], [[0, 0]] * 4, [[1, -1], [-1, 1]])
    o = Outcome(Graph.empty(4), (0, 1, 0, 1))
    c = check_consistency(game, o)
    assert not c.ok
    i, j, k, l = c.witness
    S = _sign_matrix(game, o)
    assert S[i][k] >= 0 and S[i][l] < 0 and S[j][k] < 0 and S[j][l] >= 0
    with pytest.raises(PreconditionError):
        derive_orders(game, o)


def test_small_games_are_vacuously_consistent():
    game = make_table_game([0, 1], [[0, 0]] * 3, [[1, -1], [-1, 1]])
    o = Outcome(Graph.empty(3), (0, 1, 0))
    assert check_consistency(game, o) and check_alignment(game, o)


CELL_DIRECTIONS = {
    ("complements", "positive"): (1, 1),
    ("complements", "negative"): (-1, 1),
    ("substitutes", "positive"): (1, -1),
    ("substitutes", "negative"): (-1, -1),
}


@pytest.mark.parametrize("cell", CELLS)
def test_orders_follow_actions_in_each_cell(cell):
    """Higher actions rank weakly higher (or lower) in each order as the cell dictates."""
    rng = np.random.default_rng(53)
    t_in, t_out = CELL_DIRECTIONS[cell]
    for _ in range(40):
        n = int(rng.integers(3, 6))
        game = random_table_game(rng, n, 3, cell)
        s = tuple(int(x) for x in rng.integers(0, 3, size=n))
        o = Outcome(Graph.empty(n), s)
        S = _sign_matrix(game, o)
        for i, j in itertools.permutations(range(n), 2):
            if s[i] >= s[j]:
                hi_in, lo_in = (i, j) if t_in > 0 else (j, i)
                hi_out, lo_out = (i, j) if t_out > 0 else (j, i)
                assert _dominates_in(S, hi_in, lo_in, refined=False)
                assert _dominates_out(S, hi_out, lo_out, refined=False)
        assert check_consistency(game, o)


@pytest.mark.parametrize("cell", CELLS)
def test_derived_orders_carry_incentives(cell):
    rng = np.random.default_rng(59)
    for _ in range(40):
        n = int(rng.integers(3, 6))
        game = random_table_game(rng, n, 3, cell)
        o = Outcome(Graph.empty(n), tuple(int(x) for x in rng.integers(0, 3, size=n)))
        try:
            orders = derive_orders(game, o)
        except PreconditionError:
            continue
        S = _sign_matrix(game, o)
        r_in, r_out = orders.in_rank, orders.out_rank
        for j, k in itertools.permutations(range(n), 2):
            others = [i for i in range(n) if i not in (j, k)]
            if r_in[k] >= r_in[j]:
                assert all(S[i][k] >= 0 for i in others if S[i][j] >= 0)
            if r_out[k] >= r_out[j]:
                assert all(S[k][i] >= 0 for i in others if S[j][i] >= 0)
        assert orders.identical or orders.opposed


def test_verify_rejects_unstable_outcome():
    game = squadron(1)
    with pytest.raises(PreconditionError):
        verify_theorem1(game, Outcome(Graph.empty(5), (1, 1, 1, 1, 1)))


@pytest.mark.parametrize("cell", CELLS)
def test_verify_theorem1_on_random_games(cell):
    rng = np.random.default_rng(61)
    for _ in range(30):
        game = random_table_game(rng, int(rng.integers(2, 5)), 3, cell)
        for o in enumerate_stable(game, "strict"):
            v = verify_theorem1(game, o)
            assert v.ok, (o, v.failures)


def test_tie_breaks_keep_opposed_orders_valid():
    # all players tie in the out-order; only the in-order separates player 2
    game = make_table_game([0, 1], [[0, 0]] * 3, [[-1, 1], [-1, 1]])
    o = Outcome(Graph.from_edges(3, [(0, 2)]), (1, 0, 1))
    if check_strict_pairwise(game, o).stable:
        assert verify_theorem1(game, o).ok


def test_describe_structure():
    g = Graph.cliques([(0, 1), (2, 3, 4)], 5)
    assert describe_structure(g, (4, 4, 9, 9, 9)) == "ordered overlapping cliques; order = action order"
    assert describe_structure(Graph.complete(3), (1, 1, 1)).startswith("nested split graph")
    assert describe_structure(Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])) == "neither class"
    assert action_order((3, 1, 2)) == [1, 2, 0]
