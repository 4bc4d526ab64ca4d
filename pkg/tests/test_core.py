import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from endnet.core import (Graph, InvalidPairError, Outcome, SizeGuardError, ValidationError, all_graphs,
                         as_number, desiring_set, link_value_matrix, marginal_link_value, payoff_vector, sign)
from endnet.families import make_lq_peer_game, make_table_game


def graphs(max_n=7):
    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_n))
        pairs = list(itertools.combinations(range(n), 2))
        chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
        return Graph.from_edges(n, chosen)

    return build()


def test_graph_basics():
    g = Graph.from_edges(4, [(0, 1), (1, 2)])
    assert g.has_edge(1, 0) and not g.has_edge(0, 2)
    assert g.degrees() == (1, 2, 1, 0)
    assert g.edges() == [(0, 1), (1, 2)]
    assert g.neighbors(1) == [0, 2]
    assert g.components() == [[0, 1, 2], [3]]
    assert str(g) == "Graph(n=4, {1-2, 2-3})"


def test_graph_rejects_bad_input():
    with pytest.raises(ValidationError):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(ValidationError):
        Graph.from_edges(3, [(0, 3)])
    with pytest.raises(InvalidPairError):
        Graph.empty(3).add(1, 1)


def test_cliques_and_extremes():
    g = Graph.cliques([(0, 1), (2, 3, 4)], 5)
    assert g.num_edges == 1 + 3
    assert Graph.complete(5).is_complete() and Graph.complete(5).num_edges == 10
    assert Graph.empty(5).is_empty()


@pytest.mark.parametrize("n", range(1, 6))
def test_all_graphs_counts_and_distinct(n):
    gs = list(all_graphs(n))
    assert len(gs) == 2 ** (n * (n - 1) // 2)
    assert len({g.mask for g in gs}) == len(gs)


def test_all_graphs_size_guard():
    with pytest.raises(SizeGuardError):
        next(iter(all_graphs(8)))


@given(graphs())
def test_mask_round_trip(g):
    assert Graph.from_mask(g.n, g.mask) == g


@given(graphs(), st.data())
def test_add_remove_inverse(g, data):
    if g.n < 2:
        return
    i, j = data.draw(st.sampled_from(list(itertools.combinations(range(g.n), 2))))
    assert g.add(i, j).remove(i, j) == g.remove(i, j)
    assert g.add(i, j).has_edge(j, i)
    assert g.remove(i, j).issubgraph(g)


@given(graphs())
def test_degree_sum_is_twice_edges(g):
    assert sum(g.degrees()) == 2 * g.num_edges


def test_sign_and_numbers():
    assert sign(F(-1, 3)) == -1 and sign(0) == 0 and sign(2) == 1
    assert sign(1e-12, 1e-9) == 0 and sign(-1e-3, 1e-9) == -1
    assert as_number("5/6") == F(5, 6)
    assert as_number(2, exact=False) == 2.0 and isinstance(as_number(2, exact=False), float)
    with pytest.raises(ValidationError):
        as_number(True)


def test_marginal_link_value_matches_payoff_difference():
    game = make_lq_peer_game([4, 6, 9], F(1, 2))
    o = Outcome(Graph.from_edges(3, [(0, 1)]), (F(3), F(4), F(5)))
    # Delta_ij u_i = u_i(G + ij) - u_i(G - ij) = g(s_i, s_j) for separable payoffs
    for i, j in itertools.permutations(range(3), 2):
        direct = game.u(o.graph.add(i, j), o.profile, i) - game.u(o.graph.remove(i, j), o.profile, i)
        assert marginal_link_value(game, o, i, j) == direct
        assert direct == game.g(o.profile[i], o.profile[j])
    D = link_value_matrix(game, o)
    assert D[0][2] == F(1, 2) * 3 * 5 - F(9, 2)


def test_desiring_set_and_payoffs():
    game = make_table_game([0, 1], [[0, 0], [0, 0], [0, 0]], [[-1, 1], [1, 1]])
    o = Outcome(Graph.empty(3), (0, 0, 1))
    # g(0, 0) < 0, so players 0 and 1 do not want each other; both want player 2
    assert desiring_set(game, o, 0) == frozenset({2})
    assert desiring_set(game, o, 2) == frozenset({0, 1})
    assert payoff_vector(game, o) == [0, 0, 0]


def test_outcome_validates_length():
    with pytest.raises(ValidationError):
        Outcome(Graph.empty(3), (1, 2))
