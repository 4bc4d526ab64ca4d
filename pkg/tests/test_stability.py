import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from endnet.core import Graph, Outcome, all_graphs
from endnet.equilibrium import lq_nash_on_graph
from endnet.families import CELLS, make_lq_peer_game, make_nonexistence_example, random_table_game, squadron
from endnet.stability import (ActionDeviation, JointDeviation, LinkAdd, LinkCut, apply_witness, check_pairwise,
                              check_pairwise_nash, check_strict_pairwise, enumerate_stable, is_stable)


def naive_pairwise(game, o):
    """Direct reading of the definitions from payoffs only."""
    g, s, n = o.graph, o.profile, o.n
    u = game.u
    for i in range(n):
        for a in game.grid:
            if u(g, s[:i] + (a,) + s[i + 1:], i) > u(g, s, i):
                return False
    for i, j in itertools.permutations(range(n), 2):
        di = u(g.add(i, j), s, i) - u(g.remove(i, j), s, i)
        dj = u(g.add(i, j), s, j) - u(g.remove(i, j), s, j)
        if g.has_edge(i, j) and di < 0:
            return False
        if not g.has_edge(i, j) and di > 0 and dj >= 0:
            return False
    return True


def naive_pns(game, o):
    if not naive_pairwise(game, o):
        return False
    g, s = o.graph, o.profile
    for i in range(o.n):
        nb = g.neighbors(i)
        for r in range(len(nb) + 1):
            for cut in itertools.combinations(nb, r):
                g2 = g.remove_links(i, cut)
                for a in game.grid:
                    if game.u(g2, s[:i] + (a,) + s[i + 1:], i) > game.u(g, s, i):
                        return False
    return True


def all_outcomes(game):
    for g in all_graphs(game.n):
        for s in itertools.product(game.grid, repeat=game.n):
            yield Outcome(g, s)


@pytest.mark.parametrize("cell", CELLS)
def test_checkers_match_naive_definitions(cell):
    rng = np.random.default_rng(31)
    for _ in range(6):
        game = random_table_game(rng, 3, 3, cell)
        for o in all_outcomes(game):
            assert check_pairwise(game, o).stable == naive_pairwise(game, o)
            assert check_pairwise_nash(game, o).stable == naive_pns(game, o)


@pytest.mark.parametrize("cell", CELLS)
def test_concept_hierarchy(cell):
    rng = np.random.default_rng(37)
    for _ in range(6):
        game = random_table_game(rng, 3, 3, cell)
        for o in all_outcomes(game):
            strict = check_strict_pairwise(game, o).stable
            pw = check_pairwise(game, o).stable
            pns = check_pairwise_nash(game, o).stable
            assert not strict or pw
            assert not pns or pw


@pytest.mark.parametrize("cell", CELLS)
def test_witnesses_are_improving(cell):
    rng = np.random.default_rng(41)
    game = random_table_game(rng, 3, 3, cell)
    for o in all_outcomes(game):
        for w in check_pairwise_nash(game, o).witnesses:
            o2 = apply_witness(o, w)
            if isinstance(w, (ActionDeviation, JointDeviation)):
                assert game.u(o2.graph, o2.profile, w.player) > game.u(o.graph, o.profile, w.player)
            elif isinstance(w, LinkCut):
                assert not o2.graph.has_edge(w.player, w.other)
                assert game.u(o2.graph, o2.profile, w.player) > game.u(o.graph, o.profile, w.player)
            elif isinstance(w, LinkAdd):
                assert o2.graph.has_edge(w.i, w.j)
                gains = [game.u(o2.graph, o2.profile, p) - game.u(o.graph, o.profile, p) for p in (w.i, w.j)]
                assert min(gains) >= 0 and max(gains) > 0


@pytest.mark.parametrize("concept", ["pairwise", "strict", "pns"])
def test_enumerate_matches_filter(concept):
    rng = np.random.default_rng(43)
    for cell in CELLS:
        game = random_table_game(rng, 3, 3, cell)
        want = sorted((o for o in all_outcomes(game) if is_stable(game, o, concept)), key=lambda o: o.sort_key())
        assert enumerate_stable(game, concept) == want


def test_parallel_enumeration_matches_serial():
    game = squadron(3)
    assert enumerate_stable(game, "pairwise", jobs=2) == enumerate_stable(game, "pairwise")
    rng = np.random.default_rng(47)
    tg = random_table_game(rng, 4, 3, ("complements", "positive"))
    assert enumerate_stable(tg, "strict", jobs=3) == enumerate_stable(tg, "strict")


def test_lq_enumeration_matches_graph_scan():
    game = make_lq_peer_game([3, 5, 8, 13], F(1, 2))
    want = []
    for g in all_graphs(4):
        o = Outcome(g, lq_nash_on_graph(game, g))
        if check_pairwise(game, o).stable:
            want.append(o)
    assert enumerate_stable(game, "pairwise") == sorted(want, key=lambda o: o.sort_key())


def test_squadron_three_set():
    outs = enumerate_stable(squadron(3), "pairwise")
    graphs = {o.graph for o in outs}
    assert Graph.complete(5) in graphs
    assert Graph.cliques([(0, 1), (2, 3, 4)], 5) in graphs


def test_nonexistence_has_no_stable_outcome():
    game = make_nonexistence_example()
    for concept in ("pairwise", "strict", "pns"):
        assert enumerate_stable(game, concept) == []
    rep = check_pairwise(game, Outcome(Graph.complete(2), (0, 0)))
    assert not rep.stable and isinstance(rep.witnesses[0], LinkCut)


def test_report_truthiness():
    game = squadron(1)
    o = Outcome(Graph.complete(5), lq_nash_on_graph(game, Graph.complete(5)))
    rep = check_pairwise(game, o)
    assert rep and rep.verdict == "stable"
    bad = Outcome(Graph.empty(5), (1, 1, 1, 1, 1))
    assert not check_pairwise(game, bad)
    assert len(check_pairwise(game, bad, first=True).witnesses) == 1
