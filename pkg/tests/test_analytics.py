from fractions import Fraction as F

import numpy as np
import pytest

from endnet.analytics import (check_conformity, complete_graph_conditions, empty_graph_stable,
                              natural_clique_outcome, natural_cliques, set_partitions, status_cstar,
                              status_max_cliques)
from endnet.core import Graph, Outcome, PreconditionError, ValidationError
from endnet.families import make_lq_peer_game, quadratic_group_match
from endnet.stability import check_pairwise, enumerate_stable

BELL = [1, 1, 2, 5, 15, 52, 203]


def empty_in_set(b, alpha):
    return any(o.graph.is_empty() for o in enumerate_stable(make_lq_peer_game(b, alpha), "pairwise"))


def test_empty_graph_spacing_examples():
    r = empty_graph_stable([1, 3, 7, 15], F(2, 3))
    assert r.verdict and r.left == F(15, 7) and r.right == F(4, 3)
    assert empty_in_set([1, 3, 7, 15], F(2, 3))
    r = empty_graph_stable([4, 5], F(1, 2))
    assert r.verdict is True and empty_in_set([4, 5], F(1, 2))
    assert not empty_graph_stable([4, 5], F(2, 3)).verdict and not empty_in_set([4, 5], F(2, 3))


def test_empty_graph_boundary_case():
    # ratios exactly 2 alpha with alpha > 1/2: the spacing test holds but the lower
    # player strictly wants the link while the higher one is indifferent
    r = empty_graph_stable([1, 2, 4, 8], 1)
    assert r.verdict and r.notes["boundary"] and not r.notes["exact_verdict"]
    assert not empty_in_set([1, 2, 4, 8], 1)


def test_empty_graph_validation():
    with pytest.raises(ValidationError):
        empty_graph_stable([3, 1], F(1, 2))
    with pytest.raises(ValidationError, match=r"alpha outside \[0,1\]"):
        empty_graph_stable([1, 3], F(3, 2))


def test_complete_graph_conditions_shape():
    a, u, c = complete_graph_conditions([4, 4, 6, 6, 9], 1)
    assert a.verdict and a.right == float("inf")
    assert "complete graph" in str(a)
    # n = 2, alpha = 1/2: existence bound 1, uniqueness bound 1, impossibility 15 > 15
    a, u, c = complete_graph_conditions([10, 10], F(1, 2))
    assert (a.right, u.right) == (1, 1)
    assert a.verdict and not u.verdict and not c.verdict
    assert (c.left, c.right) == (15, 15)


def test_complete_graph_unique_instance():
    b, alpha = [10, 11, 12], F(3, 4)
    a, u, c = complete_graph_conditions(b, alpha)
    if u.verdict:
        outs = enumerate_stable(make_lq_peer_game(b, alpha), "pairwise")
        assert len(outs) == 1 and outs[0].graph.is_complete()


def test_status_cstar_values():
    assert status_cstar(F(1, 2)) == 4
    assert status_cstar(1) == 1
    assert status_cstar(F(3, 5)) == 3   # 1/sqrt(3) ~ 0.577 <= 0.6 < 1/sqrt(2)
    with pytest.raises(ValidationError):
        status_cstar(0)


def test_status_max_cliques():
    assert status_max_cliques(10, 1) == 4
    assert [status_max_cliques(n, 2) for n in (1, 2, 3, 5, 6)] == [1, 1, 2, 2, 3]
    with pytest.raises(ValidationError):
        status_max_cliques(10, F(1, 2))


@pytest.mark.parametrize("n", range(0, 7))
def test_set_partitions_count(n):
    parts = list(set_partitions(range(n)))
    assert len(parts) == BELL[n]
    assert len({tuple(p) for p in parts}) == len(parts)


def test_natural_cliques_two_types():
    game = quadratic_group_match((2, 2, 3, 8, 8), alpha=1.0)
    nc = natural_cliques(game)
    assert nc.blocks == [(2, 3), (8,)]
    assert nc.player_blocks(game.model.types) == [(0, 1, 2), (3, 4)]
    o = natural_clique_outcome(game, nc)
    assert o.graph == Graph.cliques([(0, 1, 2), (3, 4)], 5)
    assert o.profile == pytest.approx((2.25, 2.25, 2.5, 8.0, 8.0), abs=1e-6)
    assert check_pairwise(game, o).stable


def test_no_natural_cliques_when_types_mix():
    # close types want each other across any split
    game = quadratic_group_match((4, 5), alpha=1.0)
    nc = natural_cliques(game)
    assert nc is not None and nc.blocks == [(4.0, 5.0)]


def test_conformity_fails_with_weak_spillovers():
    game = quadratic_group_match((2, 8), alpha=0.3)
    with pytest.raises(PreconditionError):
        check_conformity(game.model, np.random.default_rng(0), samples=200)


def test_natural_cliques_needs_group_matching():
    with pytest.raises(ValidationError):
        natural_cliques(make_lq_peer_game([1, 2], 1))
