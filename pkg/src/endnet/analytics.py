"""Closed-form thresholds for the peer-effects and status games, and natural cliques."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import GameSpec, Graph, Outcome, PreconditionError, ValidationError, as_number, is_rational
from .families import GroupMatchGame


@dataclass(frozen=True)
class ThresholdReport:
    name: str
    left: object
    right: object
    relation: str
    verdict: bool
    notes: dict = field(default_factory=dict)

    def __bool__(self):
        return self.verdict

    def __str__(self):
        mark = "holds" if self.verdict else "fails"
        return f"{self.name}: {_show(self.left)} {self.relation} {_show(self.right)} -> {mark}"


def _show(x) -> str:
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    if isinstance(x, float):
        return "inf" if math.isinf(x) else f"{x:.6g}"
    return str(x)


def _prepare(b: Sequence, alpha):
    exact = all(is_rational(x) for x in (*b, alpha))
    b = [as_number(x, exact) for x in b]
    alpha = as_number(alpha, exact)
    if any(x > y for x, y in zip(b, b[1:])):
        raise ValidationError("private incentives must be sorted ascending")
    if any(x <= 0 for x in b):
        raise ValidationError("private incentives must be positive")
    if not 0 <= alpha <= 1:
        raise ValidationError(f"alpha outside [0,1]: {alpha}")
    return b, alpha


def empty_graph_stable(b: Sequence, alpha) -> ThresholdReport:
    """Spacing test min_i b_{i+1}/b_i >= 2 alpha for the empty graph.

    ``notes`` also carries the exact verdict for the isolated equilibrium
    s = b: at a ratio of exactly 2 alpha (with alpha > 1/2) the lower player
    strictly wants the link and the higher one is indifferent, so the empty
    graph is then not pairwise stable even though the spacing test holds.
    """
    b, alpha = _prepare(b, alpha)
    if len(b) < 2:
        raise ValidationError("need at least two players")
    ratio = min(y / x for x, y in zip(b, b[1:]))
    verdict = ratio >= 2 * alpha
    boundary = ratio == 2 * alpha
    exact = ratio > 2 * alpha or (boundary and 2 * alpha <= 1)
    distinct = len(set(b)) == len(b)
    notes = {
        "boundary": boundary,
        "exact_verdict": exact,
        "distinct_b": distinct,
        "threshold_regime": "above 1/2" if distinct else "equal to 1/2",
    }
    return ThresholdReport("empty graph stable", ratio, 2 * alpha, ">=", verdict, notes)


def complete_graph_conditions(b: Sequence, alpha) -> tuple[ThresholdReport, ThresholdReport, ThresholdReport]:
    """Sufficient conditions for the complete graph: existence, uniqueness, impossibility."""
    b, alpha = _prepare(b, alpha)
    n = len(b)
    if n < 2:
        raise ValidationError("need at least two players")
    ratio = b[-1] / b[0]
    if alpha == 1:
        rhs_a = math.inf
    else:
        rhs_a = alpha * (1 + n) / ((1 - alpha) * (2 * alpha + n))
    a = ThresholdReport("complete graph exists", ratio, rhs_a, "<=", ratio <= rhs_a)
    den = alpha + (1 - alpha) * (n - 1)
    rhs_b = 2 * alpha / den
    u = ThresholdReport("complete graph unique", ratio, rhs_b, "<", ratio < rhs_b)
    left_c = b[-1] * (2 * alpha**2 + n * (1 - 2 * alpha**2))
    right_c = b[0] * alpha * (4 * alpha - 1 + 2 * n * (1 - alpha))
    c = ThresholdReport("complete graph impossible", left_c, right_c, ">", left_c > right_c)
    return a, u, c


def status_cstar(delta) -> int:
    """Smallest integer c with c * delta >= 1/delta, i.e. delta in [1/sqrt(c), 1/sqrt(c-1))."""
    d = Fraction(delta)
    if d <= 0:
        raise ValidationError("delta must be positive")
    c = max(1, math.ceil(1 / (d * d)))
    assert c * d * d >= 1 and (c == 1 or (c - 1) * d * d < 1)
    return c


def status_max_cliques(n: int, delta) -> int:
    """Largest k with k(k+1)/2 <= n, the most cliques when neighbouring sizes may differ by one."""
    if Fraction(delta) < 1:
        raise ValidationError("the clique-count bound is stated for delta >= 1")
    if n < 1:
        raise ValidationError("need at least one player")
    k = (math.isqrt(8 * n + 1) - 1) // 2
    return k


# ---------------------------------------------------------------------------
# Natural cliques
# ---------------------------------------------------------------------------


def set_partitions(items: Sequence):
    """All set partitions in canonical (restricted growth) order."""
    items = list(items)
    n = len(items)

    def rec(k, labels, top):
        if k == n:
            blocks = [[] for _ in range(top)]
            for item, lab in zip(items, labels):
                blocks[lab].append(item)
            yield [tuple(b) for b in blocks]
            return
        for lab in range(top + 1):
            yield from rec(k + 1, labels + [lab], max(top, lab + 1))

    if n == 0:
        yield []
        return
    yield from rec(0, [], 0)


@dataclass
class NaturalCliques:
    blocks: list
    optimum: dict

    def player_blocks(self, types: Sequence) -> list[tuple[int, ...]]:
        """Player index blocks of the clique partition."""
        return [tuple(i for i, t in enumerate(types) if t in blk) for blk in self.blocks]

    def graph(self, types: Sequence) -> Graph:
        return Graph.cliques(self.player_blocks(types), len(types))


def check_conformity(model: GroupMatchGame, rng: np.random.Generator, samples: int = 200,
                     max_neighbors: int = 4, tol: float = 1e-6) -> None:
    """Sampled weak preference for conformity: a best response lies between the
    private optimum and the neighbours' actions. Raises PreconditionError on a failure."""
    lo, hi = model.interval
    for t in model.type_set:
        star = model.private_optimum(t)
        for _ in range(samples):
            k = int(rng.integers(0, max_neighbors + 1))
            nb = rng.uniform(lo, hi, size=k).tolist()
            br = model.best_response(nb, t)
            left = min([star] + nb)
            right = max([star] + nb)
            if not (left - tol <= br <= right + tol):
                raise PreconditionError("weak preference for conformity fails", (t, nb, br))


def natural_cliques(model, conformity_samples: int = 200, seed: int = 0) -> NaturalCliques | None:
    """First partition of the types (canonical order) forming natural cliques, or None.

    Within a block every ordered pair of private optima has g >= 0; across
    blocks the smaller of the two link values is negative. Conformity is
    checked by sampling first; pass ``conformity_samples=0`` to skip.
    """
    if isinstance(model, GameSpec):
        model = model.model
    if not isinstance(model, GroupMatchGame):
        raise ValidationError("natural cliques need a group-matching game")
    types = model.type_set
    if len(types) > 6:
        raise ValidationError("partition search is limited to at most 6 types")
    if conformity_samples:
        check_conformity(model, np.random.default_rng(seed), conformity_samples)
    star = {t: model.private_optimum(t) for t in types}
    g = model.g
    for part in set_partitions(types):
        ok = all(g(star[a], star[c]) >= 0 for blk in part for a in blk for c in blk)
        if ok:
            for x, bx in enumerate(part):
                for by in part[x + 1:]:
                    if any(min(g(star[a], star[c]), g(star[c], star[a])) >= 0 for a in bx for c in by):
                        ok = False
                        break
                if not ok:
                    break
        if ok:
            return NaturalCliques(part, star)
    return None


def natural_clique_outcome(game: GameSpec, cliques: NaturalCliques | None = None) -> Outcome:
    """The disjoint-clique graph of the natural partition with equilibrium actions.

    Best-response dynamics start from the private optima, so each block's
    actions stay inside the range of its members' optima.
    """
    from .equilibrium import iterate_best_response

    model = game.model
    if cliques is None:
        cliques = natural_cliques(model)
        if cliques is None:
            raise PreconditionError("types do not form natural cliques")
    graph = cliques.graph(model.types)
    start = tuple(cliques.optimum[t] for t in model.types)
    return Outcome(graph, iterate_best_response(game, graph, start))
