"""Stability checks for outcomes and exhaustive enumeration of stable outcomes."""

from __future__ import annotations

import itertools
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .core import (
    MAX_ENUM_PLAYERS,
    GameSpec,
    Graph,
    Outcome,
    SizeGuardError,
    UnsupportedGameError,
    link_value_matrix,
    sign,
)
from .equilibrium import (
    MAX_NASH_GRID,
    best_responses,
    grid_tables,
    finite_nash,
    improving_action,
    lq_foc_residual,
    lq_nash_on_graph,
)
from .families import LqPeerGame

CONCEPTS = ("pairwise", "strict", "pns")
MAX_PNS_DEGREE = 12


@dataclass(frozen=True)
class ActionDeviation:
    player: int
    action: object
    gain: object


@dataclass(frozen=True)
class LinkCut:
    """``player`` drops the link to ``other``; ``gain`` = u(G - ij) - u(G)."""

    player: int
    other: int
    gain: object


@dataclass(frozen=True)
class LinkAdd:
    i: int
    j: int
    gain_i: object
    gain_j: object


@dataclass(frozen=True)
class JointDeviation:
    player: int
    action: object
    cut: tuple
    gain: object


@dataclass
class StabilityReport:
    concept: str
    witnesses: list = field(default_factory=list)

    @property
    def stable(self) -> bool:
        return not self.witnesses

    @property
    def verdict(self) -> str:
        return "stable" if self.stable else "unstable"

    def __bool__(self):
        return self.stable


def apply_witness(outcome: Outcome, w) -> Outcome:
    """The outcome after the deviation a witness describes."""
    g, s = outcome.graph, outcome.profile
    if isinstance(w, ActionDeviation):
        return Outcome(g, s[: w.player] + (w.action,) + s[w.player + 1:])
    if isinstance(w, LinkCut):
        return Outcome(g.remove(w.player, w.other), s)
    if isinstance(w, LinkAdd):
        return Outcome(g.add(w.i, w.j), s)
    if isinstance(w, JointDeviation):
        return Outcome(g.remove_links(w.player, w.cut), s[: w.player] + (w.action,) + s[w.player + 1:])
    raise TypeError(f"not a witness: {w!r}")


def _require_nash_checkable(game: GameSpec):
    if game.grid is None and game.best_response is None:
        raise UnsupportedGameError(f"{game.name}: need an action grid or a best-response rule to check Nash")


def _action_witnesses(game: GameSpec, outcome: Outcome, first: bool) -> list:
    out = []
    g, s = outcome.graph, outcome.profile
    for i in range(outcome.n):
        a = improving_action(game, g, s, i)
        if a is not None:
            gain = game.payoff(g, s[:i] + (a,) + s[i + 1:], i) - game.payoff(g, s, i)
            out.append(ActionDeviation(i, a, gain))
            if first:
                break
    return out


def _link_witnesses(game: GameSpec, outcome: Outcome, strict: bool, first: bool) -> list:
    n, g = outcome.n, outcome.graph
    D = link_value_matrix(game, outcome)
    out = []
    for i, j in itertools.combinations(range(n), 2):
        ci, cj = game.cmp(D[i][j]), game.cmp(D[j][i])
        if g.has_edge(i, j):
            for p, q, c in ((i, j, ci), (j, i, cj)):
                if c < 0 or (strict and c == 0):
                    out.append(LinkCut(p, q, -D[p][q]))
        else:
            if ci >= 0 and cj >= 0 and (strict or ci > 0 or cj > 0):
                out.append(LinkAdd(i, j, D[i][j], D[j][i]))
        if first and out:
            break
    return out


def check_strict_pairwise(game: GameSpec, outcome: Outcome, first: bool = False) -> StabilityReport:
    """Nash, every present link strictly valuable to both ends, no absent link weakly valuable to both."""
    _require_nash_checkable(game)
    w = _action_witnesses(game, outcome, first)
    if not (first and w):
        w += _link_witnesses(game, outcome, strict=True, first=first)
    return StabilityReport("strict", w)


def check_pairwise(game: GameSpec, outcome: Outcome, first: bool = False) -> StabilityReport:
    """Nash, no strictly profitable cut, no addition weakly good for both and strictly for one."""
    _require_nash_checkable(game)
    w = _action_witnesses(game, outcome, first)
    if not (first and w):
        w += _link_witnesses(game, outcome, strict=False, first=first)
    return StabilityReport("pairwise", w)


def _joint_witnesses(game: GameSpec, outcome: Outcome, first: bool) -> list:
    g, s = outcome.graph, outcome.profile
    out = []
    tables = grid_tables(game)
    for i in range(outcome.n):
        nb = g.neighbors(i)
        if len(nb) > MAX_PNS_DEGREE:
            raise SizeGuardError(f"player {i} has degree {len(nb)} > {MAX_PNS_DEGREE}; subset scan refused")
        base = game.payoff(g, s, i)
        best = None
        if tables is not None:
            # with separable payoffs the best cut for a fixed action drops exactly the negative links
            for a, x in enumerate(game.grid):
                cut = tuple(j for j in nb if game.cmp(tables.g[a][tables.index[s[j]]]) < 0)
                s2 = s[:i] + (x,) + s[i + 1:]
                gain = game.payoff(g.remove_links(i, cut), s2, i) - base
                if game.cmp(gain) > 0 and (best is None or gain > best.gain):
                    best = JointDeviation(i, x, cut, gain)
        else:
            for r in range(len(nb) + 1):
                for cut in itertools.combinations(nb, r):
                    g2 = g.remove_links(i, cut)
                    actions = game.grid if game.grid is not None else best_responses(game, g2, s, i)
                    for x in actions:
                        s2 = s[:i] + (x,) + s[i + 1:]
                        gain = game.payoff(g2, s2, i) - base
                        if game.cmp(gain) > 0 and (best is None or gain > best.gain):
                            best = JointDeviation(i, x, cut, gain)
        if best is not None:
            out.append(best)
            if first:
                break
    return out


def check_pairwise_nash(game: GameSpec, outcome: Outcome, first: bool = False) -> StabilityReport:
    """Pairwise stability plus no profitable joint change of own action and dropped links."""
    rep = check_pairwise(game, outcome, first)
    if first and rep.witnesses:
        return StabilityReport("pns", rep.witnesses)
    return StabilityReport("pns", rep.witnesses + _joint_witnesses(game, outcome, first))


CHECKERS = {"pairwise": check_pairwise, "strict": check_strict_pairwise, "pns": check_pairwise_nash}


def is_stable(game: GameSpec, outcome: Outcome, concept: str = "pairwise") -> bool:
    return CHECKERS[concept](game, outcome, first=True).stable


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _links_ok(game: GameSpec, graph: Graph, s, concept: str) -> bool:
    n = graph.n
    gfun = game.separable.g
    strict = concept == "strict"
    for i in range(n):
        for j in range(i + 1, n):
            ci, cj = game.cmp(gfun(s[i], s[j])), game.cmp(gfun(s[j], s[i]))
            if graph.has_edge(i, j):
                if ci < 0 or cj < 0 or (strict and (ci == 0 or cj == 0)):
                    return False
            elif ci >= 0 and cj >= 0 and (strict or ci > 0 or cj > 0):
                return False
    return True


class _LqSolver:
    """Per-component equilibrium cache: components recur across many graphs."""

    def __init__(self, game: GameSpec):
        self.lq: LqPeerGame = game.model
        self.cache: dict = {}

    def solve(self, graph: Graph) -> tuple:
        s = [None] * graph.n
        for comp in graph.components():
            key = tuple((v, graph.rows[v]) for v in comp)
            sol = self.cache.get(key)
            if sol is None:
                sub_b = tuple(self.lq.b[v] for v in comp)
                if len(comp) == 1:
                    sol = sub_b
                else:
                    pos = {v: k for k, v in enumerate(comp)}
                    sub = Graph.from_edges(len(comp), [(pos[a], pos[b]) for a, b in graph.edges() if a in pos])
                    sol = lq_nash_on_graph(LqPeerGame(sub_b, self.lq.alpha), sub)
                self.cache[key] = sol
            for v, x in zip(comp, sol):
                s[v] = x
        return tuple(s)


def _lq_chunk(game: GameSpec, concept: str, masks: range) -> list[Outcome]:
    solver = _LqSolver(game)
    out = []
    n = game.n
    for mask in masks:
        g = Graph.from_mask(n, mask)
        s = solver.solve(g)
        if not _links_ok(game, g, s, concept):
            continue
        o = Outcome(g, s)
        if concept == "pns" and not check_pairwise_nash(game, o, first=True).stable:
            continue
        out.append(o)
    return out


def _candidate_graphs(game: GameSpec, tables, p: tuple, concept: str):
    """Graphs whose link pattern is stable at grid profile p (indices)."""
    n = game.n
    forced, free = [], []
    for i, j in itertools.combinations(range(n), 2):
        ci, cj = tables.sign[p[i]][p[j]], tables.sign[p[j]][p[i]]
        if ci > 0 and cj > 0:
            forced.append((i, j))
        elif ci >= 0 and cj >= 0:
            # at least one side indifferent
            if concept == "strict":
                return
            if ci == 0 and cj == 0:
                free.append((i, j))
            else:
                forced.append((i, j))
    base = Graph.from_edges(n, forced)
    for r in range(len(free) + 1):
        for extra in itertools.combinations(free, r):
            g = base
            for i, j in extra:
                g = g.add(i, j)
            yield g


def _grid_chunk(game: GameSpec, concept: str, profiles: list) -> list[Outcome]:
    tables = grid_tables(game)
    out = []
    for p in profiles:
        for g in _candidate_graphs(game, tables, p, concept):
            if all(tables.improving_action(i, g.neighbors(i), p) is None for i in range(game.n)):
                o = Outcome(g, tuple(game.grid[a] for a in p))
                if concept == "pns" and not check_pairwise_nash(game, o, first=True).stable:
                    continue
                out.append(o)
    return out


def _brute_chunk(game: GameSpec, concept: str, masks: range) -> list[Outcome]:
    out = []
    for mask in masks:
        g = Graph.from_mask(game.n, mask)
        for s in finite_nash(game, g):
            o = Outcome(g, s)
            if CHECKERS[concept](game, o, first=True).stable:
                out.append(o)
    return out


_WORK = {}


def _run_task(k: int):
    fn, game, concept, chunks = _WORK["task"]
    return fn(game, concept, chunks[k])


def _split(seq, parts: int) -> list:
    parts = max(1, min(parts, len(seq)))
    size = -(-len(seq) // parts)
    return [seq[k:k + size] for k in range(0, len(seq), size)]


def _dispatch(fn, game: GameSpec, concept: str, work, jobs: int) -> list:
    if jobs <= 1 or len(work) < 64:
        return fn(game, concept, work)
    chunks = _split(work, jobs * 4)
    # payoff closures do not pickle, so workers inherit the task through fork
    _WORK["task"] = (fn, game, concept, chunks)
    try:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as ex:
            parts = list(ex.map(_run_task, range(len(chunks))))
    finally:
        _WORK.pop("task", None)
    return [o for part in parts for o in part]


def enumerate_stable(game: GameSpec, concept: str = "pairwise", jobs: int = 1) -> list[Outcome]:
    """Every stable outcome of a small game, sorted by (graph bitmask, profile).

    Linear-quadratic games solve the unique equilibrium of each graph; separable
    grid games enumerate profiles and derive the admissible graphs from link
    signs; anything else is a brute-force scan over graphs and profiles.
    """
    if concept not in CHECKERS:
        raise ValueError(f"unknown stability concept {concept!r}; expected one of {CONCEPTS}")
    n = game.n
    if n > MAX_ENUM_PLAYERS:
        raise SizeGuardError(f"enumeration is capped at n <= {MAX_ENUM_PLAYERS}")
    npairs = n * (n - 1) // 2
    if isinstance(game.model, LqPeerGame):
        res = _dispatch(_lq_chunk, game, concept, range(1 << npairs), jobs)
    elif grid_tables(game) is not None:
        m = len(game.grid)
        if m**n > 2_000_000:
            raise SizeGuardError(f"{m}^{n} action profiles exceed the enumeration budget")
        profiles = list(itertools.product(range(m), repeat=n))
        res = _dispatch(_grid_chunk, game, concept, profiles, jobs)
    elif game.grid is not None:
        if len(game.grid) > MAX_NASH_GRID:
            raise SizeGuardError(f"brute-force enumeration needs |grid| <= {MAX_NASH_GRID}")
        res = _dispatch(_brute_chunk, game, concept, range(1 << npairs), jobs)
    else:
        raise UnsupportedGameError(f"cannot enumerate outcomes of {game.name}")
    return sorted(res, key=Outcome.sort_key)


def lq_check_outcome(game: GameSpec, outcome: Outcome) -> bool:
    """Whether the profile solves the first-order conditions on the graph."""
    res = lq_foc_residual(game, outcome.graph, outcome.profile)
    return sign(res, game.tol) == 0
