"""Nash equilibria of the action game on a fixed graph."""

from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (
    MAX_ENUM_PLAYERS,
    GameSpec,
    Graph,
    PreconditionError,
    SizeGuardError,
    UnsupportedGameError,
    ValidationError,
    sign,
)
from .families import LqPeerGame

MAX_NASH_GRID = 8


# ---------------------------------------------------------------------------
# Linear-quadratic family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LqLinearSystem:
    """s = b_tilde + alpha * g_tilde @ s with row-normalised adjacency."""

    g_tilde: tuple
    b_tilde: tuple
    alpha: object


def _lq_model(game) -> LqPeerGame:
    model = game.model if isinstance(game, GameSpec) else game
    if not isinstance(model, LqPeerGame):
        raise UnsupportedGameError("expected a linear-quadratic peer game")
    return model


def lq_linear_system(game, graph: Graph) -> LqLinearSystem:
    lq = _lq_model(game)
    n = graph.n
    rows, bt = [], []
    for i in range(n):
        w = 1 / (graph.degree(i) + Fraction(1)) if isinstance(lq.b[i], Fraction) else 1.0 / (graph.degree(i) + 1)
        rows.append(tuple(w if graph.has_edge(i, j) else 0 * w for j in range(n)))
        bt.append(lq.b[i] * w)
    return LqLinearSystem(tuple(rows), tuple(bt), lq.alpha)


def _solve_fraction(a: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rhs)
    m = [row[:] + [r] for row, r in zip(a, rhs)]
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            raise ArithmeticError("singular linear system")
        m[c], m[p] = m[p], m[c]
        piv = m[c][c]
        for r in range(c + 1, n):
            f = m[r][c]
            if f:
                f /= piv
                mr, mc = m[r], m[c]
                for k in range(c, n + 1):
                    mr[k] -= f * mc[k]
    x = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        acc = m[r][n] - sum(m[r][k] * x[k] for k in range(r + 1, n))
        x[r] = acc / m[r][r]
    return x


def lq_nash_on_graph(game, graph: Graph) -> tuple:
    """Unique equilibrium s = (I - alpha G~)^{-1} b~, solved per component.

    Exact games are solved in rational arithmetic and the first-order
    conditions hold with zero residual; float games use LU and are checked
    to 1e-10.
    """
    lq = _lq_model(game)
    n = graph.n
    if n != lq.n:
        raise ValidationError("graph size does not match the game")
    exact = isinstance(lq.alpha, Fraction)
    s: list = [None] * n
    for comp in graph.components():
        if len(comp) == 1:
            s[comp[0]] = lq.b[comp[0]]
            continue
        if exact:
            a, rhs = [], []
            for i in comp:
                w = Fraction(1, graph.degree(i) + 1)
                a.append([(1 if i == j else 0) - (lq.alpha * w if graph.has_edge(i, j) else 0) for j in comp])
                rhs.append(lq.b[i] * w)
            sol = _solve_fraction(a, rhs)
        else:
            idx = np.array(comp)
            adj = np.array([[graph.has_edge(i, j) for j in comp] for i in comp], dtype=float)
            w = 1.0 / (adj.sum(axis=1) + 1.0)
            a = np.eye(len(comp)) - lq.alpha * adj * w[:, None]
            sol = np.linalg.solve(a, np.asarray(lq.b, dtype=float)[idx] * w).tolist()
        for i, x in zip(comp, sol):
            s[i] = x
    s = tuple(s)
    res = lq_foc_residual(lq, graph, s)
    if (exact and res != 0) or res > 1e-10:
        raise ArithmeticError(f"first-order residual {float(res):.3g} after solve")
    return s


def lq_foc_residual(game, graph: Graph, s: Sequence):
    lq = _lq_model(game)
    worst = 0
    for i in range(graph.n):
        nb = graph.neighbors(i)
        r = abs(s[i] - (lq.b[i] + lq.alpha * sum(s[j] for j in nb)) / (1 + len(nb)))
        worst = max(worst, r)
    return worst


def _clique_core(b_c, alpha):
    k = len(b_c)
    mean = sum(b_c) / k
    return k, alpha * k * mean / (alpha + (1 - alpha) * k)


def clique_actions(b_c: Sequence, alpha) -> list:
    """Equilibrium actions of an isolated clique C.

    s_i = (b_i + alpha |C| mean(b_C) / (alpha + (1 - alpha)|C|)) / (alpha + |C|).
    """
    if alpha > 1:
        raise ValidationError("clique closed form needs alpha <= 1")
    k, extra = _clique_core(b_c, alpha)
    return [(bi + extra) / (alpha + k) for bi in b_c]


def clique_welfare(b_c: Sequence, alpha) -> list:
    if alpha > 1:
        raise ValidationError("clique closed form needs alpha <= 1")
    k, extra = _clique_core(b_c, alpha)
    half = Fraction(1, 2) if isinstance(extra, Fraction) or isinstance(alpha, Fraction) else 0.5
    return [half * k / (alpha + k) ** 2 * (bi + extra) ** 2 for bi in b_c]


def lq_prefers(s_new, d_new, s_old, d_old) -> bool:
    """Whether a best-responding player is strictly better off in the new outcome."""
    return (1 + d_new) * s_new**2 > (1 + d_old) * s_old**2


# ---------------------------------------------------------------------------
# Status game
# ---------------------------------------------------------------------------


def status_max_equilibrium(clique_sizes: Sequence[int], b, delta) -> tuple:
    """Maximal equilibrium when consecutive players form cliques of these sizes."""
    b, delta = Fraction(b), Fraction(delta)
    s = []
    for k in clique_sizes:
        s.extend([b + (k - 1) * delta] * k)
    return tuple(s)


# ---------------------------------------------------------------------------
# Finite (grid) games
# ---------------------------------------------------------------------------


class GridTables:
    """Tabulated v and g of a separable own-action grid game, indexed by grid position."""

    def __init__(self, game: GameSpec):
        sep = game.separable
        grid = game.grid
        m = len(grid)
        self.m = m
        self.grid = grid
        self.index = {x: k for k, x in enumerate(grid)}
        self.g = [[sep.g(grid[a], grid[b]) for b in range(m)] for a in range(m)]
        self.v = [[sep.v(i, (grid[a],) * game.n) for a in range(m)] for i in range(game.n)]
        self.tol = game.tol
        self.sign = [[sign(x, game.tol) for x in row] for row in self.g]

    def utilities(self, i: int, nbrs: Sequence[int], p: Sequence[int]) -> list:
        """Payoff of each own action for player i given neighbor indices."""
        out = list(self.v[i])
        for j in nbrs:
            pj = p[j]
            for a in range(self.m):
                out[a] += self.g[a][pj]
        return out

    def improving_action(self, i: int, nbrs: Sequence[int], p: Sequence[int]) -> int | None:
        u = self.utilities(i, nbrs, p)
        cur = u[p[i]]
        best = max(range(self.m), key=lambda a: (u[a], -a))
        return best if sign(u[best] - cur, self.tol) > 0 else None

    def best_indices(self, i: int, nbrs: Sequence[int], p: Sequence[int]) -> list[int]:
        u = self.utilities(i, nbrs, p)
        top = max(u)
        return [a for a in range(self.m) if sign(top - u[a], self.tol) <= 0]


_TABLES: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def grid_tables(game: GameSpec) -> GridTables | None:
    """Tables for separable own-action grid games, else None."""
    if game.grid is None or game.separable is None or not game.separable.own_only:
        return None
    t = _TABLES.get(game)
    if t is None:
        t = _TABLES[game] = GridTables(game)
    return t


def best_responses(game: GameSpec, graph: Graph, s: Sequence, i: int) -> list:
    """All maximizers of u_i(G, ., s_-i) on the grid, or the closed-form response."""
    if game.grid is None:
        if game.best_response is None:
            raise UnsupportedGameError(f"{game.name} has no action grid and no best-response rule")
        return [game.best_response(graph, tuple(s), i)]
    tables = grid_tables(game)
    if tables is not None:
        p = [tables.index[x] for x in s]
        return [game.grid[a] for a in tables.best_indices(i, graph.neighbors(i), p)]
    s = list(s)
    vals = []
    for a in game.grid:
        s[i] = a
        vals.append(game.payoff(graph, tuple(s), i))
    top = max(vals)
    return [a for a, x in zip(game.grid, vals) if game.cmp(top - x) <= 0]


def improving_action(game: GameSpec, graph: Graph, s: Sequence, i: int):
    """An action strictly better than s_i for player i, or None."""
    s = tuple(s)
    if game.grid is None:
        br = best_responses(game, graph, s, i)[0]
        cur = game.payoff(graph, s, i)
        alt = game.payoff(graph, s[:i] + (br,) + s[i + 1:], i)
        return br if game.cmp(alt - cur) > 0 else None
    tables = grid_tables(game)
    if tables is not None:
        p = [tables.index[x] for x in s]
        a = tables.improving_action(i, graph.neighbors(i), p)
        return None if a is None else game.grid[a]
    cur = game.payoff(graph, s, i)
    best, best_val = None, cur
    for a in game.grid:
        val = game.payoff(graph, s[:i] + (a,) + s[i + 1:], i)
        if game.cmp(val - best_val) > 0:
            best, best_val = a, val
    return best


def is_nash(game: GameSpec, graph: Graph, s: Sequence) -> bool:
    return all(improving_action(game, graph, s, i) is None for i in range(graph.n))


def _check_grid_size(game: GameSpec):
    if game.grid is None:
        raise UnsupportedGameError("finite Nash computation needs an action grid")
    if game.n > MAX_ENUM_PLAYERS or len(game.grid) > MAX_NASH_GRID:
        raise SizeGuardError(
            f"exhaustive Nash scan limited to n <= {MAX_ENUM_PLAYERS} and |grid| <= {MAX_NASH_GRID}"
        )


def finite_nash(game: GameSpec, graph: Graph, method: str = "scan") -> list[tuple]:
    """Pure Nash equilibria of the grid game on a fixed graph.

    ``scan`` checks every profile and returns all equilibria in lexicographic
    order. ``iterate`` runs simultaneous best-response dynamics from the grid
    minimum and maximum (taking the smallest, resp. largest, best response)
    and returns the distinct fixed points reached; runs that cycle
    contribute nothing.
    """
    _check_grid_size(game)
    if method == "iterate":
        found = []
        for top in (False, True):
            try:
                s = extremal_nash(game, graph, top=top)
            except PreconditionError:
                continue
            if s not in found:
                found.append(s)
        return sorted(found)
    if method != "scan":
        raise ValueError(f"unknown method {method!r}")
    tables = grid_tables(game)
    nbrs = [graph.neighbors(i) for i in range(graph.n)]
    out = []
    m = len(game.grid)
    for p in itertools.product(range(m), repeat=graph.n):
        if tables is not None:
            ok = all(tables.improving_action(i, nbrs[i], p) is None for i in range(graph.n))
        else:
            ok = is_nash(game, graph, tuple(game.grid[a] for a in p))
        if ok:
            out.append(tuple(game.grid[a] for a in p))
    return out


def extremal_nash(game: GameSpec, graph: Graph, top: bool = True, start=None) -> tuple:
    """Greatest (``top``) or least Nash equilibrium by monotone best-response iteration.

    Starting from the grid maximum and always taking the largest best
    response, the iterates decrease to the greatest equilibrium when actions
    are strategic complements (symmetrically from the minimum). A cycle means
    the complementarity assumption failed.
    """
    if game.grid is None:
        raise UnsupportedGameError("extremal equilibria need an action grid")
    n = graph.n
    s = tuple(start) if start is not None else (game.grid[-1] if top else game.grid[0],) * n
    seen = {s}
    while True:
        nxt = []
        for i in range(n):
            brs = best_responses(game, graph, s, i)
            nxt.append(max(brs) if top else min(brs))
        nxt = tuple(nxt)
        if nxt == s:
            return s
        if nxt in seen:
            raise PreconditionError("best-response iteration cycles; actions are not strategic complements", nxt)
        seen.add(nxt)
        s = nxt


def iterate_best_response(game: GameSpec, graph: Graph, start: Sequence, max_rounds: int = 10_000) -> tuple:
    """Sequential best-response dynamics until no player moves by more than tol."""
    s = list(start)
    step_tol = min(game.tol, 1e-10) if game.tol else 0
    for _ in range(max_rounds):
        moved = False
        for i in range(graph.n):
            br = best_responses(game, graph, s, i)
            new = br[0] if s[i] not in br else s[i]
            if abs(new - s[i]) > step_tol:
                moved = True
            s[i] = new
        if not moved:
            return tuple(s)
    raise ArithmeticError("best-response dynamics did not converge")


def nash_equilibria(game: GameSpec, graph: Graph) -> list[tuple]:
    """Equilibria on a fixed graph, by the method the game supports."""
    if isinstance(game.model, LqPeerGame):
        return [lq_nash_on_graph(game, graph)]
    if game.grid is not None:
        return finite_nash(game, graph)
    if game.best_response is not None:
        start = tuple(game.best_response(Graph.empty(game.n), (0.0,) * game.n, i) for i in range(game.n))
        return [iterate_best_response(game, graph, start)]
    raise UnsupportedGameError(f"cannot compute equilibria for {game.name}")
