"""Constructors for the concrete games and for random finite table games."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .core import (
    DEFAULT_TOL,
    GameSpec,
    Graph,
    Separable,
    ValidationError,
    as_number,
    is_rational,
    separable_payoff,
)

HALF = Fraction(1, 2)
MAX_STATUS_GRID = 400

CELLS = (
    ("complements", "positive"),
    ("complements", "negative"),
    ("substitutes", "positive"),
    ("substitutes", "negative"),
)


# ---------------------------------------------------------------------------
# Linear-quadratic peer effects
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LqPeerGame:
    b: tuple
    alpha: object

    @property
    def n(self) -> int:
        return len(self.b)

    @property
    def mean_b(self):
        return sum(self.b) / len(self.b)


def make_lq_peer_game(b: Sequence, alpha, exact: bool | None = None, tol: float = DEFAULT_TOL) -> GameSpec:
    """Linear-quadratic game of strategic complements with endogenous links.

    u_i = b_i s_i + alpha s_i sum_{j in G_i} s_j - (1 + d_i) s_i^2 / 2, i.e.
    v_i(s) = b_i s_i - s_i^2/2 and g(x, y) = alpha x y - x^2/2.

    Rational inputs (ints, Fractions, "p/q" strings) give an exact game unless
    ``exact=False``.
    """
    if exact is None:
        exact = all(is_rational(x) for x in (*b, alpha))
    b = tuple(as_number(x, exact) for x in b)
    alpha = as_number(alpha, exact)
    if not 0 <= alpha <= 1:
        raise ValidationError(f"alpha outside [0,1]: {alpha}")
    if any(x <= 0 for x in b):
        raise ValidationError("private incentives b_i must be positive")
    if len(b) < 2:
        raise ValidationError("need at least two players")
    half = HALF if exact else 0.5

    def v(i, s):
        return b[i] * s[i] - half * s[i] * s[i]

    def g(x, y):
        return alpha * x * y - half * x * x

    def best_response(graph: Graph, s, i):
        nb = graph.neighbors(i)
        br = (b[i] + alpha * sum(s[j] for j in nb)) / (1 + len(nb))
        return br if br > 0 else 0 * br

    sep = Separable(v, g, own_only=True)
    model = LqPeerGame(b, alpha)
    return GameSpec(
        n=len(b),
        payoff=separable_payoff(sep),
        separable=sep,
        best_response=best_response,
        tol=0 if exact else tol,
        name=f"lq(b={_fmt_seq(b)}, alpha={alpha})",
        model=model,
        params={"family": "lq", "b": b, "alpha": alpha},
    )


SQUADRONS = {
    1: (4, 4, 6, 6, 9),
    2: (4, 4, 6, 9, 9),
    3: (4, 4, 9, 9, 9),
}


def squadron(k: int, exact: bool = True) -> GameSpec:
    return make_lq_peer_game(SQUADRONS[k], 1, exact=exact)


# ---------------------------------------------------------------------------
# Status game
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StatusGame:
    n: int
    b: object
    delta: object
    step: object


def _rational_gcd(x: Fraction, y: Fraction) -> Fraction:
    den = x.denominator * y.denominator // math.gcd(x.denominator, y.denominator)
    return Fraction(math.gcd(int(x * den), int(y * den)), den)


def make_status_game(n: int, b, delta, step=None) -> GameSpec:
    """Status game u_i = b s_i - s_i^2/2 + sum_j (1 - delta max(s_j - s_i, 0)).

    Actions live on the grid {0, h, 2h, ..., b + (n-1) delta}; by default h
    is the largest step that puts both b and delta on the grid, so every
    clique's maximal action b + (k-1) delta is a grid point. No best response
    lies above b + (n-1) delta.
    """
    b, delta = Fraction(b), Fraction(delta)
    if b <= 0 or delta <= 0:
        raise ValidationError("status game needs b > 0 and delta > 0")
    h = Fraction(step) if step is not None else _rational_gcd(b, delta)
    top = b + (n - 1) * delta
    size = int(top / h) + 1
    if size > MAX_STATUS_GRID:
        raise ValidationError(f"status grid would have {size} points; pass a coarser step")
    grid = tuple(k * h for k in range(size))
    if grid[-1] < top:
        grid = grid + (grid[-1] + h,)

    def v(i, s):
        return b * s[i] - HALF * s[i] * s[i]

    def g(x, y):
        return 1 - delta * max(y - x, 0)

    sep = Separable(v, g, own_only=True)
    return GameSpec(
        n=n,
        payoff=separable_payoff(sep),
        separable=sep,
        grid=grid,
        tol=0,
        name=f"status(n={n}, b={b}, delta={delta})",
        model=StatusGame(n, b, delta, h),
        params={"family": "status", "n": n, "b": b, "delta": delta},
    )


# ---------------------------------------------------------------------------
# Group matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupMatchGame:
    types: tuple
    v: Callable
    g: Callable
    interval: tuple
    resolution: int = 1001

    @property
    def type_set(self) -> tuple:
        return tuple(sorted(set(self.types)))

    def grid(self) -> np.ndarray:
        return np.linspace(self.interval[0], self.interval[1], self.resolution)

    def private_optimum(self, t) -> float:
        return _argmax_scalar(lambda x: self.v(x, t), self.grid())

    def best_response(self, partner_actions: Sequence[float], t) -> float:
        def f(x):
            return self.v(x, t) + sum(self.g(x, y) for y in partner_actions)

        return _argmax_scalar(f, self.grid())


def _evaluate(f, xs: np.ndarray) -> np.ndarray:
    try:
        ys = np.asarray(f(xs), dtype=float)
        if ys.shape == xs.shape:
            return ys
    except Exception:  # scalar-only callables fall back to a loop
        pass
    return np.array([f(float(x)) for x in xs], dtype=float)


def _argmax_scalar(f, xs: np.ndarray) -> float:
    """Grid argmax of ``f`` followed by bounded scalar refinement."""
    from scipy.optimize import minimize_scalar

    ys = _evaluate(f, xs)
    k = int(np.argmax(ys))
    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
    best_x, best_y = float(xs[k]), float(ys[k])
    if hi > lo:
        res = minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if res.success and -res.fun > best_y:
            best_x = float(res.x)
    return best_x


def _check_unique_maximizer(f, xs: np.ndarray, what: str, tol: float = 1e-9):
    ys = _evaluate(f, xs)
    k = int(np.argmax(ys))
    near = np.flatnonzero(ys >= ys[k] - tol * max(1.0, abs(ys[k])))
    if np.any(np.abs(near - k) > 1):
        raise ValidationError(f"{what} has several maximizers on the probe grid (e.g. {xs[near[0]]}, {xs[near[-1]]})")


def make_group_match_game(types: Sequence, v: Callable, g: Callable, interval, tol: float = 1e-7,
                          resolution: int = 1001) -> GameSpec:
    """u_i = v(s_i, t_i) + sum_{j in G_i} g(s_i, s_j) on a closed interval.

    Best responses are computed numerically (grid scan plus bounded
    refinement), so the game works in tolerance mode. Each type's private
    objective v(., t) must have a unique maximizer on the 1000-point probe.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValidationError("action interval must have lo < hi")
    model = GroupMatchGame(tuple(types), v, g, (lo, hi), resolution)
    probe = np.linspace(lo, hi, 1000)
    for t in model.type_set:
        _check_unique_maximizer(lambda x, t=t: v(x, t), probe, f"v(., {t!r})")
    ty = model.types

    sep = Separable(lambda i, s: v(s[i], ty[i]), g, own_only=True)

    def best_response(graph: Graph, s, i):
        return model.best_response([s[j] for j in graph.neighbors(i)], ty[i])

    return GameSpec(
        n=len(ty),
        payoff=separable_payoff(sep),
        separable=sep,
        best_response=best_response,
        tol=tol,
        name=f"group-match(types={ty})",
        model=model,
        params={"family": "group-match", "types": ty, "interval": (lo, hi)},
    )


def quadratic_group_match(types: Sequence, alpha=1.0, interval=(0.0, 10.0)) -> GameSpec:
    """Group matching with v(s, t) = t s - s^2/2 and g(x, y) = alpha x y - x^2/2.

    The type value is the privately optimal action.
    """
    a = float(alpha)
    return make_group_match_game(
        types,
        lambda s, t: t * s - 0.5 * s * s,
        lambda x, y: a * x * y - 0.5 * x * x,
        interval,
    )


# ---------------------------------------------------------------------------
# The two-player game without a pairwise stable outcome
# ---------------------------------------------------------------------------


def make_nonexistence_example() -> GameSpec:
    """Two players, actions {0, 1}; payoffs given by an explicit table.

    Empty graph: u_i = s_i. Linked: u_i = 2 s_-i + (2 s_i s_-i - 1)/4 - s_i.
    """
    table = {}
    for linked in (False, True):
        for s0 in (0, 1):
            for s1 in (0, 1):
                s = (s0, s1)
                for i in (0, 1):
                    si, so = Fraction(s[i]), Fraction(s[1 - i])
                    table[linked, s, i] = 2 * so + (2 * si * so - 1) / 4 - si if linked else si

    def payoff(graph: Graph, s, i):
        return table[graph.rows[0] != 0, tuple(s), i]

    return GameSpec(
        n=2,
        payoff=payoff,
        grid=(0, 1),
        tol=0,
        name="two-player nonexistence example",
        params={"family": "nonexistence"},
    )


# ---------------------------------------------------------------------------
# Finite table games
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TableGame:
    grid: tuple
    v_tables: tuple
    g_table: tuple


def make_table_game(grid: Sequence, v_tables: Sequence[Sequence], g_table: Sequence[Sequence],
                    tol: float | None = None) -> GameSpec:
    """Separable game on a finite grid with own-action v tables.

    ``g_table[a][b]`` is g(grid[a], grid[b]): rows index the owner's action.
    Exact (tol 0) unless some entry is a float.
    """
    grid = tuple(grid)
    m = len(grid)
    v_tables = tuple(tuple(r) for r in v_tables)
    g_table = tuple(tuple(r) for r in g_table)
    if len(g_table) != m or any(len(r) != m for r in g_table):
        raise ValidationError(f"g table must be {m}x{m}")
    if any(len(r) != m for r in v_tables):
        raise ValidationError(f"each v table needs {m} entries")
    n = len(v_tables)
    if tol is None:
        floats = any(isinstance(x, float) for r in (*v_tables, *g_table) for x in r)
        tol = DEFAULT_TOL if floats else 0
    index = {x: k for k, x in enumerate(grid)}

    def v(i, s):
        return v_tables[i][index[s[i]]]

    def g(x, y):
        return g_table[index[x]][index[y]]

    sep = Separable(v, g, own_only=True)
    return GameSpec(
        n=n,
        payoff=separable_payoff(sep),
        separable=sep,
        grid=grid,
        tol=tol,
        name=f"table(n={n}, grid={_fmt_seq(grid)})",
        model=TableGame(grid, v_tables, g_table),
        params={"family": "table"},
    )


def monotone_sign_table(rng: np.random.Generator, m: int, cell, p=(0.5, 0.15, 0.35)) -> np.ndarray:
    """Random m x m sign matrix whose signs respect the cell's single crossing.

    Complements: signs nondecreasing down each column (owner's action);
    positive spillovers: nondecreasing along each row (partner's action).
    """
    action_link, spill = cell
    a = rng.choice([-1, 0, 1], size=(m, m), p=p)
    if action_link == "complements":
        a = np.maximum.accumulate(a, axis=0)
    else:
        a = np.maximum.accumulate(a[::-1], axis=0)[::-1]
    if spill == "positive":
        a = np.maximum.accumulate(a, axis=1)
    else:
        a = np.maximum.accumulate(a[:, ::-1], axis=1)[:, ::-1]
    return a


def random_table_game(rng: np.random.Generator, n: int, m: int, cell) -> GameSpec:
    """Exact table game whose g has the cell's single-crossing sign pattern."""
    signs = monotone_sign_table(rng, m, cell)
    mags = rng.integers(1, 4, size=(m, m))
    g = [[int(signs[a, b] * mags[a, b]) for b in range(m)] for a in range(m)]
    v = [[int(x) for x in rng.integers(-3, 4, size=m)] for _ in range(n)]
    return make_table_game(range(m), v, g)


def random_supermodular_game(rng: np.random.Generator, n: int, m: int, cell) -> GameSpec:
    """Exact table game with strategic complements in the two cells of existence.

    g(x, y) = +-(f1[x] + f2[y]) + c x y - K with f1, f2 strictly increasing and
    c >= 0, so g has increasing differences; for substitutes/negative the f
    increments exceed c (m - 1) so g stays decreasing in both arguments.
    """
    if tuple(cell) not in (("complements", "positive"), ("substitutes", "negative")):
        raise ValidationError(f"no supermodular construction for cell {cell}")
    c = int(rng.integers(0, 3))
    lo = c * (m - 1) + 1
    f1 = np.concatenate([[0], np.cumsum(rng.integers(lo, lo + 4, size=m - 1))])
    f2 = np.concatenate([[0], np.cumsum(rng.integers(lo, lo + 4, size=m - 1))])
    sgn = 1 if cell[0] == "complements" else -1
    raw = [[sgn * (f1[x] + f2[y]) + c * x * y for y in range(m)] for x in range(m)]
    flat = sorted(v for row in raw for v in row)
    k = flat[int(rng.integers(0, len(flat)))]
    g = [[int(val - k) for val in row] for row in raw]
    v = [[int(x) for x in rng.integers(-4, 5, size=m)] for _ in range(n)]
    return make_table_game(range(m), v, g)


def random_generic_game(rng: np.random.Generator, n: int, m: int) -> GameSpec:
    """Float table game; ties among payoff comparisons have probability zero."""
    g = rng.normal(size=(m, m)).tolist()
    v = rng.normal(size=(n, m)).tolist()
    return make_table_game(range(m), v, g, tol=1e-12)


def _fmt_seq(xs) -> str:
    return "(" + ", ".join(str(x) for x in xs) + ")"
