"""Adjustment processes: uncoordinated link additions, monotone lattice iteration,
Poisson-clock revisions and the two-stage deviation game."""

from __future__ import annotations

import hashlib
import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (
    MAX_ENUM_PLAYERS,
    GameSpec,
    Graph,
    Outcome,
    PreconditionError,
    SizeGuardError,
    UnsupportedGameError,
    marginal_link_value,
)
from .equilibrium import best_responses, extremal_nash, improving_action, nash_equilibria
from .stability import check_pairwise
from .structure import TaxonomyCell

# ---------------------------------------------------------------------------
# Uncoordinated outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdjustmentStep:
    link: tuple
    gain_i: object
    gain_j: object


@dataclass
class AdjustmentPath:
    """States reached from the empty graph by single beneficial link additions."""

    states: list
    steps: list

    @property
    def final(self) -> Outcome:
        return self.states[-1]


def _unique_equilibrium(game: GameSpec, graph: Graph) -> tuple:
    eqs = nash_equilibria(game, graph)
    if len(eqs) != 1:
        raise UnsupportedGameError(f"expected a unique equilibrium on {graph}, found {len(eqs)}")
    return eqs[0]


def uncoordinated_search(game: GameSpec) -> tuple[list[Outcome], dict]:
    """All pairwise stable outcomes reachable from the empty graph, with one path to each.

    A link ij may be added when, at the current actions, both players weakly
    gain and one strictly; actions are then re-equilibrated. Every addition
    order is explored; states are memoized by graph.
    """
    n = game.n
    if n > MAX_ENUM_PLAYERS:
        raise SizeGuardError(f"uncoordinated search is capped at n <= {MAX_ENUM_PLAYERS}")
    start = Graph.empty(n)
    profiles = {start.mask: _unique_equilibrium(game, start)}
    parent: dict = {start.mask: None}
    graphs = {start.mask: start}
    queue = deque([start.mask])
    while queue:
        mask = queue.popleft()
        g, s = graphs[mask], profiles[mask]
        o = Outcome(g, s)
        for i, j in itertools.combinations(range(n), 2):
            if g.has_edge(i, j):
                continue
            di = marginal_link_value(game, o, i, j)
            dj = marginal_link_value(game, o, j, i)
            ci, cj = game.cmp(di), game.cmp(dj)
            if ci >= 0 and cj >= 0 and (ci > 0 or cj > 0):
                g2 = g.add(i, j)
                if g2.mask not in parent:
                    parent[g2.mask] = (mask, AdjustmentStep((i, j), di, dj))
                    graphs[g2.mask] = g2
                    profiles[g2.mask] = _unique_equilibrium(game, g2)
                    queue.append(g2.mask)
    stable, paths = [], {}
    for mask in sorted(graphs):
        o = Outcome(graphs[mask], profiles[mask])
        if check_pairwise(game, o, first=True).stable:
            stable.append(o)
            states, steps, m = [], [], mask
            while m is not None:
                states.append(Outcome(graphs[m], profiles[m]))
                link = parent[m]
                if link is None:
                    break
                m, step = link
                steps.append(step)
            paths[mask] = AdjustmentPath(states[::-1], steps[::-1])
    return stable, paths


def uncoordinated_outcomes(game: GameSpec) -> list[Outcome]:
    return uncoordinated_search(game)[0]


# ---------------------------------------------------------------------------
# Extremal stable outcomes by monotone iteration
# ---------------------------------------------------------------------------

EXISTENCE_CELLS = (("complements", "positive"), ("substitutes", "negative"))


def _cell_tuple(cell) -> tuple:
    return cell.cell if isinstance(cell, TaxonomyCell) else tuple(cell)


def max_stable_graph(game: GameSpec, s) -> Graph:
    """Delete links someone strictly wants to drop, starting from the complete graph."""
    g = Graph.complete(game.n)
    changed = True
    while changed:
        changed = False
        o = Outcome(g, s)
        for i, j in g.edges():
            if game.cmp(marginal_link_value(game, o, i, j)) < 0 or game.cmp(marginal_link_value(game, o, j, i)) < 0:
                g = g.remove(i, j)
                changed = True
                break
    return g


def min_stable_graph(game: GameSpec, s) -> Graph:
    """Add links both weakly want (one strictly), starting from the empty graph."""
    g = Graph.empty(game.n)
    changed = True
    while changed:
        changed = False
        o = Outcome(g, s)
        for i, j in itertools.combinations(range(game.n), 2):
            if g.has_edge(i, j):
                continue
            ci = game.cmp(marginal_link_value(game, o, i, j))
            cj = game.cmp(marginal_link_value(game, o, j, i))
            if ci >= 0 and cj >= 0 and (ci > 0 or cj > 0):
                g = g.add(i, j)
                changed = True
                break
    return g


def upper_map(game: GameSpec, outcome: Outcome, reverse: bool = False) -> Outcome:
    """(largest stable graph given s, largest equilibrium given G); ``reverse`` flips the action order."""
    return Outcome(max_stable_graph(game, outcome.profile), extremal_nash(game, outcome.graph, top=not reverse))


def lower_map(game: GameSpec, outcome: Outcome, reverse: bool = False) -> Outcome:
    return Outcome(min_stable_graph(game, outcome.profile), extremal_nash(game, outcome.graph, top=reverse))


def outcome_leq(a: Outcome, b: Outcome, reverse: bool = False) -> bool:
    """Product order: subgraph, and actions componentwise (reversed if asked)."""
    if not a.graph.issubgraph(b.graph):
        return False
    pairs = zip(a.profile, b.profile)
    return all(y <= x for x, y in pairs) if reverse else all(x <= y for x, y in pairs)


def _carries_over(lo_val, hi_val, game: GameSpec) -> bool:
    # a weak (strict) gain at the lower point stays weak (strict) at the higher one
    lo, hi = game.cmp(lo_val), game.cmp(hi_val)
    return lo < 0 or hi >= lo


def check_existence_preconditions(game: GameSpec, cell, rng: np.random.Generator, samples: int = 300):
    """Sampled check of strategic complements, convexity in links and the cell's link conditions.

    All conditions are read in the lattice order on actions, which is the
    numeric order for complements/positive and the reversed one for
    substitutes/negative. Raises PreconditionError with the failing sample.
    """
    cell = _cell_tuple(cell)
    if cell not in EXISTENCE_CELLS:
        raise PreconditionError(f"monotone iteration needs one of the cells {EXISTENCE_CELLS}, got {cell}")
    if game.grid is None:
        raise UnsupportedGameError("monotone iteration needs an action grid")
    n, m = game.n, len(game.grid)
    grid = game.grid if cell == EXISTENCE_CELLS[0] else game.grid[::-1]
    npairs = n * (n - 1) // 2

    def rand_graph():
        return Graph.from_mask(n, int(rng.integers(0, 1 << npairs)))

    def rand_idx():
        return [int(k) for k in rng.integers(0, m, size=n)]

    def prof(idx):
        return tuple(grid[k] for k in idx)

    def with_(idx, who, k):
        out = list(idx)
        out[who] = k
        return out

    for _ in range(samples):
        g = rand_graph()
        idx = rand_idx()
        idx_hi = [max(a, b) for a, b in zip(idx, rand_idx())]
        i = int(rng.integers(0, n))
        j = int((i + 1 + rng.integers(0, n - 1)) % n)
        lo, hi = sorted(int(x) for x in rng.integers(0, m, size=2))
        if lo < hi:
            gains = [game.payoff(g, prof(with_(p, i, hi)), i) - game.payoff(g, prof(with_(p, i, lo)), i)
                     for p in (idx, idx_hi)]
            if not _carries_over(gains[0], gains[1], game):
                raise PreconditionError("strategic complements fails", (g, prof(idx), prof(idx_hi), i))
        o = Outcome(g, prof(idx))
        big = Graph(n, tuple(r1 | r2 for r1, r2 in zip(g.rows, rand_graph().rows)))
        if not _carries_over(marginal_link_value(game, o, i, j),
                             marginal_link_value(game, Outcome(big, o.profile), i, j), game):
            raise PreconditionError("convexity in links fails", (g, big, o.profile, i, j))
        if lo < hi:
            for who, what in ((i, "link-action"), (j, "spillover")):
                o_lo = Outcome(g, prof(with_(idx, who, lo)))
                o_hi = Outcome(g, prof(with_(idx, who, hi)))
                if not _carries_over(marginal_link_value(game, o_lo, i, j),
                                     marginal_link_value(game, o_hi, i, j), game):
                    raise PreconditionError(f"{what} single crossing fails for cell {cell}",
                                            (g, o_lo.profile, o_hi.profile, i, j))


@dataclass
class TarskiResult:
    minimal: Outcome
    maximal: Outcome
    iterations: tuple

    def __iter__(self):
        return iter((self.minimal, self.maximal))


def _iterate(step, start: Outcome, reverse: bool, descending: bool, max_iter: int = 10_000) -> tuple[Outcome, int]:
    cur = start
    for k in range(max_iter):
        nxt = step(cur)
        if nxt == cur:
            return cur, k
        ok = outcome_leq(nxt, cur, reverse) if descending else outcome_leq(cur, nxt, reverse)
        if not ok:
            raise PreconditionError("iteration is not monotone; the game is outside the existence conditions", (cur, nxt))
        cur = nxt
    raise ArithmeticError("monotone iteration did not converge")


def tarski_extremes(game: GameSpec, cell, check: bool = True, seed: int = 0) -> TarskiResult:
    """Minimal and maximal pairwise stable outcomes by iterating the two monotone maps.

    The upper map runs from (complete graph, top actions) and the lower map
    from (empty graph, bottom actions); for substitutes with negative
    spillovers "top" means the smallest actions.
    """
    cell_t = _cell_tuple(cell)
    if check:
        check_existence_preconditions(game, cell_t, np.random.default_rng(seed))
    elif cell_t not in EXISTENCE_CELLS:
        raise PreconditionError(f"monotone iteration needs one of the cells {EXISTENCE_CELLS}, got {cell_t}")
    reverse = cell_t == ("substitutes", "negative")
    n, grid = game.n, game.grid
    hi_a, lo_a = (grid[0], grid[-1]) if reverse else (grid[-1], grid[0])
    top = Outcome(Graph.complete(n), (hi_a,) * n)
    bottom = Outcome(Graph.empty(n), (lo_a,) * n)
    hi, k_hi = _iterate(lambda o: upper_map(game, o, reverse), top, reverse, descending=True)
    lo, k_lo = _iterate(lambda o: lower_map(game, o, reverse), bottom, reverse, descending=False)
    return TarskiResult(lo, hi, (k_lo, k_hi))


# ---------------------------------------------------------------------------
# Revision game
# ---------------------------------------------------------------------------


def state_hash(outcome: Outcome) -> str:
    text = f"{outcome.graph.mask}|{','.join(str(x) for x in outcome.profile)}"
    return hashlib.sha1(text.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class RevisionEvent:
    time: float
    clock: str
    decision: str
    state: str

    def as_record(self) -> dict:
        return {"t": self.time, "clock": self.clock, "decision": self.decision, "state": self.state}


@dataclass
class RevisionTrace:
    seed: int
    rate: float
    discount: float
    events: list = field(default_factory=list)
    absorbed: Outcome | None = None
    final: Outcome | None = None

    def to_jsonl(self) -> str:
        head = {"seed": self.seed, "rate": self.rate, "discount": self.discount}
        lines = [json.dumps(head)] + [json.dumps(e.as_record()) for e in self.events]
        if self.absorbed is not None:
            lines.append(json.dumps({"absorbed": state_hash(self.absorbed)}))
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())


def _fmt(x) -> str:
    return str(x) if isinstance(x, (int, Fraction)) else f"{x:.6g}"


def _action_move(game: GameSpec, o: Outcome, i: int):
    """New action if the player strictly gains from best-responding, else None."""
    if improving_action(game, o.graph, o.profile, i) is None:
        return None
    brs = best_responses(game, o.graph, o.profile, i)
    return brs[0]


def _link_move(game: GameSpec, o: Outcome, i: int, j: int) -> str | None:
    """'delete' or 'add' when the clock of ordered pair (i, j) changes the graph."""
    d_i = game.cmp(marginal_link_value(game, o, i, j))
    if o.graph.has_edge(i, j):
        return "delete" if d_i < 0 else None
    if d_i > 0 and game.cmp(marginal_link_value(game, o, j, i)) >= 0:
        return "add"
    return None


def _is_rest_point(game: GameSpec, o: Outcome) -> bool:
    n = o.n
    if any(_action_move(game, o, i) is not None for i in range(n)):
        return False
    return all(_link_move(game, o, i, j) is None for i, j in itertools.permutations(range(n), 2))


def default_start(game: GameSpec) -> Outcome:
    n = game.n
    if game.grid is not None:
        return Outcome(Graph.empty(n), (game.grid[0],) * n)
    b = getattr(game.model, "b", None)
    if b is not None:
        return Outcome(Graph.empty(n), tuple(b))
    return Outcome(Graph.empty(n), tuple(game.best_response(Graph.empty(n), (0.0,) * n, i) for i in range(n)))


def _clock_effect(game: GameSpec, o: Outcome, clock: tuple) -> tuple[Outcome, str, bool]:
    kind, i, j = clock
    if kind == "a":
        a = _action_move(game, o, i)
        if a is None:
            return o, "stay", False
        return Outcome(o.graph, o.profile[:i] + (a,) + o.profile[i + 1:]), f"move {_fmt(a)}", True
    move = _link_move(game, o, i, j)
    if move == "delete":
        return Outcome(o.graph.remove(i, j), o.profile), "delete", True
    if move == "add":
        return Outcome(o.graph.add(i, j), o.profile), "propose accepted", True
    if o.graph.has_edge(i, j):
        return o, "keep", False
    if game.cmp(marginal_link_value(game, o, i, j)) > 0:
        return o, "propose rejected", False
    return o, "no proposal", False


def simulate_revision(game: GameSpec, rate: float = 1.0, horizon: int = 10_000, seed: int = 0,
                      start: Outcome | None = None, discount: float = 0.9) -> RevisionTrace:
    """Myopic revision dynamics driven by independent Poisson clocks.

    Each player has an action clock and each ordered pair (i, j) a link clock,
    all with the same rate. At an action clock the player best-responds
    (keeping the current action when it is already optimal). At a link clock
    i drops an existing link iff that strictly pays, or proposes a missing
    one iff it strictly pays, and j accepts iff it weakly pays. The run stops
    after ``horizon`` events or once no clock can change the state. The
    discount factor is recorded only.
    """
    rng = np.random.default_rng(seed)
    n = game.n
    clocks = [("a", i, None) for i in range(n)] + [("l", i, j) for i, j in itertools.permutations(range(n), 2)]
    labels = [f"a{i + 1}" if k == "a" else f"l{i + 1}-{j + 1}" for k, i, j in clocks]
    total = rate * len(clocks)
    o = start if start is not None else default_start(game)
    trace = RevisionTrace(seed, rate, discount)
    # the state space is finite in practice, so effects and hashes are memoized per state
    effects: dict = {}
    hashes: dict = {}
    rest: dict = {}

    def key(out: Outcome):
        return (out.graph.mask, out.profile)

    if _is_rest_point(game, o):
        trace.absorbed = trace.final = o
        return trace
    t = 0.0
    done = 0
    while done < horizon:
        batch = min(4096, horizon - done)
        gaps = rng.exponential(1.0 / total, size=batch)
        picks = rng.integers(0, len(clocks), size=batch)
        for gap, c in zip(gaps.tolist(), picks.tolist()):
            t += gap
            k = key(o)
            eff = effects.get((k, c))
            if eff is None:
                eff = effects[k, c] = _clock_effect(game, o, clocks[c])
            o, decision, changed = eff
            k2 = key(o)
            h = hashes.get(k2)
            if h is None:
                h = hashes[k2] = state_hash(o)
            trace.events.append(RevisionEvent(t, labels[c], decision, h))
            if changed:
                r = rest.get(k2)
                if r is None:
                    r = rest[k2] = _is_rest_point(game, o)
                if r:
                    trace.absorbed = trace.final = o
                    return trace
        done += batch
    trace.final = o
    return trace


# ---------------------------------------------------------------------------
# Two-stage deviation game with a rare link-proposal stage
# ---------------------------------------------------------------------------

MAX_EPS_PLAYERS = 4
MAX_EPS_GRID = 6


def _stage2_values(game: GameSpec, o: Outcome, i: int) -> tuple[list, bool]:
    """Payoffs to i over subgame-perfect plays of the proposal stage, and whether a link can form.

    Each responder accepts when the link strictly pays, rejects when it
    strictly hurts and may do either when indifferent.
    """
    base = game.payoff(o.graph, o.profile, i)
    options = []
    for j in range(o.n):
        if j == i or o.graph.has_edge(i, j):
            continue
        c = game.cmp(marginal_link_value(game, o, j, i))
        responses = (True,) if c > 0 else (False,) if c < 0 else (True, False)
        options.append((responses, game.payoff(o.graph.add(i, j), o.profile, i)))
    values = []
    for combo in itertools.product(*(r for r, _ in options)):
        best = base
        for accept, (_, val) in zip(combo, options):
            if accept and game.cmp(val - best) > 0:
                best = val
        values.append(best)
    # a link forms in some equilibrium when a willing responder is weakly worth proposing to
    forms = any(True in r and game.cmp(val - base) >= 0 for r, val in options)
    return values, forms


def epsilon_pns_check(game: GameSpec, outcome: Outcome) -> bool:
    """Whether every subgame-perfect play of the deviation game leaves the outcome in place.

    The rare second stage is treated lexicographically: first-stage payoffs
    decide, and the second stage only breaks first-stage ties.
    """
    if game.grid is None:
        raise UnsupportedGameError("the deviation game needs a finite action grid")
    if game.n > MAX_EPS_PLAYERS or len(game.grid) > MAX_EPS_GRID:
        raise SizeGuardError(f"deviation game tree is capped at n <= {MAX_EPS_PLAYERS}, |grid| <= {MAX_EPS_GRID}")
    g, s = outcome.graph, outcome.profile
    for i in range(outcome.n):
        u0 = game.payoff(g, s, i)
        v0, forms = _stage2_values(game, outcome, i)
        if forms:
            return False
        worst0 = min(v0)
        nb = g.neighbors(i)
        for r in range(len(nb) + 1):
            for cut in itertools.combinations(nb, r):
                g2 = g.remove_links(i, cut)
                for a in game.grid:
                    if not cut and a == s[i]:
                        continue
                    o2 = Outcome(g2, s[:i] + (a,) + s[i + 1:])
                    c = game.cmp(game.payoff(g2, o2.profile, i) - u0)
                    if c > 0:
                        return False
                    if c == 0 and game.cmp(max(_stage2_values(game, o2, i)[0]) - worst0) >= 0:
                        return False
    return True
