"""Graph classes, partner orders and the single-crossing taxonomy."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .core import (
    GameSpec,
    Graph,
    Outcome,
    PreconditionError,
    SizeGuardError,
    UnsupportedGameError,
    link_value_matrix,
    sign,
)

MAX_ORDER_SEARCH = 10


@dataclass(frozen=True)
class Check:
    """A boolean verdict with an optional counterexample or certificate."""

    ok: bool
    witness: object = None

    def __bool__(self):
        return self.ok


# ---------------------------------------------------------------------------
# Nested split graphs
# ---------------------------------------------------------------------------


def is_nested_split_graph(graph: Graph) -> Check:
    """d_j >= d_i implies G_i within G_j + {j}; the witness is a violating (i, j)."""
    d = graph.degrees()
    for i in range(graph.n):
        for j in range(graph.n):
            if i != j and d[j] >= d[i] and graph.rows[i] & ~(graph.rows[j] | 1 << j):
                return Check(False, (i, j))
    return Check(True)


@dataclass(frozen=True)
class DegreePartition:
    """blocks[0] holds isolated players; blocks[1:] have strictly increasing positive degree."""

    blocks: tuple
    degrees: tuple

    @property
    def k(self) -> int:
        return len(self.blocks) - 1


def degree_partition(graph: Graph) -> DegreePartition:
    d = graph.degrees()
    levels = sorted({x for x in d if x > 0})
    blocks = [tuple(i for i in range(graph.n) if d[i] == 0)]
    blocks += [tuple(i for i in range(graph.n) if d[i] == x) for x in levels]
    return DegreePartition(tuple(blocks), tuple([0] + levels))


def is_nested_split_graph_by_partition(graph: Graph) -> Check:
    """Degree-partition test: a player in D_l is linked to exactly D_k, ..., D_{k+1-l} minus itself."""
    part = degree_partition(graph)
    k = part.k
    for ell, block in enumerate(part.blocks):
        target = 0
        for j in range(1, ell + 1):
            for v in part.blocks[k + 1 - j]:
                target |= 1 << v
        for i in block:
            if graph.rows[i] != target & ~(1 << i):
                return Check(False, i)
    return Check(True)


# ---------------------------------------------------------------------------
# Ordered overlapping cliques
# ---------------------------------------------------------------------------


def overlapping_clique_violation(graph: Graph, order: Sequence[int]):
    """First (a, b, c) in order positions with a-c linked but a-b or b-c missing, else None.

    Every closed neighborhood is an interval of the order exactly when no such
    triple exists, and the interval endpoints are then automatically monotone.
    """
    order = list(order)
    if sorted(order) != list(range(graph.n)):
        raise ValueError("order must be a permutation of the players")
    n = graph.n
    for x in range(n):
        a = order[x]
        for z in range(x + 2, n):
            c = order[z]
            if graph.has_edge(a, c):
                for y in range(x + 1, z):
                    b = order[y]
                    if not (graph.has_edge(a, b) and graph.has_edge(b, c)):
                        return (a, b, c)
    return None


def is_overlapping_clique_order(graph: Graph, order: Sequence[int]) -> Check:
    v = overlapping_clique_violation(graph, order)
    return Check(v is None, v)


def closed_intervals(graph: Graph, order: Sequence[int]) -> list[tuple[int, int]]:
    """Position range (lo, hi) of each player's closed neighborhood, listed in order."""
    pos = {p: k for k, p in enumerate(order)}
    out = []
    for p in order:
        ks = [pos[q] for q in graph.neighbors(p)] + [pos[p]]
        out.append((min(ks), max(ks)))
    return out


def _candidate_order(graph: Graph) -> list[int]:
    # breadth-first sweep per component from a lowest-degree end, neighbors by degree
    d = graph.degrees()
    order, seen = [], set()
    for comp in sorted(graph.components(), key=lambda c: c[0]):
        start = min(comp, key=lambda v: (d[v], v))
        queue = [start]
        seen.add(start)
        while queue:
            v = queue.pop(0)
            order.append(v)
            for w in sorted(graph.neighbors(v), key=lambda w: (d[w], w)):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return order


def _search_order(graph: Graph) -> list[int] | None:
    n = graph.n
    rows = graph.rows

    def extend(order: list[int], remaining: int, closed: int):
        if not remaining:
            return order
        for c in range(n):
            if not remaining >> c & 1 or rows[c] & closed:
                continue
            ok = True
            # each earlier neighbor a of c must reach c through everything between
            for x, a in enumerate(order):
                if rows[c] >> a & 1:
                    between = order[x + 1:]
                    if any(not (rows[b] >> c & 1 and rows[b] >> a & 1) for b in between):
                        ok = False
                        break
            if not ok:
                continue
            new_closed = closed
            for a in order:
                if not rows[c] >> a & 1:
                    new_closed |= 1 << a
            res = extend(order + [c], remaining & ~(1 << c), new_closed)
            if res is not None:
                return res
        return None

    return extend([], (1 << n) - 1, 0)


def find_overlapping_clique_order(graph: Graph, hint: Sequence[int] | None = None) -> list[int] | None:
    """An ordering under which the graph consists of ordered overlapping cliques, or None.

    Tries ``hint`` (typically players sorted by action), then a breadth-first
    candidate, then an exhaustive backtracking search (n <= 10).
    """
    for cand in (hint, _candidate_order(graph)):
        if cand is not None and overlapping_clique_violation(graph, cand) is None:
            return list(cand)
    if graph.n > MAX_ORDER_SEARCH:
        raise SizeGuardError(f"exhaustive order search is capped at n <= {MAX_ORDER_SEARCH}")
    return _search_order(graph)


def action_order(profile: Sequence) -> list[int]:
    """Players sorted by action, ties broken by index."""
    return sorted(range(len(profile)), key=lambda i: (profile[i], i))


# ---------------------------------------------------------------------------
# Consistency, alignment and the two orders
# ---------------------------------------------------------------------------


def _sign_matrix(game: GameSpec, outcome: Outcome) -> list[list[int]]:
    D = link_value_matrix(game, outcome)
    n = outcome.n
    return [[0 if i == j else game.cmp(D[i][j]) for j in range(n)] for i in range(n)]


def check_consistency(game: GameSpec, outcome: Outcome) -> Check:
    """No i, j, k, l with i wanting k but not l while j wants l but not k."""
    n = outcome.n
    if n < 4:
        return Check(True)
    S = _sign_matrix(game, outcome)
    for i, j, k, l in itertools.permutations(range(n), 4):
        if S[i][k] >= 0 and S[i][l] < 0 and S[j][k] < 0 and S[j][l] >= 0:
            return Check(False, (i, j, k, l))
    return Check(True)


def desiring_sets(S: list[list[int]]) -> list[int]:
    """Bitmask of players weakly wanting to link with each player."""
    n = len(S)
    return [sum(1 << j for j in range(n) if j != i and S[j][i] >= 0) for i in range(n)]


def check_alignment(game: GameSpec, outcome: Outcome) -> Check:
    """For nested desiring sets of i, j, k: j's wish to link with any l lies between i's and k's."""
    n = outcome.n
    if n < 4:
        return Check(True)
    S = _sign_matrix(game, outcome)
    plus = desiring_sets(S)

    def sub(a, b):
        return plus[a] & ~plus[b] == 0

    for i, j, k in itertools.permutations(range(n), 3):
        if not (sub(i, j) and sub(j, k)):
            continue
        for l in range(n):
            if l in (i, j, k):
                continue
            lo, mid, hi = S[i][l], S[j][l], S[k][l]
            if (lo > 0 and hi > 0 and mid <= 0) or (lo >= 0 and hi >= 0 and mid < 0) or (lo < 0 and hi < 0 and mid >= 0):
                return Check(False, (i, j, k, l))
    return Check(True)


@dataclass(frozen=True)
class OrderPair:
    """Weak orders as rank vectors (higher rank = higher in the order; ties share a rank)."""

    in_rank: tuple
    out_rank: tuple
    identical: bool
    opposed: bool

    @property
    def relation(self) -> str:
        if self.identical and self.opposed:
            return "undetermined"
        return "identical" if self.identical else "opposed"

    def in_order(self) -> list[int]:
        """Players from lowest to highest in the in-order.

        Ties are broken against the out-order when the orders are opposed and
        along it otherwise, then by index.
        """
        t = -1 if self.opposed else 1
        return sorted(range(len(self.in_rank)), key=lambda i: (self.in_rank[i], t * self.out_rank[i], i))

    def out_order(self) -> list[int]:
        t = -1 if self.opposed else 1
        return sorted(range(len(self.out_rank)), key=lambda i: (self.out_rank[i], t * self.in_rank[i], i))

    def in_classes(self) -> list[list[int]]:
        return _classes(self.in_rank)

    def out_classes(self) -> list[list[int]]:
        return _classes(self.out_rank)


def _classes(rank) -> list[list[int]]:
    return [[i for i in range(len(rank)) if rank[i] == r] for r in sorted(set(rank))]


def _dominates_in(S, k, j, refined: bool) -> bool:
    # k at least as desirable as j: anyone's wish to link with j carries over to k
    others = (i for i in range(len(S)) if i not in (j, k))
    if refined:
        return all(S[i][k] >= S[i][j] for i in others)
    return not any(S[i][k] < 0 <= S[i][j] for i in others)


def _dominates_out(S, k, j, refined: bool) -> bool:
    # k at least as eager as j: k wants every partner j wants
    others = (i for i in range(len(S)) if i not in (j, k))
    if refined:
        return all(S[k][i] >= S[j][i] for i in others)
    return not any(S[k][i] < 0 <= S[j][i] for i in others)


def _weak_order(S, dom) -> tuple | None:
    """Rank vector r with r_k >= r_j only if k dominates j; None if none exists.

    The sign-refined relation (which also carries strict incentives) is tried
    first, then the plain weak-incentive relation.
    """
    n = len(S)
    for refined in (True, False):
        score = [sum(dom(S, k, j, refined) for j in range(n) if j != k) for k in range(n)]
        levels = sorted(set(score))
        rank = tuple(levels.index(x) for x in score)
        if all(dom(S, k, j, refined) for k, j in itertools.permutations(range(n), 2) if rank[k] >= rank[j]):
            return rank
    return None


def derive_orders(game: GameSpec, outcome: Outcome, strict: bool = True) -> OrderPair:
    """The desirability (in) and eagerness (out) orders at an outcome.

    k ranks weakly above j in the in-order when no other player weakly wants
    to link with j but not with k; the out-order compares the players' own
    incentives in the same way. When possible the orders also carry strict
    incentives (a strict wish to link with j implies one with k). Raises PreconditionError with
    the consistency or alignment witness when either fails; with ``strict=False`` those
    checks are skipped and only the existence of valid orders is required.
    """
    if strict:
        cons = check_consistency(game, outcome)
        if not cons:
            raise PreconditionError("linking incentives are not consistent at this outcome", cons.witness)
        al = check_alignment(game, outcome)
        if not al:
            raise PreconditionError("linking incentives are not aligned at this outcome", al.witness)
    S = _sign_matrix(game, outcome)
    n = outcome.n
    rin = _weak_order(S, _dominates_in)
    rout = _weak_order(S, _dominates_out)
    if rin is None or rout is None:
        raise PreconditionError("no weak order represents the linking incentives", ("in" if rin is None else "out"))
    pairs = list(itertools.permutations(range(n), 2))
    identical = not any(rin[i] > rin[j] and rout[j] > rout[i] for i, j in pairs)
    opposed = not any(rin[i] > rin[j] and rout[i] > rout[j] for i, j in pairs)
    if not (identical or opposed):
        raise PreconditionError("orders are neither identical nor opposed", (rin, rout))
    return OrderPair(rin, rout, identical, opposed)


# ---------------------------------------------------------------------------
# Single-crossing taxonomy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TaxonomyCell:
    action_link: str
    spillovers: str
    degenerate: bool = False

    @property
    def cell(self) -> tuple[str, str]:
        return (self.action_link, self.spillovers)

    def __str__(self):
        tag = " (degenerate)" if self.degenerate else ""
        return f"action-link {self.action_link}, {self.spillovers} spillovers{tag}"


def _monotone(seq: Sequence[int]) -> tuple[bool, bool]:
    up = all(a <= b for a, b in zip(seq, seq[1:]))
    down = all(a >= b for a, b in zip(seq, seq[1:]))
    return up, down


def classify_single_crossing(g_table: Sequence[Sequence], tol: float = 0.0) -> TaxonomyCell:
    """Classify a link-value table; rows index the owner's action, columns the partner's.

    Single crossing in a direction means the sign of g is monotone along it,
    which is the weak and strict implication together. When a direction is
    satisfied both ways (the sign never changes) the cell reports
    complements/positive and sets ``degenerate``.
    """
    sg = [[sign(x, tol) for x in row] for row in g_table]
    m = len(sg)
    if m == 0 or any(len(r) != m for r in sg):
        raise ValueError("g table must be square and non-empty")
    cols = [[sg[a][b] for a in range(m)] for b in range(m)]
    c_up = all(_monotone(c)[0] for c in cols)
    c_down = all(_monotone(c)[1] for c in cols)
    r_up = all(_monotone(r)[0] for r in sg)
    r_down = all(_monotone(r)[1] for r in sg)
    action_link = "complements" if c_up else "substitutes" if c_down else "neither"
    spill = "positive" if r_up else "negative" if r_down else "neither"
    return TaxonomyCell(action_link, spill, degenerate=(c_up and c_down) or (r_up and r_down))


def game_g_table(game: GameSpec, points: Sequence | None = None) -> tuple[list, list[list]]:
    """g evaluated on ``points`` (default: the grid), rows = owner's action."""
    if game.separable is None:
        raise UnsupportedGameError(f"{game.name} is not separable")
    pts = sorted(set(points if points is not None else game.grid or ()))
    if not pts:
        raise ValueError("need sample points for a continuous-action game")
    return pts, [[game.separable.g(x, y) for y in pts] for x in pts]


def classify_game(game: GameSpec, points: Sequence | None = None) -> TaxonomyCell:
    _, table = game_g_table(game, points)
    return classify_single_crossing(table, game.tol)


# ---------------------------------------------------------------------------
# Predicted structure of stable outcomes
# ---------------------------------------------------------------------------


@dataclass
class StructureVerdict:
    relation: str
    orders: OrderPair | None
    checks: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self):
        return self.ok

    def record(self, name: str, passed: bool, detail=None):
        self.checks[name] = passed
        if not passed:
            self.failures.append((name, detail))


def verify_theorem1(game: GameSpec, outcome: Outcome, cell: TaxonomyCell | None = None,
                    check_stable: bool = True) -> StructureVerdict:
    """Check the structure predicted for a strictly pairwise stable outcome.

    Identical orders: nested split graph, degrees weakly increasing in the
    common order, and G_i - {j} within G_j whenever j is weakly above i in
    both. Opposed orders: overlapping cliques along the in-order (any tie
    break). For separable games with a known cell the action statements are
    checked too: in the diagonal cells degree and action move together
    (complements/positive) or oppositely (substitutes/negative); in the
    off-diagonal cells the action order itself is an overlapping-clique order.
    """
    from .stability import check_strict_pairwise

    if check_stable:
        rep = check_strict_pairwise(game, outcome, first=True)
        if not rep.stable:
            raise PreconditionError("outcome is not strictly pairwise stable", rep.witnesses[0])
    g, s = outcome.graph, outcome.profile
    n = g.n
    d = g.degrees()
    if cell is None and game.separable is not None:
        cell = classify_game(game, game.grid if game.grid is not None else s)
    notes = {"consistent": check_consistency(game, outcome).ok, "aligned": check_alignment(game, outcome).ok}
    try:
        orders = derive_orders(game, outcome, strict=False)
    except PreconditionError as exc:
        if cell is None:
            raise
        # the action statements below do not need the orders
        orders = None
        notes["orders"] = exc.args[0]
    v = StructureVerdict(orders.relation if orders else "none", orders, notes=notes)
    if orders is None:
        pass
    elif orders.identical:
        rin, rout = orders.in_rank, orders.out_rank
        nsg = is_nested_split_graph(g)
        v.record("nested split graph", nsg.ok, nsg.witness)
        bad = next(((i, j) for i, j in itertools.permutations(range(n), 2) if rin[i] > rin[j] and d[i] < d[j]), None)
        v.record("degree monotone in order", bad is None, bad)
        bad = next(((i, j) for i, j in itertools.permutations(range(n), 2)
                    if rin[j] >= rin[i] and rout[j] >= rout[i] and g.rows[i] & ~(1 << j) & ~g.rows[j]), None)
        v.record("neighborhoods nested along order", bad is None, bad)
    if orders is not None and orders.opposed:
        for name, order in (("in-order", orders.in_order()), ("out-order", orders.out_order())):
            viol = overlapping_clique_violation(g, order)
            v.record(f"overlapping cliques along {name}", viol is None, viol)
    if cell is not None:
        pairs = list(itertools.permutations(range(n), 2))
        if cell.cell == ("complements", "positive"):
            v.record("actions: nested split graph", is_nested_split_graph(g).ok)
            bad = next(((i, j) for i, j in pairs if d[i] > d[j] and s[i] < s[j]), None)
            v.record("actions: higher degree, higher action", bad is None, bad)
        elif cell.cell == ("substitutes", "negative"):
            v.record("actions: nested split graph", is_nested_split_graph(g).ok)
            bad = next(((i, j) for i, j in pairs if d[i] > d[j] and s[i] > s[j]), None)
            v.record("actions: higher degree, lower action", bad is None, bad)
        elif "neither" not in cell.cell:
            viol = overlapping_clique_violation(g, action_order(s))
            v.record("actions: overlapping cliques in action order", viol is None, viol)
    return v


def describe_structure(graph: Graph, profile: Sequence | None = None) -> str:
    """One-line structural classification used in reports."""
    parts = []
    if is_nested_split_graph(graph):
        parts.append("nested split graph")
    if profile is not None and overlapping_clique_violation(graph, action_order(profile)) is None:
        parts.append("ordered overlapping cliques; order = action order")
    elif graph.n <= MAX_ORDER_SEARCH and find_overlapping_clique_order(graph) is not None:
        parts.append("ordered overlapping cliques")
    return ", ".join(parts) if parts else "neither class"
