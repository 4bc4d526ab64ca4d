"""Graphs, games, outcomes and the marginal link value primitives.

Players are 0-indexed everywhere in the library; reports and exports use
1-indexed labels.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Iterator, Mapping, Sequence

MAX_PLAYERS = 16
MAX_ENUM_PLAYERS = 7
DEFAULT_TOL = 1e-9


class EndnetError(Exception):
    """Base class for library errors."""


class InvalidPairError(EndnetError, ValueError):
    pass


class ValidationError(EndnetError, ValueError):
    """A constructor argument violates the object's invariants."""


class SizeGuardError(EndnetError):
    """Input is larger than an exhaustive routine is allowed to handle."""


class UnsupportedGameError(EndnetError):
    """The routine needs a capability (grid, separability, ...) the game lacks."""


class PreconditionError(EndnetError):
    """A mathematical precondition failed; ``witness`` holds the evidence."""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


def sign(x, tol: float = 0.0) -> int:
    """Sign of ``x`` with a dead zone of half-width ``tol`` (0 means exact)."""
    if tol:
        if x > tol:
            return 1
        if x < -tol:
            return -1
        return 0
    return int(x > 0) - int(x < 0)


def as_number(x, exact: bool = True):
    """Coerce ints, strings like ``"5/6"`` and Fractions; floats pass through."""
    if isinstance(x, bool):
        raise ValidationError(f"boolean is not a number: {x!r}")
    if isinstance(x, (int, Fraction)):
        return Fraction(x) if exact else float(x)
    if isinstance(x, str):
        return Fraction(x) if exact else float(Fraction(x))
    if isinstance(x, float):
        return Fraction(x) if exact else x
    raise ValidationError(f"not a number: {x!r}")


def is_rational(x) -> bool:
    return isinstance(x, (int, Fraction, str)) and not isinstance(x, bool)


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------


def pair_index(n: int) -> dict[tuple[int, int], int]:
    """Bit position of each unordered pair (i < j), lexicographic order."""
    return {p: k for k, p in enumerate(itertools.combinations(range(n), 2))}


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph stored as n-bit adjacency rows."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_PLAYERS:
            raise ValidationError(f"player count must be in [1, {MAX_PLAYERS}], got {self.n}")
        if len(self.rows) != self.n:
            raise ValidationError("adjacency rows do not match player count")
        full = (1 << self.n) - 1
        for i, r in enumerate(self.rows):
            if r & ~full or r >> i & 1:
                raise ValidationError(f"bad adjacency row for player {i}")
            for j in range(self.n):
                if (r >> j & 1) != (self.rows[j] >> i & 1):
                    raise ValidationError(f"asymmetric adjacency between {i} and {j}")

    @classmethod
    def empty(cls, n: int) -> Graph:
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> Graph:
        full = (1 << n) - 1
        return cls(n, tuple(full & ~(1 << i) for i in range(n)))

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        rows = [0] * n
        for i, j in edges:
            if i == j:
                raise ValidationError(f"self-loop at {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"edge {(i, j)} out of range for n={n}")
            rows[i] |= 1 << j
            rows[j] |= 1 << i
        return cls(n, tuple(rows))

    @classmethod
    def from_mask(cls, n: int, mask: int) -> Graph:
        rows = [0] * n
        for k, (i, j) in enumerate(itertools.combinations(range(n), 2)):
            if mask >> k & 1:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
        return cls(n, tuple(rows))

    @classmethod
    def cliques(cls, blocks: Sequence[Sequence[int]], n: int | None = None) -> Graph:
        """Disjoint union of cliques on the given player blocks."""
        if n is None:
            n = sum(len(b) for b in blocks)
        return cls.from_edges(n, [e for b in blocks for e in itertools.combinations(b, 2)])

    @cached_property
    def mask(self) -> int:
        m = 0
        for k, (i, j) in enumerate(itertools.combinations(range(self.n), 2)):
            if self.rows[i] >> j & 1:
                m |= 1 << k
        return m

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.rows[i] >> j & 1)

    def neighbors(self, i: int) -> list[int]:
        r = self.rows[i]
        return [j for j in range(self.n) if r >> j & 1]

    def degree(self, i: int) -> int:
        return bin(self.rows[i]).count("1")

    def degrees(self) -> tuple[int, ...]:
        return tuple(bin(r).count("1") for r in self.rows)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n) if self.rows[i] >> j & 1]

    @property
    def num_edges(self) -> int:
        return sum(self.degrees()) // 2

    def add(self, i: int, j: int) -> Graph:
        if i == j:
            raise InvalidPairError(f"cannot link player {i} to itself")
        rows = list(self.rows)
        rows[i] |= 1 << j
        rows[j] |= 1 << i
        return Graph(self.n, tuple(rows))

    def remove(self, i: int, j: int) -> Graph:
        if i == j:
            raise InvalidPairError(f"cannot unlink player {i} from itself")
        rows = list(self.rows)
        rows[i] &= ~(1 << j)
        rows[j] &= ~(1 << i)
        return Graph(self.n, tuple(rows))

    def remove_links(self, i: int, others) -> Graph:
        rows = list(self.rows)
        for j in others:
            rows[i] &= ~(1 << j)
            rows[j] &= ~(1 << i)
        return Graph(self.n, tuple(rows))

    def issubgraph(self, other: Graph) -> bool:
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def is_empty(self) -> bool:
        return not any(self.rows)

    def is_complete(self) -> bool:
        return self.num_edges == self.n * (self.n - 1) // 2

    def components(self) -> list[list[int]]:
        seen = 0
        comps = []
        for s in range(self.n):
            if seen >> s & 1:
                continue
            comp, frontier = 1 << s, 1 << s
            while frontier:
                nxt = 0
                for v in range(self.n):
                    if frontier >> v & 1:
                        nxt |= self.rows[v]
                frontier = nxt & ~comp
                comp |= nxt
            seen |= comp
            comps.append([v for v in range(self.n) if comp >> v & 1])
        return comps

    def __str__(self):
        body = ", ".join(f"{i + 1}-{j + 1}" for i, j in self.edges())
        return f"Graph(n={self.n}, {{{body}}})"


def all_graphs(n: int) -> Iterator[Graph]:
    """Every simple graph on n players, in ascending edge-bitmask order."""
    if n > MAX_ENUM_PLAYERS:
        raise SizeGuardError(f"exhaustive graph enumeration is capped at n <= {MAX_ENUM_PLAYERS}")
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        rows = [0] * n
        for k, (i, j) in enumerate(pairs):
            if mask >> k & 1:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
        g = Graph.__new__(Graph)
        object.__setattr__(g, "n", n)
        object.__setattr__(g, "rows", tuple(rows))
        g.__dict__["mask"] = mask
        yield g


# ---------------------------------------------------------------------------
# Games
# ---------------------------------------------------------------------------

Profile = tuple
PayoffFn = Callable[[Graph, Profile, int], Any]


@dataclass(frozen=True)
class Separable:
    """Payoff parts u_i = v(i, s) + sum over neighbors j of g(s_i, s_j).

    ``own_only`` promises that v(i, s) depends on s only through s[i], which
    lets grid routines tabulate it.
    """

    v: Callable[[int, Profile], Any]
    g: Callable[[Any, Any], Any]
    own_only: bool = False


@dataclass(frozen=True, eq=False)
class GameSpec:
    """A network game with network formation on ``n`` players.

    Exactly one action domain is used: a finite ordered ``grid`` or a
    continuous domain, in which case ``best_response`` must be supplied for
    Nash checks. ``tol`` is the comparison dead zone; 0 means exact rational
    comparisons.
    """

    n: int
    payoff: PayoffFn
    separable: Separable | None = None
    grid: tuple | None = None
    best_response: Callable[[Graph, Profile, int], Any] | None = None
    tol: float = DEFAULT_TOL
    name: str = "game"
    model: Any = None
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not 2 <= self.n <= MAX_PLAYERS:
            raise ValidationError(f"player count must be in [2, {MAX_PLAYERS}], got {self.n}")
        if self.grid is not None:
            grid = tuple(self.grid)
            if not grid or any(a >= b for a, b in zip(grid, grid[1:])):
                raise ValidationError("action grid must be non-empty and strictly increasing")
            object.__setattr__(self, "grid", grid)

    @property
    def exact(self) -> bool:
        return self.tol == 0

    @property
    def is_grid(self) -> bool:
        return self.grid is not None

    def u(self, graph: Graph, s: Profile, i: int):
        return self.payoff(graph, s, i)

    def cmp(self, x) -> int:
        return sign(x, self.tol)

    def g(self, x, y):
        if self.separable is None:
            raise UnsupportedGameError(f"{self.name} is not separable")
        return self.separable.g(x, y)

    def validate_profile(self, s: Sequence) -> Profile:
        s = tuple(s)
        if len(s) != self.n:
            raise ValidationError(f"profile has {len(s)} actions, game has {self.n} players")
        if self.grid is not None:
            bad = [x for x in s if x not in self.grid]
            if bad:
                raise ValidationError(f"actions {bad} are not on the grid {self.grid}")
        else:
            for x in s:
                if isinstance(x, float) and x != x or x in (float("inf"), float("-inf")):
                    raise ValidationError(f"non-finite action {x!r}")
        return s


def separable_payoff(sep: Separable) -> PayoffFn:
    v, g = sep.v, sep.g

    def payoff(graph: Graph, s: Profile, i: int):
        si = s[i]
        r = graph.rows[i]
        total = v(i, s)
        j = 0
        while r:
            if r & 1:
                total += g(si, s[j])
            r >>= 1
            j += 1
        return total

    return payoff


@dataclass(frozen=True)
class Outcome:
    graph: Graph
    profile: Profile

    def __post_init__(self):
        object.__setattr__(self, "profile", tuple(self.profile))
        if len(self.profile) != self.graph.n:
            raise ValidationError("profile length does not match the graph's player count")

    @property
    def n(self) -> int:
        return self.graph.n

    def sort_key(self):
        return (self.graph.mask, self.profile)

    def __str__(self):
        return f"{self.graph} s=({', '.join(str(x) for x in self.profile)})"


# ---------------------------------------------------------------------------
# Marginal values
# ---------------------------------------------------------------------------


def marginal_link_value(game: GameSpec, outcome: Outcome, i: int, j: int):
    """u_i(G + ij, s) - u_i(G - ij, s); the same whether or not ij is present."""
    if i == j:
        raise InvalidPairError(f"marginal link value needs two distinct players, got {i} twice")
    g, s = outcome.graph, outcome.profile
    return game.payoff(g.add(i, j), s, i) - game.payoff(g.remove(i, j), s, i)


def link_value_matrix(game: GameSpec, outcome: Outcome) -> list[list]:
    """D[i][j] = marginal value of link ij to player i (diagonal is None).

    Separable games read the values straight from ``g``.
    """
    n, s = outcome.n, outcome.profile
    D: list[list] = [[None] * n for _ in range(n)]
    if game.separable is not None:
        g = game.separable.g
        for i in range(n):
            for j in range(n):
                if i != j:
                    D[i][j] = g(s[i], s[j])
    else:
        for i in range(n):
            for j in range(n):
                if i != j:
                    D[i][j] = marginal_link_value(game, outcome, i, j)
    return D


def desiring_set(game: GameSpec, outcome: Outcome, i: int) -> frozenset[int]:
    """Players with a weak incentive to link with ``i``."""
    return frozenset(
        j for j in range(outcome.n) if j != i and game.cmp(marginal_link_value(game, outcome, j, i)) >= 0
    )


def payoff_vector(game: GameSpec, outcome: Outcome) -> list:
    return [game.payoff(outcome.graph, outcome.profile, i) for i in range(outcome.n)]
