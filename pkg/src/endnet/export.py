"""Graph and outcome export: DOT, edge lists and per-player CSV rows."""

from __future__ import annotations

import csv
import io
import math
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .core import GameSpec, Graph, Outcome, ValidationError, payoff_vector

CSV_FIELDS = ("id", "b", "degree", "action", "payoff")


def fmt_number(x) -> str:
    """Fractions as mixed numbers ("5 1/2", "-1 1/3"), floats with 10 significant digits."""
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        whole = int(abs(x.numerator) // x.denominator)
        rest = abs(x) - whole
        sgn = "-" if x < 0 else ""
        return f"{sgn}{whole} {rest}" if whole else f"{sgn}{rest}"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.10g}"
    try:
        return f"{float(x):.10g}"
    except (TypeError, ValueError):
        return str(x)


def fmt_vector(xs: Sequence) -> str:
    return "(" + ", ".join(fmt_number(x) for x in xs) + ")"


def private_values(game: GameSpec | None) -> list | None:
    """Per-player private parameters (abilities b_i) when the family has them."""
    model = getattr(game, "model", None)
    if model is None:
        return None
    b = getattr(model, "b", None)
    if b is None:
        types = getattr(model, "types", None)
        return list(types) if types is not None else None
    if isinstance(b, (tuple, list)):
        return list(b)
    return [b] * game.n


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------


def to_dot(outcome: Outcome, b: Sequence | None = None, name: str = "outcome") -> str:
    """Undirected DOT graph; node i is labelled "i: b=..., s=..." (1-indexed)."""
    lines = [f"graph {_dot_id(name)} {{", "  node [shape=circle];"]
    for i in range(outcome.n):
        parts = [f"{i + 1}:"]
        if b is not None:
            parts.append(f"b={fmt_number(b[i])},")
        parts.append(f"s={fmt_number(outcome.profile[i])}")
        lines.append(f'  {i + 1} [label="{" ".join(parts)}"];')
    for i, j in outcome.graph.edges():
        lines.append(f"  {i + 1} -- {j + 1};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_id(name: str) -> str:
    safe = "".join(c if c.isalnum() or c == "_" else "_" for c in name)
    return safe if safe and not safe[0].isdigit() else f"g_{safe}"


# ---------------------------------------------------------------------------
# Edge lists
# ---------------------------------------------------------------------------


def to_edge_list(graph: Graph) -> str:
    """Header "# n=<players>" followed by one "i j" pair per line, 1-indexed."""
    lines = [f"# n={graph.n}"]
    lines += [f"{i + 1} {j + 1}" for i, j in graph.edges()]
    return "\n".join(lines) + "\n"


def from_edge_list(text: str, n: int | None = None) -> Graph:
    """Inverse of ``to_edge_list``. Without a header ``n`` must be given."""
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("n="):
                try:
                    header_n = int(body[2:])
                except ValueError:
                    raise ValidationError(f"line {lineno}: bad player count {body!r}") from None
                if n is not None and n != header_n:
                    raise ValidationError(f"line {lineno}: header says n={header_n}, caller says {n}")
                n = header_n
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ValidationError(f"line {lineno}: expected two player ids, got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValidationError(f"line {lineno}: player ids must be integers") from None
        edges.append((i - 1, j - 1))
    if n is None:
        raise ValidationError("edge list has no '# n=' header and no player count was given")
    for i, j in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise ValidationError(f"edge ({i + 1}, {j + 1}) outside players 1..{n}")
    return Graph.from_edges(n, edges)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def player_rows(game: GameSpec, outcome: Outcome) -> list[dict]:
    b = private_values(game)
    pay = payoff_vector(game, outcome)
    d = outcome.graph.degrees()
    return [
        {
            "id": i + 1,
            "b": "" if b is None else fmt_number(b[i]),
            "degree": d[i],
            "action": fmt_number(outcome.profile[i]),
            "payoff": fmt_number(pay[i]),
        }
        for i in range(outcome.n)
    ]


def to_csv(game: GameSpec, outcomes: Sequence[Outcome] | Outcome) -> str:
    """Per-player rows; with several outcomes a leading ``outcome`` column numbers them from 1."""
    single = isinstance(outcomes, Outcome)
    items = [outcomes] if single else list(outcomes)
    fields = CSV_FIELDS if single else ("outcome",) + CSV_FIELDS
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for k, o in enumerate(items, 1):
        for row in player_rows(game, o):
            if not single:
                row = {"outcome": k, **row}
            w.writerow(row)
    return buf.getvalue()


def export_graph(outcome: Outcome, fmt: str, path=None, game: GameSpec | None = None) -> str:
    """Render ``outcome`` as dot, edge-list or csv; writes to ``path`` when given."""
    if fmt == "dot":
        text = to_dot(outcome, private_values(game))
    elif fmt in ("edge-list", "edges"):
        text = to_edge_list(outcome.graph)
    elif fmt == "csv":
        if game is None:
            raise ValidationError("csv export needs the game for payoffs")
        text = to_csv(game, outcome)
    else:
        raise ValidationError(f"unknown export format {fmt!r}; use dot, edge-list or csv")
    if path is not None:
        Path(path).write_text(text)
    return text
