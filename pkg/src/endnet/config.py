"""Run configuration: one TOML file describes one game and one command.

Example::

    family = "lq"
    command = "enumerate"
    b = [4, 4, 6, 6, 9]
    alpha = "1"          # numbers or "p/q" strings
    concept = "pairwise"
    mode = "exact"

Family parameters:

    lq           b (list), alpha
    status       n, b, delta, optional step
    nonexistence (none)
    table        grid (list), v (one list per player), g (square table, rows = own action)
    group-match  types (list), alpha, optional interval = [lo, hi]

Common options: command, concept (pairwise | strict | pns), mode
(exact | tolerance), tol, seed, horizon, rate, discount, process
(uncoordinated | revision), edges (1-indexed pairs for ``solve``), jobs.
"""

from __future__ import annotations

import hashlib
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import DEFAULT_TOL, GameSpec, Graph, ValidationError

FAMILIES = ("lq", "status", "nonexistence", "table", "group-match")
COMMANDS = ("solve", "enumerate", "classify", "dynamics", "thresholds")
CONCEPTS = ("pairwise", "strict", "pns")
PROCESSES = ("uncoordinated", "revision")

REQUIRED = {
    "lq": ("b", "alpha"),
    "status": ("n", "b", "delta"),
    "nonexistence": (),
    "table": ("grid", "v", "g"),
    "group-match": ("types",),
}
OPTIONAL = {
    "lq": (),
    "status": ("step",),
    "nonexistence": (),
    "table": (),
    "group-match": ("alpha", "interval"),
}
COMMON = ("family", "command", "concept", "mode", "tol", "seed", "horizon", "rate",
          "discount", "process", "edges", "jobs", "name")


class ConfigParseError(ValidationError):
    """The file is not valid TOML or lacks a required field."""


@dataclass
class RunConfig:
    family: str
    command: str
    params: dict
    concept: str = "pairwise"
    mode: str = "exact"
    tol: float = DEFAULT_TOL
    seed: int | None = None
    horizon: int = 10_000
    rate: float = 1.0
    discount: float = 0.9
    process: str | None = None
    edges: list | None = None
    jobs: int = 1
    name: str = ""
    source: str = ""
    digest: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def build_game(self) -> GameSpec:
        return build_game(self)

    def graph(self, n: int) -> Graph | None:
        if self.edges is None:
            return None
        return Graph.from_edges(n, [(i - 1, j - 1) for i, j in self.edges])


def parse_number(value, field_name: str, exact: bool = True):
    """int, float or "p/q" string to a Fraction (exact) or float."""
    if isinstance(value, bool):
        raise ValidationError(f"{field_name}: expected a number, got a boolean")
    if isinstance(value, int):
        return Fraction(value) if exact else float(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"{field_name}: must be finite")
        return Fraction(value).limit_denominator(10**12) if exact else value
    if isinstance(value, str):
        try:
            x = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"{field_name}: cannot read {value!r} as a number") from None
        return x if exact else float(x)
    raise ValidationError(f"{field_name}: expected a number, got {type(value).__name__}")


def _numbers(value, field_name: str, exact: bool) -> list:
    if not isinstance(value, list) or not value:
        raise ValidationError(f"{field_name}: expected a non-empty array")
    return [parse_number(x, f"{field_name}[{k}]", exact) for k, x in enumerate(value)]


def _choice(raw: dict, key: str, options, default):
    val = raw.get(key, default)
    if val is not None and val not in options:
        raise ValidationError(f"{key}: {val!r} is not one of {', '.join(options)}")
    return val


def _int(raw: dict, key: str, default, lo: int = 0):
    val = raw.get(key, default)
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, int):
        raise ValidationError(f"{key}: expected an integer")
    if val < lo:
        raise ValidationError(f"{key}: must be >= {lo}")
    return val


def config_from_dict(raw: dict, source: str = "<dict>", digest: str = "") -> RunConfig:
    if "family" not in raw:
        raise ConfigParseError(f"{source}: missing field 'family'")
    family = raw["family"]
    if family not in FAMILIES:
        raise ValidationError(f"family: {family!r} is not one of {', '.join(FAMILIES)}")
    if "command" not in raw:
        raise ConfigParseError(f"{source}: missing field 'command'")
    command = _choice(raw, "command", COMMANDS, None)
    missing = [k for k in REQUIRED[family] if k not in raw]
    if missing:
        raise ConfigParseError(f"{source}: missing field '{missing[0]}' for family {family}")
    allowed = set(COMMON) | set(REQUIRED[family]) | set(OPTIONAL[family])
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ValidationError(f"{unknown[0]}: unknown field for family {family}")

    mode = _choice(raw, "mode", ("exact", "tolerance"), "exact")
    exact = mode == "exact"
    params = _family_params(family, raw, exact)

    tol = raw.get("tol", DEFAULT_TOL)
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or tol < 0:
        raise ValidationError("tol: must be a non-negative number")
    edges = raw.get("edges")
    if edges is not None:
        if not isinstance(edges, list) or any(
            not isinstance(e, list) or len(e) != 2 or not all(isinstance(x, int) and not isinstance(x, bool) for x in e)
            for e in edges
        ):
            raise ValidationError("edges: expected an array of [i, j] integer pairs")
    rate = raw.get("rate", 1.0)
    discount = raw.get("discount", 0.9)
    if not isinstance(rate, (int, float)) or rate <= 0:
        raise ValidationError("rate: must be positive")
    if not isinstance(discount, (int, float)) or not 0 <= discount < 1:
        raise ValidationError("discount: must lie in [0, 1)")
    return RunConfig(
        family=family,
        command=command,
        params=params,
        concept=_choice(raw, "concept", CONCEPTS, "pairwise"),
        mode=mode,
        tol=float(tol),
        seed=_int(raw, "seed", None),
        horizon=_int(raw, "horizon", 10_000, lo=1),
        rate=float(rate),
        discount=float(discount),
        process=_choice(raw, "process", PROCESSES, None),
        edges=edges,
        jobs=_int(raw, "jobs", 1, lo=1),
        name=str(raw.get("name", "")),
        source=source,
        digest=digest,
    )


def _family_params(family: str, raw: dict, exact: bool) -> dict:
    if family == "lq":
        b = _numbers(raw["b"], "b", exact)
        alpha = parse_number(raw["alpha"], "alpha", exact)
        if not 0 <= alpha <= 1:
            raise ValidationError(f"alpha outside [0,1]: {raw['alpha']}")
        if len(b) < 2:
            raise ValidationError("b: need at least two players")
        if any(x <= 0 for x in b):
            raise ValidationError("b: entries must be positive")
        return {"b": b, "alpha": alpha}
    if family == "status":
        n = _int(raw, "n", None, lo=2)
        b = parse_number(raw["b"], "b", True)
        delta = parse_number(raw["delta"], "delta", True)
        if b <= 0:
            raise ValidationError("b: must be positive")
        if delta <= 0:
            raise ValidationError("delta: must be positive")
        p = {"n": n, "b": b, "delta": delta}
        if "step" in raw:
            step = parse_number(raw["step"], "step", True)
            if step <= 0:
                raise ValidationError("step: must be positive")
            p["step"] = step
        return p
    if family == "nonexistence":
        return {}
    if family == "table":
        grid = _numbers(raw["grid"], "grid", exact)
        if any(a >= c for a, c in zip(grid, grid[1:])):
            raise ValidationError("grid: must be strictly increasing")
        m = len(grid)
        v = raw["v"]
        if not isinstance(v, list) or len(v) < 2:
            raise ValidationError("v: need one row per player, at least two players")
        v = [_numbers(row, f"v[{i}]", exact) for i, row in enumerate(v)]
        if any(len(row) != m for row in v):
            raise ValidationError(f"v: every row needs {m} entries, one per grid point")
        g = raw["g"]
        if not isinstance(g, list) or len(g) != m:
            raise ValidationError(f"g: must be a {m}x{m} table")
        g = [_numbers(row, f"g[{a}]", exact) for a, row in enumerate(g)]
        if any(len(row) != m for row in g):
            raise ValidationError(f"g: must be a {m}x{m} table")
        return {"grid": grid, "v": v, "g": g}
    if family == "group-match":
        types = [float(parse_number(x, f"types[{k}]", False)) for k, x in enumerate(raw["types"])] \
            if isinstance(raw["types"], list) else None
        if not types or len(types) < 2:
            raise ValidationError("types: need at least two players")
        alpha = float(parse_number(raw.get("alpha", 1), "alpha", False))
        if not 0 <= alpha <= 1:
            raise ValidationError(f"alpha outside [0,1]: {raw.get('alpha')}")
        interval = raw.get("interval", [0.0, 10.0])
        if not isinstance(interval, list) or len(interval) != 2:
            raise ValidationError("interval: expected [lo, hi]")
        lo, hi = (float(parse_number(x, "interval", False)) for x in interval)
        if not lo < hi:
            raise ValidationError("interval: need lo < hi")
        if any(not lo <= t <= hi for t in types):
            raise ValidationError("types: every type must lie in the action interval")
        return {"types": types, "alpha": alpha, "interval": (lo, hi)}
    raise ValidationError(f"family: {family!r}")


def load_config(path) -> RunConfig:
    """Read and validate a TOML run config; errors name the offending field."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ConfigParseError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        raw = tomllib.loads(data.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        where = f" line {line}" if line is not None and "line" not in str(exc) else ""
        raise ConfigParseError(f"{path}:{where} {exc}") from None
    except UnicodeDecodeError as exc:
        raise ConfigParseError(f"{path}: not UTF-8 text ({exc.reason})") from None
    digest = hashlib.sha256(data).hexdigest()[:12]
    return config_from_dict(raw, str(path), digest)


def build_game(cfg: RunConfig) -> GameSpec:
    from . import families

    p = cfg.params
    if cfg.family == "lq":
        return families.make_lq_peer_game(p["b"], p["alpha"], exact=cfg.exact, tol=cfg.tol)
    if cfg.family == "status":
        return families.make_status_game(p["n"], p["b"], p["delta"], p.get("step"))
    if cfg.family == "nonexistence":
        return families.make_nonexistence_example()
    if cfg.family == "table":
        return families.make_table_game(p["grid"], p["v"], p["g"], tol=0 if cfg.exact else cfg.tol)
    if cfg.family == "group-match":
        return families.quadratic_group_match(p["types"], p["alpha"], p["interval"])
    raise ValidationError(f"family: {cfg.family!r}")
