"""Command-line front end.

    endnet <solve|enumerate|classify|dynamics|thresholds> --config run.toml [--out DIR] [--jobs N] [--seed S]

Writes report.txt, outcomes.csv and graph-k.dot (one per outcome) to the
output directory, plus trace.log for revision dynamics. Exit status is 0 on
success, 2 on invalid input and 3 when a size guard rejects the run.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analytics import complete_graph_conditions, empty_graph_stable, status_cstar, status_max_cliques
from .config import COMMANDS, RunConfig, load_config
from .core import (GameSpec, Graph, Outcome, PreconditionError, SizeGuardError,
                   UnsupportedGameError, ValidationError, payoff_vector)
from .export import fmt_number, fmt_vector, to_csv, to_dot

log = logging.getLogger("endnet")

EXIT_OK, EXIT_INVALID, EXIT_SIZE = 0, 2, 3
MAX_DOT_FILES = 200


class Report:
    """Plain-text report assembled line by line."""

    def __init__(self):
        self.lines: list[str] = []

    def add(self, text: str = ""):
        self.lines.append(text)

    def section(self, title: str):
        if self.lines:
            self.add()
        self.add(title)
        self.add("-" * len(title))

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def edge_text(graph: Graph) -> str:
    if graph.is_empty():
        return "empty graph"
    if graph.is_complete():
        return "complete graph"
    return "{" + ", ".join(f"{i + 1}-{j + 1}" for i, j in graph.edges()) + "}"


def describe_outcome(game: GameSpec, o: Outcome, k: int, rep: Report):
    from .structure import describe_structure

    rep.add(f"outcome {k}: {edge_text(o.graph)}")
    if not (o.graph.is_empty() or o.graph.is_complete()):
        rep.add(f"  edges: {edge_text(o.graph)}")
    rep.add(f"  s = {fmt_vector(o.profile)}")
    rep.add(f"  payoffs = {fmt_vector(payoff_vector(game, o))}")
    rep.add(f"  degrees = {tuple(o.graph.degrees())}")
    try:
        rep.add(f"  structure: {describe_structure(o.graph, o.profile)}")
    except SizeGuardError:
        rep.add("  structure: (order search skipped, too many players)")


# ---------------------------------------------------------------------------
# Commands; each returns the outcomes to export
# ---------------------------------------------------------------------------


def cmd_solve(cfg: RunConfig, game: GameSpec, rep: Report, jobs: int, seed) -> list[Outcome]:
    from .analytics import natural_clique_outcome
    from .equilibrium import lq_nash_on_graph, nash_equilibria
    from .stability import CHECKERS

    graph = cfg.graph(game.n)
    rep.section("Equilibrium actions")
    if cfg.family == "group-match" and graph is None:
        outs = [natural_clique_outcome(game)]
        rep.add("graph: natural clique partition")
    else:
        graph = graph if graph is not None else Graph.complete(game.n)
        rep.add(f"graph: {edge_text(graph)}")
        if cfg.family == "lq":
            outs = [Outcome(graph, lq_nash_on_graph(game, graph))]
        else:
            outs = [Outcome(graph, s) for s in nash_equilibria(game, graph)]
    if not outs:
        rep.add("no Nash equilibrium on this graph")
    check = CHECKERS[cfg.concept]
    for k, o in enumerate(outs, 1):
        describe_outcome(game, o, k, rep)
        r = check(game, o)
        rep.add(f"  {cfg.concept} stability: {r.verdict}")
        for w in r.witnesses[:5]:
            rep.add(f"    witness: {w}")
    return outs


def cmd_enumerate(cfg: RunConfig, game: GameSpec, rep: Report, jobs: int, seed) -> list[Outcome]:
    from .stability import enumerate_stable

    t0 = time.perf_counter()
    outs = enumerate_stable(game, cfg.concept, jobs=jobs)
    rep.section(f"Stable outcomes ({cfg.concept})")
    rep.add(f"count: {len(outs)}  (search took {time.perf_counter() - t0:.2f} s)")
    for k, o in enumerate(outs, 1):
        describe_outcome(game, o, k, rep)
    return outs


def cmd_classify(cfg: RunConfig, game: GameSpec, rep: Report, jobs: int, seed) -> list[Outcome]:
    from .stability import check_strict_pairwise, enumerate_stable
    from .structure import classify_game, verify_theorem1

    rep.section("Single-crossing taxonomy")
    cell = None
    if game.separable is not None and game.grid is not None:
        cell = classify_game(game)
        rep.add(f"cell: {cell}")
    else:
        rep.add("cell: evaluated per outcome on the actions played")
    outs = enumerate_stable(game, cfg.concept, jobs=jobs)
    rep.section(f"Structure of stable outcomes ({cfg.concept})")
    rep.add(f"count: {len(outs)}")
    for k, o in enumerate(outs, 1):
        describe_outcome(game, o, k, rep)
        if game.separable is None:
            continue
        try:
            here = cell if cell is not None else classify_game(game, o.profile)
        except ValueError:
            here = None
        if here is not None and cell is None:
            rep.add(f"  cell at these actions: {here}")
        if not check_strict_pairwise(game, o, first=True).stable:
            rep.add("  not strictly pairwise stable; structural predictions not checked")
            continue
        try:
            v = verify_theorem1(game, o, cell=here, check_stable=False)
        except PreconditionError as exc:
            rep.add(f"  structural predictions not applicable: {exc.args[0]}")
            continue
        rep.add(f"  orders: {v.relation}")
        rep.add("  predictions: " + ("all hold" if v.ok else "; ".join(f"{n} fails at {d}" for n, d in v.failures)))
    return outs


def cmd_dynamics(cfg: RunConfig, game: GameSpec, rep: Report, jobs: int, seed, out_dir: Path | None = None):
    from .dynamics import simulate_revision, state_hash, uncoordinated_search
    from .families import make_lq_peer_game

    process = cfg.process or ("uncoordinated" if cfg.family == "lq" else "revision")
    if process == "uncoordinated":
        if cfg.family != "lq":
            raise UnsupportedGameError("uncoordinated search needs a unique equilibrium per graph (lq family)")
        stable, paths = uncoordinated_search(game)
        rep.section("Uncoordinated link formation from the empty graph")
        rep.add(f"stable outcomes reached: {len(stable)}")
        for k, o in enumerate(stable, 1):
            describe_outcome(game, o, k, rep)
            path = paths[o.graph.mask]
            steps = ", ".join(f"{i + 1}-{j + 1}" for (i, j) in (st.link for st in path.steps))
            rep.add(f"  links added in order: {steps or 'none'}")
        return stable
    if seed is None:
        raise ValidationError("seed: revision dynamics need an explicit seed (config or --seed)")
    if cfg.family == "lq" and game.exact:
        # continuous actions: exact arithmetic would never settle
        game = make_lq_peer_game(cfg.params["b"], cfg.params["alpha"], exact=False, tol=cfg.tol)
        rep.add("note: revision dynamics on continuous actions run in floating point")
    trace = simulate_revision(game, rate=cfg.rate, horizon=cfg.horizon, seed=seed, discount=cfg.discount)
    rep.section("Revision dynamics")
    rep.add(f"events: {len(trace.events)}  horizon: {cfg.horizon}  rate: {cfg.rate}")
    if trace.absorbed is not None:
        rep.add(f"absorbed at t = {trace.events[-1].time if trace.events else 0.0:.4f} "
                f"in state {state_hash(trace.absorbed)}")
        describe_outcome(game, trace.absorbed, 1, rep)
    else:
        rep.add("not absorbed within the horizon")
        rep.add(f"last state: {trace.final}")
    if out_dir is not None:
        trace.write(out_dir / "trace.log")
    return [trace.absorbed] if trace.absorbed is not None else []


def cmd_thresholds(cfg: RunConfig, game: GameSpec, rep: Report, jobs: int, seed) -> list[Outcome]:
    from .equilibrium import status_max_equilibrium

    rep.section("Threshold conditions")
    p = cfg.params
    if cfg.family == "lq":
        b = sorted(p["b"])
        if list(p["b"]) != b:
            rep.add("note: incentives sorted ascending for the threshold tests")
        e = empty_graph_stable(b, p["alpha"])
        rep.add(str(e))
        if e.notes.get("boundary"):
            rep.add(f"  at the boundary; exact verdict for the empty graph: {e.notes['exact_verdict']}")
        for r in complete_graph_conditions(b, p["alpha"]):
            rep.add(str(r))
        return []
    if cfg.family == "status":
        n, b, delta = p["n"], p["b"], p["delta"]
        c = status_cstar(delta)
        rep.add(f"largest clique size with delta in [1/sqrt(c), 1/sqrt(c-1)): c* = {c}")
        if delta >= 1:
            rep.add(f"most cliques in a stable partition: {status_max_cliques(n, delta)}")
        rep.add("clique size k -> maximal clique action b + (k-1) delta:")
        for k in range(1, n + 1):
            s = status_max_equilibrium([k], b, delta)
            rep.add(f"  k={k}: {fmt_number(s[0])}")
        return []
    raise UnsupportedGameError(f"thresholds are available for the lq and status families, not {cfg.family}")


HANDLERS = {
    "solve": cmd_solve,
    "enumerate": cmd_enumerate,
    "classify": cmd_classify,
    "thresholds": cmd_thresholds,
}


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def run(cfg: RunConfig, out_dir=None, jobs: int | None = None, seed: int | None = None) -> tuple[str, int]:
    """Execute a validated config; returns (report text, exit code) and writes outputs."""
    seed = seed if seed is not None else cfg.seed
    jobs = jobs or cfg.jobs
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    rep = Report()
    rep.add(f"endnet {__version__}")
    rep.add(f"command: {cfg.command}")
    rep.add(f"config: {cfg.source}  sha256: {cfg.digest or 'n/a'}")
    rep.add(f"seed: {seed if seed is not None else 'none'}")
    rep.add(f"mode: {cfg.mode}")
    code = EXIT_OK
    outs: list[Outcome] = []
    try:
        game = cfg.build_game()
        rep.add(f"game: {game.name}")
        if cfg.command == "dynamics":
            outs = cmd_dynamics(cfg, game, rep, jobs, seed, out)
        else:
            outs = HANDLERS[cfg.command](cfg, game, rep, jobs, seed)
    except SizeGuardError as exc:
        rep.section("Rejected")
        rep.add(f"size guard: {exc}")
        code = EXIT_SIZE
    except (ValidationError, UnsupportedGameError, PreconditionError) as exc:
        rep.section("Rejected")
        rep.add(f"invalid input: {exc}")
        code = EXIT_INVALID
    text = rep.text()
    if out is not None:
        (out / "report.txt").write_text(text)
        if code == EXIT_OK:
            (out / "outcomes.csv").write_text(to_csv(game, outs) if outs else "outcome,id,b,degree,action,payoff\n")
            for k, o in enumerate(outs[:MAX_DOT_FILES], 1):
                (out / f"graph-{k}.dot").write_text(to_dot(o, _b_values(game), name=f"outcome_{k}"))
    return text, code


def _b_values(game: GameSpec):
    from .export import private_values

    return private_values(game)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="endnet", description="Network games with endogenous links.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="TOML run config")
    ap.add_argument("--out", default=None, help="output directory (default: out/<config name>)")
    ap.add_argument("--jobs", type=int, default=None, help="worker processes for enumeration")
    ap.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    ap.add_argument("--quiet", action="store_true", help="do not echo the report")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs is not None and args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = load_config(args.config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if cfg.command != args.command:
        log.info("command line overrides config command %s -> %s", cfg.command, args.command)
        cfg = replace(cfg, command=args.command)
    out = args.out if args.out is not None else Path("out") / Path(args.config).stem
    text, code = run(cfg, out, args.jobs, args.seed)
    if not args.quiet:
        sys.stdout.write(text)
    if code != EXIT_OK:
        print(f"error: run rejected (exit {code})", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
