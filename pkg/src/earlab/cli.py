"""Command line entry point: ``earlab run|table|markov|compare``.

Exit codes: 0 on success, 1 on a configuration or usage error, 2 when an
internal invariant is violated.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from fractions import Fraction
from typing import Optional, Sequence

from . import markov
from .algorithms import AlgorithmConfig, run
from .errors import ConfigError, InvariantError
from .harness import (
    CellResult,
    compare_cells,
    emit_table,
    load_config,
    parse_algorithm,
    run_cell,
    run_grid,
    run_seed,
)
from .problems import parse_problem
from .rl import AgentConfig
from .stats import summarize

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for invariant violations here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="earlab", description="EA+RL objective-selection experiments on XdivK, OMd and LeadingOnes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run a single cell and print its summary row")
    p_run.add_argument("--problem", required=True, help="e.g. 'xdivk:n=40,k=2,p=end' or 'leadingones:n=11'")
    p_run.add_argument("--algo", required=True, help="rls, earl, mod-learning or mod-nolearning")
    p_run.add_argument("--state", choices=["ts", "ss"], default="ts", help="target-state or single-state agent")
    p_run.add_argument("--epsilon", type=float, default=0.0)
    p_run.add_argument("--alpha", type=float, default=0.5)
    p_run.add_argument("--gamma", type=float, default=0.5)
    p_run.add_argument("--runs", type=int, default=100)
    p_run.add_argument("--cap", type=int, default=10**6, help="evaluation budget per run")
    p_run.add_argument("--seed", type=int, default=0, help="base seed")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--trace", metavar="PATH", help="write a per-generation CSV trace of the first run")

    p_table = sub.add_parser("table", help="run a config grid and emit a results table")
    p_table.add_argument("--config", required=True)
    p_table.add_argument("--format", choices=["csv", "markdown"], default="csv")
    p_table.add_argument("--out", metavar="PATH", help="write here instead of stdout")
    p_table.add_argument("--workers", type=int, help="override [grid] workers")

    p_markov = sub.add_parser("markov", help="exact expected runtimes on XdivK")
    p_markov.add_argument("--n", type=int, required=True)
    p_markov.add_argument("--k", type=int, required=True)
    p_markov.add_argument("--start", choices=["zero", "binomial"], default="zero")
    p_markov.add_argument(
        "--chain", choices=["rls", "mod"], default="mod",
        help="chain whose per-state times are listed (default: modified, no learning)",
    )

    p_cmp = sub.add_parser("compare", help="Mann-Whitney comparison of two cells of a config grid")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--cell-a", required=True, help="problem/algorithm name from the config")
    p_cmp.add_argument("--cell-b", required=True)
    p_cmp.add_argument("--m", type=int, default=1, help="number of comparisons for Bonferroni")
    p_cmp.add_argument("--workers", type=int, help="override [grid] workers")
    return parser


def _agent_from_args(args) -> Optional[AgentConfig]:
    base = parse_algorithm(args.algo)
    if base.agent is None:
        return None
    try:
        return AgentConfig(alpha=args.alpha, gamma=args.gamma, epsilon=args.epsilon, state_mode=args.state)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_run(args, out) -> int:
    if args.runs < 1 or args.cap < 1 or args.workers < 1:
        raise ConfigError("--runs, --cap and --workers must be >= 1")
    problem = parse_problem(args.problem)
    algo = AlgorithmConfig(parse_algorithm(args.algo).variant, _agent_from_args(args), cap=args.cap)
    results = run_cell(problem, algo, args.runs, args.cap, args.seed, 0, args.workers)
    if args.trace:
        first = replace(algo, seed=run_seed(args.seed, 0, 0))
        with open(args.trace, "w", newline="", encoding="utf-8") as fh:
            traced = run(problem, first, trace=fh)
        if traced != results[0]:
            raise InvariantError("traced run disagrees with the compiled run for the same seed")
    cell = CellResult("cli", "cli", problem, algo, summarize(results))
    out.write(emit_table([cell], "csv"))
    return EXIT_OK


def _write(text: str, path: Optional[str], out):
    if path:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)


def _grid_from_args(args, retain=False):
    grid = load_config(args.config)
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        grid = replace(grid, parallelism=args.workers)
    if retain:
        grid = replace(grid, retain_samples=True)
    return grid


def cmd_table(args, out) -> int:
    grid = _grid_from_args(args)
    _write(emit_table(run_grid(grid), args.format), args.out, out)
    return EXIT_OK


def cmd_markov(args, out) -> int:
    try:
        times = markov.per_state_times_recurrence(args.chain, args.n, args.k)
        t_rls = markov.hitting_time_solve(markov.chain_rls(args.n, args.k), args.start)
        t_mod = markov.hitting_time_solve(markov.chain_modified_no_learning(args.n, args.k), args.start)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    ratio = t_mod / t_rls
    if ratio != Fraction(3, 2):
        raise InvariantError(f"T_mod / T_rls = {ratio}, expected 3/2")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["state", "per_state_expected", "cumulative"])
    for x, (z, c) in enumerate(zip(times.per_state, times.cumulative())):
        writer.writerow([x, repr(float(z)), repr(float(c))])
    out.write(
        f"# start={args.start} T_rls={float(t_rls)!r} T_mod={float(t_mod)!r} ratio={ratio} "
        f"(exact T_rls={t_rls}, T_mod={t_mod})\n"
    )
    return EXIT_OK


def cmd_compare(args, out) -> int:
    grid = _grid_from_args(args, retain=True)
    results = run_grid(grid, only=[args.cell_a, args.cell_b])
    cmp = compare_cells(results, args.cell_a, args.cell_b, args.m)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["cell_a", "cell_b", "u", "p_raw", "m", "p_corrected", "verdict"])
    writer.writerow([cmp.cell_a, cmp.cell_b, repr(cmp.u), repr(cmp.p_raw), cmp.m, repr(cmp.p_corrected), cmp.verdict])
    return EXIT_OK


COMMANDS = {"run": cmd_run, "table": cmd_table, "markov": cmd_markov, "compare": cmd_compare}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except ConfigError as exc:
        print(f"earlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"earlab: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
