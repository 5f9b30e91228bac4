"""Experiment grids: config parsing, seeded parallel runs, tables and comparisons.

Config files are INI-style with three sections; every key is checked::

    [grid]
    runs = 1000          # runs per cell
    cap = 1000000        # evaluation budget per run
    seed = 0             # base seed
    workers = 4          # worker threads
    retain_samples = no  # keep per-run results (needed by ``compare``)
    inf_threshold = 0.5  # censored fraction above which a cell reads "inf"

    [problems]
    lo11 = leadingones:n=11
    x40end = xdivk:n=40,k=2,p=end

    [algorithms]
    rls = rls
    ml_ss = mod-learning:state=ss,eps=0.1

Keys under ``[problems]`` and ``[algorithms]`` are free-form cell names; a
cell is addressed as ``<problem>/<algorithm>``.
"""
from __future__ import annotations

import configparser
import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .algorithms import AlgorithmConfig, RunResult, Variant, run_fast
from .errors import ConfigError
from .problems import ProblemSpec, parse_problem
from .rl import AgentConfig
from .stats import DEFAULT_INF_THRESHOLD, SampleSummary, bonferroni, mann_whitney_u, summarize_values

__all__ = [
    "ExperimentGrid",
    "CellResult",
    "Comparison",
    "TABLE_COLUMNS",
    "parse_algorithm",
    "load_config",
    "parse_config",
    "run_seed",
    "run_cell",
    "run_grid",
    "emit_table",
    "compare_cells",
]

GRID_KEYS = {"runs", "cap", "seed", "workers", "retain_samples", "inf_threshold"}
ALGO_KEYS = {"state", "eps", "epsilon", "alpha", "gamma"}

TABLE_COLUMNS = [
    "problem", "n", "d", "k", "p", "algorithm", "state_mode", "epsilon",
    "runs", "censored", "mean_evals", "std_err", "display",
]


@dataclass(frozen=True)
class ExperimentGrid:
    problems: tuple[tuple[str, ProblemSpec], ...]
    algorithms: tuple[tuple[str, AlgorithmConfig], ...]
    runs_per_cell: int = 1000
    cap: int = 10**6
    base_seed: int = 0
    parallelism: int = 1
    retain_samples: bool = False
    inf_threshold: float = DEFAULT_INF_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "problems", tuple(self.problems))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if self.runs_per_cell < 1:
            raise ConfigError(f"runs per cell must be >= 1, got {self.runs_per_cell}")
        if self.cap < 1:
            raise ConfigError(f"cap must be >= 1, got {self.cap}")
        if self.parallelism < 1:
            raise ConfigError(f"workers must be >= 1, got {self.parallelism}")
        if not 0.0 <= self.inf_threshold <= 1.0:
            raise ConfigError(f"inf_threshold must lie in [0, 1], got {self.inf_threshold}")
        for kind, names in (("problem", self.problems), ("algorithm", self.algorithms)):
            seen = [name for name, _ in names]
            dupes = {name for name in seen if seen.count(name) > 1}
            if dupes:
                raise ConfigError(f"duplicate {kind} names: {sorted(dupes)}")

    def cells(self) -> list[tuple[int, str, ProblemSpec, str, AlgorithmConfig]]:
        """``(cell_index, problem_name, problem, algorithm_name, algorithm)`` in row-major order."""
        out = []
        for i, (pname, problem) in enumerate(self.problems):
            for j, (aname, algo) in enumerate(self.algorithms):
                out.append((i * len(self.algorithms) + j, pname, problem, aname, algo))
        return out


@dataclass(frozen=True)
class CellResult:
    problem_name: str
    algorithm_name: str
    problem: ProblemSpec
    algorithm: AlgorithmConfig
    summary: SampleSummary
    samples: Optional[tuple[RunResult, ...]] = field(default=None, compare=False)

    @property
    def name(self) -> str:
        return f"{self.problem_name}/{self.algorithm_name}"


@dataclass(frozen=True)
class Comparison:
    cell_a: str
    cell_b: str
    u: float
    p_raw: float
    p_corrected: float
    m: int
    alpha: float = 0.05

    @property
    def distinguishable(self) -> bool:
        return self.p_corrected < self.alpha

    @property
    def verdict(self) -> str:
        if self.distinguishable:
            return f"distinguishable, p < {self.alpha:g}"
        return "indistinguishable"


def parse_algorithm(descriptor: str) -> AlgorithmConfig:
    """Parse ``variant[:key=value,...]``, e.g. ``earl:state=ss,eps=0.1``.

    Variants are ``rls``, ``earl``, ``mod-learning`` and ``mod-nolearning``;
    keys are ``state`` (ts/ss), ``eps``, ``alpha`` and ``gamma``.
    """
    name, _, rest = descriptor.strip().partition(":")
    try:
        variant = Variant(name.strip().lower())
    except ValueError:
        choices = ", ".join(v.value for v in Variant)
        raise ConfigError(f"unknown algorithm {name!r} in {descriptor!r} (choose from {choices})") from None
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"expected key=value, got {item!r} in {descriptor!r}")
        params[key.strip().lower()] = value.strip()
    unknown = set(params) - ALGO_KEYS
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in {descriptor!r}")
    if variant is Variant.RLS:
        if params:
            raise ConfigError(f"rls takes no parameters: {descriptor!r}")
        return AlgorithmConfig(variant)
    if "eps" in params and "epsilon" in params:
        raise ConfigError(f"give eps or epsilon, not both: {descriptor!r}")
    try:
        agent = AgentConfig(
            alpha=float(params.get("alpha", 0.5)),
            gamma=float(params.get("gamma", 0.5)),
            epsilon=float(params.get("eps", params.get("epsilon", 0.0))),
            state_mode=params.get("state", "ts"),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid algorithm {descriptor!r}: {exc}") from None
    return AlgorithmConfig(variant, agent)


def _parse_int(section, key, raw):
    try:
        return int(float(raw)) if "e" in raw.lower() else int(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} must be an integer, got {raw!r}") from None


def parse_config(text: str) -> ExperimentGrid:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    unknown = set(parser.sections()) - {"grid", "problems", "algorithms"}
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    for section in ("problems", "algorithms"):
        if not parser.has_section(section) or not parser.items(section):
            raise ConfigError(f"section [{section}] is missing or empty")

    grid = dict(parser.items("grid")) if parser.has_section("grid") else {}
    bad = set(grid) - GRID_KEYS
    if bad:
        raise ConfigError(f"unknown keys in [grid]: {sorted(bad)}")
    retain = grid.get("retain_samples", "no").lower()
    if retain not in configparser.ConfigParser.BOOLEAN_STATES:
        raise ConfigError(f"[grid] retain_samples must be a boolean, got {retain!r}")
    try:
        inf_threshold = float(grid.get("inf_threshold", DEFAULT_INF_THRESHOLD))
    except ValueError:
        raise ConfigError(f"[grid] inf_threshold must be a number, got {grid['inf_threshold']!r}") from None

    problems = []
    for name, desc in parser.items("problems"):
        try:
            problems.append((name, parse_problem(desc)))
        except ConfigError as exc:
            raise ConfigError(f"problem {name!r}: {exc}") from None
    algorithms = []
    for name, desc in parser.items("algorithms"):
        try:
            algorithms.append((name, parse_algorithm(desc)))
        except ConfigError as exc:
            raise ConfigError(f"algorithm {name!r}: {exc}") from None

    return ExperimentGrid(
        problems=tuple(problems),
        algorithms=tuple(algorithms),
        runs_per_cell=_parse_int("grid", "runs", grid.get("runs", "1000")),
        cap=_parse_int("grid", "cap", grid.get("cap", "1000000")),
        base_seed=_parse_int("grid", "seed", grid.get("seed", "0")),
        parallelism=_parse_int("grid", "workers", grid.get("workers", "1")),
        retain_samples=configparser.ConfigParser.BOOLEAN_STATES[retain],
        inf_threshold=inf_threshold,
    )


def load_config(path: Union[str, os.PathLike]) -> ExperimentGrid:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def run_seed(base_seed: int, cell_index: int, run_index: int) -> int:
    """Per-run seed: the first 64-bit word of ``SeedSequence([base, cell, run])``.

    SeedSequence hashes its entropy words, so nearby indices give unrelated
    seeds, and the value depends on nothing but the three integers.
    """
    words = np.random.SeedSequence([base_seed, cell_index, run_index]).generate_state(1, np.uint64)
    return int(words[0])


def run_cell(
    problem: ProblemSpec,
    algorithm: AlgorithmConfig,
    runs: int,
    cap: int,
    base_seed: int = 0,
    cell_index: int = 0,
    workers: int = 1,
) -> list[RunResult]:
    """Run one cell; the results are ordered by run index whatever ``workers`` is."""
    variant, agent = algorithm.variant, algorithm.agent
    seeds = [run_seed(base_seed, cell_index, r) for r in range(runs)]

    def one(seed):
        return run_fast(problem, variant, agent, cap, seed)

    if workers <= 1 or runs == 1:
        return [one(seed) for seed in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, seeds, chunksize=max(1, runs // (4 * workers))))


def run_grid(grid: ExperimentGrid, only: Optional[Sequence[str]] = None) -> list[CellResult]:
    """Run every cell, or just the cells named in ``only`` (``problem/algorithm``).

    Cell indices, and so seeds, are those of the full grid either way.
    """
    cells = grid.cells()
    if only is not None:
        names = {f"{c[1]}/{c[3]}" for c in cells}
        missing = [name for name in only if name not in names]
        if missing:
            raise ConfigError(f"no cells named {missing} (available: {', '.join(sorted(names))})")
        cells = [c for c in cells if f"{c[1]}/{c[3]}" in set(only)]
    out = []
    for idx, pname, problem, aname, algo in cells:
        results = run_cell(problem, algo, grid.runs_per_cell, grid.cap, grid.base_seed, idx, grid.parallelism)
        summary = summarize_values(
            [r.evaluations for r in results], [not r.reached_optimum for r in results], grid.inf_threshold
        )
        samples = tuple(results) if grid.retain_samples else None
        out.append(CellResult(pname, aname, problem, replace(algo, cap=grid.cap), summary, samples))
    return out


def _fmt_float(value: float) -> str:
    return repr(float(value))


def _csv_row(cell: CellResult) -> list:
    p, a, s = cell.problem, cell.algorithm, cell.summary
    agent = a.agent
    return [
        p.kind.value, p.n, p.d, p.k, p.p,
        a.variant.value,
        "" if agent is None else agent.state_mode.value,
        "" if agent is None else _fmt_float(agent.epsilon),
        s.count, s.censored, _fmt_float(s.mean), _fmt_float(s.std_err), s.display,
    ]


def _markdown(results: Sequence[CellResult]) -> str:
    rows: dict[str, dict[str, str]] = {}
    columns: list[str] = []
    for cell in results:
        label = cell.algorithm.label
        if label not in columns:
            columns.append(label)
        rows.setdefault(cell.problem.descriptor, {})[label] = cell.summary.display
    header = ["problem"] + columns
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for problem, cells in rows.items():
        lines.append("| " + " | ".join([problem] + [cells.get(c, "") for c in columns]) + " |")
    return "\n".join(lines) + "\n"


def emit_table(results: Sequence[CellResult], fmt: str = "csv") -> str:
    """Render results as long-form CSV (one row per cell) or a wide markdown table.

    The markdown table has one row per problem instance and one column per
    algorithm configuration.
    """
    if fmt == "markdown":
        return _markdown(results)
    if fmt != "csv":
        raise ValueError(f"unknown table format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for cell in results:
        writer.writerow(_csv_row(cell))
    return buf.getvalue()


def _find(results: Sequence[CellResult], cell: Union[str, CellResult]) -> CellResult:
    if isinstance(cell, CellResult):
        return cell
    for r in results:
        if r.name == cell:
            return r
    names = ", ".join(r.name for r in results)
    raise ConfigError(f"no cell named {cell!r} (available: {names})")


def compare_cells(
    results: Sequence[CellResult], cell_a: Union[str, CellResult], cell_b: Union[str, CellResult], m: int = 1
) -> Comparison:
    """Mann-Whitney U on the evaluation counts of two cells, Bonferroni-corrected by ``m``.

    Censored runs enter with their capped count, which ranks them at the top.
    """
    a, b = _find(results, cell_a), _find(results, cell_b)
    for cell in (a, b):
        if cell.samples is None:
            raise ConfigError(f"cell {cell.name!r} has no raw samples; set retain_samples = yes in [grid]")
    if m < 1:
        raise ConfigError(f"m must be >= 1, got {m}")
    res = mann_whitney_u([s.evaluations for s in a.samples], [s.evaluations for s in b.samples])
    return Comparison(a.name, b.name, res.u, res.p_value, bonferroni(res.p_value, m), m)
