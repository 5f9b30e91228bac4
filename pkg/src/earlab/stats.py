"""Run aggregation with censoring, Mann-Whitney U and Bonferroni correction."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DEFAULT_INF_THRESHOLD",
    "SampleSummary",
    "summarize",
    "summarize_values",
    "format_mean",
    "MannWhitneyResult",
    "midranks",
    "mann_whitney_u",
    "mann_whitney_exact",
    "bonferroni",
]

# a cell reads "inf" once more than this fraction of its runs hit the cap
DEFAULT_INF_THRESHOLD = 0.5


@dataclass(frozen=True)
class SampleSummary:
    count: int
    censored: int
    mean: float
    std_dev: float
    std_err: float
    display: str

    def __post_init__(self):
        if not 0 <= self.censored <= self.count:
            raise ValueError(f"censored={self.censored} outside [0, {self.count}]")

    @property
    def finished(self) -> int:
        return self.count - self.censored

    @property
    def mean_defined(self) -> bool:
        return self.finished > 0

    @property
    def std_defined(self) -> bool:
        return self.finished > 1


def format_mean(value: float) -> str:
    """Three significant digits, the way runtime tables usually print them."""
    if not math.isfinite(value):
        return "inf"
    return f"{value:.3g}"


def summarize_values(
    evaluations: Sequence[float], censored_mask: Sequence[bool], inf_threshold: float = DEFAULT_INF_THRESHOLD
) -> SampleSummary:
    """Summary over raw evaluation counts; censored runs are left out of the moments."""
    ev = np.asarray(evaluations, dtype=float)
    cens = np.asarray(censored_mask, dtype=bool)
    if ev.size == 0:
        raise ValueError("cannot summarise an empty sample")
    if ev.shape != cens.shape:
        raise ValueError("evaluations and censoring flags differ in length")
    done = ev[~cens]
    count, censored = int(ev.size), int(cens.sum())
    mean = float(done.mean()) if done.size else math.nan
    if done.size > 1:
        std = float(done.std(ddof=1))
        se = std / math.sqrt(done.size)
    else:
        std = se = math.nan
    if censored / count > inf_threshold or not done.size:
        display = "inf"
    else:
        display = format_mean(mean)
    return SampleSummary(count, censored, mean, std, se, display)


def summarize(samples: Iterable, inf_threshold: float = DEFAULT_INF_THRESHOLD) -> SampleSummary:
    """Summarise :class:`~earlab.algorithms.RunResult` objects."""
    samples = list(samples)
    return summarize_values(
        [s.evaluations for s in samples], [not s.reached_optimum for s in samples], inf_threshold
    )


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    u_other: float
    p_value: float
    z: float


def midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing the mean of their positions."""
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    ranks = np.empty(values.size)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _u_statistic(ranks_a: np.ndarray, n_a: int) -> float:
    return float(ranks_a.sum() - n_a * (n_a + 1) / 2)


def _tie_term(ranks: np.ndarray) -> float:
    _, counts = np.unique(ranks, return_counts=True)
    return float(((counts**3) - counts).sum())


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test, normal approximation.

    ``u`` belongs to ``a`` (count of pairs with ``a_i > b_j``, ties counting
    one half). The variance carries the tie correction and ``|U - mean|`` is
    shrunk by 1/2 before standardising.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n_a, n_b = a.size, b.size
    if n_a == 0 or n_b == 0:
        raise ValueError("both samples must be non-empty")
    ranks = midranks(np.concatenate([a, b]))
    u = _u_statistic(ranks[:n_a], n_a)
    u_other = n_a * n_b - u
    n = n_a + n_b
    mu = n_a * n_b / 2
    var = n_a * n_b / 12 * ((n + 1) - _tie_term(ranks) / (n * (n - 1)))
    if var <= 0:
        return MannWhitneyResult(u, u_other, 1.0, 0.0)
    z = max(abs(u - mu) - 0.5, 0.0) / math.sqrt(var)
    p = min(1.0, math.erfc(z / math.sqrt(2)))
    return MannWhitneyResult(u, u_other, p, z)


def mann_whitney_exact(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided permutation p-value by enumerating every split of the pooled ranks.

    Exponential in the sample sizes; meant for checking the approximation on
    small samples.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n_a, n_b = a.size, b.size
    if n_a == 0 or n_b == 0:
        raise ValueError("both samples must be non-empty")
    ranks = midranks(np.concatenate([a, b]))
    mu = n_a * n_b / 2
    observed = abs(_u_statistic(ranks[:n_a], n_a) - mu)
    splits = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n_a + n_b), n_a)), dtype=np.int64
    ).reshape(-1, n_a)
    u_all = ranks[splits].sum(axis=1) - n_a * (n_a + 1) / 2
    return float(np.mean(np.abs(u_all - mu) >= observed - 1e-9))


def bonferroni(p: float, m: int) -> float:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return min(1.0, p * m)
