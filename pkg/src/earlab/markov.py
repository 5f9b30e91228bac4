"""Exact expected runtimes on XdivK via birth-death Markov chains.

Markov state ``x`` is the number of ones. Two chains are modelled: RLS without
auxiliary objectives, and the modified EA+RL without learning on mistakes
under target states (objectives effectively picked uniformly, because its
Q-values never leave zero inside a state it has not yet left). The latter takes no switch
point: its transitions do not depend on it.

Two independent routes give the expected number of transitions:

* :func:`per_state_times_recurrence` - closed-form step-up times
  ``E(i -> i+1)`` chained along each plateau;
* :func:`hitting_time_solve` - elimination on the tridiagonal system
  ``E(x) = 1 + f E(x+1) + b E(x-1) + s E(x)``, ``E(n) = 0``.

All arithmetic uses :class:`fractions.Fraction`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from . import kernels
from .errors import InvariantError

__all__ = [
    "ChainKind",
    "BirthDeathChain",
    "HittingTimes",
    "chain_modified_no_learning",
    "chain_rls",
    "make_chain",
    "per_state_times_recurrence",
    "binomial_start",
    "hitting_time_solve",
    "expected_runtime",
    "simulate_chain",
    "BoundsReport",
    "asymptotic_bounds_check",
]

Start = Union[int, str, Sequence[Fraction]]


class ChainKind(str, enum.Enum):
    RLS = "rls"
    MODIFIED_NO_LEARNING = "mod"


@dataclass(frozen=True)
class BirthDeathChain:
    n: int
    k: int
    forward: tuple[Fraction, ...]
    backward: tuple[Fraction, ...]
    stay: tuple[Fraction, ...]

    def __post_init__(self):
        if not len(self.forward) == len(self.backward) == len(self.stay) == self.n + 1:
            raise InvariantError("chain needs n + 1 states")
        for x, (f, b, s) in enumerate(zip(self.forward, self.backward, self.stay)):
            if min(f, b, s) < 0 or f + b + s != 1:
                raise InvariantError(f"state {x} is not stochastic: {f} + {b} + {s}")
        if self.forward[self.n] or self.backward[self.n]:
            raise InvariantError("state n must be absorbing")
        if self.backward[0]:
            raise InvariantError("state 0 cannot move backward")

    def row(self, x: int) -> tuple[Fraction, Fraction, Fraction]:
        return self.forward[x], self.backward[x], self.stay[x]


def _check_nk(n: int, k: int):
    if not (1 <= k < n and n % k == 0):
        raise ValueError(f"need 1 <= k < n with k | n, got n={n}, k={k}")


def _build(n, k, fwd_scale, back_scale):
    forward, backward, stay = [], [], []
    for x in range(n + 1):
        f = fwd_scale * Fraction(n - x, n)
        b = Fraction(0) if x % k == 0 or x == n else back_scale * Fraction(x, n)
        forward.append(f)
        backward.append(b)
        stay.append(1 - f - b)
    return BirthDeathChain(n, k, tuple(forward), tuple(backward), tuple(stay))


def chain_modified_no_learning(n: int, k: int) -> BirthDeathChain:
    """Each of target/h1/h2 with probability 1/3; target value never drops.

    A 0-bit flip is kept under the target and under whichever auxiliary is
    OneMax; a 1-bit flip is kept under the target and the ZeroMax one unless it
    leaves the plateau (``x % k == 0``).
    """
    _check_nk(n, k)
    return _build(n, k, Fraction(2, 3), Fraction(2, 3))


def chain_rls(n: int, k: int) -> BirthDeathChain:
    _check_nk(n, k)
    return _build(n, k, Fraction(1), Fraction(1))


def make_chain(kind: ChainKind, n: int, k: int) -> BirthDeathChain:
    if ChainKind(kind) is ChainKind.RLS:
        return chain_rls(n, k)
    return chain_modified_no_learning(n, k)


@dataclass(frozen=True)
class HittingTimes:
    """Expected step-up times ``E(i -> i+1)`` for ``i = 0 .. n-1``."""

    per_state: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.per_state)

    def from_state(self, x: int) -> Fraction:
        if not 0 <= x <= self.n:
            raise ValueError(f"state {x} outside [0, {self.n}]")
        return sum(self.per_state[x:], Fraction(0))

    def cumulative(self) -> list[Fraction]:
        """Running sums of ``per_state``; the last entry is T from state 0."""
        out, acc = [], Fraction(0)
        for z in self.per_state:
            acc += z
            out.append(acc)
        return out

    def total_from(self, start: Start = 0) -> Fraction:
        weights = _start_weights(start, self.n)
        return sum((w * self.from_state(x) for x, w in enumerate(weights) if w), Fraction(0))


def per_state_times_recurrence(kind: ChainKind, n: int, k: int) -> HittingTimes:
    """Step-up times from the plateau recurrence.

    At a plateau start ``x = dk`` the time is ``c n / (n - x)``; inside a
    plateau ``E(x) = E(x-1) x / (n - x) + c n / (n - x)``, with ``c = 1`` for RLS
    and ``c = 3/2`` for the modified algorithm.
    """
    _check_nk(n, k)
    c = Fraction(1) if ChainKind(kind) is ChainKind.RLS else Fraction(3, 2)
    times = []
    for x in range(n):
        base = c * n / Fraction(n - x)
        if x % k == 0:
            times.append(base)
        else:
            times.append(times[-1] * Fraction(x, n - x) + base)
    return HittingTimes(tuple(times))


def binomial_start(n: int) -> list[Fraction]:
    """Distribution of the ones-count of a uniformly random bit string."""
    return [Fraction(math.comb(n, x), 2**n) for x in range(n + 1)]


def _start_weights(start: Start, n: int) -> list[Fraction]:
    if isinstance(start, str):
        if start == "binomial":
            return binomial_start(n)
        if start == "zero":
            start = 0
        else:
            raise ValueError(f"unknown start mode {start!r}")
    if isinstance(start, (int, np.integer)):
        if not 0 <= start <= n:
            raise ValueError(f"start state {start} outside [0, {n}]")
        weights = [Fraction(0)] * (n + 1)
        weights[int(start)] = Fraction(1)
        return weights
    weights = [Fraction(w) for w in start]
    if len(weights) != n + 1 or sum(weights) != 1 or min(weights) < 0:
        raise ValueError("start distribution must have n + 1 non-negative entries summing to 1")
    return weights


def _solve_all(chain: BirthDeathChain) -> list[Fraction]:
    """Expected absorption time from every state (Thomas algorithm, exact)."""
    n = chain.n
    # unknowns E(0..n-1); row x: -b E(x-1) + (1 - s) E(x) - f E(x+1) = 1
    sub = [-chain.backward[x] for x in range(n)]
    diag = [1 - chain.stay[x] for x in range(n)]
    sup = [-chain.forward[x] for x in range(n)]
    rhs = [Fraction(1)] * n
    for x in range(1, n):
        if diag[x - 1] == 0:
            raise InvariantError(f"singular system at state {x - 1}")
        m = sub[x] / diag[x - 1]
        diag[x] -= m * sup[x - 1]
        rhs[x] -= m * rhs[x - 1]
    e = [Fraction(0)] * (n + 1)
    for x in range(n - 1, -1, -1):
        e[x] = (rhs[x] - sup[x] * e[x + 1]) / diag[x]
    return e


def hitting_time_solve(chain: BirthDeathChain, start: Start = 0) -> Fraction:
    """Expected transitions to absorb in state ``n`` from a state or distribution."""
    weights = _start_weights(start, chain.n)
    e = _solve_all(chain)
    return sum((w * t for w, t in zip(weights, e) if w), Fraction(0))


def expected_runtime(kind: ChainKind, n: int, k: int, start: Start = "binomial") -> Fraction:
    """Expected fitness evaluations of a full run, counting the initial one."""
    return hitting_time_solve(make_chain(kind, n, k), start) + 1


def simulate_chain(chain: BirthDeathChain, runs: int, start: Start = 0, seed: int = 0, max_steps: int = 10**9) -> np.ndarray:
    """Monte-Carlo transition counts until absorption, one per run."""
    rng = np.random.default_rng(seed)
    weights = np.array([float(w) for w in _start_weights(start, chain.n)])
    starts = rng.choice(chain.n + 1, size=runs, p=weights / weights.sum()).astype(np.int64)
    forward = np.array([float(f) for f in chain.forward])
    backward = np.array([float(b) for b in chain.backward])
    return kernels.simulate_birth_death(forward, backward, starts, max_steps, rng)


@dataclass(frozen=True)
class BoundsReport:
    k: int
    ns: tuple[int, ...]
    totals: tuple[Fraction, ...]
    lower_ratios: tuple[float, ...]
    upper_ratios: tuple[float, ...]
    doubling_ratios: tuple[float, ...]

    def lower_bounded(self, spread: float = 2.0) -> bool:
        """``T(n) / n^k`` stays inside ``[c, spread * c]`` for some ``c > 0``."""
        lo = min(self.lower_ratios)
        return lo > 0 and max(self.lower_ratios) <= spread * lo

    def upper_bounded(self) -> bool:
        """``T(n) / n^(k+1)`` does not grow along the range."""
        return all(b <= a * (1 + 1e-12) for a, b in zip(self.upper_ratios, self.upper_ratios[1:]))

    def largest_doublings(self, last: int = 3) -> list[float]:
        """``T(2n) / T(n)`` for the ``last`` largest doublings in the range."""
        ratios = [r for (a, b), r in zip(zip(self.ns, self.ns[1:]), self.doubling_ratios) if b == 2 * a]
        return ratios[-last:]

    def doublings_within(self, last: int = 3) -> bool:
        """``2^k <= T(2n) / T(n) <= 2^(k+1)`` for the ``last`` largest doublings."""
        ratios = self.largest_doublings(last)
        lo, hi = 2**self.k, 2 ** (self.k + 1)
        return len(ratios) == last and all(lo <= r <= hi for r in ratios)


def asymptotic_bounds_check(ns: Sequence[int], k: int, kind: ChainKind = ChainKind.RLS) -> BoundsReport:
    """Growth of the worst-case (start at 0) runtime against ``n^k`` and ``n^(k+1)``."""
    ns = tuple(sorted(ns))
    totals = tuple(per_state_times_recurrence(kind, n, k).total_from(0) for n in ns)
    lower = tuple(float(t / n**k) for n, t in zip(ns, totals))
    upper = tuple(float(t / n ** (k + 1)) for n, t in zip(ns, totals))
    doubling = tuple(float(b / a) for a, b in zip(totals, totals[1:]))
    return BoundsReport(k, ns, totals, lower, upper, doubling)
