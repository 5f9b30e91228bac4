"""RLS, EA+RL and the two best-solution-preserving EA+RL modifications.

The ``step_*`` functions are the readable object-level reference: they work on
:class:`BitString` and :class:`QTable` and return the outcome of a single
generation. :func:`run` drives a whole run through the compiled kernel, or
through the reference steppers when a trace is requested or
``engine="python"`` is passed. Both engines consume the random streams in the
same order and return identical results.

Evaluation counting: the initial individual costs one evaluation and every
generation costs one more, however many objectives it looks at.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import Optional, TextIO

import numpy as np

from . import kernels
from .bitstring import BitString, flip_one, random_bitstring
from .problems import ObjectiveId, ProblemKind, ProblemSpec, evaluate, optimum_value, target_value
from .rl import AgentConfig, QTable, StateId, StateMode, q_update, select_objective, state_of

__all__ = [
    "Variant",
    "AlgorithmConfig",
    "StepOutcome",
    "RunResult",
    "make_streams",
    "step_rls",
    "step_earl",
    "step_modified",
    "run",
    "run_fast",
]


class Variant(str, enum.Enum):
    RLS = "rls"
    EARL = "earl"
    MODIFIED_LEARNING = "mod-learning"
    MODIFIED_NO_LEARNING = "mod-nolearning"

    @property
    def label(self) -> str:
        return _VARIANT_LABELS[self]


_VARIANT_LABELS = {
    Variant.RLS: "RLS",
    Variant.EARL: "EARL",
    Variant.MODIFIED_LEARNING: "modified EARL, learning",
    Variant.MODIFIED_NO_LEARNING: "modified EARL, no learning",
}

_KIND_CODES = {
    ProblemKind.OMD: kernels.KIND_OMD,
    ProblemKind.XDIVK: kernels.KIND_XDIVK,
    ProblemKind.LEADINGONES: kernels.KIND_LEADINGONES,
}
_VARIANT_CODES = {
    Variant.RLS: kernels.VARIANT_RLS,
    Variant.EARL: kernels.VARIANT_EARL,
    Variant.MODIFIED_LEARNING: kernels.VARIANT_MOD_LEARNING,
    Variant.MODIFIED_NO_LEARNING: kernels.VARIANT_MOD_NO_LEARNING,
}


@dataclass(frozen=True)
class AlgorithmConfig:
    variant: Variant
    agent: Optional[AgentConfig] = None
    cap: int = 10**6
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.cap < 1:
            raise ValueError(f"cap must be >= 1, got {self.cap}")
        if self.variant is Variant.RLS:
            if self.agent is not None:
                raise ValueError("RLS takes no agent configuration")
        elif self.agent is None:
            object.__setattr__(self, "agent", AgentConfig())

    @property
    def label(self) -> str:
        """Column label in the style ``modified EARL, learning / ss, eps=0.1``."""
        if self.agent is None:
            return self.variant.label
        return f"{self.variant.label} / {self.agent.state_mode.value}, eps={self.agent.epsilon:g}"


@dataclass(frozen=True)
class StepOutcome:
    chosen: Optional[ObjectiveId]
    accepted: bool
    reward: float
    saved_target: int
    target_after: int
    state_before: Optional[StateId] = None
    state_after: Optional[StateId] = None


@dataclass(frozen=True)
class RunResult:
    evaluations: int
    reached_optimum: bool
    best_target: int
    cap: int
    seed: int
    target_decreases: int = 0


def make_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (mutation, selection) generators derived from one seed.

    Keeping mutation on its own stream means RLS and EA+RL see the same
    sequence of flipped positions for a given seed.
    """
    mut, sel = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(mut), np.random.default_rng(sel)


def step_rls(y: BitString, problem: ProblemSpec, rng: np.random.Generator) -> tuple[BitString, StepOutcome]:
    f = target_value(problem, y)
    y_new = flip_one(y, rng)
    t_new = target_value(problem, y_new)
    accepted = t_new >= f
    if accepted:
        y = y_new
    t = t_new if accepted else f
    return y, StepOutcome(None, accepted, float(t - f), f, t)


def _select_and_mutate(y, problem, q, cfg, rng_mut, rng_sel):
    s = state_of(problem, y, cfg.state_mode)
    y_new = flip_one(y, rng_mut)
    h = select_objective(q, s, cfg.epsilon, rng_sel)
    h_ok = evaluate(h, problem, y_new) >= evaluate(h, problem, y)
    return s, y_new, h, h_ok


def _streams(rng):
    # a single generator may be passed for both roles
    return rng if isinstance(rng, tuple) else (rng, rng)


def step_earl(y: BitString, problem: ProblemSpec, q: QTable, cfg: AgentConfig, rng) -> tuple[BitString, StepOutcome]:
    """One generation of EA+RL: the selected objective alone decides acceptance.

    ``rng`` is a Generator or a ``(mutation, selection)`` pair of them.
    """
    rng_mut, rng_sel = _streams(rng)
    f = target_value(problem, y)
    s, y_new, h, h_ok = _select_and_mutate(y, problem, q, cfg, rng_mut, rng_sel)
    if h_ok:
        y = y_new
    t = target_value(problem, y)
    s_next = state_of(problem, y, cfg.state_mode)
    r = float(t - f)
    q_update(q, s, h, r, s_next, cfg)
    return y, StepOutcome(h, h_ok, r, f, t, s, s_next)


def step_modified(
    y: BitString, problem: ProblemSpec, q: QTable, cfg: AgentConfig, learning: bool, rng
) -> tuple[BitString, StepOutcome]:
    """One generation of modified EA+RL; the offspring must not lose target value.

    With ``learning`` the agent is charged the target loss of an offspring that
    its objective accepted but the target vetoed, as if it had been accepted.
    Without it the reward is the (non-negative) target change of the kept
    individual.
    """
    rng_mut, rng_sel = _streams(rng)
    f = target_value(problem, y)
    s, y_new, h, h_ok = _select_and_mutate(y, problem, q, cfg, rng_mut, rng_sel)
    t_new = target_value(problem, y_new)
    accepted = h_ok and t_new >= f
    if accepted:
        y = y_new
    t = target_value(problem, y)
    s_next = state_of(problem, y, cfg.state_mode)
    r = float(t - f)
    if learning and h_ok:
        r = float(t_new - f)
    q_update(q, s, h, r, s_next, cfg)
    return y, StepOutcome(h, accepted, r, f, t, s, s_next)


TRACE_COLUMNS = ["generation", "chosen_objective", "accepted", "reward", "target_value", "state"]


def run(
    problem: ProblemSpec,
    cfg: AlgorithmConfig,
    trace: Optional[TextIO] = None,
    engine: str = "kernel",
    q_dump: Optional[TextIO] = None,
) -> RunResult:
    """Optimise ``problem`` with ``cfg`` from a random start.

    ``trace`` (a text stream) receives a per-generation CSV and ``q_dump`` the
    final Q-table; either forces the reference engine.
    """
    if engine not in ("kernel", "python"):
        raise ValueError(f"unknown engine {engine!r}")
    if trace is not None or q_dump is not None:
        engine = "python"
    if engine == "python":
        rng_mut, rng_sel = make_streams(cfg.seed)
        return _run_reference(problem, cfg, rng_mut, rng_sel, trace, q_dump)
    return run_fast(problem, cfg.variant, cfg.agent, cfg.cap, cfg.seed)


_RLS_AGENT = (kernels.STATE_TARGET, 0.5, 0.5, 0.0)


def run_fast(problem: ProblemSpec, variant: Variant, agent: Optional[AgentConfig], cap: int, seed: int) -> RunResult:
    """Compiled-kernel run without building an :class:`AlgorithmConfig`.

    Same result as :func:`run` for the same arguments; used by the harness
    where per-run Python overhead dominates short runs.
    """
    mut_seq, sel_seq = np.random.SeedSequence(seed).spawn(2)
    rng_mut = np.random.default_rng(mut_seq)
    if agent is None:
        # RLS never draws from the selection stream
        rng_sel = rng_mut
        state_mode, alpha, gamma, epsilon = _RLS_AGENT
    else:
        rng_sel = np.random.default_rng(sel_seq)
        state_mode = kernels.STATE_TARGET if agent.state_mode is StateMode.TARGET else kernels.STATE_SINGLE
        alpha, gamma, epsilon = float(agent.alpha), float(agent.gamma), float(agent.epsilon)
    evals, reached, best, decreases = kernels.run_kernel(
        _KIND_CODES[problem.kind], problem.n, problem.k, problem.d, problem.p,
        _VARIANT_CODES[variant], state_mode, alpha, gamma, epsilon, int(cap), rng_mut, rng_sel,
    )
    return RunResult(int(evals), bool(reached), int(best), cap, seed, int(decreases))


def _run_reference(problem, cfg, rng_mut, rng_sel, trace, q_dump):
    y = random_bitstring(problem.n, rng_mut)
    opt = optimum_value(problem)
    t = target_value(problem, y)
    best, decreases, evals = t, 0, 1
    q = QTable()
    writer = None
    if trace is not None:
        writer = csv.writer(trace, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)

    while t < opt and evals < cfg.cap:
        if cfg.variant is Variant.RLS:
            y, out = step_rls(y, problem, rng_mut)
        elif cfg.variant is Variant.EARL:
            y, out = step_earl(y, problem, q, cfg.agent, (rng_mut, rng_sel))
        else:
            learning = cfg.variant is Variant.MODIFIED_LEARNING
            y, out = step_modified(y, problem, q, cfg.agent, learning, (rng_mut, rng_sel))
        evals += 1
        t = out.target_after
        decreases += t < out.saved_target
        best = max(best, t)
        if writer is not None:
            writer.writerow([
                evals - 1,
                out.chosen.label if out.chosen is not None else "",
                int(out.accepted),
                repr(out.reward),
                t,
                "" if out.state_after is None else str(out.state_after),
            ])
    if q_dump is not None:
        q_dump.write(q.to_csv())
    return RunResult(evals, t >= opt, best, cfg.cap, cfg.seed, decreases)
