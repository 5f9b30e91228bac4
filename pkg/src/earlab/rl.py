"""Tabular Q-learning over the objective set {target, h1, h2}."""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .bitstring import BitString
from .problems import ObjectiveId, ProblemSpec, target_value

__all__ = [
    "StateMode",
    "StateId",
    "QTable",
    "AgentConfig",
    "state_of",
    "select_objective",
    "q_update",
]

OBJECTIVES = tuple(ObjectiveId)


class StateMode(str, enum.Enum):
    TARGET = "ts"
    SINGLE = "ss"


@dataclass(frozen=True)
class StateId:
    mode: StateMode
    value: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", StateMode(self.mode))
        if self.mode is StateMode.SINGLE:
            object.__setattr__(self, "value", None)
        elif self.value is None or self.value < 0:
            raise ValueError(f"target state needs a value >= 0, got {self.value!r}")

    def __str__(self) -> str:
        return "single" if self.mode is StateMode.SINGLE else str(self.value)


SINGLE_STATE = StateId(StateMode.SINGLE)


class QTable:
    """Sparse action-value table; missing entries read as 0."""

    def __init__(self):
        self._q: dict[tuple[StateId, ObjectiveId], float] = {}

    def __getitem__(self, key: tuple[StateId, ObjectiveId]) -> float:
        return self._q.get(key, 0.0)

    def __setitem__(self, key: tuple[StateId, ObjectiveId], value: float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite Q-value {value!r} for {key}")
        self._q[key] = float(value)

    def __len__(self) -> int:
        return len(self._q)

    def row(self, s: StateId) -> list[float]:
        return [self[s, h] for h in OBJECTIVES]

    def max_value(self, s: StateId) -> float:
        return max(self.row(s))

    def items(self) -> Iterator[tuple[StateId, ObjectiveId, float]]:
        for (s, h), v in self._q.items():
            yield s, h, v

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["state", "objective", "value"])
        for s, h, v in sorted(self.items(), key=lambda e: (str(e[0]), int(e[1]))):
            writer.writerow([str(s), h.label, repr(v)])
        return buf.getvalue()


@dataclass(frozen=True)
class AgentConfig:
    alpha: float = 0.5
    gamma: float = 0.5
    epsilon: float = 0.0
    state_mode: StateMode = StateMode.TARGET

    def __post_init__(self):
        object.__setattr__(self, "state_mode", StateMode(self.state_mode))
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")


def state_of(problem: ProblemSpec, individual: BitString, mode: StateMode) -> StateId:
    if StateMode(mode) is StateMode.SINGLE:
        return SINGLE_STATE
    return StateId(StateMode.TARGET, target_value(problem, individual))


def select_objective(q: QTable, s: StateId, epsilon: float, rng: np.random.Generator) -> ObjectiveId:
    """Epsilon-greedy choice; exploration and greedy ties are both uniform.

    Draw order matters for reproducibility: one double decides exploration
    (only when ``epsilon > 0``), then at most one more picks among candidates.
    """
    if epsilon > 0.0 and rng.random() < epsilon:
        return OBJECTIVES[int(rng.random() * 3)]
    row = q.row(s)
    best = max(row)
    ties = [h for h, v in zip(OBJECTIVES, row) if v == best]
    if len(ties) == 1:
        return ties[0]
    return ties[int(rng.random() * len(ties))]


def q_update(q: QTable, s: StateId, h: ObjectiveId, r: float, s_next: StateId, cfg: AgentConfig) -> QTable:
    """In-place Q-learning update of the single entry ``(s, h)``; returns ``q``."""
    old = q[s, h]
    q[s, h] = old + cfg.alpha * (r + cfg.gamma * q.max_value(s_next) - old)
    return q
