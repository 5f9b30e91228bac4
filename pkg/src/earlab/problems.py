"""Target objectives (OMd, XdivK, LeadingOnes) and the switching OneMax/ZeroMax pair.

Problem descriptors are short strings such as ``leadingones:n=11``,
``xdivk:n=40,k=2,p=39`` or ``omd:n=100,d=50,p=50``. For XdivK the switch point
may also be written ``p=end`` (``n-k+1``) or ``p=middle`` (``n/2``).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .bitstring import BitString
from .errors import ConfigError

__all__ = [
    "ProblemKind",
    "ObjectiveId",
    "ProblemSpec",
    "onemax",
    "zeromax",
    "aux_value",
    "target_value",
    "optimum_value",
    "evaluate",
    "parse_problem",
]


class ProblemKind(str, enum.Enum):
    OMD = "omd"
    XDIVK = "xdivk"
    LEADINGONES = "leadingones"


class ObjectiveId(enum.IntEnum):
    TARGET = 0
    AUX1 = 1
    AUX2 = 2

    @property
    def label(self) -> str:
        return ("target", "h1", "h2")[self]


@dataclass(frozen=True)
class ProblemSpec:
    kind: ProblemKind
    n: int
    p: int
    d: int = 0
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ProblemKind(self.kind))
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.p <= self.n:
            raise ValueError(f"switch point p={self.p} outside [0, {self.n}]")
        if self.kind is ProblemKind.OMD and not 0 <= self.d <= self.n:
            raise ValueError(f"OMd needs 0 <= d <= n, got d={self.d}")
        if self.kind is ProblemKind.XDIVK and not (1 <= self.k < self.n and self.n % self.k == 0):
            raise ValueError(f"XdivK needs 1 <= k < n and k | n, got n={self.n}, k={self.k}")

    @classmethod
    def omd(cls, n: int, d: int, p: Optional[int] = None) -> "ProblemSpec":
        return cls(ProblemKind.OMD, n, n // 2 if p is None else p, d=d)

    @classmethod
    def xdivk(cls, n: int, k: int, p: Optional[int] = None) -> "ProblemSpec":
        return cls(ProblemKind.XDIVK, n, n // 2 if p is None else p, k=k)

    @classmethod
    def leadingones(cls, n: int, p: Optional[int] = None) -> "ProblemSpec":
        return cls(ProblemKind.LEADINGONES, n, n // 2 if p is None else p)

    @property
    def mask(self) -> Optional[BitString]:
        """OMd mask: first ``d`` positions 0, the rest 1."""
        if self.kind is not ProblemKind.OMD:
            return None
        return BitString(self.n, ((1 << self.n) - 1) ^ ((1 << self.d) - 1))

    @property
    def descriptor(self) -> str:
        if self.kind is ProblemKind.OMD:
            return f"omd:n={self.n},d={self.d},p={self.p}"
        if self.kind is ProblemKind.XDIVK:
            return f"xdivk:n={self.n},k={self.k},p={self.p}"
        return f"leadingones:n={self.n},p={self.p}"

    def __str__(self) -> str:
        return self.descriptor


def onemax(individual: BitString) -> int:
    return individual.ones


def zeromax(individual: BitString) -> int:
    return individual.n - individual.ones


def aux_value(which: ObjectiveId, individual: BitString, p: int) -> int:
    """h1 is OneMax while ``x < p`` and ZeroMax from ``x = p`` on; h2 mirrors it.

    ``p`` is the first ones-count at which the pair has switched, which puts
    the worst-case XdivK switch ``p = n - k + 1`` at the start of the last
    plateau's uphill stretch.
    """
    low = individual.ones < p
    if which is ObjectiveId.AUX1:
        return onemax(individual) if low else zeromax(individual)
    if which is ObjectiveId.AUX2:
        return zeromax(individual) if low else onemax(individual)
    raise ValueError(f"not an auxiliary objective: {which!r}")


def target_value(problem: ProblemSpec, individual: BitString) -> int:
    if individual.n != problem.n:
        raise ValueError(f"individual length {individual.n} != problem length {problem.n}")
    if problem.kind is ProblemKind.OMD:
        return problem.n - (individual.packed ^ problem.mask.packed).bit_count()
    if problem.kind is ProblemKind.XDIVK:
        return individual.ones // problem.k
    # lowest unset bit of the packed value marks the end of the prefix of ones
    return min(((~individual.packed) & (individual.packed + 1)).bit_length() - 1, problem.n)


def optimum_value(problem: ProblemSpec) -> int:
    if problem.kind is ProblemKind.XDIVK:
        return problem.n // problem.k
    return problem.n


def evaluate(objective: ObjectiveId, problem: ProblemSpec, individual: BitString) -> int:
    if objective is ObjectiveId.TARGET:
        return target_value(problem, individual)
    return aux_value(objective, individual, problem.p)


def parse_problem(descriptor: str) -> ProblemSpec:
    """Parse a problem descriptor string; raises :class:`ConfigError`."""
    name, _, rest = descriptor.strip().partition(":")
    try:
        kind = ProblemKind(name.strip().lower())
    except ValueError:
        raise ConfigError(f"unknown problem kind {name!r} in {descriptor!r}") from None
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"expected key=value, got {item!r} in {descriptor!r}")
        params[key.strip().lower()] = value.strip()

    allowed = {"n", "p"} | {ProblemKind.OMD: {"d"}, ProblemKind.XDIVK: {"k"}}.get(kind, set())
    unknown = set(params) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} for {kind.value} in {descriptor!r}")
    required = allowed - {"p"}
    missing = required - set(params)
    if missing:
        raise ConfigError(f"missing keys {sorted(missing)} in {descriptor!r}")

    try:
        n = int(params["n"])
        ints = {key: int(params[key]) for key in required - {"n"}}
        p = params.get("p")
        if p is None:
            p_val = n // 2
        elif p == "middle":
            p_val = n // 2
        elif p == "end":
            if kind is not ProblemKind.XDIVK:
                raise ConfigError(f"p=end is only defined for xdivk: {descriptor!r}")
            p_val = n - ints["k"] + 1
        else:
            p_val = int(p)
        return ProblemSpec(kind, n, p_val, **ints)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid problem {descriptor!r}: {exc}") from None
