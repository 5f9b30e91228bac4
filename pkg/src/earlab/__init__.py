"""Reinforcement-learning selection of non-stationary auxiliary objectives for RLS.

Set ``EARLAB_DISABLE_JIT=1`` before import to run the kernels as plain Python.
"""
from .algorithms import AlgorithmConfig, RunResult, Variant, run
from .bitstring import BitString, random_bitstring
from .errors import ConfigError, InvariantError
from .problems import ObjectiveId, ProblemKind, ProblemSpec, parse_problem
from .rl import AgentConfig, QTable, StateMode

__version__ = "0.1.0"

__all__ = [
    "AgentConfig",
    "AlgorithmConfig",
    "BitString",
    "ConfigError",
    "InvariantError",
    "ObjectiveId",
    "ProblemKind",
    "ProblemSpec",
    "QTable",
    "RunResult",
    "StateMode",
    "Variant",
    "parse_problem",
    "random_bitstring",
    "run",
]
