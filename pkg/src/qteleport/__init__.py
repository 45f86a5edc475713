"""Statevector simulation of small circuits and a quantum teleportation harness."""

from .circuit import CNOT, Circuit, CondGate1, Gate1, Measure, ParseError, QubitLimitWarning, validate
from .dsl import parse, parse_file, serialize
from .simulator import Histogram, NoiseModel, RunConfig, post_select, run_analytic, run_shots

__version__ = "0.1.0"

__all__ = [
    "CNOT",
    "Circuit",
    "CondGate1",
    "Gate1",
    "Measure",
    "ParseError",
    "QubitLimitWarning",
    "validate",
    "parse",
    "parse_file",
    "serialize",
    "Histogram",
    "NoiseModel",
    "RunConfig",
    "post_select",
    "run_analytic",
    "run_shots",
]
