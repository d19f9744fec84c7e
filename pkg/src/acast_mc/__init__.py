"""Model checking ATL with imperfect information and perfect recall on coalition-cast game structures."""

from .engine import Evaluator, Verdict, WitnessStrategy, evaluate, replay
from .formula import desugar_formula, parse_formula
from .semantics import Arena, expand
from .specdsl import desugar, parse_spec, validate_spec

__all__ = [
    "Arena", "Evaluator", "Verdict", "WitnessStrategy", "desugar", "desugar_formula", "evaluate",
    "expand", "parse_formula", "parse_spec", "replay", "validate_spec",
]
