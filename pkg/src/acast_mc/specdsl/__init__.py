"""Textual specification language: parsing, template expansion, atom-level lowering."""

from .elaborate import AtomModel, GroundCommand, VarInfo, Violation, desugar, expand_templates, validate_spec
from .parser import parse_spec
from .syntax import KEEP, ModelSpec, SpecError, format_spec

__all__ = [
    "AtomModel", "GroundCommand", "KEEP", "ModelSpec", "SpecError", "VarInfo", "Violation",
    "desugar", "expand_templates", "format_spec", "parse_spec", "validate_spec",
]
