"""Recurrence description language and the built-in equation families."""
from .coeffs import (
    CoeffField2D,
    CoeffSpec,
    CoefficientUndefined,
    UnboundSymbol,
    instantiate_coefficients,
    read_table,
    symbol_name,
    write_table,
)
from .defs import FamilyInfo, LatticeDef, MappingDef, Recurrence
from .families import FAMILIES, FamilyError, builtin_family, parse_params
from .parser import GRAMMAR, DSLError, parse_file, parse_mapping

__all__ = [
    "CoeffField2D", "CoeffSpec", "CoefficientUndefined", "UnboundSymbol",
    "instantiate_coefficients", "read_table", "symbol_name", "write_table",
    "FamilyInfo", "LatticeDef", "MappingDef", "Recurrence",
    "FAMILIES", "FamilyError", "builtin_family", "parse_params",
    "GRAMMAR", "DSLError", "parse_file", "parse_mapping",
]
