"""Exact arithmetic: fields, polynomials, rational functions, Laurent series."""
from .fields import QQ_FIELD, ExactField, PrimeField, Rationals, SymbolField
from .laurent import (
    ZERO_TO_TRUNCATION,
    LaurentSeries,
    PrecisionExhausted,
    SingularSeries,
    laurent_arith,
    laurent_order,
    precision,
)
from .poly import InvalidInput, UniPoly, poly_gcd, squarefree_decomposition
from .ratfunc import RationalFunction, reduce_rational_function

__all__ = [
    "QQ_FIELD", "ExactField", "PrimeField", "Rationals", "SymbolField",
    "ZERO_TO_TRUNCATION", "LaurentSeries", "PrecisionExhausted", "SingularSeries",
    "laurent_arith", "laurent_order", "precision",
    "InvalidInput", "UniPoly", "poly_gcd", "squarefree_decomposition",
    "RationalFunction", "reduce_rational_function",
]
