"""Validated recurrence and lattice definitions."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .coeffs import CoeffField2D, CoeffSpec, write_table
from .expr import Expr, coef_uses, pretty


@dataclass(frozen=True)
class Recurrence:
    """Linear or multiplicative recurrence on one coefficient sequence.

    additive:        sum_i c_i * a[n+s_i] = 0
    multiplicative:  prod_i a[n+s_i]^(e_i) = 1
    ``terms`` holds the (s_i, c_i) or (s_i, e_i) pairs.
    """

    name: str
    kind: str
    terms: tuple

    def __post_init__(self):
        if self.kind not in ("additive", "multiplicative"):
            raise ValueError(f"unknown recurrence kind {self.kind!r}")
        shifts = [s for s, _ in self.terms]
        if len(shifts) < 2 or len(set(shifts)) != len(shifts):
            raise ValueError("a recurrence needs at least two distinct shifts")
        if all(c == 0 for _, c in self.terms):
            raise ValueError("all recurrence coefficients vanish")

    def span(self) -> int:
        shifts = [s for s, _ in self.terms]
        return max(shifts) - min(shifts)

    def normalized(self) -> "Recurrence":
        """Shift so the lowest index is n, sorted by shift."""
        lo = min(s for s, _ in self.terms)
        return Recurrence(self.name, self.kind, tuple(sorted((s - lo, c) for s, c in self.terms)))

    def holds(self, seq, n: int) -> bool:
        """Check the relation at base index ``n`` for a callable ``seq``."""
        if self.kind == "additive":
            return sum(c * seq(n + s) for s, c in self.terms) == 0
        num, den = 1, 1
        for s, e in self.terms:
            v = seq(n + s)
            if e >= 0:
                num *= v**e
            else:
                den *= v ** (-e)
        return num == den

    def describe(self) -> str:
        def idx(s):
            return "n" if s == 0 else f"n+{s}" if s > 0 else f"n{s}"
        if self.kind == "additive":
            parts = [f"{c}*{self.name}[{idx(s)}]" for s, c in self.terms]
            return " + ".join(parts) + " = 0"
        parts = [f"{self.name}[{idx(s)}]^{e}" for s, e in self.terms]
        return " * ".join(parts) + " = 1"


@dataclass(frozen=True)
class FamilyInfo:
    """Metadata attached by the built-in family constructors."""

    name: str
    params: tuple = ()
    constraints: tuple = ()  # Recurrence objects the coefficients must obey
    singular_value: Optional[Expr] = None  # value of x that enters the singularity
    kind: str = ""
    notes: str = ""

    def param(self, key, default=None):
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class MappingDef:
    """x[n+target] = rhs(x[n+lowest .. n+target-1], coefficients)."""

    target: int
    lowest: int
    rhs: Expr
    coeffs: tuple  # sorted (name, CoeffSpec)
    info: Optional[FamilyInfo] = field(default=None, compare=False)

    dim = 1

    @property
    def order(self) -> int:
        return self.target - self.lowest

    def coeff_specs(self) -> dict:
        return dict(self.coeffs)

    def spec(self, name: str) -> CoeffSpec:
        return self.coeff_specs()[name]

    def coefficient(self, name: str, index: int, field=None):
        return self.spec(name).at(index, name, field)

    def is_symbolic(self) -> bool:
        return any(s.is_symbolic() for _, s in self.coeffs)

    def with_coeffs(self, **specs: CoeffSpec) -> "MappingDef":
        d = self.coeff_specs()
        for k in specs:
            if k not in d:
                raise KeyError(f"mapping has no coefficient {k!r}")
        d.update(specs)
        return MappingDef(self.target, self.lowest, self.rhs, tuple(sorted(d.items())), self.info)

    def used_coefficients(self) -> set:
        return coef_uses(self.rhs)

    def to_text(self, table_dir=None) -> str:
        """DSL text; inline tables are written as CSV into ``table_dir``."""
        lines = [f"x[{_shift_str(self.target)}] = {pretty(self.rhs)}"]
        for name, spec in self.coeffs:
            lines.append(f"{name}: {_render(name, spec, 1, table_dir)}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LatticeDef:
    """x[m,n] = rhs(x[m-1,n-1], x[m,n-1], x[m-1,n], coefficient fields)."""

    rhs: Expr
    coeffs: CoeffField2D
    k: int = 1
    info: Optional[FamilyInfo] = field(default=None, compare=False)

    dim = 2

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("lattice exponent k must be >= 1")

    def with_coeffs(self, coeffs: CoeffField2D) -> "LatticeDef":
        return LatticeDef(self.rhs, coeffs, self.k, self.info)

    def to_text(self, table_dir=None) -> str:
        lines = [f"x[m,n] = {pretty(self.rhs)}"]
        for name, spec in self.coeffs.specs:
            lines.append(f"{name}: {_render(name, spec, 2, table_dir)}")
        return "\n".join(lines) + "\n"


def _render(name: str, spec: CoeffSpec, dim: int, table_dir) -> str:
    if spec.kind == "table" and spec.source is None and table_dir is not None:
        fname = f"{name}.csv"
        write_table(Path(table_dir) / fname, dict(spec.table), dim)
        return f'table "{fname}"'
    return spec.render(dim=dim)


def _shift_str(s: int) -> str:
    return "n" if s == 0 else f"n+{s}" if s > 0 else f"n{s}"
