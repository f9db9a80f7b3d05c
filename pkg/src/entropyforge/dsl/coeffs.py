"""Coefficient sequences a_n and coefficient fields a_{m,n}."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Optional

AXES = ("n", "m", "m+n", "m-n")


class UnboundSymbol(KeyError):
    pass


class CoefficientUndefined(KeyError):
    pass


def _index(axis: str, idx) -> int:
    if isinstance(idx, int):
        return idx
    m, n = idx
    return {"n": n, "m": m, "m+n": m + n, "m-n": m - n}[axis]


def symbol_name(name: str, index) -> str:
    """Name of the field generator standing for ``name`` at ``index``."""
    def part(i):
        return f"m{-i}" if i < 0 else str(i)
    if isinstance(index, int):
        return f"{name}_{part(index)}"
    return f"{name}_{part(index[0])}_{part(index[1])}"


@dataclass(frozen=True)
class CoeffSpec:
    """How a coefficient depends on its lattice or sequence index.

    kinds: ``const`` (value), ``periodic`` (values, cycled along ``axis``),
    ``table`` (explicit index -> value map), ``symbolic`` (one field symbol
    per index inside ``window``) and ``function`` (programmatic only).
    """

    kind: str
    value: Optional[Fraction] = None
    values: tuple = ()
    axis: str = "n"
    window: Optional[tuple] = None
    table: Optional[tuple] = None  # sorted (index, value) pairs
    source: Optional[str] = field(default=None, compare=False)
    func: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind == "periodic" and not self.values:
            raise ValueError("periodic coefficient needs at least one value")
        if self.kind == "symbolic":
            lo, hi = self.window
            if lo > hi:
                raise ValueError("empty symbolic window")
        if self.axis not in AXES:
            raise ValueError(f"unknown periodic axis {self.axis!r}")

    # -- constructors ---------------------------------------------------

    @classmethod
    def const(cls, v) -> "CoeffSpec":
        return cls("const", value=Fraction(v))

    @classmethod
    def periodic(cls, values, axis: str = "n") -> "CoeffSpec":
        return cls("periodic", values=tuple(Fraction(v) for v in values), axis=axis)

    @classmethod
    def sign_pattern(cls, base, block: int, axis: str = "n") -> "CoeffSpec":
        """``block`` copies of ``base`` followed by ``block`` copies of ``-base``."""
        base = Fraction(base)
        return cls.periodic([base] * block + [-base] * block, axis=axis)

    @classmethod
    def symbolic(cls, lo: int, hi: int) -> "CoeffSpec":
        return cls("symbolic", window=(lo, hi))

    @classmethod
    def tabulated(cls, mapping: Mapping, source: str | None = None) -> "CoeffSpec":
        items = tuple(sorted((k, Fraction(v)) for k, v in mapping.items()))
        return cls("table", table=items, source=source)

    @classmethod
    def function(cls, f: Callable) -> "CoeffSpec":
        return cls("function", func=f)

    # -- evaluation -----------------------------------------------------

    def is_symbolic(self) -> bool:
        return self.kind == "symbolic"

    def at(self, index, name: str = "a", field=None):
        """Value at ``index`` (an int, or an ``(m, n)`` pair)."""
        if self.kind == "const":
            return self.value if field is None else field.convert(self.value)
        if self.kind == "periodic":
            v = self.values[_index(self.axis, index) % len(self.values)]
            return v if field is None else field.convert(v)
        if self.kind == "table":
            lookup = self._lookup()
            if index not in lookup:
                raise CoefficientUndefined(f"coefficient {name} undefined at {index}")
            v = lookup[index]
            return v if field is None else field.convert(v)
        if self.kind == "function":
            v = self.func(*index) if isinstance(index, tuple) else self.func(index)
            return v if field is None else field.convert(v)
        lo, hi = self.window
        if not isinstance(index, int) or not lo <= index <= hi:
            raise UnboundSymbol(f"{name}[{index}] lies outside the symbolic window {lo}..{hi}")
        if field is None or not hasattr(field, "gen"):
            raise UnboundSymbol(f"symbolic coefficient {name} needs an active symbol field")
        return field.gen(symbol_name(name, index))

    def _lookup(self) -> dict:
        cache = self.__dict__.get("_cache")
        if cache is None:
            cache = dict(self.table)
            object.__setattr__(self, "_cache", cache)
        return cache

    def symbols(self, name: str) -> list[str]:
        if self.kind != "symbolic":
            return []
        lo, hi = self.window
        return [symbol_name(name, i) for i in range(lo, hi + 1)]

    def render(self, dim: int = 1) -> str:
        """DSL text for this spec (the part after ``name:``)."""
        if self.kind == "const":
            return f"const {_q(self.value)}"
        if self.kind == "periodic":
            head = "periodic" if dim == 1 else f"periodic[{self.axis}]"
            return f"{head}({','.join(_q(v) for v in self.values)})"
        if self.kind == "symbolic":
            return f"symbolic({self.window[0]}..{self.window[1]})"
        if self.kind == "table":
            if self.source is None:
                raise ValueError("inline tables have no text form; save them to CSV first")
            return f'table "{self.source}"'
        raise ValueError("function coefficients have no text form")


def _q(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def instantiate_coefficients(spec: CoeffSpec, lo: int, hi: int, name: str = "a", field=None) -> list:
    """Values of ``spec`` for every index in ``lo..hi`` inclusive."""
    if lo > hi:
        raise ValueError("empty index range")
    return [spec.at(i, name, field) for i in range(lo, hi + 1)]


def read_table(path: str | Path, dim: int) -> dict:
    """CSV with columns ``n,value`` (1D) or ``m,n,value`` (2D); a header row is optional."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            row = [c.strip() for c in row if c.strip()]
            if not row or row[0].startswith("#"):
                continue
            try:
                nums = [int(c) for c in row[:dim]]
            except ValueError:
                continue  # header
            key = nums[0] if dim == 1 else tuple(nums)
            out[key] = Fraction(row[dim])
    return out


def write_table(path: str | Path, mapping: Mapping, dim: int) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "value"] if dim == 1 else ["m", "n", "value"])
        for k in sorted(mapping):
            key = [k] if dim == 1 else list(k)
            w.writerow(key + [str(mapping[k])])


@dataclass(frozen=True)
class CoeffField2D:
    """Named 2D coefficient fields (a, b, c, d, ...) on the lattice."""

    specs: tuple  # sorted (name, CoeffSpec) pairs

    @classmethod
    def of(cls, **specs: CoeffSpec) -> "CoeffField2D":
        return cls(tuple(sorted(specs.items())))

    def as_dict(self) -> dict:
        return dict(self.specs)

    def __contains__(self, name):
        return name in self.as_dict()

    def value(self, name: str, m: int, n: int, field=None):
        try:
            spec = self.as_dict()[name]
        except KeyError:
            raise CoefficientUndefined(f"no coefficient field named {name!r}") from None
        return spec.at((m, n), name, field)

    def replace(self, **specs: CoeffSpec) -> "CoeffField2D":
        d = self.as_dict()
        d.update(specs)
        return CoeffField2D(tuple(sorted(d.items())))
