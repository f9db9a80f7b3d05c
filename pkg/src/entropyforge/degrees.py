"""Degree growth of iterated rational recurrences.

The first ``order - 1`` initial values are generic rational constants and the
last one is an affine indeterminate ``w``; every iterate is then a reduced
rational function of ``w`` and its degree is max(deg num, deg den).

Three arithmetic backends are available:

``exact``      integer polynomials (FLINT ``fmpz_poly``) with content removal
``modular``    two independent prime fields (FLINT ``nmod_poly``), which must agree
``reference``  the pure-Python :class:`RationalFunction` over Q (slow, used as an oracle)
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import flint

from .dsl.defs import MappingDef
from .dsl.expr import evaluate
from .numeric import QQ_FIELD, PrimeField, RationalFunction, UniPoly

DEFAULT_SEED = 20240607
DEFAULT_STEPS = 16
DEFAULT_PRIMES = (1048583, 2097169)
MODES = ("exact", "modular", "reference")
MAX_RESEEDS = 3


class DegreeError(RuntimeError):
    pass


class DegenerateOrbit(DegreeError):
    """A denominator vanished identically; the generic data was not generic."""


class InsufficientData(DegreeError):
    pass


class ResourceExhausted(DegreeError):
    def __init__(self, msg, partial):
        super().__init__(msg)
        self.partial = partial


def default_seed() -> int:
    env = os.environ.get("ENTROPYFORGE_SEED")
    return int(env) if env else DEFAULT_SEED


# -- pair backends ---------------------------------------------------------


class _ZPair:
    """num/den in Z[w], coprime, integer content removed, den with positive lead."""

    __slots__ = ("n", "d")

    def __init__(self, n, d):
        self.n, self.d = n, d

    @staticmethod
    def make(n, d):
        if d == 0:
            raise DegenerateOrbit("division by an identically vanishing iterate")
        if n == 0:
            return _ZPair(n, flint.fmpz_poly([1]))
        g = n.gcd(d)
        if g.degree() > 0:
            n, d = n // g, d // g
        c = n.content().gcd(d.content())
        if c != 1:
            n, d = n // c, d // c
        if d.coeffs()[-1] < 0:
            n, d = -n, -d
        return _ZPair(n, d)

    @staticmethod
    def const(q: Fraction):
        return _ZPair(flint.fmpz_poly([q.numerator]), flint.fmpz_poly([q.denominator]))

    @staticmethod
    def variable():
        return _ZPair(flint.fmpz_poly([0, 1]), flint.fmpz_poly([1]))

    def _c(self, o):
        return o if isinstance(o, _ZPair) else _ZPair.const(Fraction(o))

    def __add__(self, o):
        o = self._c(o)
        return _ZPair.make(self.n * o.d + o.n * self.d, self.d * o.d)

    __radd__ = __add__

    def __neg__(self):
        return _ZPair(-self.n, self.d)

    def __sub__(self, o):
        return self + (-self._c(o))

    def __rsub__(self, o):
        return self._c(o) + (-self)

    def __mul__(self, o):
        o = self._c(o)
        return _ZPair.make(self.n * o.n, self.d * o.d)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._c(o)
        return _ZPair.make(self.n * o.d, self.d * o.n)

    def __rtruediv__(self, o):
        return self._c(o) / self

    def __pow__(self, k: int):
        if k >= 0:
            return _ZPair(self.n**k, self.d**k)
        return _ZPair.make(self.d ** (-k), self.n ** (-k))

    @property
    def degree(self):
        return max(self.n.degree(), self.d.degree(), 0)

    def size(self) -> int:
        return max(int(abs(c)).bit_length() for c in self.n.coeffs() + self.d.coeffs())


class _ModPair:
    """num/den over GF(p), coprime, monic denominator."""

    __slots__ = ("n", "d")

    def __init__(self, n, d):
        self.n, self.d = n, d

    @staticmethod
    def make(n, d):
        if d == 0:
            raise DegenerateOrbit("division by an identically vanishing iterate")
        if n == 0:
            return _ModPair(n, flint.nmod_poly([1], d.modulus()))
        g = n.gcd(d)
        if g.degree() > 0:
            n, d = n // g, d // g
        lc = d.coeffs()[-1]
        if int(lc) != 1:
            inv = 1 / lc
            n, d = n * inv, d * inv
        return _ModPair(n, d)

    @staticmethod
    def const(q: Fraction, p: int):
        if q.denominator % p == 0:
            raise DegenerateOrbit(f"constant {q} has no image modulo {p}")
        v = flint.nmod(q.numerator, p) / q.denominator
        return _ModPair(flint.nmod_poly([int(v)], p), flint.nmod_poly([1], p))

    @staticmethod
    def variable(p: int):
        return _ModPair(flint.nmod_poly([0, 1], p), flint.nmod_poly([1], p))

    def _c(self, o):
        return o if isinstance(o, _ModPair) else _ModPair.const(Fraction(o), self.d.modulus())

    def __add__(self, o):
        o = self._c(o)
        return _ModPair.make(self.n * o.d + o.n * self.d, self.d * o.d)

    __radd__ = __add__

    def __neg__(self):
        return _ModPair(-self.n, self.d)

    def __sub__(self, o):
        return self + (-self._c(o))

    def __rsub__(self, o):
        return self._c(o) + (-self)

    def __mul__(self, o):
        o = self._c(o)
        return _ModPair.make(self.n * o.n, self.d * o.d)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._c(o)
        return _ModPair.make(self.n * o.d, self.d * o.n)

    def __rtruediv__(self, o):
        return self._c(o) / self

    def __pow__(self, k: int):
        if k >= 0:
            return _ModPair(self.n**k, self.d**k)
        return _ModPair.make(self.d ** (-k), self.n ** (-k))

    @property
    def degree(self):
        return max(self.n.degree(), self.d.degree(), 0)


def _backend(mode: str, prime: Optional[int] = None):
    """(constant maker, variable) for one arithmetic backend."""
    if mode == "exact":
        return _ZPair.const, _ZPair.variable()
    if mode == "modular":
        return (lambda q: _ModPair.const(q, prime)), _ModPair.variable(prime)
    if mode == "reference":
        def const(q):
            return RationalFunction(UniPoly.constant(q, QQ_FIELD), UniPoly.constant(1, QQ_FIELD))
        return const, RationalFunction(UniPoly.variable(QQ_FIELD), UniPoly.constant(1, QQ_FIELD))
    raise ValueError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")


# -- generic data ------------------------------------------------------------


def _forbidden_values(defn: MappingDef) -> set:
    bad = {Fraction(0), Fraction(1), Fraction(-1)}
    for _, spec in defn.coeffs:
        if spec.kind == "const":
            bad |= {spec.value, -spec.value}
        elif spec.kind == "periodic":
            bad |= {v for v in spec.values} | {-v for v in spec.values}
    return bad


def generic_constants(defn: MappingDef, count: int, seed: int) -> list:
    """Deterministic small rationals, avoiding 0, +-1 and coefficient values."""
    rng = random.Random(seed)
    bad = _forbidden_values(defn)
    out = []
    while len(out) < count:
        q = Fraction(rng.choice((-1, 1)) * rng.randint(1, 50), rng.randint(1, 50))
        if q not in bad and q not in out:
            out.append(q)
    return out


# -- iteration ----------------------------------------------------------------


def _iterate(defn: MappingDef, steps: int, mode: str, constants: list, prime=None, progress=None, deadline=None):
    const, w = _backend(mode, prime)
    order = defn.order
    xs = [const(c) for c in constants[: order - 1]] + [w]
    degrees = [0] * (order - 1) + [1]
    cache = {}

    def coef(name, shift):
        idx = n + shift[0]
        key = (name, idx)
        if key not in cache:
            cache[key] = const(Fraction(defn.coefficient(name, idx)))
        return cache[key]

    def x(shift):
        return xs[n + shift[0] - defn.lowest]

    try:
        while len(degrees) < steps:
            # xs[0] is x at shift `lowest` of the first step, so the new value sits at n + target
            n = len(xs) + defn.lowest - defn.target
            try:
                v = evaluate(defn.rhs, x, coef, const)
            except ZeroDivisionError as exc:
                raise DegenerateOrbit(str(exc)) from None
            xs.append(v)
            degrees.append(v.degree)
            if progress is not None:
                progress(len(degrees) - 1, degrees[-1])
            if deadline is not None and time.monotonic() > deadline:
                raise ResourceExhausted("time budget exhausted", degrees)
    except MemoryError:
        xs.clear()
        raise ResourceExhausted("out of memory", degrees) from None
    return degrees[:steps]


def _modular_worker(args):
    defn, steps, constants, p = args
    return _iterate(defn, steps, "modular", constants, p)


@dataclass
class DegreeSequence:
    """Degrees d_0, d_1, ... of the iterates, with run provenance."""

    degrees: list
    mode: str
    seed: int
    primes: tuple = ()
    reliable: bool = True
    fallback: bool = False
    attempts: int = 1
    family: str = ""
    notes: list = field(default_factory=list)

    @property
    def ratios(self) -> list:
        return growth_ratios(self)

    def entropy(self) -> "EntropyEstimate":
        return entropy_estimate(self)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "d_n", "ratio"])
        for i, d in enumerate(self.degrees):
            prev = self.degrees[i - 1] if i else 0
            w.writerow([i, d, f"{d / prev:.6f}" if prev > 0 and d > 0 else ""])
        return buf.getvalue()

    def to_dict(self) -> dict:
        out = {
            "schemaVersion": 1,
            "kind": "degrees",
            "family": self.family,
            "mode": self.mode,
            "primes": list(self.primes),
            "seed": self.seed,
            "reliable": self.reliable,
            "fallbackToExact": self.fallback,
            "attempts": self.attempts,
            "degrees": list(self.degrees),
            "notes": list(self.notes),
        }
        try:
            r = growth_ratios(self)
            out["ratios"] = [{"exact": f"{q.numerator}/{q.denominator}", "value": round(float(q), 12)} for q in r]
        except InsufficientData:
            out["ratios"] = []
        try:
            e = entropy_estimate(self)
            out["entropy"] = {"finalRatio": e.final_ratio, "logFinalRatio": e.log_ratio, "fittedSlope": e.fitted_slope}
        except InsufficientData:
            out["entropy"] = None
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class EntropyEstimate:
    final_ratio: float
    log_ratio: float
    fitted_slope: float

    def __float__(self):
        return self.log_ratio


def degree_sequence(
    defn: MappingDef,
    steps: int = DEFAULT_STEPS,
    mode: str = "modular",
    seed: Optional[int] = None,
    primes: tuple = DEFAULT_PRIMES,
    jobs: int = 1,
    progress: Optional[Callable] = None,
    max_seconds: Optional[float] = None,
) -> DegreeSequence:
    """Iterate ``defn`` and return ``steps`` degrees (initialization included)."""
    if not isinstance(defn, MappingDef):
        raise TypeError("degree growth is computed for 1D mappings only; reduce lattice equations first")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if defn.is_symbolic():
        raise ValueError("coefficients must be numeric for a degree run")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    if mode == "modular" and (len(primes) != 2 or primes[0] == primes[1]):
        raise ValueError("modular mode needs two distinct primes")
    seed = default_seed() if seed is None else seed
    deadline = time.monotonic() + max_seconds if max_seconds else None
    family = defn.info.name if defn.info else ""
    notes = []
    last = None
    for attempt in range(MAX_RESEEDS + 1):
        s = seed + 7919 * attempt
        constants = generic_constants(defn, max(defn.order - 1, 0), s)
        try:
            if mode != "modular":
                degs = _iterate(defn, steps, mode, constants, progress=progress, deadline=deadline)
                return DegreeSequence(degs, mode, s, attempts=attempt + 1, family=family, notes=notes)
            for p in primes:
                PrimeField(p)  # validates the modulus
            if jobs > 1:
                with ProcessPoolExecutor(max_workers=min(jobs, 2)) as ex:
                    runs = list(ex.map(_modular_worker, [(defn, steps, constants, p) for p in primes]))
            else:
                runs = [_iterate(defn, steps, "modular", constants, p, progress=progress if i == 0 else None, deadline=deadline)
                        for i, p in enumerate(primes)]
            if runs[0] == runs[1]:
                return DegreeSequence(runs[0], mode, s, tuple(primes), attempts=attempt + 1, family=family, notes=notes)
            # accidental cancellation modulo one prime: recompute exactly
            notes.append("modular primes disagreed; recomputed in exact mode")
            degs = _iterate(defn, steps, "exact", constants, progress=progress, deadline=deadline)
            return DegreeSequence(degs, "exact", s, tuple(primes), reliable=True, fallback=True,
                                  attempts=attempt + 1, family=family, notes=notes)
        except DegenerateOrbit as exc:
            last = exc
            notes.append(f"seed {s}: {exc}; reseeding")
    raise DegenerateOrbit(f"no generic orbit after {MAX_RESEEDS} reseeds: {last}")


def growth_ratios(seq) -> list:
    """d_{n+1}/d_n over consecutive entries that are both positive."""
    degs = seq.degrees if isinstance(seq, DegreeSequence) else list(seq)
    out = [Fraction(b, a) for a, b in zip(degs, degs[1:]) if a > 0 and b > 0]
    if sum(1 for d in degs if d > 0) < 2 or not out:
        raise InsufficientData("need at least two consecutive positive degrees")
    return out


def entropy_estimate(seq) -> EntropyEstimate:
    """log of the final ratio, plus the least-squares slope of log d_n over the last third."""
    degs = seq.degrees if isinstance(seq, DegreeSequence) else list(seq)
    pts = [(i, d) for i, d in enumerate(degs) if d > 0]
    if len(pts) < 4:
        raise InsufficientData("need at least four positive degrees")
    final = float(growth_ratios(degs)[-1])
    tail = pts[-max(2, len(pts) // 3):]
    xs = [float(i) for i, _ in tail]
    ys = [math.log(d) for _, d in tail]
    slope = statistics.linear_regression(xs, ys).slope if len(set(ys)) > 1 else 0.0
    return EntropyEstimate(final, math.log(final), slope)
