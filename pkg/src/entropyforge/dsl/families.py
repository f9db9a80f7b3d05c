"""Named equation families with confinement-compatible default coefficients.

Every family is produced by rendering DSL text and parsing it, so built-ins
and user files go through exactly the same path. Coefficient constraints are
attached as :class:`Recurrence` metadata so callers can test compliant and
violating choices alike.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Mapping

from .coeffs import CoeffField2D, CoeffSpec
from .defs import FamilyInfo, LatticeDef, MappingDef, Recurrence
from .expr import Coef, Num
from .parser import parse_mapping

FAMILIES = (
    "qrt_example",
    "mult_example",
    "hv",
    "hv_full",
    "kdv_lattice",
    "kmt_lattice",
    "kmt_full",
    "kmt_reduction",
    "kmt_reduction_full",
)

ZERO = Num(Fraction(0))


class FamilyError(ValueError):
    pass


def _with(defn, info: FamilyInfo, **specs):
    if isinstance(defn, MappingDef):
        if specs:
            defn = defn.with_coeffs(**specs)
        return MappingDef(defn.target, defn.lowest, defn.rhs, defn.coeffs, info)
    coeffs = defn.coeffs.replace(**specs) if specs else defn.coeffs
    return LatticeDef(defn.rhs, coeffs, defn.k, info)


def _int(params, key, default=None, *aliases) -> int:
    for k in (key, *aliases):
        if k in params:
            v = Fraction(params[k])
            if v.denominator != 1:
                raise FamilyError(f"parameter {key} must be an integer")
            return int(v)
    if default is None:
        raise FamilyError(f"missing parameter {key}")
    return default


def reduction_sign_coefficient(k: int, ell: int) -> CoeffSpec:
    """Simplest a_n with a[n+ell+1] = (-1)^k a[n]."""
    if k % 2 == 0:
        return CoeffSpec.const(1)
    if ell % 2 == 0:
        # ell+1 odd: (-1)^n already flips sign after ell+1 steps
        return CoeffSpec.periodic([1, -1])
    return CoeffSpec.sign_pattern(1, ell + 1)


def reduction_constraint(k: int, ell: int, name: str = "a") -> Recurrence:
    return Recurrence(name, "additive", ((0, -((-1) ** k)), (ell + 1, 1)))


def c_stencil_recurrence(k: int, ell: int) -> Recurrence:
    """Reduced form of the lattice c-equation, as a recurrence on c_n."""
    terms = {ell + 1: 1, 0: 2, -ell - 1: 1}
    for s in (1, -ell, ell, -1):
        terms[s] = terms.get(s, 0) - k
    return Recurrence("c", "additive", tuple(sorted(terms.items())))


def generic_recurrence_solution(rec: Recurrence, lo: int, hi: int, seed: int, field=None) -> dict:
    """Tabulate a generic solution on ``lo..hi``, rational unless ``field`` is given.

    The lowest ``span`` values are random; the rest follow by solving for the
    highest shift. Multiplicative relations need every exponent divisible by
    the top one; the positive root is taken. Exponents above one make rational
    heights grow doubly exponentially, so pass a prime field for those.
    """
    rng = random.Random(seed)
    norm = rec.normalized()
    span = norm.span()
    top = dict(norm.terms)[span]
    if rec.kind == "multiplicative":
        if any(e % top for _, e in norm.terms):
            raise FamilyError(f"cannot solve {rec.describe()} rationally for its highest shift")
        norm = Recurrence(rec.name, rec.kind, tuple((s, e // abs(top)) for s, e in norm.terms))
        top = top // abs(top)
    vals = {}
    for i in range(lo, min(lo + span, hi + 1)):
        vals[i] = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
        if field is not None:
            vals[i] = field.convert(vals[i])
    for i in range(lo + span, hi + 1):
        base = i - span
        if rec.kind == "additive":
            acc = sum(c * vals[base + s] for s, c in norm.terms if s != span)
            vals[i] = -acc / top
        else:
            num, den = 1, 1
            for s, e in norm.terms:
                if s != span:
                    if e > 0:
                        num *= vals[base + s] ** e
                    else:
                        den *= vals[base + s] ** -e
            vals[i] = num / den if top < 0 else den / num
    return vals


def generic_c_field(k: int, mrange: tuple, nrange: tuple, seed: int) -> dict:
    """Generic solution c_{m,n} of the lattice c-stencil on a rectangle.

    Values on the two lowest rows and columns are random; the rest follow by
    solving the stencil for c_{m+1,n+1}, sweeping anti-diagonals.
    """
    rng = random.Random(seed)
    m0, m1 = mrange
    n0, n1 = nrange
    c = {}
    for m in range(m0, m1 + 1):
        for n in range(n0, n1 + 1):
            if m < m0 + 2 or n < n0 + 2:
                c[(m, n)] = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
    sites = sorted(((m, n) for m in range(m0 + 2, m1 + 1) for n in range(n0 + 2, n1 + 1)), key=lambda s: (s[0] + s[1], s[0]))
    for M, N in sites:
        m, n = M - 1, N - 1
        # the stencil reaches c_{m,n+1} = c_{M-1,N}; it lies outside when N = n1+... never, N <= n1
        c[(M, N)] = -2 * c[(m, n)] - c[(m - 1, n - 1)] + k * (
            c[(m + 1, n)] + c[(m, n - 1)] + c[(m - 1, n)] + c[(m, n + 1)]
        )
    return c


def d_from_c_field(k: int, c: Mapping) -> dict:
    """d_{m,n} = (c_{m+1,n} + c_{m,n-1})/k - c_{m+1,n-1} wherever defined."""
    d = {}
    for (m, n) in c:
        if (m + 1, n) in c and (m, n - 1) in c and (m + 1, n - 1) in c:
            d[(m, n)] = (c[(m + 1, n)] + c[(m, n - 1)]) / k - c[(m + 1, n - 1)]
    return d


def d_from_c_sequence(k: int, ell: int, c: Mapping, variant: str = "lattice") -> dict:
    """Reduced d_n from c_n.

    ``lattice`` maps the lattice formula through the reduction index
    m*ell + n, giving (c_{n+ell} + c_{n-1})/k - c_{n+ell-1}; ``printed``
    uses c_{n-ell} in place of c_{n-1}.
    """
    back = 1 if variant == "lattice" else ell
    d = {}
    for n in c:
        if n + ell in c and n - back in c and n + ell - 1 in c:
            d[n] = (c[n + ell] + c[n - back]) / k - c[n + ell - 1]
    return d


def builtin_family(name: str, params: Mapping | None = None) -> MappingDef | LatticeDef:
    """Build one of :data:`FAMILIES`; see the README for parameters."""
    params = dict(params or {})
    if name not in FAMILIES:
        raise FamilyError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    seed = _int(params, "seed", 7)
    ptuple = tuple(sorted((k, str(v)) for k, v in params.items()))

    if name == "qrt_example":
        a = Fraction(params.get("a", 1))
        d = parse_mapping(f"x[n+1]*x[n-1] = 1 - a[n]/x[n]\na: const {a}")
        rec = Recurrence("a", "multiplicative", ((-2, 1), (-1, -1), (2, -1), (3, 1)))
        return _with(d, FamilyInfo(name, ptuple, (rec,), Coef("a", (0,)), "mapping"))

    if name == "mult_example":
        a = Fraction(params.get("a", 1))
        d = parse_mapping(f"x[n+1]*x[n-1] = x[n] - a[n]^2/x[n]\na: const {a}")
        rec = Recurrence("a", "multiplicative", ((-3, 2), (-2, -4), (2, -4), (3, 2)))
        return _with(d, FamilyInfo(name, ptuple, (rec,), Coef("a", (0,)), "mapping"))

    if name == "hv":
        d = parse_mapping("x[n+1] + x[n-1] = x[n] + 1/x[n]^2")
        return _with(d, FamilyInfo(name, ptuple, (), ZERO, "mapping"))

    if name == "hv_full":
        d = parse_mapping("x[n+1] + x[n-1] = x[n] + a[n]/x[n] + 1/x[n]^2\na: periodic(1,-1)")
        rec = Recurrence("a", "additive", ((0, 1), (1, -2), (2, -2), (3, 1)))
        return _with(d, FamilyInfo(name, ptuple, (rec,), ZERO, "mapping"))

    if name == "kdv_lattice":
        a = Fraction(params.get("a", 1))
        b = Fraction(params.get("b", a))
        d = parse_mapping(
            f"x[m,n] = x[m-1,n-1] + a[m,n-1]/x[m,n-1] - b[m-1,n]/x[m-1,n]\na: const {a}\nb: const {b}"
        )
        return _with(d, FamilyInfo(name, ptuple, (), ZERO, "kdv"))

    k = _int(params, "k", 2)
    if k < 2:
        raise FamilyError("the KMT families are analysed for k >= 2 only (k = 1 is lattice KdV up to gauge)")

    if name in ("kmt_lattice", "kmt_full"):
        sign = "const 1" if k % 2 == 0 else "periodic[n](1,-1)"
        if name == "kmt_lattice":
            d = parse_mapping(
                f"x[m,n] = -x[m-1,n-1] + a[m,n-1]/x[m,n-1]^{k} + b[m-1,n]/x[m-1,n]^{k}\na: {sign}\nb: {sign}"
            )
            return _with(d, FamilyInfo(name, ptuple, (), ZERO, "kmt"))
        lo = _int(params, "lo", -4)
        hi = _int(params, "hi", 12)
        c = generic_c_field(k, (lo, hi), (lo, hi), seed)
        dd = d_from_c_field(k, c)
        d = parse_mapping(
            f"x[m,n] = -x[m-1,n-1] + a[m,n-1]/x[m,n-1]^{k} + a[m-1,n]/x[m-1,n]^{k}"
            f" + c[m,n-1]/x[m,n-1] + d[m-1,n]/x[m-1,n]\na: {sign}\nc: const 0\nd: const 0"
        )
        return _with(
            d, FamilyInfo(name, ptuple, (), ZERO, "kmt_full"),
            c=CoeffSpec.tabulated(c), d=CoeffSpec.tabulated(dd),
        )

    ell = _int(params, "l", 2, "ell")
    if ell == 1:
        raise FamilyError("the reduction with l = 1 is excluded: its two coefficient terms coincide")
    if ell < 1:
        raise FamilyError("l must be >= 2")
    violate = bool(params.get("violate_constraint", False))
    a_spec = CoeffSpec.const(1) if violate else reduction_sign_coefficient(k, ell)
    rec = reduction_constraint(k, ell)
    notes = ""
    if violate:
        notes = "a_n = 1 throughout" + ("; this is compliant for even k" if k % 2 == 0 else "; violates the sign constraint")
    head = f"x[n+{ell}] = -x[n-1] + a[n+{ell - 1}]/x[n+{ell - 1}]^{k} + a[n]/x[n]^{k}"

    if name == "kmt_reduction":
        d = parse_mapping(head + "\na: const 1")
        return _with(d, FamilyInfo(name, ptuple, (rec,), ZERO, "reduction", notes), a=a_spec)

    variant = str(params.get("d_variant", "lattice"))
    lo = _int(params, "lo", -3 * ell - 6)
    hi = _int(params, "hi", 12 * ell + 40)
    crec = c_stencil_recurrence(k, ell)
    c = generic_recurrence_solution(crec, lo, hi, seed)
    dd = d_from_c_sequence(k, ell, c, variant)
    d = parse_mapping(head + f" + c[n+{ell - 1}]/x[n+{ell - 1}] + d[n]/x[n]\na: const 1\nc: const 0\nd: const 0")
    info = FamilyInfo(name, ptuple, (rec, crec), ZERO, "reduction_full", notes)
    return _with(d, info, a=a_spec, c=CoeffSpec.tabulated(c), d=CoeffSpec.tabulated(dd))


def parse_params(text: str | None) -> dict:
    """``"k=2,l=3"`` -> ``{"k": 2, "l": 3}``; values are ints or rationals."""
    out = {}
    if not text:
        return out
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise FamilyError(f"parameter {part!r} is not of the form key=value")
        key, val = (s.strip() for s in part.split("=", 1))
        if val.lower() in ("true", "false"):
            out[key] = val.lower() == "true"
            continue
        try:
            f = Fraction(val)
        except ValueError:
            out[key] = val
            continue
        out[key] = int(f) if f.denominator == 1 else f
    return out
