"""Characteristic polynomials of coefficient recurrences and their roots.

Everything that can be decided exactly is decided exactly: palindromes,
cyclotomic factors, quadratic factors and real-root counts. Floating point
(mpmath, at 60 digits) is only used for root moduli.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import flint
import mpmath
from sympy import Poly, symbols

DEFAULT_TOL = 1e-12
CIRCLE_TOL = 1e-9
_DPS = 60


class SpectralError(ValueError):
    pass


class RootFindingError(RuntimeError):
    def __init__(self, msg, partial):
        super().__init__(msg)
        self.partial = partial


class IntPoly:
    """Integer polynomial in lambda, coefficients lowest degree first.

    Content is kept as given: a constraint such as 2a + ... = 0 yields a
    polynomial with content 2 and that is reported faithfully.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int]):
        cs = [int(c) for c in coeffs]
        for c in coeffs:
            if Fraction(c).denominator != 1:
                raise SpectralError("IntPoly coefficients must be integers")
        while cs and cs[-1] == 0:
            cs.pop()
        if not cs:
            raise SpectralError("the zero polynomial has no roots to classify")
        self.coeffs = tuple(cs)

    @classmethod
    def from_high(cls, coeffs: Sequence[int]) -> "IntPoly":
        return cls(list(coeffs)[::-1])

    @classmethod
    def from_flint(cls, p) -> "IntPoly":
        return cls(int(c) for c in p.coeffs())

    def to_flint(self):
        return flint.fmpz_poly(list(self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> int:
        return self.coeffs[-1]

    def content(self) -> int:
        return math.gcd(*self.coeffs)

    def primitive(self) -> "IntPoly":
        """Content removed and leading coefficient made positive."""
        c = self.content() * (1 if self.lc > 0 else -1)
        return IntPoly(x // c for x in self.coeffs)

    def high_first(self) -> list:
        return list(self.coeffs[::-1])

    def __eq__(self, other):
        return isinstance(other, IntPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __mul__(self, other: "IntPoly") -> "IntPoly":
        return IntPoly.from_flint(self.to_flint() * other.to_flint())

    def __add__(self, other: "IntPoly") -> "IntPoly":
        return IntPoly.from_flint(self.to_flint() + other.to_flint())

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        return IntPoly.from_flint(self.to_flint() - other.to_flint())

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def divides(self, other: "IntPoly") -> bool:
        """True if self | other over Z[lambda]."""
        q, r = divmod(other.to_flint(), self.to_flint())
        return r == 0 and q * self.to_flint() == other.to_flint()

    def is_palindromic(self) -> bool:
        return self.coeffs == self.coeffs[::-1]

    def is_antipalindromic(self) -> bool:
        return self.coeffs == tuple(-c for c in self.coeffs[::-1])

    def __str__(self):
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else "λ" if i == 1 else f"λ^{i}"
            mag = abs(c)
            body = f"{mag}" if i == 0 or mag != 1 else ""
            body += mono
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"IntPoly({list(self.coeffs)})"


# -- constructors -------------------------------------------------------------


def charpoly_of_recurrence(kind: str, terms: Sequence) -> IntPoly:
    """sum c_i a[n+s_i] = 0  or  prod a[n+s_i]^e_i = 1  ->  sum c_i lambda^(s_i - min s)."""
    if kind not in ("additive", "multiplicative"):
        raise SpectralError(f"unknown recurrence kind {kind!r}")
    terms = [(int(s), Fraction(c)) for s, c in terms]
    if len(terms) < 2:
        raise SpectralError("a recurrence needs at least two terms")
    shifts = [s for s, _ in terms]
    if len(set(shifts)) != len(shifts):
        raise SpectralError("recurrence shifts must be distinct")
    if all(c == 0 for _, c in terms):
        raise SpectralError("all recurrence coefficients vanish")
    if any(c.denominator != 1 for _, c in terms):
        raise SpectralError("recurrence coefficients must be integers")
    lo = min(shifts)
    cs = [0] * (max(shifts) - lo + 1)
    for s, c in terms:
        cs[s - lo] = int(c)
    return IntPoly(cs)


def charpoly_of(rec) -> IntPoly:
    """Characteristic polynomial of a :class:`~entropyforge.dsl.Recurrence`."""
    return charpoly_of_recurrence(rec.kind, rec.terms)


def reduction_poly(k: int, ell: int) -> IntPoly:
    """P = lambda^(ell+1) - k lambda^ell - k lambda + 1."""
    _check_kl(k, ell)
    cs = [0] * (ell + 2)
    cs[0] += 1
    cs[1] -= k
    cs[ell] -= k
    cs[ell + 1] += 1
    return IntPoly(cs)


def reduction_charpoly(k: int, ell: int) -> tuple:
    """(full characteristic polynomial of the reduced c-recurrence, its factor P)."""
    _check_kl(k, ell)
    terms = {ell + 1: 1, 0: 2, -ell - 1: 1}
    for s in (1, -ell, ell, -1):
        terms[s] = terms.get(s, 0) - k
    full = charpoly_of_recurrence("additive", sorted(terms.items()))
    return full, reduction_poly(k, ell)


def limit_poly(k: int, ell: int) -> IntPoly:
    """lambda^ell - k lambda^(ell-1) - k."""
    _check_kl(k, ell)
    cs = [0] * (ell + 1)
    cs[0] = -k
    cs[ell - 1] -= k
    cs[ell] = 1
    return IntPoly(cs)


def kdv_reduction_charpoly(q: int) -> IntPoly:
    """Characteristic polynomial of a[n+q+1] - a[n+q] - a[n+1] + a[n] = 0."""
    if q < 1:
        raise SpectralError("q must be >= 1")
    return charpoly_of_recurrence("additive", [(0, 1), (1, -1), (q, -1), (q + 1, 1)] if q > 1 else [(0, 1), (1, -2), (2, 1)])


def _check_kl(k, ell):
    if k < 2:
        raise SpectralError("k must be >= 2")
    if ell < 2:
        raise SpectralError("l must be >= 2")


POLY_FAMILIES = ("P_ell", "reduction", "limit", "kdv_reduction", "late")


def polynomial_family(name: str, params: dict) -> IntPoly:
    """Named polynomials for the command line."""
    k = int(params.get("k", 2))
    ell = int(params.get("l", params.get("ell", 2)))
    if name == "P_ell":
        return reduction_poly(k, ell)
    if name == "reduction":
        return reduction_charpoly(k, ell)[0]
    if name == "limit":
        return limit_poly(k, ell)
    if name == "kdv_reduction":
        return kdv_reduction_charpoly(int(params.get("q", 2)))
    if name == "late":
        from .singularity import late_confinement_polynomials
        return late_confinement_polynomials(k, ell, int(params.get("m", 1)))
    raise SpectralError(f"unknown polynomial family {name!r}; choose from {', '.join(POLY_FAMILIES)}")


# -- roots ---------------------------------------------------------------------


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int
    error: float  # some root of the factor lies within this distance

    @property
    def modulus(self) -> float:
        return abs(self.value)


def squarefree_parts(p: IntPoly) -> list:
    """[(squarefree factor, multiplicity)], computed exactly."""
    _, facs = p.to_flint().factor_squarefree()
    return [(IntPoly.from_flint(f), int(e)) for f, e in facs]


def find_roots(p: IntPoly, tol: float = DEFAULT_TOL) -> list:
    """All complex roots with multiplicities, largest modulus first.

    Multiplicities come from an exact squarefree decomposition; each
    squarefree part is solved with mpmath at 60 digits. The error bound uses
    the fact that a degree-n polynomial has a root within n|f(z)/f'(z)| of z.
    """
    if p.degree < 1:
        raise SpectralError("need degree >= 1")
    if tol <= 0:
        raise SpectralError("tol must be positive")
    out = []
    with mpmath.workdps(_DPS):
        for f, mult in squarefree_parts(p):
            if f.degree < 1:
                continue
            hi = [mpmath.mpf(c) for c in f.high_first()]
            try:
                rs = mpmath.polyroots(hi, maxsteps=400, extraprec=4 * _DPS + 8 * f.degree)
            except mpmath.libmp.NoConvergence as exc:
                raise RootFindingError(f"root finding did not converge for {f}", out) from exc
            fd = f.to_flint().derivative()
            dcoeffs = [mpmath.mpf(int(c)) for c in fd.coeffs()][::-1] or [mpmath.mpf(0)]
            scale = max(abs(c) for c in f.coeffs)
            for r in rs:
                val = mpmath.polyval(hi, r)
                der = mpmath.polyval(dcoeffs, r)
                resid = abs(val) / (scale * max(1, abs(r)) ** f.degree)
                if resid > tol:
                    raise RootFindingError(f"residual {float(resid):.3g} exceeds tolerance for {f}", out)
                err = float(f.degree * abs(val) / abs(der)) if der != 0 else float("inf")
                out.append(Root(complex(r), mult, err))
    out.sort(key=lambda r: (-r.modulus, -r.value.real, -r.value.imag))
    return out


def count_real_roots(p: IntPoly, lo=None, hi=None) -> int:
    """Distinct real roots in [lo, hi] (whole line by default), via Sturm sequences."""
    lam = symbols("lam")
    return Poly(p.high_first(), lam).count_roots(lo, hi)


# -- classification -------------------------------------------------------------


def _cyclotomic_strip(p: IntPoly) -> tuple:
    """Divide out every cyclotomic factor exactly. Returns (core, [(n, multiplicity)])."""
    f = p.primitive().to_flint()
    found = []
    n = 1
    # phi(n) >= sqrt(n/2), so n up to 2*deg^2 covers every factor that can divide
    limit = max(2, 2 * p.degree * p.degree)
    while n <= limit and f.degree() > 0:
        c = flint.fmpz_poly.cyclotomic(n)
        if c.degree() <= f.degree():
            e = 0
            while f.degree() >= c.degree():
                q, r = divmod(f, c)
                if r != 0:
                    break
                f, e = q, e + 1
            if e:
                found.append((n, e))
        n += 1
    return IntPoly.from_flint(f), found


@dataclass
class RootClassification:
    poly: IntPoly
    roots: list
    largest_modulus: float
    all_roots_of_unity: bool
    reciprocal: bool
    quadratic_reciprocal: bool
    salem: bool
    pisot: bool
    cyclotomic_factors: list = field(default_factory=list)
    core: IntPoly | None = None
    tolerance: float = CIRCLE_TOL
    notes: list = field(default_factory=list)

    @property
    def dynamical_degree(self) -> float:
        return self.largest_modulus

    @property
    def entropy(self) -> float:
        return math.log(self.largest_modulus) if self.largest_modulus > 0 else float("-inf")

    @property
    def flags(self) -> list:
        names = [
            ("allRootsOfUnity", self.all_roots_of_unity),
            ("reciprocal", self.reciprocal),
            ("quadraticReciprocal", self.quadratic_reciprocal),
            ("salem", self.salem),
            ("pisot", self.pisot),
        ]
        on = [n for n, v in names if v]
        return on or ["none-of-these"]

    def largest_root(self) -> complex:
        return self.roots[0].value

    def to_dict(self) -> dict:
        return {
            "schemaVersion": 1,
            "kind": "classification",
            "polynomial": str(self.poly),
            "coefficients": self.poly.high_first(),
            "roots": [
                {
                    "re": _num(r.value.real),
                    "im": _num(r.value.imag),
                    "modulus": _num(r.modulus),
                    "multiplicity": r.multiplicity,
                    "errorBound": float(f"{r.error:.3g}"),
                }
                for r in self.roots
            ],
            "largestRootModulus": _num(self.largest_modulus),
            "dynamicalDegree": _num(self.dynamical_degree),
            "entropy": _num(self.entropy),
            "flags": self.flags,
            "allRootsOfUnity": self.all_roots_of_unity,
            "reciprocal": self.reciprocal,
            "quadraticReciprocal": self.quadratic_reciprocal,
            "salem": self.salem,
            "pisot": self.pisot,
            "cyclotomicFactors": [{"n": n, "multiplicity": e} for n, e in self.cyclotomic_factors],
            "core": str(self.core) if self.core is not None else None,
            "unitCircleTolerance": self.tolerance,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _num(x: float) -> float:
    return float(f"{x:.15g}")


def classify(p: IntPoly, tol: float = CIRCLE_TOL) -> RootClassification:
    """Largest root and the root-of-unity / reciprocal / Salem / Pisot flags."""
    if p.degree < 1:
        raise SpectralError("need degree >= 1")
    notes = []
    roots = find_roots(p)
    largest = roots[0].modulus
    reciprocal = p.is_palindromic() or p.is_antipalindromic()
    prim = p.primitive()
    if prim != p and prim != IntPoly(-c for c in p.coeffs):
        notes.append(f"content {p.content()} removed before classification")
    monic = abs(prim.lc) == 1
    res = RootClassification(p, roots, largest, False, reciprocal, False, False, False, tolerance=tol, notes=notes)
    if not monic:
        notes.append("not monic after content removal: not an algebraic-integer polynomial, flags suppressed")
        return res
    if prim.coeffs[0] == 0:
        notes.append("lambda divides the polynomial: zero is a root")
    core, cyc = _cyclotomic_strip(prim)
    res.core, res.cyclotomic_factors = core, cyc
    if core.degree == 0 and prim.coeffs[0] != 0:
        res.all_roots_of_unity = True
        res.largest_modulus = 1.0
        if any(abs(r.modulus - 1) > tol for r in roots):
            notes.append("numeric moduli disagree with the exact cyclotomic factorization")
        return res
    if core.degree == 0:
        return res

    core_roots = find_roots(core)
    top = core_roots[0]
    r = top.value
    real_top = abs(r.imag) <= tol * max(1.0, abs(r)) and r.real > 1 + tol
    borderline = [x for x in core_roots if abs(x.modulus - 1) <= tol]
    if borderline:
        notes.append(f"{len(borderline)} root(s) treated as on the unit circle within {tol:g}")

    if real_top and top.multiplicity == 1:
        others = [x for x in core_roots if x is not top]
        # Pisot: the only root outside the closed disc, the rest strictly inside
        if all(x.modulus < 1 - tol for x in others):
            res.pisot = True
        # Salem: reciprocal core, 1/r a root, everything else on the circle, at least one there
        if core.is_palindromic() and core.degree >= 4:
            inv = [x for x in others if abs(x.value - 1 / r) <= 1e-8]
            rest = [x for x in others if x not in inv]
            if inv and rest and all(abs(x.modulus - 1) <= tol for x in rest):
                res.salem = True
        # quadratic reciprocal: lambda^2 - t lambda + 1 divides, t an integer near r + 1/r
        t0 = round(r.real + 1 / r.real)
        for t in (t0 - 1, t0, t0 + 1):
            quad = IntPoly([1, -t, 1])
            if quad.divides(core):
                roots_q = find_roots(quad)
                if abs(roots_q[0].value - r) <= 1e-8:
                    res.quadratic_reciprocal = True
                    break
    return res


def classification_report(polys: Sequence[IntPoly]) -> str:
    return json.dumps({"schemaVersion": 1, "kind": "classifications", "items": [classify(p).to_dict() for p in polys]}, indent=2) + "\n"
