"""Singularity patterns of 1D recurrences, computed with Laurent series in eps.

A singularity is entered by setting one initial value to ``v + kappa*eps``,
where ``v`` is the value that makes the next iterate vanish (``a`` for
x[n+1]x[n-1] = 1 - a/x[n], zero for the KMT reductions). The remaining
initial values are generic rationals. Iterating gives Laurent series whose
leading orders form the pattern: order j > 0 is a zero of order j, order
-j a pole of order j.

The verdict is *confined at s* when the ``order`` consecutive iterates
starting at step s are all regular and their eps -> 0 limits change when the
generic initial data is changed. It is *nonconfined* if no such window is
found within the depth, and *collapsed* if no singular iterate appears at all
or an iterate vanishes identically.
"""
from __future__ import annotations

import json
import math
import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .dsl.coeffs import CoeffSpec, symbol_name
from .dsl.defs import MappingDef, Recurrence
from .dsl.expr import Num, evaluate
from .dsl.families import generic_recurrence_solution
from .numeric import QQ_FIELD, LaurentSeries, PrecisionExhausted, PrimeField, SingularSeries, SymbolField, precision
from .spectral import IntPoly, limit_poly

DEFAULT_DEPTH = 24
PRECISION_CAP = 128
DEFAULT_KAPPA = Fraction(7, 5)
# orders and limits only; exact rationals blow up along nonintegrable orbits
TRACE_FIELD = PrimeField(2**61 - 1)

SUPERSCRIPT = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


class SingularityError(RuntimeError):
    pass


class WindowError(SingularityError):
    pass


class InvalidConstraint(ValueError):
    pass


class ExtrapolatedWarning(UserWarning):
    """A polynomial family used outside the case where it was established."""


# -- data types --------------------------------------------------------------


@dataclass(frozen=True)
class PerturbationSpec:
    """Where the singularity enters.

    ``entry_index`` is the sequence index of the perturbed value, which is
    the last of the ``order`` initial values. ``value`` defaults to the
    family's singular value; ``extra`` lists further perturbed initial sites
    as ``(offset, value, scale)`` with ``offset < 0`` relative to the entry.
    """

    entry_index: int = 0
    value: Optional[Fraction] = None
    scale: Fraction = Fraction(1)
    extra: tuple = ()

    def __post_init__(self):
        if self.scale == 0 or any(s == 0 for _, _, s in self.extra):
            raise ValueError("perturbation scale must be nonzero")


@dataclass(frozen=True)
class Token:
    kind: str  # zero | pole | finite
    order: int = 0

    def __str__(self):
        if self.kind == "finite":
            return "f"
        base = "0" if self.kind == "zero" else "∞"
        return base if self.order == 1 else base + str(self.order).translate(SUPERSCRIPT)

    def to_dict(self):
        return {"kind": self.kind, "order": self.order}


def token_for(order: int) -> Token:
    if order > 0:
        return Token("zero", order)
    if order < 0:
        return Token("pole", -order)
    return Token("finite", 0)


def tokens_from(orders: Sequence[int]) -> tuple:
    return tuple(token_for(o) for o in orders)


def render_pattern(tokens) -> str:
    return "{" + ", ".join(str(t) for t in tokens) + "}"


@dataclass
class SingularityPattern:
    tokens: tuple
    verdict: str  # confined | nonconfined | collapsed
    exit_step: Optional[int]
    depth: int
    orders: list  # eps-orders of the iterates from the entry on (entry = step 0)
    first_singular: Optional[int] = None
    exit_limits: list = field(default_factory=list)
    memory_of: list = field(default_factory=list)  # (step, initial index) with equal limits
    entry: Optional[PerturbationSpec] = None
    notes: list = field(default_factory=list)

    @property
    def confined(self) -> bool:
        return self.verdict == "confined"

    def render(self) -> str:
        return render_pattern(self.tokens)

    def to_dict(self) -> dict:
        return {
            "schemaVersion": 1,
            "kind": "singularity",
            "pattern": self.render(),
            "tokens": [t.to_dict() for t in self.tokens],
            "verdict": self.verdict,
            "exitStep": self.exit_step,
            "depth": self.depth,
            "orders": list(self.orders),
            "exitLimits": [str(v) for v in self.exit_limits],
            "memoryOf": [{"step": s, "initialIndex": i} for s, i in self.memory_of],
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


# -- tracing -----------------------------------------------------------------


def singular_value(defn: MappingDef, entry_index: int, fld=QQ_FIELD, coef=None):
    """The value of x that starts the singularity at ``entry_index``."""
    expr = defn.info.singular_value if defn.info and defn.info.singular_value is not None else Num(Fraction(0))

    def c(name, shift):
        if coef is not None:
            return coef(name, entry_index + shift[0])
        return defn.coefficient(name, entry_index + shift[0], fld)

    return evaluate(expr, lambda s: (_ for _ in ()).throw(SingularityError("singular value may not depend on x")), c, fld.convert)


def _generic_data(count: int, seed: int, avoid: set) -> list:
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        q = Fraction(rng.choice((-1, 1)) * rng.randint(2, 40), rng.randint(1, 40))
        if q not in avoid and q not in out and abs(q) != 1:
            out.append(q)
    return out


def _run(defn: MappingDef, entry: PerturbationSpec, steps: int, data: list, fld=QQ_FIELD, coef=None, value=None):
    """Laurent iterates at indices entry-order+1 .. entry+steps.

    Returns a dict index -> series. Raises SingularSeries if an exact zero is
    divided by, PrecisionExhausted if the window runs out.
    """
    N = defn.order
    e = entry.entry_index
    if coef is None:
        def coef(name, idx):
            return defn.coefficient(name, idx, fld)
    v = value if value is not None else (
        fld.convert(entry.value) if entry.value is not None else singular_value(defn, e, fld, coef))
    xs = {}
    for j, idx in enumerate(range(e - N + 1, e)):
        xs[idx] = LaurentSeries.constant(data[j], fld)
    xs[e] = LaurentSeries.perturbed(v, entry.scale, fld)
    for off, val, sc in entry.extra:
        if not -N < off < 0:
            raise ValueError("extra perturbed sites must lie inside the initial window")
        xs[e + off] = LaurentSeries.perturbed(fld.convert(Fraction(val)), sc, fld)
    const_cache = {}

    def const(q):
        if q not in const_cache:
            const_cache[q] = LaurentSeries.constant(q, fld)
        return const_cache[q]

    for t in range(e + 1, e + steps + 1):
        n = t - defn.target

        def x(shift, n=n):
            return xs[n + shift[0]]

        def c(name, shift, n=n):
            return LaurentSeries.constant(coef(name, n + shift[0]), fld)

        val = evaluate(defn.rhs, x, c, const)
        if val.is_zero_to_truncation() and not val.is_exact_zero():
            raise PrecisionExhausted(f"iterate {t} vanishes to truncation")
        xs[t] = val
    return xs


def _run_deepening(*args, terms=None, **kw):
    t = terms or 16
    while True:
        try:
            with precision(t):
                return _run(*args, **kw)
        except (PrecisionExhausted, SingularSeries) as exc:
            if isinstance(exc, SingularSeries) and "truncation" not in str(exc):
                raise
            if t >= PRECISION_CAP:
                raise PrecisionExhausted(f"precision cap {PRECISION_CAP} reached: {exc}") from None
            t *= 2


def _order(s: LaurentSeries):
    return None if s.is_exact_zero() else s.valuation


def trace_pattern(
    defn: MappingDef,
    entry: PerturbationSpec | None = None,
    depth: int = DEFAULT_DEPTH,
    seed: int = 1,
    field=None,
) -> SingularityPattern:
    """Trace the singularity entered at ``entry`` for ``depth`` steps.

    ``field`` defaults to a 61-bit prime field; pass ``QQ_FIELD`` for exact
    rational series (affordable for short depths only).
    """
    fld = TRACE_FIELD if field is None else field
    if not isinstance(defn, MappingDef):
        raise TypeError("trace_pattern works on 1D mappings; use lattice.trace_lattice_singularity for lattices")
    entry = entry or PerturbationSpec()
    N = defn.order
    if depth < N:
        raise ValueError(f"depth must be at least the order {N}")
    avoid = {Fraction(0)}
    try:
        sv = singular_value(defn, entry.entry_index)
        avoid |= {Fraction(sv), -Fraction(sv)}
    except Exception:
        pass

    inits = []
    for attempt in range(6):
        data = _generic_data(N - 1, seed + 1000 * attempt, avoid)
        try:
            inits.append((data, _run_deepening(defn, entry, depth, [fld.convert(q) for q in data], fld=fld)))
        except SingularSeries:
            # exact zero divided: either generic data was unlucky or the pattern collapses
            if attempt >= 2 and not inits:
                return SingularityPattern((), "collapsed", None, depth, [], entry=entry,
                                          notes=["an iterate vanished identically"])
            continue
        if len(inits) == 3:
            break
    if len(inits) < 2:
        raise SingularityError("could not find two generic initializations")

    e = entry.entry_index
    (data_a, xa), (data_b, xb) = inits[0], inits[1]
    orders = [_order(xa[t]) for t in range(e, e + depth + 1)]
    if any(o is None for o in orders):
        cut = orders.index(None)
        return SingularityPattern(tokens_from(orders[:cut]), "collapsed", None, depth, orders, entry=entry,
                                  notes=[f"iterate at step {cut} vanishes identically"])
    nz = [i for i, o in enumerate(orders) if o != 0]
    if not nz:
        return SingularityPattern((), "collapsed", None, depth, orders, entry=entry,
                                  notes=["no singular iterate: the entry value is not singular"])
    first, last = nz[0], nz[-1]
    tokens = tokens_from(orders[first:last + 1])

    def lim(xs, t):
        return xs[e + t].limit()

    def differs(t):
        la, lb = lim(xa, t), lim(xb, t)
        if la != lb:
            return True
        if len(inits) > 2:
            return lim(inits[2][1], t) != la
        return False

    exit_step = None
    for s in range(last + 1, depth - N + 2):
        window = range(s, s + N)
        if all(orders[t] == 0 for t in window) and all(differs(t) for t in window):
            exit_step = s
            break
    if exit_step is None:
        return SingularityPattern(tokens, "nonconfined", None, depth, orders, first, entry=entry,
                                  notes=[f"no regular window with memory of the initial data within depth {depth}"])
    limits = [lim(xa, t) for t in range(exit_step, exit_step + N)]
    init_vals = {e - N + 1 + j: fld.convert(q) for j, q in enumerate(data_a)}
    memory = [(exit_step + j, idx) for j, L in enumerate(limits) for idx, q in init_vals.items() if L == q]
    return SingularityPattern(tokens, "confined", exit_step, depth, orders, first, limits, memory, entry)


@dataclass(frozen=True)
class Verdict:
    verdict: str
    exit_step: Optional[int]
    pattern_length: int
    pattern: str

    @property
    def confined(self):
        return self.verdict == "confined"


def confinement_verdict(defn: MappingDef, depth: int = DEFAULT_DEPTH, entry_index: int = 0, seed: int = 1) -> Verdict:
    """Verdict for the basic entry x = singular value + eps."""
    p = trace_pattern(defn, PerturbationSpec(entry_index), depth, seed)
    return Verdict(p.verdict, p.exit_step, len(p.tokens), p.render())



# -- constraint verification ---------------------------------------------------


def _trace_range(defn: MappingDef, entry_index: int, depth: int) -> tuple:
    return entry_index - 2 * defn.order - 2, entry_index + depth + 2 * defn.order + 2


@dataclass
class ConstraintReport:
    constraint: str
    holds: bool
    compliant_pattern: str
    compliant_verdict: str
    reference_pattern: str
    violation_pattern: str
    violation_verdict: str
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.holds

    def to_dict(self):
        return {"schemaVersion": 1, "kind": "constraint-check", **{k: v for k, v in self.__dict__.items()}}


def verify_constraint(
    defn: MappingDef,
    constraint: Recurrence,
    solution: CoeffSpec | None = None,
    reference: CoeffSpec | None = None,
    depth: int = DEFAULT_DEPTH,
    entry_index: int = 0,
    seed: int = 11,
) -> ConstraintReport:
    """Confines under a generic solution of ``constraint``, but not under a generic violation.

    ``solution`` replaces the generic solution (it must satisfy the
    constraint on the traced range). ``reference`` fixes the expected pattern;
    by default it is the pattern of the constant coefficient 1 when that
    satisfies the constraint, else the compliant pattern itself.
    """
    name = constraint.name
    if name not in defn.coeff_specs():
        raise InvalidConstraint(f"mapping has no coefficient {name!r}")
    lo, hi = _trace_range(defn, entry_index, depth)
    notes = []
    if solution is None:
        steep = constraint.kind == "multiplicative" and max(abs(e) for _, e in constraint.terms) > 1
        vals = generic_recurrence_solution(constraint, lo, hi, seed, TRACE_FIELD if steep else None)
        if all(v == 0 for v in vals.values()):
            raise InvalidConstraint("constraint admits only the zero solution")
        if steep:
            notes.append(f"generic solution tabulated modulo {TRACE_FIELD.p}")
            solution = CoeffSpec.function(vals.__getitem__)
        else:
            solution = CoeffSpec.tabulated(vals)
    for n in range(lo, hi - constraint.span() + 1):
        base = n - min(s for s, _ in constraint.terms)
        if not constraint.holds(lambda i: solution.at(i, name), base):
            raise InvalidConstraint(f"supplied solution violates {constraint.describe()} at n={base}")

    one_ok = all(constraint.holds(lambda i: 1, n) for n in range(3))
    compliant = trace_pattern(defn.with_coeffs(**{name: solution}), PerturbationSpec(entry_index), depth)
    if reference is None and one_ok:
        reference = CoeffSpec.const(1)
    ref = trace_pattern(defn.with_coeffs(**{name: reference}), PerturbationSpec(entry_index), depth) if reference else compliant
    rng = random.Random(seed + 1)
    bad = {i: Fraction(rng.randint(2, 30), rng.randint(2, 30)) * rng.choice((-1, 1)) for i in range(lo, hi + 1)}
    violates = any(not constraint.holds(lambda i: bad[i], n - min(s for s, _ in constraint.terms))
                   for n in range(entry_index - 2, entry_index + 2))
    if not violates:
        notes.append("random violation happens to satisfy the constraint near the entry")
    violation = trace_pattern(defn.with_coeffs(**{name: CoeffSpec.tabulated(bad)}), PerturbationSpec(entry_index), depth)
    holds = (compliant.confined and ref.confined and compliant.tokens == ref.tokens and not violation.confined)
    if compliant.confined and not violation.confined and compliant.tokens != ref.tokens:
        notes.append("compliant pattern differs from the reference pattern")
    return ConstraintReport(constraint.describe(), holds, compliant.render(), compliant.verdict, ref.render(),
                            violation.render(), violation.verdict, notes)


# -- constraint derivation (second-order maps) ---------------------------------


def _sym_index(name: str, base: str) -> Optional[int]:
    prefix = base + "_"
    if not name.startswith(prefix):
        return None
    s = name[len(prefix):]
    return -int(s[1:]) if s.startswith("m") else int(s)


@dataclass
class Relation:
    """Polynomial relation among shifted coefficient values, in shift-normal form.

    ``terms`` maps exponent tuples (one entry per shift 0..span) to integer
    coefficients, so the relation reads sum c * prod a[n+j]^e_j = 0.
    """

    name: str
    terms: dict

    @property
    def span(self) -> int:
        return len(next(iter(self.terms))) - 1

    def key(self):
        return (self.name, tuple(sorted(self.terms.items())))

    def describe(self) -> str:
        parts = []
        for mono, c in sorted(self.terms.items(), reverse=True):
            fac = []
            for j, e in enumerate(mono):
                if e:
                    idx = "n" if j == 0 else f"n+{j}"
                    fac.append(f"{self.name}[{idx}]" + (f"^{e}" if e > 1 else ""))
            parts.append(f"{c}*{'*'.join(fac) or '1'}")
        return " + ".join(parts) + " = 0"


def relation_to_recurrence(rel: Relation) -> Recurrence:
    """Linear relations become additive recurrences, binomials multiplicative ones."""
    monos = list(rel.terms.items())
    if all(sum(m) == 1 for m, _ in monos):
        terms = []
        for m, c in monos:
            terms.append((m.index(1), int(c)))
        return Recurrence(rel.name, "additive", tuple(sorted(terms)))
    if len(monos) == 2:
        (m1, c1), (m2, c2) = monos
        if c1 == -c2:
            exps = tuple((j, a - b) for j, (a, b) in enumerate(zip(m1, m2)) if a != b)
            if len(exps) >= 2:
                return Recurrence(rel.name, "multiplicative", exps)
    raise InvalidConstraint(f"relation {rel.describe()} is neither linear nor binomial")


def _normalize(poly, ring, name: str) -> Optional[Relation]:
    """Strip monomial content, shift to normal form, fix the sign."""
    idxs = {}
    for i, g in enumerate(ring.symbols):
        j = _sym_index(str(g), name)
        if j is not None:
            idxs[i] = j
    terms = poly.terms()
    if not terms:
        return None
    used = sorted({idxs[i] for mono, _ in terms for i, e in enumerate(mono) if e and i in idxs})
    if not used:
        return None
    lo, hi = used[0], used[-1]
    rel = {}
    for mono, c in terms:
        vec = [0] * (hi - lo + 1)
        for i, e in enumerate(mono):
            if e:
                vec[idxs[i] - lo] += e
        rel[tuple(vec)] = rel.get(tuple(vec), 0) + Fraction(int(c.numerator), int(c.denominator))
    # drop the monomial content
    mins = [min(v[j] for v in rel) for j in range(hi - lo + 1)]
    rel = {tuple(a - b for a, b in zip(v, mins)): c for v, c in rel.items()}
    # shrink to the shifts still present
    live = [j for j in range(hi - lo + 1) if any(v[j] for v in rel)]
    if len(live) < 2:
        return None
    a, b = live[0], live[-1]
    rel = {v[a:b + 1]: c for v, c in rel.items()}
    den = 1
    for c in rel.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = {v: int(c * den) for v, c in rel.items()}
    g = 0
    for c in ints.values():
        g = math.gcd(g, c)
    top = max(ints)
    sign = 1 if ints[top] > 0 else -1
    return Relation(name, {v: sign * c // g for v, c in ints.items()})


@dataclass
class Derivation:
    relations: list
    recurrences: list
    reference_orders: list
    steps: int
    notes: list = field(default_factory=list)


def derive_coefficient_constraints(
    defn: MappingDef,
    entry: PerturbationSpec | None = None,
    reference_value: Fraction | None = None,
    max_rounds: int = 12,
) -> Derivation:
    """Conditions on a symbolic coefficient keeping the autonomous singularity pattern.

    The autonomous reference replaces the symbolic coefficient by a constant
    (``reference_value``; by default 7/3, or 0 when 7/3 does not confine,
    which switches an added term off). Along the reference pattern every
    nonautonomous iterate must have the same eps-order, which gives vanishing
    conditions on the symbol field. Each condition, split by monomials in the
    free initial value, is solved for its highest-index coefficient and
    substituted before tracing again.
    """
    if not isinstance(defn, MappingDef) or defn.order != 2:
        raise ValueError("constraint derivation is implemented for second-order mappings only")
    symbolic = [(n, s) for n, s in defn.coeffs if s.is_symbolic()]
    entry = entry or PerturbationSpec(0)
    e = entry.entry_index
    # a generic constant first; if that does not confine, the added term is switched off
    candidates = [Fraction(7, 3), Fraction(0)] if reference_value is None else [Fraction(reference_value)]
    if not symbolic:
        pat = trace_pattern(defn, entry)
        notes = [] if pat.confined else [f"numeric coefficients do not confine: {pat.render()}"]
        return Derivation([], [], pat.orders, 0, notes)
    if len(symbolic) > 1:
        raise ValueError("exactly one coefficient may be symbolic")
    name, spec = symbolic[0]
    for ref_val in candidates:
        ref = trace_pattern(defn.with_coeffs(**{name: CoeffSpec.const(ref_val)}), entry, DEFAULT_DEPTH)
        if ref.confined:
            break
    else:
        raise SingularityError(f"no autonomous reference value for {name} confines: {ref.render()}")
    span = ref.exit_step + defn.order  # steps the conditions are read over
    need_lo, need_hi = e + defn.lowest - 1, e + span + 1
    lo, hi = spec.window
    if lo > need_lo or hi < need_hi or (hi - lo + 1) < 2 * (len(ref.tokens) + 1):
        size = max(need_hi - need_lo + 1, 2 * (len(ref.tokens) + 1))
        raise WindowError(f"symbolic window {lo}..{hi} too small: need {need_lo}..{need_hi} ({size} symbols)")
    ref_orders = ref.orders[: span + 1]

    # only the coefficients the traced steps can reach enter the field
    syms = [symbol_name(name, i) for i in range(need_lo, need_hi + 1)] + ["u"]
    fld = SymbolField(syms)
    subst = {}

    def coef(cname, idx):
        if cname != name:
            return defn.coefficient(cname, idx, fld)
        if idx in subst:
            return subst[idx]
        return defn.coefficient(cname, idx, fld)

    relations = []
    rounds = 0
    while True:
        rounds += 1
        if rounds > max_rounds:
            raise SingularityError("derivation did not settle; the added terms may be insufficient")
        xs = _run_deepening(defn, entry, span, [fld.gen("u")], fld=fld, coef=coef, terms=3)
        cond = None
        for t in range(1, span + 1):
            s = xs[e + t]
            want = ref_orders[t]
            if s.is_exact_zero():
                continue
            if s.valuation < want:
                cond = s.coefficient(s.valuation)
                break
        if cond is None:
            break
        # condition must hold for every value of the free datum u
        num = cond.numer
        ring = num.ring
        ui = ring.symbols.index(ring.symbols[syms.index("u")])
        groups = {}
        for mono, c in num.terms():
            key = mono[ui]
            rest = list(mono)
            rest[ui] = 0
            groups.setdefault(key, ring.zero)
            groups[key] += ring({tuple(rest): c})
        progressed = False
        for poly in groups.values():
            if poly == 0:
                continue
            poly = _expand_subst(poly, subst, fld, name)
            if poly == 0:
                continue
            rel = _normalize(poly, ring, name)
            if rel is None:
                raise SingularityError("a condition forces a coefficient to vanish")
            if rel.key() not in {r.key() for r in relations}:
                relations.append(rel)
            _solve_top(poly, ring, name, subst, fld)
            progressed = True
            break
        if not progressed:
            raise SingularityError("could not extract a relation from a vanishing condition")

    recs = []
    for r in relations:
        try:
            recs.append(relation_to_recurrence(r))
        except InvalidConstraint:
            pass
    return Derivation(relations, recs, ref_orders, span)


def _expand_subst(poly, subst, fld, name):
    """Apply the solved substitutions to a polynomial and return the numerator."""
    if not subst:
        return poly
    ring = poly.ring
    out = fld._field(0)
    for mono, c in poly.terms():
        term = fld._field(c)
        for i, ex in enumerate(mono):
            if ex:
                sname = str(ring.symbols[i])
                j = _sym_index(sname, name)
                base = subst[j] if j is not None and j in subst else fld.gen(sname)
                term *= base ** ex
        out += term
    return out.numer


def _solve_top(poly, ring, name, subst, fld):
    """Solve poly = 0 for its highest-index coefficient symbol (must be linear)."""
    present = []
    for i, g in enumerate(ring.symbols):
        j = _sym_index(str(g), name)
        if j is not None and poly.degree(i) > 0:
            present.append((j, i))
    if not present:
        raise SingularityError("condition involves no coefficient")
    j, i = max(present)
    if poly.degree(i) != 1:
        raise SingularityError(f"highest coefficient {symbol_name(name, j)} does not enter linearly")
    a_coef = ring.zero
    rest = ring.zero
    for mono, c in poly.terms():
        if mono[i] == 1:
            m = list(mono)
            m[i] = 0
            a_coef += ring({tuple(m): c})
        else:
            rest += ring({mono: c})
    subst[j] = fld._field(-rest) / fld._field(a_coef)


# -- late confinement -------------------------------------------------------------


def late_confinement_polynomials(k: int, ell: int, m) -> IntPoly:
    """Polynomials of the longer, late-confining patterns.

    P_m = 1 + sum_{j=1..m} lambda^((ell+1)j - ell) (lambda^ell - k lambda^(ell-1) - k).
    ``m = "limit"`` returns lambda^ell - k lambda^(ell-1) - k. Only (k, ell) = (3, 3)
    is established; other values raise an :class:`ExtrapolatedWarning`.
    """
    if (k, ell) != (3, 3):
        warnings.warn(f"late-confinement family for (k, l) = ({k}, {ell}) is extrapolated", ExtrapolatedWarning, stacklevel=2)
    base = limit_poly(k, ell)
    if m == "limit":
        return base
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    total = IntPoly([1])
    for j in range(1, m + 1):
        shift = (ell + 1) * j - ell
        total = total + IntPoly([0] * shift + list(base.coeffs))
    return total


def late_confinement_closed_form(m: int) -> tuple:
    """(lambda^4 - 1) P_m for (k, l) = (3, 3), expanded from the geometric-sum form."""
    if m < 1:
        raise ValueError("m must be >= 1")
    lam4m = IntPoly([0] * (4 * m) + [1])
    one = IntPoly([1])
    l4 = IntPoly([-1, 0, 0, 0, 1])
    cubic = IntPoly([-3, 0, -3, 1])
    return l4 + IntPoly([0, 1]) * (lam4m - one) * cubic, l4
