"""Command-line front end.

Exit codes: 0 success, 1 analysis-level failure (a check asked for with an
``--assert``-style flag did not hold, or a reproduce criterion failed),
2 usage error. Data goes to stdout (or ``--output``); progress and
diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .degrees import MODES, DegreeError, default_seed, degree_sequence
from .dsl import (
    FAMILIES,
    GRAMMAR,
    CoeffSpec,
    DSLError,
    FamilyError,
    LatticeDef,
    MappingDef,
    builtin_family,
    parse_file,
    parse_params,
)
from .dsl.expr import pretty
from .numeric import QQ_FIELD
from .singularity import TRACE_FIELD
from .spectral import POLY_FAMILIES, IntPoly, SpectralError, charpoly_of, charpoly_of_recurrence, classify, polynomial_family


class UsageError(Exception):
    pass


class AnalysisFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{GRAMMAR}")
        raise SystemExit(2)


# -- helpers ------------------------------------------------------------------------


def _load(args):
    if getattr(args, "file", None):
        return parse_file(args.file)
    if getattr(args, "family", None):
        return builtin_family(args.family, parse_params(args.params))
    raise UsageError("give either --family NAME or --file PATH")


def _mapping(args) -> MappingDef:
    d = _load(args)
    if not isinstance(d, MappingDef):
        raise UsageError("this command needs a 1D mapping; use 'reduce' to turn a lattice into one")
    return d


def _lattice(args) -> LatticeDef:
    d = _load(args)
    if not isinstance(d, LatticeDef):
        raise UsageError("this command needs a lattice equation (kdv_lattice, kmt_lattice, kmt_full or a 2D file)")
    return d


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _table(header, rows) -> str:
    cells = [[str(h) for h in header]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells) + "\n"


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"


def _emit(args, text: str):
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(args, header, rows, payload: dict):
    if args.format == "json":
        return _dump({"schemaVersion": 1, **payload})
    if args.format == "csv":
        return _rows_csv(header, rows)
    return _table(header, rows)


def _poly_from_args(args) -> IntPoly:
    if args.coeffs:
        try:
            cs = [int(c) for c in args.coeffs.split(",")]
        except ValueError:
            raise UsageError("--coeffs takes comma-separated integers, highest degree first") from None
        return IntPoly.from_high(cs)
    if args.recurrence:
        terms = []
        for part in args.recurrence.split(","):
            if ":" not in part:
                raise UsageError("--recurrence takes shift:coefficient pairs such as 0:1,1:-2,2:-2,3:1")
            s, c = part.split(":", 1)
            terms.append((int(s), Fraction(c)))
        return charpoly_of_recurrence(args.kind, terms)
    if args.family in POLY_FAMILIES:
        return polynomial_family(args.family, parse_params(args.params))
    if args.family or args.file:
        d = _load(args)
        cons = d.info.constraints if d.info else ()
        if not cons:
            raise UsageError("this definition carries no coefficient constraint to take a polynomial of")
        idx = args.constraint
        if not 0 <= idx < len(cons):
            raise UsageError(f"--constraint must be in 0..{len(cons) - 1}")
        return charpoly_of(cons[idx])
    raise UsageError("give --family, --file, --coeffs or --recurrence")


def _progress(enabled: bool):
    if not enabled:
        return None

    def report(n, d):
        sys.stderr.write(f"n={n} degree={d}\n")
        sys.stderr.flush()
    return report


# -- commands ---------------------------------------------------------------------------


def cmd_degrees(args):
    d = _mapping(args)
    seq = degree_sequence(d, args.steps, mode=args.mode, seed=args.seed, jobs=args.jobs,
                          progress=_progress(args.progress), max_seconds=args.max_seconds)
    if args.format == "json":
        return seq.to_json()
    if args.format == "csv":
        return seq.to_csv()
    rows = list(csv.reader(io.StringIO(seq.to_csv())))
    return _table(rows[0], rows[1:])


def cmd_singularity(args):
    from .singularity import PerturbationSpec, trace_pattern, verify_constraint
    d = _mapping(args)
    if args.verify_constraint:
        cons = d.info.constraints if d.info else ()
        if not cons:
            raise UsageError("this definition carries no coefficient constraint to verify")
        reports = [verify_constraint(d, c, depth=args.depth, entry_index=args.entry) for c in cons[:1]]
        payload = {"kind": "constraint-check", "reports": [r.to_dict() for r in reports]}
        rows = [(r.constraint, r.holds, r.compliant_pattern, r.violation_verdict) for r in reports]
        out = _render(args, ["constraint", "holds", "compliant", "violation"], rows, payload)
        if args.assert_confined and not all(r.holds for r in reports):
            _emit(args, out)
            raise AnalysisFailure("constraint check failed")
        return out
    p = trace_pattern(d, PerturbationSpec(args.entry), args.depth, seed=args.seed if args.seed is not None else 1)
    rows = [(i, o) for i, o in enumerate(p.orders)]
    if args.format == "json":
        out = p.to_json() + "\n"
    elif args.format == "csv":
        out = _rows_csv(["step", "order"], rows)
    else:
        out = f"pattern  {p.render()}\nverdict  {p.verdict}\nexit     {p.exit_step}\n"
        for note in p.notes:
            out += f"note     {note}\n"
    if args.assert_confined and not p.confined:
        _emit(args, out)
        raise AnalysisFailure(f"singularity is {p.verdict}: {p.render()}")
    return out


def cmd_derive(args):
    from .singularity import derive_coefficient_constraints
    from .spectral import classify as _classify
    d = _mapping(args)
    lo, hi = (int(x) for x in args.window.split(".."))
    d = d.with_coeffs(**{args.symbolic: CoeffSpec.symbolic(lo, hi)})
    res = derive_coefficient_constraints(d)
    rows = []
    items = []
    for r in res.recurrences:
        c = _classify(charpoly_of(r))
        rows.append((r.describe(), str(c.poly), f"{c.largest_modulus:.10g}", ",".join(c.flags)))
        items.append({"constraint": r.describe(), "kind": r.kind, "terms": [list(t) for t in r.terms],
                      "charpoly": str(c.poly), "largestRoot": c.largest_modulus, "flags": c.flags})
    payload = {"kind": "derivation", "relations": [x.describe() for x in res.relations],
               "constraints": items, "notes": res.notes}
    return _render(args, ["constraint", "charpoly", "largest_root", "flags"], rows, payload)


def cmd_charpoly(args):
    p = _poly_from_args(args)
    payload = {"kind": "charpoly", "polynomial": str(p), "coefficients": p.high_first()}
    return _render(args, ["polynomial", "coefficients_high_first"], [(str(p), " ".join(map(str, p.high_first())))], payload)


def cmd_classify(args):
    c = classify(_poly_from_args(args))
    if args.format == "json":
        return c.to_json()
    rows = [(f"{r.value.real:.12g}", f"{r.value.imag:.12g}", f"{r.modulus:.12g}", r.multiplicity) for r in c.roots]
    if args.format == "csv":
        return _rows_csv(["re", "im", "modulus", "multiplicity"], rows)
    head = f"polynomial  {c.poly}\nlargest     {c.largest_modulus:.12g}\nflags       {', '.join(c.flags)}\n"
    return head + _table(["re", "im", "modulus", "multiplicity"], rows)


def cmd_lattice(args):
    from . import lattice as L
    d = _lattice(args)
    if args.action == "evolve":
        size = args.size
        sites = L.StaircaseInit.corner_sites(0, 0, size, size)
        fld = TRACE_FIELD if args.modular else QQ_FIELD
        init = L.StaircaseInit.generic(sites, args.seed if args.seed is not None else 1, fld)
        st = L.evolve(d, init, (0, size, 0, size), fld)
        if args.format == "json":
            return st.to_json() + "\n"
        rows = [(m, n, L._show(v)) for (m, n), v in sorted(st.values.items())]
        return _rows_csv(["m", "n", "value"], rows) if args.format == "csv" else _table(["m", "n", "value"], rows)
    if args.action == "confine":
        region = (-args.size, args.size, -args.size, args.size)
        res = L.check_confinement_conditions(d.coeffs, region, k=d.k, equation=L.equation_kind(d))
        rows = [(r.name, r.holds, r.checked, r.first_failure or "", r.residual if r.residual is not None else "")
                for r in res.values()]
        out = _render(args, ["condition", "holds", "sites", "first_failure", "residual"], rows,
                      {"kind": "lattice-conditions", "conditions": [r.to_dict() for r in res.values()]})
        if args.assert_confined and not all(r.holds for r in res.values()):
            _emit(args, out)
            raise AnalysisFailure("a confinement condition fails")
        return out
    # trace
    if args.seeds:
        seeds = []
        for part in args.seeds.split(";"):
            site, _, scale = part.partition(":")
            m, n = (int(v) for v in site.split(","))
            seeds.append(((m, n), Fraction(scale or 1)))
    else:
        seeds = L.fig1_seeds() if args.fig == 1 else L.fig2_seeds(length=args.zeros)
    p = L.trace_lattice_singularity(d, seeds, size=args.size, seed=args.seed if args.seed is not None else 1)
    if args.format == "json":
        out = p.to_json() + "\n"
    elif args.format == "csv":
        out = p.to_csv()
    else:
        ms = [m for m, _ in p.pattern_sites] or [0]
        ns = [n for _, n in p.pattern_sites] or [0]
        out = f"verdict {p.verdict}\n" + p.grid((min(ms) - 1, max(ms) + 2), (min(ns) - 1, max(ns) + 2)) + "\n"
    if args.assert_confined and not p.confined:
        _emit(args, out)
        raise AnalysisFailure("lattice singularity is not confined")
    return out


def cmd_reduce(args):
    from . import lattice as L
    d = _lattice(args)
    if d.k < 2 and L.equation_kind(d) == "kdv":
        if args.p is None or args.q is None:
            raise UsageError("KdV reductions need --p and --q")
        mp = L.kdv_reduction(args.p, args.q)
    else:
        mp = L.reduce_to_mapping(d, args.ell, full=args.full)
    text = mp.to_text(table_dir=args.table_dir)
    cons = [c.describe() for c in (mp.info.constraints if mp.info else ())]
    out = {"kind": "reduction", "mapping": text, "constraints": cons, "notes": mp.info.notes if mp.info else ""}
    if args.cross_validate and L.equation_kind(d) == "kmt":
        cv = L.cross_validate_reduction(d, args.ell, steps=10, full=args.full)
        out["crossValidation"] = {"agreed": cv.agreed, "sitesCompared": cv.compared,
                                  "indices": cv.indices, "bijection": {str(j): list(s) for j, s in sorted(cv.bijection.items())}}
        if not cv.agreed:
            _emit(args, _dump({"schemaVersion": 1, **out}))
            raise AnalysisFailure(f"reduction cross-validation failed at site {cv.mismatch}")
    if args.format == "json":
        return _dump({"schemaVersion": 1, **out})
    lines = text + "".join(f"# constraint: {c}\n" for c in cons)
    if "crossValidation" in out:
        lines += f"# cross-validation over 10 steps: {'agreed' if out['crossValidation']['agreed'] else 'FAILED'}\n"
    return lines


def cmd_conserve(args):
    import random
    from . import lattice as L
    d = _mapping(args)
    rng = random.Random(args.seed if args.seed is not None else default_seed())
    init = [Fraction(rng.choice((-1, 1)) * rng.randint(2, 30), rng.randint(1, 30)) for _ in range(d.order)]
    orbit = L.iterate_mapping(d, init, args.steps)
    q = L.conserved_quantity(d, orbit)
    rows = [(i + 1, v) for i, v in enumerate(q)]
    out = _render(args, ["n", "Q_n"], rows, {"kind": "conserved-quantity", "values": [str(v) for v in q],
                                             "constant": len(set(q)) == 1})
    if len(set(q)) != 1:
        _emit(args, out)
        raise AnalysisFailure("Q_n is not constant along the orbit")
    return out


def cmd_reproduce(args):
    from .golden import report_json, run_all
    nums = [int(x) for x in args.criteria.split(",")] if args.criteria else None

    def progress(res):
        sys.stderr.write(f"{res.line()} ({res.seconds:.1f}s)\n")
        for d in res.details:
            if args.verbose or d.startswith("FAIL"):
                sys.stderr.write(f"    {d}\n")
    results = run_all(nums, progress=progress)
    if args.format == "json":
        out = report_json(results)
    else:
        out = "".join(r.line() + "\n" for r in results)
    if not all(r.passed for r in results):
        _emit(args, out)
        raise AnalysisFailure("some criteria failed")
    return out


# -- parser -------------------------------------------------------------------------------


def _input_args(p, families=FAMILIES):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--family", choices=families, help="built-in family")
    g.add_argument("--file", help="recurrence file (see --help-grammar)")
    p.add_argument("-p", "--params", default="", help="family parameters, e.g. k=2,l=3")


def _common(p, fmt="table"):
    p.add_argument("--format", choices=("table", "csv", "json"), default=fmt)
    p.add_argument("--output", "-o", help="write the result here instead of stdout")
    p.add_argument("--seed", type=int, default=None, help="random seed (default: $ENTROPYFORGE_SEED or 20240607)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="entropyforge", description="Degree growth, singularity confinement and spectral checks.")
    ap.add_argument("--version", action="version", version=f"entropyforge {__version__}")
    ap.add_argument("--help-grammar", action="store_true", help="print the recurrence file grammar")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("degrees", help="degree sequence of a mapping")
    _input_args(p)
    _common(p)
    p.add_argument("--steps", type=int, default=16)
    p.add_argument("--mode", choices=MODES, default="modular")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-seconds", type=float, default=None)
    p.add_argument("--progress", action="store_true", help="report n and degree on stderr")
    p.set_defaults(func=cmd_degrees)

    p = sub.add_parser("singularity", help="trace the singularity pattern of a mapping")
    _input_args(p)
    _common(p)
    p.add_argument("--depth", type=int, default=24)
    p.add_argument("--entry", type=int, default=0)
    p.add_argument("--verify-constraint", action="store_true", help="check the attached coefficient constraint")
    p.add_argument("--assert-confined", action="store_true", help="exit 1 unless the singularity confines")
    p.set_defaults(func=cmd_singularity)

    p = sub.add_parser("derive", help="derive confinement constraints on a coefficient")
    _input_args(p)
    _common(p)
    p.add_argument("--symbolic", default="a", help="coefficient to make symbolic")
    p.add_argument("--window", default="-4..14", help="index window of the symbolic coefficient")
    p.set_defaults(func=cmd_derive)

    for name, func, fmt in (("charpoly", cmd_charpoly, "table"), ("classify", cmd_classify, "json")):
        p = sub.add_parser(name, help=f"{name} of a recurrence or polynomial")
        _input_args(p, tuple(POLY_FAMILIES) + tuple(FAMILIES))
        _common(p, fmt)
        p.add_argument("--coeffs", help="integer coefficients, highest degree first")
        p.add_argument("--recurrence", help="shift:coefficient pairs of a recurrence")
        p.add_argument("--kind", choices=("additive", "multiplicative"), default="additive")
        p.add_argument("--constraint", type=int, default=0, help="which attached constraint to use")
        p.set_defaults(func=func)

    p = sub.add_parser("lattice", help="lattice evolution, conditions and singularity traces")
    p.add_argument("action", choices=("evolve", "confine", "trace"))
    _input_args(p)
    _common(p)
    p.add_argument("--size", type=int, default=6)
    p.add_argument("--fig", type=int, choices=(1, 2), default=1, help="seed layout of the trace")
    p.add_argument("--zeros", type=int, default=2, help="length of the zero diagonal for --fig 2")
    p.add_argument("--seeds", help="explicit seeds 'm,n:scale;m,n:scale' on one anti-diagonal")
    p.add_argument("--assert-confined", action="store_true")
    p.add_argument("--modular", action="store_true", help="evolve modulo 2^61-1 (exact heights grow fast for k >= 3)")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("reduce", help="reduce a lattice equation to a mapping")
    _input_args(p)
    _common(p)
    p.add_argument("--ell", "-l", type=int, default=2)
    p.add_argument("--full", action="store_true", help="keep the c and d terms")
    p.add_argument("--p", type=int, default=None, help="KdV reduction x[m+p,n] = x[m,n+q]")
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--cross-validate", action="store_true", help="compare lattice and mapping for 10 steps")
    p.add_argument("--table-dir", default=None, help="where tabulated coefficients are written as CSV")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("conserve", help="first integral of an even-l reduction along an orbit")
    _input_args(p)
    _common(p)
    p.add_argument("--steps", type=int, default=8)
    p.set_defaults(func=cmd_conserve)

    p = sub.add_parser("reproduce", help="run every reference check")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--output", "-o")
    p.add_argument("--criteria", help="comma-separated subset, e.g. 1,3")
    p.add_argument("--verbose", "-v", action="store_true")
    p.set_defaults(func=cmd_reproduce)
    return ap


def run(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.help_grammar:
        sys.stdout.write(GRAMMAR)
        return 0
    if not getattr(args, "command", None):
        ap.print_usage(sys.stderr)
        sys.stderr.write(GRAMMAR)
        return 2
    if getattr(args, "seed", None) is None and args.command == "degrees":
        args.seed = default_seed()
    try:
        out = args.func(args)
    except (UsageError, DSLError, FamilyError) as exc:
        sys.stderr.write(f"entropyforge: error: {exc}\n\n{GRAMMAR}")
        return 2
    except AnalysisFailure as exc:
        sys.stderr.write(f"entropyforge: {exc}\n")
        return 1
    except (DegreeError, SpectralError, ArithmeticError, ValueError, KeyError, OSError) as exc:
        sys.stderr.write(f"entropyforge: {exc}\n")
        return 1
    _emit(args, out)
    return 0


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
