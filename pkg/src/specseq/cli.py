"""Command-line driver.

Every subcommand reads one document (``--input FILE`` or a positional path,
``-`` for stdin), prints a plain-text answer or, with ``--json``, a JSON
object.  Failures map to fixed exit codes: 2 schema, 3 chain condition or
validation, 4 not a stable index, 5 underdetermined, 6 inconsistent.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import io
from .builders import (
    Bicomplex,
    CwComplexSpec,
    FilteredComplex,
    couple_from_tower,
    cw_library,
    double_complex_filtration,
    hopf_les_template,
    reindex_cohomological,
    skeletal_filtration,
    trivial_filtration,
    z4_extension_filtration,
)
from .chain import ChainComplex, homology_at_position, is_exact, les_solve, validate_chain
from .couple import (
    BoundFunction,
    ExactCouple,
    derived_sequence,
    differential,
    stable_bounds,
    validate_couple,
)
from .errors import ChainConditionViolated, CoupleNotExact, SchemaError, SpecSeqError
from .fga import FgaGroup
from .graded import nonzero_indices
from .solver import Z, solve_template, two_column_solve, two_line_solve


class _Out:
    def __init__(self, args):
        self.json = getattr(args, "json", False)
        self.quiet = getattr(args, "quiet", False)

    def text(self, line: str = ""):
        if not self.json:
            print(line)

    def note(self, line: str):
        if not self.json and not self.quiet:
            print(line)

    def data(self, obj):
        if self.json:
            print(json.dumps(obj, indent=1))


def _read(args) -> io.Document:
    path = args.input or args.file
    if not path:
        raise SchemaError("no input file given")
    if path == "-":
        return io.parse(sys.stdin.read())
    try:
        return io.load(path)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


def _expect(doc: io.Document, *kinds: str):
    if doc.kind not in kinds:
        raise SchemaError(f"expected a {' or '.join(kinds)} document, got {doc.kind}")
    return doc.payload


def _fmt_index(i) -> str:
    return f"({i[0]},{i[1]})" if isinstance(i, tuple) else str(i)


def _homology_positions(C: ChainComplex) -> list:
    pos = C.positions()
    if pos and not C.index.paired:
        lo, hi = min(pos), max(pos)
        pos = list(range(lo, hi + 1))
    elif pos:
        pos = sorted(pos)
    return pos


# -- homology / exact / validate ------------------------------------------------

def cmd_homology(args, out: _Out) -> int:
    C = _expect(_read(args), "chain_complex")
    bad = validate_chain(C)
    if bad:
        raise ChainConditionViolated(f"d o d is nonzero at index {_fmt_index(bad[0])}", index=bad[0])
    if args.at is not None:
        pos = [C.index.normalize(json.loads(args.at) if args.at.strip().startswith("[") else int(args.at))]
    else:
        pos = _homology_positions(C)
    table = [(a, homology_at_position(C, a)) for a in pos]
    out.text(", ".join(f"{_fmt_index(a)}: {g}" for a, g in table))
    out.data({"homology": [{"index": list(a) if isinstance(a, tuple) else a, "group": str(g)} for a, g in table]})
    return 0


def cmd_exact(args, out: _Out) -> int:
    C = _expect(_read(args), "chain_complex")
    window = None
    if args.window:
        lo, hi = args.window
        window = [a for a in _homology_positions(C) if lo <= a <= hi] if not C.index.paired else None
    rep = is_exact(C, window)
    for e in rep.entries:
        out.note(f"{_fmt_index(e.position)}: {'exact' if e.exact else 'not exact, defect ' + str(e.defect)}")
    out.text("exact" if rep.ok else "not exact")
    out.data({
        "exact": rep.ok,
        "entries": [
            {"index": list(e.position) if isinstance(e.position, tuple) else e.position,
             "exact": e.exact, "defect": str(e.defect)}
            for e in rep.entries
        ],
    })
    return 0 if rep.ok else 3


def cmd_validate(args, out: _Out) -> int:
    doc = _read(args)
    problems: list = []
    if doc.kind == "chain_complex":
        problems = [f"d o d nonzero at {_fmt_index(i)}" for i in validate_chain(doc.payload)]
    elif doc.kind in ("exact_couple", "filtered_complex", "bicomplex"):
        C = _couple_of(doc)[0]
        problems = [f"{v} at {x}: {d}" for v, x, d in validate_couple(C)]
    for p in problems:
        out.note(p)
    out.text("valid" if not problems else f"invalid ({len(problems)} problems)")
    out.data({"kind": doc.kind, "valid": not problems, "problems": problems})
    return 0 if not problems else 3


# -- les-solve -----------------------------------------------------------------------

def _value(v) -> str:
    return str(v)


def cmd_les_solve(args, out: _Out) -> int:
    T = _expect(_read(args), "les_template")
    res = les_solve(T)
    for name in T.unknowns():
        out.text(f"{name} = {_value(res[name])}")
    out.data({"assignment": {name: _value(res[name]) for name in T.unknowns()}})
    return 0


# -- pages / infinity / converge -------------------------------------------------

def _couple_of(doc: io.Document):
    """``(couple in (n,s), bound or None, filtered complex or None)``."""
    if doc.kind == "exact_couple":
        C = doc.payload
        if C.coordinates == "pq":
            from .builders import reindex_homological

            C = reindex_homological(C)
        return C, None, None
    if doc.kind == "bicomplex":
        F = double_complex_filtration(doc.payload)
    elif doc.kind == "filtered_complex":
        F = doc.payload
    else:
        raise SchemaError(f"expected a filtered_complex, bicomplex or exact_couple document, got {doc.kind}")
    tc = couple_from_tower(F)
    return tc.couple, tc.bound, F


def _require_exact(C: ExactCouple):
    rep = validate_couple(C)
    if rep:
        v, x, d = rep[0]
        raise CoupleNotExact(f"couple is not exact: vertex {v} at {x} ({d})", report=rep)


def _grid(G, window) -> list[str]:
    p0, p1, q0, q1 = window
    cells = {(p, q): str(G[(p, q)].canonical) for p in range(p0, p1 + 1) for q in range(q0, q1 + 1)}
    width = max([len(c) for c in cells.values()] + [3])
    lines = []
    for q in range(q1, q0 - 1, -1):
        row = " ".join(cells[(p, q)].rjust(width) for p in range(p0, p1 + 1))
        lines.append(f"{q:>4} | {row}")
    lines.append("     +" + "-" * (len(lines[0]) - 6 if lines else 0))
    lines.append("       " + " ".join(str(p).rjust(width) for p in range(p0, p1 + 1)))
    return lines


def _pq_window(C_pq: ExactCouple, requested) -> tuple:
    if requested:
        return tuple(requested)
    keys = list(C_pq.E.groups) or [(0, 0)]
    ps = [x[0] for x in keys]
    qs = [x[1] for x in keys]
    return (min(ps), max(ps), min(qs), max(qs))


def cmd_pages(args, out: _Out) -> int:
    C, _, _ = _couple_of(_read(args))
    _require_exact(C)
    R = args.max_page
    seq = derived_sequence(C, R)
    pq = [reindex_cohomological(Cr) for Cr in seq]
    window = _pq_window(pq[0], args.window)
    payload = []
    for Cr in pq:
        d = differential(Cr)
        diffs = []
        for x in nonzero_indices(d):
            y = d.degree(x)
            diffs.append({"from": list(x), "to": list(y), "matrix": io.matrix_to_json(d.maps[x].matrix)})
        out.text(f"E_{Cr.r}  (d_{Cr.r} of degree {d.degree.shift})")
        for line in _grid(Cr.E, window):
            out.text(line)
        for e in diffs:
            out.text(f"  d_{Cr.r}: {tuple(e['from'])} -> {tuple(e['to'])}  {e['matrix']['data']}")
        out.text()
        payload.append({
            "page": Cr.r,
            "degree": list(d.degree.shift),
            "groups": [{"index": list(x), "group": str(P.canonical)} for x, P in sorted(Cr.E.groups.items())
                       if not P.is_trivial],
            "differentials": diffs,
        })
    out.data({"window": list(window), "pages": payload})
    return 0


def _bound_for(C: ExactCouple, bound):
    if bound is not None:
        return bound
    raise SchemaError("exact_couple documents carry no bound; use a filtered_complex or bicomplex")


def cmd_infinity(args, out: _Out) -> int:
    C, bound, _ = _couple_of(_read(args))
    _require_exact(C)
    sb = stable_bounds(C, _bound_for(C, bound))
    groups = {}
    for x, t in sb.E.items():
        P = sb.couple_at(t).E[x]
        if not P.is_trivial:
            groups[x] = (P, t)
    from .graded import GradedGroup

    G = reindex_cohomological(GradedGroup({x: P for x, (P, _) in groups.items()}))
    window = _pq_window(reindex_cohomological(C), args.window)
    out.text("E_inf")
    for line in _grid(G, window):
        out.text(line)
    out.data({
        "window": list(window),
        "groups": [{"index": list(x), "group": str(P.canonical)} for x, P in sorted(G.groups.items())],
    })
    return 0


def cmd_converge(args, out: _Out) -> int:
    doc = _read(args)
    C, bound, F = _couple_of(doc)
    if F is None:
        raise SchemaError("converge needs a filtered_complex or bicomplex document")
    _require_exact(C)
    from .couple import converge

    s = F.L if args.s is None else args.s
    cert = converge(C, bound, (args.n, s))
    out.text(f"target H_{args.n} = {cert.target}")
    chain = list(cert.chain())
    if all(c.is_trivial for c in chain):
        chain = []
    out.text("chain: " + " ->> ".join(str(c) for c in chain) if chain else "chain: (empty)")
    for ses, piece, a, b in zip(cert.sess, cert.pieces, cert.cofiltration, cert.cofiltration[1:]):
        if piece.is_trivial:
            continue
        mark = "ok" if ses.verified else "FAILED"
        out.text(f"  0 -> {piece} -> {a} -> {b} -> 0   [{mark}]")
    out.data({
        "x": list(cert.x),
        "page": cert.page,
        "target": str(cert.target),
        "cofiltration": [str(c) for c in cert.cofiltration],
        "pieces": [str(p) for p in cert.pieces],
        "sequences": [
            {
                "index": list(s.index),
                "verified": s.verified,
                "piece": io.group_to_json(s.k.src),
                "middle": io.group_to_json(s.k.dst),
                "quotient": io.group_to_json(s.i.dst),
                "k": io.matrix_to_json(s.k.matrix),
                "i": io.matrix_to_json(s.i.matrix),
            }
            for s in cert.sess
        ],
    })
    return 0 if all(s.verified for s in cert.sess) else 3


# -- solve ---------------------------------------------------------------------------

def cmd_solve(args, out: _Out) -> int:
    if args.shape == "two-line":
        fiber = tuple(FgaGroup.parse(g) for g in args.fiber) if args.fiber else (Z, Z)
        groups = two_line_solve(args.m, args.pmax, fiber)
    elif args.shape == "two-column":
        groups = two_column_solve(args.n, args.kmax)
    else:
        T = _expect(_read(args), "page_template")
        res = solve_template(T)
        for name, g in res.assignment.items():
            out.text(f"{name} = {g}")
        out.data({"assignment": {name: str(g) for name, g in res.assignment.items()}})
        return 0
    out.text(" ".join(str(g) for g in groups))
    out.data({"groups": [str(g) for g in groups]})
    return 0


# -- library -------------------------------------------------------------------------

def cmd_library(args, out: _Out) -> int:
    name = args.name
    if name == "hopf":
        obj = hopf_les_template(args.n or 6)
    elif name == "z4":
        obj = z4_extension_filtration()
    elif name == "bicomplex":
        obj = Bicomplex({(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1},
                        {(1, 0): [[1]], (1, 1): [[1]]}, {(0, 1): [[1]], (1, 1): [[-1]]})
    else:
        spec = CwComplexSpec(name, args.n or 0)
        variant = "cohomology" if args.cohomology else "homology"
        obj = cw_library(spec, variant)
        if args.filtered:
            obj = skeletal_filtration(obj)
        elif args.trivial_filtration:
            obj = trivial_filtration(obj)
    text = io.emit(obj)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        out.note(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# -- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--quiet", action="store_true", help="suppress commentary")

    def with_input(p):
        p.add_argument("file", nargs="?", help="input document (or use --input)")
        p.add_argument("--input", help="input document")
        return p

    ap = argparse.ArgumentParser(prog="specseq", description=__doc__.splitlines()[0], parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    p = with_input(sub.add_parser("homology", parents=[common], help="homology of a chain complex"))
    p.add_argument("--at", help="single position (an integer or [n,l])")
    p.add_argument("--all", action="store_true", help="every position (default)")
    p.set_defaults(fn=cmd_homology)

    p = with_input(sub.add_parser("exact", parents=[common], help="exactness report"))
    p.add_argument("--window", nargs=2, type=int, metavar=("LO", "HI"))
    p.set_defaults(fn=cmd_exact)

    p = with_input(sub.add_parser("validate", parents=[common], help="check a document's invariants"))
    p.set_defaults(fn=cmd_validate)

    p = with_input(sub.add_parser("les-solve", parents=[common], help="resolve unknowns of an exact sequence"))
    p.set_defaults(fn=cmd_les_solve)

    p = with_input(sub.add_parser("pages", parents=[common], help="render pages in (p,q) coordinates"))
    p.add_argument("--max-page", type=int, default=3)
    p.add_argument("--window", nargs=4, type=int, metavar=("P0", "P1", "Q0", "Q1"))
    p.set_defaults(fn=cmd_pages)

    p = with_input(sub.add_parser("infinity", parents=[common], help="render the E_inf page"))
    p.add_argument("--window", nargs=4, type=int, metavar=("P0", "P1", "Q0", "Q1"))
    p.set_defaults(fn=cmd_infinity)

    p = with_input(sub.add_parser("converge", parents=[common], help="built-from certificate for H_n"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, default=None, help="filtration row of the index (default: the stable row L)")
    p.set_defaults(fn=cmd_converge)

    p = sub.add_parser("solve", parents=[common], help="forced-differential solver")
    p.add_argument("shape", choices=["two-line", "two-column", "template"])
    p.add_argument("file", nargs="?")
    p.add_argument("--input")
    p.add_argument("--m", type=int, default=1, help="height of the second row")
    p.add_argument("--pmax", type=int, default=10)
    p.add_argument("--fiber", nargs=2, metavar=("G0", "GM"), help="coefficient groups of the two rows")
    p.add_argument("--n", type=int, default=2, help="position of the second column")
    p.add_argument("--kmax", type=int, default=9)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("library", parents=[common], help="emit a canned document")
    p.add_argument("name", help="sphere, torus, rp, cp, hopf, z4 or bicomplex")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--cohomology", action="store_true")
    p.add_argument("--filtered", action="store_true", help="skeletal filtration instead of the complex")
    p.add_argument("--trivial-filtration", action="store_true", help="one-step filtration")
    p.add_argument("--out", help="write to this file instead of stdout")
    p.set_defaults(fn=cmd_library)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = _Out(args)
    try:
        return args.fn(args, out)
    except SpecSeqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        unresolved = getattr(exc, "unresolved", None)
        if unresolved:
            print(f"unresolved: {', '.join(map(str, unresolved))}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last line of defence for the exit-code contract
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
