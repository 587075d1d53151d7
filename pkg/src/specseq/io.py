"""JSON documents for every input kind, with canonical emission.

A document is ``{"version": 1, "kind": KIND, ...}``.  Matrices are
``{"rows": r, "cols": c, "data": [[...], ...]}``; entries may be decimal
strings, and integers too large for a double are emitted that way.
``emit(parse(emit(x))) == emit(x)`` holds for every kind.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from .builders import Bicomplex, FilteredComplex
from .chain import ChainComplex, LesTemplate, SuccessorStructure, Symbol, Unknown
from .couple import ExactCouple
from .errors import SchemaError
from .fga import FgaGroup, GroupHom, Presentation, int_matrix
from .graded import Fold, GradedGroup, GradedHom
from .solver import SparsePageTemplate

VERSION = 1
KINDS = ("chain_complex", "les_template", "filtered_complex", "bicomplex", "exact_couple", "page_template")
_SAFE = 2**53


@dataclass
class Document:
    kind: str
    payload: Any
    meta: dict | None = None


# -- primitives ----------------------------------------------------------------------

def _need(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def _int(v, where: str) -> int:
    if isinstance(v, bool):
        raise SchemaError(f"{where}: expected an integer, got {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        try:
            return int(v.strip())
        except ValueError:
            pass
    raise SchemaError(f"{where}: expected an integer, got {v!r}")


def _num(v: int):
    return v if -_SAFE < v < _SAFE else str(v)


def matrix_to_json(M) -> dict:
    r, c = M.shape
    return {"rows": r, "cols": c, "data": [[_num(int(v)) for v in row] for row in M.tolist()]}


def matrix_from_json(obj, where: str = "matrix", rows: int | None = None, cols: int | None = None):
    if isinstance(obj, list):
        obj = {"rows": len(obj), "cols": len(obj[0]) if obj else 0, "data": obj}
    r = _int(_need(obj, "rows", where), where)
    c = _int(_need(obj, "cols", where), where)
    data = _need(obj, "data", where)
    if r < 0 or c < 0:
        raise SchemaError(f"{where}: negative dimensions")
    if not isinstance(data, list) or len(data) != r or any(not isinstance(row, list) or len(row) != c for row in data):
        raise SchemaError(f"{where}: data does not match {r}x{c}")
    if (rows is not None and r != rows) or (cols is not None and c != cols):
        raise SchemaError(f"{where}: expected {rows}x{cols}, got {r}x{c}")
    vals = [[_int(v, where) for v in row] for row in data]
    return int_matrix(vals, r, c)


def group_to_json(P: Presentation):
    return {"ambient": P.ambient, "relations": matrix_to_json(P.relations)}


def group_from_json(obj, where: str = "group") -> Presentation:
    if isinstance(obj, str):
        try:
            return FgaGroup.parse(obj).presentation()
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from exc
    n = _int(_need(obj, "ambient", where), where)
    rel = obj.get("relations")
    if rel is None:
        return Presentation.free(n)
    return Presentation(n, matrix_from_json(rel, where, rows=n))


def _canonical_or_unknown(v):
    if isinstance(v, Unknown):
        return {"unknown": v.name}
    if isinstance(v, Symbol):
        return {"symbol": v.name}
    if isinstance(v, FgaGroup):
        return str(v)
    return str(v.canonical)


def _entry_from_json(obj, where: str):
    if isinstance(obj, dict) and "unknown" in obj:
        return Unknown(str(obj["unknown"]))
    if isinstance(obj, dict) and "symbol" in obj:
        return Symbol(str(obj["symbol"]))
    return group_from_json(obj, where).canonical


def index_kind_from_json(obj) -> SuccessorStructure:
    if isinstance(obj, str):
        return SuccessorStructure(obj)
    if isinstance(obj, dict) and len(obj) == 1:
        (kind, k), = obj.items()
        return SuccessorStructure(kind, _int(k, "index_kind"))
    raise SchemaError(f"bad index_kind {obj!r}")


def _index_to_json(i):
    return list(i) if isinstance(i, tuple) else i


def _index_from_json(v, S: SuccessorStructure, where: str):
    try:
        if S.paired:
            return (_int(v[0], where), _int(v[1], where))
        return _int(v, where)
    except (TypeError, IndexError) as exc:
        raise SchemaError(f"{where}: bad index {v!r}") from exc


def _bi(v, where) -> tuple:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise SchemaError(f"{where}: expected a pair, got {v!r}")
    return (_int(v[0], where), _int(v[1], where))


# -- chain complexes -----------------------------------------------------------------

def chain_to_json(C: ChainComplex) -> dict:
    key = C.index.order_key
    return {
        "index_kind": C.index.to_json(),
        "groups": [
            {"index": _index_to_json(i), "group": group_to_json(C.groups[i])}
            for i in sorted(C.groups, key=key)
        ],
        "maps": [
            {"index": _index_to_json(i), "matrix": matrix_to_json(C.maps[i].matrix)}
            for i in sorted(C.maps, key=key)
        ],
    }


def chain_from_json(obj) -> ChainComplex:
    S = index_kind_from_json(_need(obj, "index_kind", "chain_complex"))
    groups = {}
    for e in obj.get("groups", []):
        i = _index_from_json(_need(e, "index", "group"), S, "group")
        groups[i] = group_from_json(_need(e, "group", f"group {i}"), f"group {i}")
    maps = {}
    for e in obj.get("maps", []):
        i = _index_from_json(_need(e, "index", "map"), S, "map")
        src, dst = groups.get(S.succ(i), Presentation.trivial()), groups.get(i, Presentation.trivial())
        M = matrix_from_json(_need(e, "matrix", f"map {i}"), f"map {i}", dst.ambient, src.ambient)
        maps[i] = GroupHom(src, dst, M)
    return ChainComplex(S, groups, maps)


def les_to_json(T: LesTemplate) -> dict:
    return {
        "index_kind": T.index.to_json(),
        "window": {"start": _index_to_json(T.window[0]) if T.window else 0, "length": len(T.window)},
        "entries": [
            {"index": _index_to_json(a), "group": _canonical_or_unknown(T.entries[a])}
            for a in T.window
            if a in T.entries
        ],
    }


def les_from_json(obj) -> LesTemplate:
    S = index_kind_from_json(_need(obj, "index_kind", "les_template"))
    w = _need(obj, "window", "les_template")
    start = _index_from_json(_need(w, "start", "window"), S, "window")
    window = S.walk(start, _int(_need(w, "length", "window"), "window"))
    entries = {}
    for e in obj.get("entries", []):
        a = _index_from_json(_need(e, "index", "entry"), S, "entry")
        entries[a] = _entry_from_json(_need(e, "group", f"entry {a}"), f"entry {a}")
    return LesTemplate(S, window, entries)


# -- filtered complexes and bicomplexes ----------------------------------------------

def filtered_to_json(F: FilteredComplex) -> dict:
    levels, incs = F.to_levels()
    return {
        "levels": [
            {
                "ranks": [[n, r] for n, r in sorted(ranks.items())],
                "differentials": [{"degree": n, "matrix": matrix_to_json(M)} for n, M in sorted(d.items())],
            }
            for ranks, d in levels
        ],
        "inclusions": [
            [{"degree": n, "matrix": matrix_to_json(M)} for n, M in sorted(inc.items())] for inc in incs
        ],
    }


def filtered_from_json(obj) -> FilteredComplex:
    levels = []
    for s, lv in enumerate(_need(obj, "levels", "filtered_complex")):
        where = f"level {s}"
        ranks = {_int(n, where): _int(r, where) for n, r in _need(lv, "ranks", where)}
        d = {}
        for e in lv.get("differentials", []):
            n = _int(_need(e, "degree", where), where)
            d[n] = matrix_from_json(_need(e, "matrix", where), f"{where} d_{n}", ranks.get(n - 1, 0), ranks.get(n, 0))
        levels.append((ranks, d))
    incs = []
    raw = obj.get("inclusions", [])
    if len(raw) != max(len(levels) - 1, 0):
        raise SchemaError(f"expected {max(len(levels) - 1, 0)} inclusion lists, got {len(raw)}")
    for s, lst in enumerate(raw, start=1):
        inc = {}
        for e in lst:
            n = _int(_need(e, "degree", "inclusion"), "inclusion")
            inc[n] = matrix_from_json(
                _need(e, "matrix", "inclusion"), f"inclusion {s} degree {n}",
                levels[s][0].get(n, 0), levels[s - 1][0].get(n, 0),
            )
        incs.append(inc)
    return FilteredComplex.from_levels(levels, incs)


def bicomplex_to_json(B: Bicomplex) -> dict:
    cells = sorted(x for x, r in B.ranks.items() if int(r) > 0)
    return {
        "convention": B.convention,
        "cells": [{"index": list(x), "rank": int(B.ranks[x])} for x in cells],
        "horizontal": [{"index": list(x), "matrix": matrix_to_json(int_matrix(B.dh[x]))} for x in sorted(B.dh)],
        "vertical": [{"index": list(x), "matrix": matrix_to_json(int_matrix(B.dv[x]))} for x in sorted(B.dv)],
    }


def bicomplex_from_json(obj) -> Bicomplex:
    ranks = {}
    for e in _need(obj, "cells", "bicomplex"):
        ranks[_bi(_need(e, "index", "cell"), "cell")] = _int(_need(e, "rank", "cell"), "cell")
    r = lambda x: ranks.get(x, 0)  # noqa: E731
    dh, dv = {}, {}
    for e in obj.get("horizontal", []):
        a, b = _bi(_need(e, "index", "horizontal"), "horizontal")
        dh[(a, b)] = matrix_from_json(_need(e, "matrix", "horizontal"), f"dh at {(a, b)}", r((a - 1, b)), r((a, b)))
    for e in obj.get("vertical", []):
        a, b = _bi(_need(e, "index", "vertical"), "vertical")
        dv[(a, b)] = matrix_from_json(_need(e, "matrix", "vertical"), f"dv at {(a, b)}", r((a, b - 1)), r((a, b)))
    return Bicomplex(ranks, dh, dv, obj.get("convention", "anticommuting"))


# -- exact couples -------------------------------------------------------------------

def _fold_to_json(f: Fold | None):
    if f is None:
        return None
    return {"direction": list(f.direction), "functional": list(f.functional), "bound": f.bound}


def _fold_from_json(obj):
    if obj is None:
        return None
    try:
        return Fold(_bi(obj["direction"], "fold"), _bi(obj["functional"], "fold"), _int(obj["bound"], "fold"))
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"bad fold: {exc}") from exc


def graded_group_to_json(G: GradedGroup) -> dict:
    return {
        "groups": [{"index": list(x), "group": group_to_json(P)} for x, P in sorted(G.groups.items())],
        "fold": _fold_to_json(G.fold),
    }


def graded_group_from_json(obj, where) -> GradedGroup:
    groups = {}
    for e in _need(obj, "groups", where):
        x = _bi(_need(e, "index", where), where)
        groups[x] = group_from_json(_need(e, "group", where), f"{where} at {x}")
    return GradedGroup(groups, _fold_from_json(obj.get("fold")))


def graded_hom_to_json(f: GradedHom) -> dict:
    return {
        "degree": list(f.degree.shift),
        "maps": [{"index": list(x), "matrix": matrix_to_json(g.matrix)} for x, g in sorted(f.maps.items())],
        "fold": _fold_to_json(f.fold),
    }


def graded_hom_from_json(obj, src: GradedGroup, dst: GradedGroup, where) -> GradedHom:
    deg = _bi(_need(obj, "degree", where), where)
    maps = {}
    for e in obj.get("maps", []):
        x = _bi(_need(e, "index", where), where)
        y = (x[0] + deg[0], x[1] + deg[1])
        P, Q = src[x], dst[y]
        maps[x] = GroupHom(P, Q, matrix_from_json(_need(e, "matrix", where), f"{where} at {x}", Q.ambient, P.ambient))
    return GradedHom(src, dst, deg, maps, _fold_from_json(obj.get("fold")))


def couple_to_json(C: ExactCouple) -> dict:
    return {
        "coordinates": C.coordinates,
        "page": C.r,
        "D": graded_group_to_json(C.D),
        "E": graded_group_to_json(C.E),
        "i": graded_hom_to_json(C.i),
        "j": graded_hom_to_json(C.j),
        "k": graded_hom_to_json(C.k),
    }


def couple_from_json(obj) -> ExactCouple:
    D = graded_group_from_json(_need(obj, "D", "exact_couple"), "D")
    E = graded_group_from_json(_need(obj, "E", "exact_couple"), "E")
    i = graded_hom_from_json(_need(obj, "i", "exact_couple"), D, D, "i")
    j = graded_hom_from_json(_need(obj, "j", "exact_couple"), D, E, "j")
    k = graded_hom_from_json(_need(obj, "k", "exact_couple"), E, D, "k")
    for f in (i, j, k):
        f.check()
    coords = obj.get("coordinates", "ns")
    if coords not in ("ns", "pq"):
        raise SchemaError(f"coordinates must be 'ns' or 'pq', got {coords!r}")
    return ExactCouple(D, E, i, j, k, _int(obj.get("page", 2), "page"), coordinates=coords)


# -- page templates ------------------------------------------------------------------

def page_template_to_json(T: SparsePageTemplate) -> dict:
    return {
        "shape": T.shape,
        "width": T.width,
        "p_range": T.p_range,
        "q_range": T.q_range,
        "entries": [
            {"index": list(x), "group": str(v) if isinstance(v, FgaGroup) else {"unknown": str(v)}}
            for x, v in sorted(T.entries.items())
        ],
        "einf": [{"index": list(x), "group": str(g)} for x, g in sorted(T.einf.items())],
    }


def page_template_from_json(obj) -> SparsePageTemplate:
    entries = {}
    for e in _need(obj, "entries", "page_template"):
        x = _bi(_need(e, "index", "entry"), "entry")
        v = _entry_from_json(_need(e, "group", "entry"), f"entry {x}")
        entries[x] = v.name if isinstance(v, (Unknown, Symbol)) else v
    einf = {}
    for e in obj.get("einf", [{"index": [0, 0], "group": "Z"}]):
        einf[_bi(_need(e, "index", "einf"), "einf")] = group_from_json(_need(e, "group", "einf")).canonical
    return SparsePageTemplate(
        str(_need(obj, "shape", "page_template")),
        _int(_need(obj, "width", "page_template"), "width"),
        entries,
        einf,
        _int(obj.get("p_range", 0), "p_range"),
        _int(obj.get("q_range", 0), "q_range"),
    )


# -- documents -----------------------------------------------------------------------

_WRITERS = {
    "chain_complex": chain_to_json,
    "les_template": les_to_json,
    "filtered_complex": filtered_to_json,
    "bicomplex": bicomplex_to_json,
    "exact_couple": couple_to_json,
    "page_template": page_template_to_json,
}
_READERS = {
    "chain_complex": chain_from_json,
    "les_template": les_from_json,
    "filtered_complex": filtered_from_json,
    "bicomplex": bicomplex_from_json,
    "exact_couple": couple_from_json,
    "page_template": page_template_from_json,
}
_TYPES = (
    (ChainComplex, "chain_complex"),
    (LesTemplate, "les_template"),
    (FilteredComplex, "filtered_complex"),
    (Bicomplex, "bicomplex"),
    (ExactCouple, "exact_couple"),
    (SparsePageTemplate, "page_template"),
)


def kind_of(obj) -> str:
    for cls, kind in _TYPES:
        if isinstance(obj, cls):
            return kind
    raise TypeError(f"no document kind for {type(obj).__name__}")


def to_document(obj, meta: dict | None = None) -> Document:
    return Document(kind_of(obj), obj, meta)


def emit(doc) -> str:
    """Canonical text of a document (or of a bare payload object)."""
    if not isinstance(doc, Document):
        doc = to_document(doc)
    body = {"version": VERSION, "kind": doc.kind}
    if doc.meta:
        body["meta"] = doc.meta
    body.update(_WRITERS[doc.kind](doc.payload))
    return json.dumps(body, indent=1, sort_keys=False) + "\n"


def parse(text: str) -> Document:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError("a document must be a JSON object")
    version = obj.get("version", VERSION)
    if version != VERSION:
        raise SchemaError(f"unsupported document version {version!r}")
    kind = _need(obj, "kind", "document")
    if kind not in _READERS:
        raise SchemaError(f"unknown document kind {kind!r}")
    try:
        payload = _READERS[kind](obj)
    except SchemaError:
        raise
    except (TypeError, ValueError, KeyError, IndexError) as exc:
        if hasattr(exc, "exit_code"):
            raise
        raise SchemaError(f"malformed {kind}: {exc}") from exc
    return Document(kind, payload, obj.get("meta"))


def load(path: str) -> Document:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def dump(doc, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit(doc))
