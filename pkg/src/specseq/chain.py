"""Chain complexes over successor structures.

A successor structure is an index set with a successor map ``S``.  A chain
complex stores groups ``A_i`` and maps ``maps[i] : A_{S(i)} -> A_i``; the
homology reported by :func:`homology_at` for ``i`` sits at ``A_{S(i)}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ChainConditionViolated,
    Inconsistent,
    IsoNotInvertible,
    SchemaError,
    SquareDoesNotCommute,
    Underdetermined,
)
from .fga import FgaGroup, GroupHom, Presentation, Subquotient, image, kernel

_TRIVIAL = Presentation.trivial()

KINDS = ("nat", "int", "int_down", "nat_x_fin", "int_x_fin")


@dataclass(frozen=True)
class SuccessorStructure:
    """Index set with a successor.

    ``nat`` and ``int`` step ``n -> n+1``; ``int_down`` steps ``n -> n-1`` (the
    natural choice for cochain complexes).  The ``*_x_fin`` kinds index pairs
    ``(n, l)`` with ``0 <= l < k`` and ``S(n, k-1) = (n+1, 0)``.
    """

    kind: str
    k: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown successor structure {self.kind!r}")
        if self.kind.endswith("_x_fin") and self.k < 1:
            raise SchemaError("fin factor must have at least one element")

    @property
    def paired(self) -> bool:
        return self.kind.endswith("_x_fin")

    def normalize(self, i):
        if self.paired:
            n, l = i
            return (int(n), int(l))
        return int(i)

    def contains(self, i) -> bool:
        i = self.normalize(i)
        if self.paired:
            ok = 0 <= i[1] < self.k
            return ok and (i[0] >= 0 or self.kind == "int_x_fin")
        return i >= 0 or self.kind != "nat"

    def succ(self, i):
        i = self.normalize(i)
        if self.kind in ("nat", "int"):
            return i + 1
        if self.kind == "int_down":
            return i - 1
        n, l = i
        return (n, l + 1) if l < self.k - 1 else (n + 1, 0)

    def pred(self, i):
        """Inverse successor, or ``None`` at the start of ``nat``-like indices."""
        i = self.normalize(i)
        if self.kind == "nat":
            return i - 1 if i > 0 else None
        if self.kind == "int":
            return i - 1
        if self.kind == "int_down":
            return i + 1
        n, l = i
        if l > 0:
            return (n, l - 1)
        if n == 0 and self.kind == "nat_x_fin":
            return None
        return (n - 1, self.k - 1)

    def add(self, i, m: int):
        """``i + m``: the ``m``-fold successor (``m >= 0``)."""
        for _ in range(m):
            i = self.succ(i)
        return self.normalize(i)

    def walk(self, start, count: int) -> list:
        out, i = [], self.normalize(start)
        for _ in range(count):
            out.append(i)
            i = self.succ(i)
        return out

    def order_key(self, i):
        """Sort key following the successor direction."""
        i = self.normalize(i)
        return -i if self.kind == "int_down" else i

    def to_json(self):
        return {self.kind: self.k} if self.paired else self.kind


NAT = SuccessorStructure("nat")
INT = SuccessorStructure("int")
INT_DOWN = SuccessorStructure("int_down")


def nat_x_fin(k: int) -> SuccessorStructure:
    return SuccessorStructure("nat_x_fin", k)


def int_x_fin(k: int) -> SuccessorStructure:
    return SuccessorStructure("int_x_fin", k)


class ChainComplex:
    """Groups ``A_i`` and maps ``maps[i] : A_{S(i)} -> A_i``.

    Missing groups are trivial and missing maps are zero.
    """

    def __init__(self, index: SuccessorStructure, groups: dict, maps: dict | None = None):
        self.index = index
        self.groups = {index.normalize(i): P for i, P in groups.items()}
        self.maps: dict = {}
        for i, f in (maps or {}).items():
            i = index.normalize(i)
            src, dst = self.group(index.succ(i)), self.group(i)
            if f.src.ambient != src.ambient or f.dst.ambient != dst.ambient:
                raise SchemaError(f"map at {i} has shape {f.matrix.shape}, expected ({dst.ambient}, {src.ambient})")
            self.maps[i] = f

    def group(self, i) -> Presentation:
        return self.groups.get(self.index.normalize(i), _TRIVIAL)

    def map(self, i) -> GroupHom:
        """``A_{S(i)} -> A_i``; zero when absent."""
        i = self.index.normalize(i)
        f = self.maps.get(i)
        if f is None:
            f = GroupHom.zero(self.group(self.index.succ(i)), self.group(i))
        return f

    def out_of(self, a) -> GroupHom:
        """The map leaving position ``a``."""
        p = self.index.pred(a)
        if p is None:
            return GroupHom.zero(self.group(a), _TRIVIAL)
        return self.map(p)

    def positions(self) -> list:
        """Every position touched by a group or a map, in successor order."""
        pos = set(self.groups)
        for i in self.maps:
            pos.add(i)
            pos.add(self.index.succ(i))
        return sorted(pos, key=self.index.order_key)

    def __repr__(self):
        body = ", ".join(f"{i}: {self.group(i)}" for i in self.positions())
        return f"ChainComplex[{self.index.kind}]({body})"


def validate_chain(C: ChainComplex) -> list:
    """Middle positions ``S(i)`` where ``maps[i] o maps[S(i)]`` is nonzero."""
    bad = []
    for i in sorted(C.maps, key=C.index.order_key):
        j = C.index.succ(i)
        if j in C.maps and not (C.maps[i] @ C.maps[j]).is_zero():
            bad.append(j)
    return bad


def _homology_sq(C: ChainComplex, a) -> Subquotient:
    out = C.out_of(a)
    into = C.map(a)
    if not (out @ into).is_zero():
        raise ChainConditionViolated(f"d o d is nonzero at position {a}", index=a)
    return Subquotient(kernel(out), image(into))


def homology_at(C: ChainComplex, i) -> FgaGroup:
    """``ker(maps[i]) / im(maps[S(i)])``, the homology at position ``A_{S(i)}``."""
    a = C.index.succ(i)
    out, into = C.map(i), C.map(a)
    if not (out @ into).is_zero():
        raise ChainConditionViolated(f"d o d is nonzero at index {i}", index=i)
    return Subquotient(kernel(out), image(into)).canonical


def homology_at_position(C: ChainComplex, a) -> FgaGroup:
    """Homology at ``A_a``, also defined where ``a`` has no predecessor."""
    return _homology_sq(C, a).canonical


def homology_table(C: ChainComplex) -> dict:
    return {a: homology_at_position(C, a) for a in C.positions()}


@dataclass
class ExactnessEntry:
    position: object
    exact: bool
    defect: FgaGroup


@dataclass
class ExactnessReport:
    entries: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.exact for e in self.entries)

    def failures(self) -> list:
        return [e for e in self.entries if not e.exact]

    def __bool__(self):
        return self.ok


def is_exact(C: ChainComplex, window=None) -> ExactnessReport:
    """Per-position check that kernel equals image.

    ``window`` is an iterable of positions; by default every position touched
    by the complex.  The two ends of a finite complex count as positions, so a
    complex that should only be exact in its interior needs an explicit window.
    """
    positions = C.positions() if window is None else [C.index.normalize(a) for a in window]
    report = ExactnessReport()
    for a in positions:
        H = _homology_sq(C, a).canonical
        report.entries.append(ExactnessEntry(a, H.is_trivial, H))
    return report


def interior(C: ChainComplex) -> list:
    pos = C.positions()
    return pos[1:-1]


# -- splicing ------------------------------------------------------------------

def splice(
    family: dict,
    k: int,
    m,
    iso_a: dict,
    iso_b: dict,
    outer: SuccessorStructure = INT,
) -> ChainComplex:
    """Glue a family of exact complexes ``G^n`` into one over ``N x fin_k``.

    ``iso_a[n] : G^{n+1}_m -> G^n_{m+k}`` and ``iso_b[n] : G^{n+1}_{m+1} ->
    G^n_{m+k+1}`` must be invertible and make the square with the maps of
    ``G^{n+1}`` at ``m`` and ``G^n`` at ``m+k`` commute.  Position ``(n, l)``
    of the result is ``G^n_{m+l}`` for ``0 <= l < k``; the map
    ``(n+1, 0) -> (n, k-1)`` is ``iso_a[n]`` followed by ``G^n_{m+k} ->
    G^n_{m+k-1}``.
    """
    if k < 2:
        raise ValueError("splice needs k >= 2")
    ns = sorted(family)
    if not ns:
        raise ValueError("empty family")
    M = family[ns[0]].index
    kind = "int_x_fin" if outer.kind == "int" else "nat_x_fin"
    H = SuccessorStructure(kind, k)
    at = lambda l: M.add(m, l)  # noqa: E731

    for n in ns:
        if n + 1 not in family:
            continue
        G, Gup = family[n], family[n + 1]
        a, b = iso_a[n], iso_b[n]
        for name, iso, src, dst in (
            ("iso_a", a, Gup.group(at(0)), G.group(at(k))),
            ("iso_b", b, Gup.group(at(1)), G.group(at(k + 1))),
        ):
            if iso.src.ambient != src.ambient or iso.dst.ambient != dst.ambient:
                raise IsoNotInvertible(f"{name}[{n}] has the wrong endpoints")
            if not iso.check().is_isomorphism():
                raise IsoNotInvertible(f"{name}[{n}] is not invertible")
        lhs = a @ Gup.map(at(0))
        rhs = G.map(at(k)) @ b
        if not lhs.equals(rhs):
            raise SquareDoesNotCommute(f"gluing square at n={n} does not commute")

    groups, maps = {}, {}
    for n in ns:
        G = family[n]
        for l in range(k):
            groups[(n, l)] = G.group(at(l))
    for n in ns:
        G = family[n]
        for l in range(k - 1):
            maps[(n, l)] = G.map(at(l))
        if n + 1 in family:
            conn = G.map(at(k - 1)) @ iso_a[n]
            maps[(n, k - 1)] = GroupHom(groups[(n + 1, 0)], groups[(n, k - 1)], conn.matrix)
    return ChainComplex(H, groups, maps)


# -- long exact sequence inference ---------------------------------------------

@dataclass(frozen=True)
class Unknown:
    name: str


@dataclass(frozen=True)
class Symbol:
    """A group that is given but not computed, such as a higher homotopy group."""

    name: str


@dataclass
class LesTemplate:
    """An exact sequence laid out along ``window`` with some entries unknown.

    ``window`` lists consecutive positions in successor order.  Positions of
    the window without an entry are the trivial group; positions outside the
    window are not constrained.
    """

    index: SuccessorStructure
    window: list
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        self.window = [self.index.normalize(a) for a in self.window]
        self.entries = {self.index.normalize(a): v for a, v in self.entries.items()}
        for a, b in zip(self.window, self.window[1:]):
            if self.index.succ(a) != b:
                raise SchemaError(f"window is not consecutive at {a} -> {b}")
        names = [v.name for v in self.entries.values() if isinstance(v, Unknown)]
        if len(set(names)) != len(names):
            raise SchemaError("unknown names must be distinct")
        outside = [a for a in self.entries if a not in set(self.window)]
        if outside:
            raise SchemaError(f"entries outside the window: {outside}")

    def entry(self, a):
        return self.entries.get(self.index.normalize(a), FgaGroup())

    def unknowns(self) -> list[str]:
        return [self.entries[a].name for a in self.window if isinstance(self.entries.get(a), Unknown)]


class _Classes:
    """Union-find over positions; each class carries a group, symbols, or nothing."""

    def __init__(self, template: LesTemplate):
        self.parent = {a: a for a in template.window}
        self.value: dict = {}
        self.symbols: dict = {a: set() for a in template.window}
        for a in template.window:
            v = template.entry(a)
            if isinstance(v, FgaGroup):
                self.value[a] = v
            elif isinstance(v, Symbol):
                self.symbols[a].add(v.name)

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def is_zero(self, a) -> bool:
        v = self.value.get(self.find(a))
        return v is not None and v.is_trivial

    def assign(self, a, g: FgaGroup, why: str) -> bool:
        r = self.find(a)
        cur = self.value.get(r)
        if cur is not None:
            if cur != g:
                raise Inconsistent(f"{why}: position {a} would be both {cur} and {g}")
            return False
        self.value[r] = g
        return True

    def union(self, a, b, why: str) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        va, vb = self.value.get(ra), self.value.get(rb)
        if va is not None and vb is not None and va != vb:
            raise Inconsistent(f"{why}: {va} and {vb} are forced to be isomorphic")
        self.parent[rb] = ra
        if va is None and vb is not None:
            self.value[ra] = vb
        self.symbols[ra] |= self.symbols.pop(rb)
        return True


def les_solve(T: LesTemplate) -> dict:
    """Resolve the unknowns of an exact sequence by two local rules.

    R1: in a stretch ``0 -> X -> Y -> 0`` the middle map is an isomorphism.
    R2: in a stretch ``0 -> X -> 0`` the middle group is trivial.

    Returns ``{name: FgaGroup | str}`` where a string is the name of a symbolic
    group the unknown was shown isomorphic to.  Raises :class:`Underdetermined`
    (with the partial assignment) when an unknown is left open, and
    :class:`Inconsistent` when the rules force two different groups together.
    """
    cls = _Classes(T)
    w = T.window
    changed = True
    while changed:
        changed = False
        for t in range(1, len(w) - 1):
            if cls.is_zero(w[t - 1]) and cls.is_zero(w[t + 1]):
                changed |= cls.assign(w[t], FgaGroup(), f"R2 around {w[t]}")
        for t in range(1, len(w) - 2):
            if cls.is_zero(w[t - 1]) and cls.is_zero(w[t + 2]):
                changed |= cls.union(w[t], w[t + 1], f"R1 between {w[t]} and {w[t + 1]}")

    result, open_names = {}, []
    for a in w:
        v = T.entries.get(a)
        if not isinstance(v, Unknown):
            continue
        r = cls.find(a)
        if r in cls.value:
            result[v.name] = cls.value[r]
        elif cls.symbols[r]:
            result[v.name] = " = ".join(sorted(cls.symbols[r]))
        else:
            open_names.append(v.name)
    if open_names:
        raise Underdetermined(
            f"could not determine {', '.join(open_names)}", unresolved=open_names, partial=result
        )
    return result


def realize_les(T: LesTemplate, assignment: dict) -> tuple[ChainComplex, list]:
    """Concrete sequence carrying the maps the rules force.

    Symbols become ``Z``.  Every group is given by its canonical diagonal
    presentation, so a forced isomorphism is an identity matrix; all other
    maps are zero.  Returns the complex and the positions at which the rules
    claim exactness.
    """
    canon = {}
    for a in T.window:
        v = T.entries.get(a, FgaGroup())
        if isinstance(v, Unknown):
            v = assignment[v.name]
        if not isinstance(v, FgaGroup):
            v = FgaGroup(1)
        canon[a] = v
    groups = {a: g.presentation() for a, g in canon.items()}
    w, maps, certified = T.window, {}, set()
    for t in range(1, len(w) - 1):
        if canon[w[t - 1]].is_trivial and canon[w[t + 1]].is_trivial:
            certified.add(w[t])
    for t in range(1, len(w) - 2):
        if canon[w[t - 1]].is_trivial and canon[w[t + 2]].is_trivial and canon[w[t]] == canon[w[t + 1]]:
            # the map runs from w[t+1] = S(w[t]) down to w[t]
            maps[w[t]] = GroupHom.identity(groups[w[t]])
            certified.update((w[t], w[t + 1]))
    return ChainComplex(T.index, groups, maps), [a for a in w if a in certified]
