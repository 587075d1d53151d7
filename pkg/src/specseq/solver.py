"""Forced differentials on sparse cohomological spectral sequences.

Only two shapes are handled: two rows ``q in {0, m}`` and two columns
``p in {0, n}``, both in the first quadrant with ``d_r`` of degree
``(r, 1 - r)``.  Entries are groups or named unknowns (one name may sit at
several positions); the ``E_inf`` page is given.  Three rules run to a fixed
point:

F1. an entry that must die and has exactly one differential that could be
    nonzero forces that differential to be injective (if it leaves the entry)
    or surjective (if it arrives);
F2. an entry that no differential can touch equals its ``E_inf`` value;
F3. a differential forced to be both injective and surjective is an
    isomorphism, so its two ends carry the same group.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .chain import NAT, ChainComplex, homology_at_position
from .errors import Inconsistent, SchemaError, Underdetermined
from .fga import FgaGroup, GroupHom

Z = FgaGroup(1)
ZERO = FgaGroup()


@dataclass
class SparsePageTemplate:
    """Skeleton of a page: ``shape`` is ``"two_line"`` (rows ``0`` and ``m``)
    or ``"two_column"`` (columns ``0`` and ``n``).

    ``entries`` maps in-range positions to an unknown name or an FgaGroup.
    Positions of the locus outside ``p <= p_range`` / ``q <= q_range`` are
    opaque: they may carry anything and are never resolved.
    """

    shape: str
    width: int
    entries: dict
    einf: dict = field(default_factory=lambda: {(0, 0): Z})
    p_range: int = 0
    q_range: int = 0

    def __post_init__(self):
        if self.shape not in ("two_line", "two_column"):
            raise SchemaError(f"unknown template shape {self.shape!r}")
        if self.width < 1 or (self.shape == "two_column" and self.width < 2):
            raise SchemaError(f"{self.shape} needs a larger width, got {self.width}")
        self.entries = {(int(p), int(q)): v for (p, q), v in self.entries.items()}
        for x in self.entries:
            if not self.in_locus(x) or not self.in_range(x):
                raise SchemaError(f"entry {x} lies outside the template")

    def in_locus(self, x) -> bool:
        p, q = x
        if p < 0 or q < 0:
            return False
        if self.shape == "two_line":
            return q in (0, self.width)
        return p in (0, self.width)

    def in_range(self, x) -> bool:
        return x[0] <= self.p_range and x[1] <= self.q_range

    def out_edges(self, x) -> list:
        p, q = x
        out = []
        for r in range(2, q + 2):
            y = (p + r, q - r + 1)
            if self.in_locus(y):
                out.append((r, y))
        return out

    def in_edges(self, x) -> list:
        p, q = x
        out = []
        for r in range(2, p + 1):
            y = (p - r, q + r - 1)
            if self.in_locus(y):
                out.append((r, y))
        return out

    def positions(self) -> list:
        return sorted(self.entries)

    def einf_at(self, x) -> FgaGroup:
        return self.einf.get(x, ZERO)


class _Labels:
    def __init__(self, T: SparsePageTemplate):
        self.parent: dict = {}
        self.value: dict = {}
        self.key: dict = {}
        for x, v in T.entries.items():
            if isinstance(v, FgaGroup):
                k = ("pos", x)
                self._add(k)
                self.value[k] = v
            else:
                k = ("name", str(v))
                self._add(k)
            self.key[x] = k

    def _add(self, k):
        self.parent.setdefault(k, k)

    def find(self, k):
        while self.parent[k] != k:
            self.parent[k] = self.parent[self.parent[k]]
            k = self.parent[k]
        return k

    def at(self, x):
        k = self.key.get(x)
        return None if k is None else self.value.get(self.find(k))

    def assign(self, x, g: FgaGroup, why: str) -> bool:
        r = self.find(self.key[x])
        cur = self.value.get(r)
        if cur is not None:
            if cur != g:
                raise Inconsistent(f"{why}: entry {x} is {cur} but must be {g}")
            return False
        self.value[r] = g
        return True

    def union(self, x, y, why: str) -> bool:
        a, b = self.find(self.key[x]), self.find(self.key[y])
        if a == b:
            return False
        va, vb = self.value.get(a), self.value.get(b)
        if va is not None and vb is not None and va != vb:
            raise Inconsistent(f"{why}: {va} at {x} cannot be isomorphic to {vb} at {y}")
        self.parent[b] = a
        if va is None and vb is not None:
            self.value[a] = vb
        return True


@dataclass
class SolveResult:
    assignment: dict
    isomorphisms: list
    injective: set
    surjective: set
    template: SparsePageTemplate


def solve_template(T: SparsePageTemplate) -> SolveResult:
    """Run F1-F3 to a fixed point and return the values of every unknown.

    Raises :class:`Underdetermined` if an in-range unknown is left open and
    :class:`Inconsistent` if the survival pattern cannot be met.
    """
    labels = _Labels(T)
    inj, surj = set(), set()
    isos: list = []

    def possible(edge) -> bool:
        # an edge may be nonzero unless an end is known to vanish
        _, a, b = edge
        for y in (a, b):
            if T.in_range(y):
                v = labels.at(y)
                if v is not None and v.is_trivial:
                    return False
        return True

    def edges_at(x) -> list:
        out = [(r, x, y) for r, y in T.out_edges(x)]
        into = [(r, y, x) for r, y in T.in_edges(x)]
        return [e for e in out + into if possible(e)]

    changed = True
    while changed:
        changed = False
        for x in T.positions():
            live = edges_at(x)
            target = T.einf_at(x)
            if not live:
                changed |= labels.assign(x, target, f"F2 at {x}")
                continue
            if target.is_trivial and len(live) == 1:
                e = live[0]
                bucket = inj if e[1] == x else surj
                if e not in bucket:
                    bucket.add(e)
                    changed = True
        for e in sorted(inj & surj):
            _, a, b = e
            if T.in_range(a) and T.in_range(b):
                if labels.union(a, b, f"F3 on d_{e[0]} {a} -> {b}"):
                    changed = True
                if e not in isos:
                    isos.append(e)

    result, open_names = {}, []
    names = []
    for x in T.positions():
        v = T.entries[x]
        if not isinstance(v, FgaGroup) and v not in names:
            names.append(v)
    for name in names:
        g = labels.value.get(labels.find(("name", str(name))))
        if g is None:
            open_names.append(name)
        else:
            result[name] = g
    if open_names:
        raise Underdetermined(
            f"could not determine {', '.join(map(str, open_names))}",
            unresolved=open_names,
            partial=result,
        )
    return SolveResult(result, sorted(isos), inj, surj, T)


def two_line_template(m: int, p_max: int, fiber=(Z, Z), einf=None) -> SparsePageTemplate:
    """Rows ``q = 0`` and ``q = m`` holding ``H^p(B; fiber[0])`` and ``H^p(B; fiber[1])``.

    With integer coefficients on both rows the two rows share the unknowns
    ``H^p``; a row with other coefficients gets its own unknowns.
    """
    if m < 1:
        raise SchemaError("the second row must sit above the first")
    g0, gm = fiber
    entries = {}
    P = p_max + m + 1
    for p in range(P + 1):
        entries[(p, 0)] = f"H{p}" if g0 == Z else f"H{p}[{g0}]"
        entries[(p, m)] = f"H{p}" if gm == Z else f"H{p}[{gm}]"
    return SparsePageTemplate("two_line", m, entries, einf or {(0, 0): Z}, P, m)


def two_column_template(n: int, k_max: int, einf=None) -> SparsePageTemplate:
    """Columns ``p = 0`` and ``p = n`` both holding the unknowns ``H^q``."""
    Q = k_max + n - 1
    entries = {}
    for q in range(Q + 1):
        entries[(0, q)] = f"H{q}"
        entries[(n, q)] = f"H{q}"
    return SparsePageTemplate("two_column", n, entries, einf or {(0, 0): Z}, n, Q)


def _ordered(result: SolveResult, count: int) -> list:
    out = []
    for p in range(count + 1):
        name = f"H{p}"
        if name not in result.assignment:
            raise Underdetermined(f"H{p} is not determined", unresolved=[name], partial=result.assignment)
        out.append(result.assignment[name])
    return out


def two_line_solve(m: int, p_max: int, fiber=(Z, Z), einf=None) -> list:
    """``H^p(B)`` for ``0 <= p <= p_max`` from a fibration whose fibre has
    cohomology only in degrees ``0`` and ``m`` and whose total space has the
    given ``E_inf`` (a point by default)."""
    T = two_line_template(m, p_max, fiber, einf)
    try:
        res = solve_template(T)
    except Underdetermined as exc:
        # unknowns beyond p_max may legitimately stay open
        res = SolveResult(exc.partial, [], set(), set(), T)
    return _ordered(res, p_max)


def two_column_solve(n: int, k_max: int, einf=None) -> list:
    """``H^k`` of the fibre for ``0 <= k <= k_max`` from a fibration over ``S^n``
    (columns ``0`` and ``n``) with contractible total space by default."""
    if n < 2:
        raise SchemaError("two-column solve needs n >= 2")
    T = two_column_template(n, k_max, einf)
    try:
        res = solve_template(T)
    except Underdetermined as exc:
        res = SolveResult(exc.partial, [], set(), set(), T)
    return _ordered(res, k_max)


def realize(result: SolveResult) -> dict:
    """``E_inf`` of the explicit page with forced isomorphisms as identities.

    Every entry gets its canonical presentation; forced isomorphisms become
    identity matrices and every other differential is zero.  Returns the
    homology at each in-range position whose differentials stay in range.
    """
    T = result.template
    value = {}
    for x, v in T.entries.items():
        value[x] = v if isinstance(v, FgaGroup) else result.assignment.get(v)
    iso = {(a, b) for _, a, b in result.isomorphisms}
    out = {}
    for x in T.positions():
        ins = [y for _, y in T.in_edges(x)]
        outs = [y for _, y in T.out_edges(x)]
        if any(not T.in_range(y) for y in ins + outs) or value[x] is None:
            continue
        P = value[x].presentation()
        src = value[ins[0]].presentation() if ins else None
        dst = value[outs[0]].presentation() if outs else None
        groups = {1: P}
        maps = {}
        if dst is not None:
            groups[0] = dst
            maps[0] = GroupHom(P, dst, _iso_or_zero(P, dst, (x, outs[0]) in iso))
        if src is not None:
            groups[2] = src
            maps[1] = GroupHom(src, P, _iso_or_zero(src, P, (ins[0], x) in iso))
        C = ChainComplex(NAT, groups, maps)
        out[x] = homology_at_position(C, 1)
    return out


def _iso_or_zero(P, Q, is_iso: bool):
    from .fga import identity, zeros

    if is_iso and P.ambient == Q.ambient:
        return identity(P.ambient)
    return zeros(Q.ambient, P.ambient)


def render(groups: list) -> str:
    return " ".join(str(g) for g in groups)
