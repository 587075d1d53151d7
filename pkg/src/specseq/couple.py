"""Exact couples, derived couples, pages, stabilisation and convergence.

An exact couple ``(D, E, i, j, k)`` is stored as graded groups and graded
homs with degrees ``iota``, ``eta`` and ``kappa``.  The couple handed in is
page 2; every call to :func:`derive` produces the next page.  Derived groups
are kept as subquotients of the previous page, and each page remembers how its
generators sit inside the page-2 ambient groups (``lineage``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .chain import NAT, ChainComplex, is_exact
from .errors import (
    AlgebraError,
    BoundViolated,
    DenominatorNotContained,
    NotStableIndex,
    NotWellDefined,
    WellDefinednessFailure,
)
from .fga import (
    FgaGroup,
    GroupHom,
    Presentation,
    Subgroup,
    Subquotient,
    hom_from_images,
    identity,
    image,
    kernel,
    zeros,
)
from .graded import BiDegree, BiIndex, GradedGroup, GradedHom, graded_compose, graded_is_zero

__all__ = [
    "ExactCouple",
    "Page",
    "BoundFunction",
    "BuiltFromCertificate",
    "validate_couple",
    "differential",
    "derive",
    "derived_sequence",
    "page",
    "stable_bounds",
    "infinity_page",
    "converge",
]


@dataclass
class ExactCouple:
    D: GradedGroup
    E: GradedGroup
    i: GradedHom
    j: GradedHom
    k: GradedHom
    r: int = 2
    # generators of each page-r group written in the page-2 ambient
    lineage_D: dict = field(default_factory=dict)
    lineage_E: dict = field(default_factory=dict)
    # "ns" for tower indexing, "pq" after cohomological reindexing
    coordinates: str = "ns"

    @property
    def iota(self) -> BiDegree:
        return self.i.degree

    @property
    def eta(self) -> BiDegree:
        return self.j.degree

    @property
    def kappa(self) -> BiDegree:
        return self.k.degree

    def window(self) -> tuple[int, int, int, int] | None:
        """Bounding box ``(a0, a1, b0, b1)`` of the stored supports."""
        keys = list(self.D.groups) + list(self.E.groups)
        if not keys:
            return None
        a = [x[0] for x in keys]
        b = [x[1] for x in keys]
        return (min(a), max(a), min(b), max(b))

    def D_keys(self) -> list[BiIndex]:
        """Stored D indices plus two steps into any folded (constant) region."""
        keys = set(self.D.groups)
        f = self.D.fold
        if f:
            for x in list(keys):
                for t in (1, 2):
                    keys.add((x[0] + t * f.direction[0], x[1] + t * f.direction[1]))
        return sorted(keys)

    def lineage(self, which: str, x) -> np.ndarray:
        table = self.lineage_D if which == "D" else self.lineage_E
        G = self.D if which == "D" else self.E
        key = G.key(x)
        if key in table:
            return table[key]
        return identity(G[x].ambient)


@dataclass
class Page:
    r: int
    E: GradedGroup
    d: GradedHom
    couple: ExactCouple


class BoundFunction:
    """Per-index bound ``B_x``: past ``B_x`` steps, ``E`` is trivial going
    against ``iota`` and ``D`` is trivial going along ``iota``."""

    def __init__(self, rule: Callable[[BiIndex], int], table: dict | None = None):
        self.rule = rule
        self.table = dict(table or {})

    def __call__(self, x) -> int:
        x = (int(x[0]), int(x[1]))
        return self.table.get(x, self.rule(x))


@dataclass
class ShortExact:
    """``0 -> piece --k--> C^n --i--> C^{n+1} -> 0`` with its verification."""

    n: int
    index: BiIndex
    k: GroupHom
    i: GroupHom
    verified: bool

    def complex(self) -> ChainComplex:
        return _ses_complex(self.k, self.i)


@dataclass
class BuiltFromCertificate:
    x: BiIndex
    target: FgaGroup
    cofiltration: list
    pieces: list
    sess: list
    page: int

    @property
    def nontrivial_pieces(self) -> list:
        return [p for p in self.pieces if not p.is_trivial]

    def chain(self) -> list:
        """The cofiltration with repeated terms (trivial pieces) dropped."""
        out = [self.cofiltration[0]] if self.cofiltration else []
        for piece, c in zip(self.pieces, self.cofiltration[1:]):
            if not piece.is_trivial:
                out.append(c)
        return out


# -- validation ----------------------------------------------------------------

def _vertex(report, name, x, into: GroupHom, out: GroupHom):
    if not (out @ into).is_zero():
        report.append((name, x, "composite is nonzero"))
        return
    H = Subquotient(kernel(out), image(into)).canonical
    if not H.is_trivial:
        report.append((name, x, str(H)))


def validate_couple(C: ExactCouple) -> list:
    """Exactness defects as ``(vertex, index, defect)`` triples; empty when exact.

    ``"D:i/j"`` checks ``im i = ker j`` at ``D^x``, ``"E:j/k"`` checks
    ``im j = ker k`` at ``E^x`` and ``"D:k/i"`` checks ``im k = ker i`` at ``D^x``.
    """
    report: list = []
    for x in C.D_keys():
        if C.D[x].is_trivial:
            continue
        _vertex(report, "D:i/j", x, C.i.apply_into(x), C.j.apply_at(x))
        _vertex(report, "D:k/i", x, C.k.apply_into(x), C.i.apply_at(x))
    for x in sorted(C.E.groups):
        if C.E[x].is_trivial:
            continue
        _vertex(report, "E:j/k", x, C.j.apply_into(x), C.k.apply_at(x))
    return report


def differential(C: ExactCouple) -> GradedHom:
    """``d = j o k`` on ``E``, of degree ``kappa + eta``."""
    return graded_compose(C.j, C.k)


# -- derivation ----------------------------------------------------------------

def _d_at(C: ExactCouple, x) -> GroupHom:
    return C.j.apply_at(C.kappa(x)) @ C.k.apply_at(x)


def derive(C: ExactCouple) -> ExactCouple:
    """The derived couple ``(im i, H(d), i', j', k')`` of degrees
    ``iota``, ``eta - iota``, ``kappa``.

    Each new map is induced from the old one and checked to be well defined;
    a failure means the input was not exact and names the offending index.
    """
    iota, eta, kappa = C.iota, C.eta, C.kappa
    ddeg = kappa + eta

    # E' = ker d / im d
    Esq: dict = {}
    for x in sorted(C.E.groups):
        if C.E[x].is_trivial:
            continue
        d_out = _d_at(C, x)
        d_in = _d_at(C, ddeg.power(-1, x))
        try:
            Esq[x] = Subquotient(kernel(d_out), image(d_in))
        except DenominatorNotContained as exc:
            raise WellDefinednessFailure(f"d o d is nonzero at {x}", index=x) from exc

    # D' = im i, generated by the images of the basis of D^{iota^-1 x}
    Dsq: dict = {}
    for x in C.D_keys():
        key = C.D.key(x)
        if key in Dsq or C.D[x].is_trivial:
            continue
        Dsq[key] = Subquotient(Subgroup(C.D[x], C.i.apply_into(x).matrix))

    def dsq(x):
        sq = Dsq.get(C.D.key(x))
        return sq if sq is not None else Subquotient(Subgroup(C.D[x]))

    # trivial homology is dropped so that E' keeps the implicit-trivial default;
    # its lineage is kept, since there cycles = boundaries inside E_2
    dead = {x: C.lineage("E", x) @ sq.num.generators for x, sq in Esq.items() if sq.presentation.is_trivial}
    dead.update({x: L for x, L in C.lineage_E.items() if x not in C.E.groups})
    Esq = {x: sq for x, sq in Esq.items() if not sq.presentation.is_trivial}
    nothing = Subquotient(Subgroup(Presentation.trivial(), zeros(0, 0)))

    def esq(x):
        return Esq.get(x, nothing)

    D2 = GradedGroup({x: sq.presentation for x, sq in Dsq.items()}, C.D.fold)
    E2 = GradedGroup({x: sq.presentation for x, sq in Esq.items()})

    def induced(name, x, src, dst, images):
        try:
            return hom_from_images(src, dst, images)
        except NotWellDefined as exc:
            raise WellDefinednessFailure(f"{name}' is not well defined at {x}", index=x) from exc

    i_maps = {}
    for x in C.i.maps:
        src, dst = dsq(x), dsq(iota(x))
        if src.size == 0 or dst.size == 0:
            continue
        images = C.i.apply_at(x).matrix @ src.num.generators
        i_maps[x] = induced("i", x, src, dst, images)

    j_maps = {}
    for y in Dsq:
        src = Dsq[y]
        z = iota.power(-1, y)
        dst = esq(eta(z))
        if src.size == 0 or dst.size == 0:
            continue
        j_maps[y] = induced("j", y, src, dst, C.j.apply_at(z).matrix)

    k_maps = {}
    for x, src in Esq.items():
        dst = dsq(kappa(x))
        if src.size == 0 or dst.size == 0:
            continue
        images = C.k.apply_at(x).matrix @ src.num.generators
        k_maps[x] = induced("k", x, src, dst, images)

    i2 = GradedHom(D2, D2, iota, i_maps, C.i.fold)
    j2 = GradedHom(D2, E2, eta - iota, j_maps)
    k2 = GradedHom(E2, D2, kappa, k_maps)

    lin_D = {x: C.lineage("D", x) @ sq.num.generators for x, sq in Dsq.items()}
    lin_E = {x: C.lineage("E", x) @ sq.num.generators for x, sq in Esq.items()}
    lin_E.update(dead)
    return ExactCouple(D2, E2, i2, j2, k2, C.r + 1, lin_D, lin_E, C.coordinates)


def derived_sequence(C: ExactCouple, r_max: int) -> list[ExactCouple]:
    """Couples for pages ``C.r, C.r + 1, ..., r_max``."""
    out = [C]
    while out[-1].r < r_max:
        out.append(derive(out[-1]))
    return out


def page(C: ExactCouple, r: int) -> Page:
    if r < C.r:
        raise ValueError(f"page {r} precedes the couple's own page {C.r}")
    Cr = derived_sequence(C, r)[-1]
    return Page(r, Cr.E, differential(Cr), Cr)


def page_subquotient(C2: ExactCouple, Cr: ExactCouple, x) -> tuple[Subgroup, Subgroup]:
    """``E_r^x`` as ``(numerator, denominator)`` inside the page-2 group ``E_2^x``."""
    amb = C2.E[x]
    if x in Cr.E.groups:
        L = Cr.lineage("E", x)
        rel = Cr.E[x].relations
        return Subgroup(amb, L), Subgroup(amb, L @ rel if L.shape[1] else L)
    # a dead entry: cycles and boundaries coincide
    L = Cr.lineage_E.get(x, np.zeros((amb.ambient, 0), dtype=object))
    return Subgroup(amb, L), Subgroup(amb, L)


# -- stabilisation ---------------------------------------------------------------

def _verify_bound(C: ExactCouple, B: BoundFunction, xs) -> None:
    iota = C.iota
    for x in xs:
        b = B(x)
        for s in (b, b + 1, b + 2):
            if not C.E[iota.power(-s, x)].is_trivial:
                raise BoundViolated(f"E is nontrivial at {iota.power(-s, x)}, {s} steps from {x} (B={b})")
            if not C.D[iota.power(s, x)].is_trivial:
                raise BoundViolated(f"D is nontrivial at {iota.power(s, x)}, {s} steps from {x} (B={b})")


def _horizon(C: ExactCouple, B: BoundFunction, x) -> int:
    w = C.window() or (0, 0, 0, 0)
    return B(x) + (w[1] - w[0]) + (w[3] - w[2]) + 2


def _d_threshold(C: ExactCouple, B: BoundFunction, x) -> int:
    """``2 + s0`` with ``i`` surjective into every ``iota^-s x`` for ``s >= s0``."""
    iota = C.iota
    s0 = 0
    for s in range(_horizon(C, B, x), -1, -1):
        if not C.i.apply_into(iota.power(-s, x)).is_surjective():
            s0 = s + 1
            break
    return 2 + s0


def _e_threshold(C: ExactCouple, x) -> int:
    """Smallest page after which no differential touches ``x``.

    On page ``r`` the differential has degree ``kappa + eta - (r-2) iota``, so
    its target and source move off to infinity along ``-iota`` and ``iota``.
    """
    iota, eta, kappa = C.iota, C.eta, C.kappa
    out0 = eta(kappa(x))
    in0 = kappa.power(-1, eta.power(-1, x))
    support = [y for y in C.E.groups if not C.E[y].is_trivial]
    last = 1
    for y in support:
        for base, sign in ((out0, -1), (in0, 1)):
            # y == base + sign*(r-2)*iota for some r >= 2 ?
            diff = (y[0] - base[0], y[1] - base[1])
            t = _multiple(diff, iota.shift)
            if t is not None and sign * t >= 0:
                last = max(last, 2 + sign * t)
    return last + 1


def _multiple(v, u) -> int | None:
    """``t`` with ``v == t * u`` if one exists."""
    if u == (0, 0):
        return 0 if v == (0, 0) else None
    if u[0]:
        if v[0] % u[0]:
            return None
        t = v[0] // u[0]
    else:
        if v[1] % u[1]:
            return None
        t = v[1] // u[1]
    return t if (t * u[0], t * u[1]) == tuple(v) else None


@dataclass
class StableBounds:
    D: dict
    E: dict
    couples: list

    def couple_at(self, r: int) -> ExactCouple:
        return self.couples[r - self.couples[0].r]


def _same(G: GradedGroup, H: GradedGroup, x) -> bool:
    return G[x].canonical == H[x].canonical


def stable_bounds(C: ExactCouple, B: BoundFunction, indices=None) -> StableBounds:
    """Page thresholds ``(B^D_x, B^E_x)`` after which ``D_r^x`` and ``E_r^x`` are constant.

    The bound ``B`` is spot-checked first.  Each threshold is then confirmed
    by comparing pages ``r`` and ``r+1`` directly.
    """
    xs = sorted(indices) if indices is not None else sorted(set(C.E.groups) | set(C.D.groups))
    _verify_bound(C, B, xs)
    tD = {x: _d_threshold(C, B, x) for x in xs}
    tE = {x: _e_threshold(C, x) for x in xs}
    r_max = max([2] + list(tD.values()) + list(tE.values())) + 1
    couples = derived_sequence(C, max(r_max, C.r + 1))
    res = StableBounds(tD, tE, couples)
    for x in xs:
        for t, G in ((tE[x], "E"), (tD[x], "D")):
            a, b = res.couple_at(t), res.couple_at(t + 1)
            ga, gb = (a.E, b.E) if G == "E" else (a.D, b.D)
            if not _same(ga, gb, x):
                raise BoundViolated(f"{G}_{t} and {G}_{t + 1} differ at {x}")
    return res


def infinity_page(C: ExactCouple, B: BoundFunction, indices=None) -> GradedGroup:
    """``E_inf^x = E_r^x`` at ``r = B^E_x``."""
    sb = stable_bounds(C, B, indices)
    groups = {}
    for x, t in sb.E.items():
        P = sb.couple_at(t).E[x]
        if not P.is_trivial:
            groups[x] = P
    return GradedGroup(groups)


# -- convergence -----------------------------------------------------------------

def _ses_complex(k: GroupHom, i: GroupHom) -> ChainComplex:
    # positions 0..4 hold 0, C^{n+1}, C^n, piece, 0
    groups = {1: i.dst, 2: k.dst, 3: k.src}
    return ChainComplex(NAT, groups, {1: i, 2: k})


def check_stable_index(C: ExactCouple, B: BoundFunction, x) -> None:
    iota = C.iota
    for s in range(0, _horizon(C, B, x) + 1):
        y = iota.power(-s, x)
        if not C.i.apply_into(y).is_surjective():
            raise NotStableIndex(f"i into {y} is not surjective, so {x} is not a stable index")


def converge(C: ExactCouple, B: BoundFunction, x, r_cap: int = 64) -> BuiltFromCertificate:
    """Certificate that ``D^{kappa x}`` is built from ``E_inf^{iota^n x}``.

    ``C^n = D_inf^{kappa iota^n x}``; each ``0 -> E_inf -> C^n -> C^{n+1} -> 0``
    is checked exact on one common stable page.
    """
    x = (int(x[0]), int(x[1]))
    iota, kappa = C.iota, C.kappa
    check_stable_index(C, B, x)
    m = B(kappa(x))
    ys = [iota.power(n, x) for n in range(m + 1)]
    zs = [kappa(y) for y in ys]
    _verify_bound(C, B, [x, kappa(x)])
    r = 2
    for y, z in zip(ys, zs):
        r = max(r, _e_threshold(C, y), _d_threshold(C, B, z), _d_threshold(C, B, iota(z)))
    couples = derived_sequence(C, r)
    while True:
        Cr = couples[-1]
        sess, ok = [], True
        for n, (y, z) in enumerate(zip(ys[:-1], zs[:-1])):
            kk = Cr.k.apply_at(y)
            ii = Cr.i.apply_at(z)
            rep = is_exact(_ses_complex(kk, ii), range(5))
            sess.append(ShortExact(n, y, kk, ii, rep.ok))
            ok = ok and rep.ok
        if ok:
            break
        if Cr.r >= r_cap:
            raise AlgebraError(f"no page up to {r_cap} makes the convergence sequences exact at {x}")
        couples.append(derive(Cr))
    Cr = couples[-1]
    cof = [Cr.D[z].canonical for z in zs]
    target = C.D[kappa(x)].canonical
    if cof[0] != target:
        raise AlgebraError(f"D_inf at {kappa(x)} is {cof[0]}, expected {target}")
    if not cof[-1].is_trivial:
        raise BoundViolated(f"terminal term {cof[-1]} at {zs[-1]} is not trivial")
    pieces = [Cr.E[y].canonical for y in ys[:-1]]
    return BuiltFromCertificate(x, target, cof, pieces, sess, Cr.r)


def trivial_couple() -> ExactCouple:
    D, E = GradedGroup(), GradedGroup()
    return ExactCouple(
        D,
        E,
        GradedHom(D, D, (0, -1)),
        GradedHom(D, E, (-1, 1)),
        GradedHom(E, D, (0, 0)),
    )


def d_squared_zero(C: ExactCouple) -> bool:
    d = differential(C)
    return graded_is_zero(graded_compose(d, d))


def identity_hom(P: Presentation) -> GroupHom:
    return GroupHom.identity(P)
