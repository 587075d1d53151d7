"""Exact couples from filtered chain complexes, plus canned inputs.

A filtration ``0 = F_{-1} <= F_0 <= ... <= F_L = C`` of a free complex gives
a tower of quotient complexes

    A_s = C / F_{L-1-s},    ... -> A_s -> A_{s-1} -> ... -> A_{-1} = 0,

whose successive "fibres" are ``F_{L-s} / F_{L-s-1}``.  In ``(n, s)``
coordinates the couple is

* ``D^{n,s} = H_n(A_s)``, constant ``= H_n(C)`` for ``s >= L``;
* ``E^{n,s} = H_n(F_{L-s} / F_{L-s-1})``;
* ``i`` of degree ``(0, -1)``, induced by the quotient ``A_s -> A_{s-1}``;
* ``k`` of degree ``(0, 0)``, induced by ``F_{L-s}/F_{L-s-1} -> A_s``;
* ``j`` of degree ``(-1, 1)``, the connecting map of the pair.

``(n, L)`` is a stable index whose target is ``H_n(C)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import INT, INT_DOWN, ChainComplex, LesTemplate, Symbol, Unknown, nat_x_fin
from .couple import BoundFunction, ExactCouple
from .errors import FiltrationError, NoSolution, NotAnticommuting, SchemaError, UnknownSpec
from .fga import (
    FgaGroup,
    GroupHom,
    Presentation,
    Subgroup,
    Subquotient,
    hom_from_images,
    identity,
    int_matrix,
    kernel,
    kernel_basis,
    solve_integer_many,
    zeros,
)
from .graded import BiDegree, Fold, GradedGroup, GradedHom

IOTA = BiDegree((0, -1))
ETA = BiDegree((-1, 1))
KAPPA = BiDegree((0, 0))

# (n, s) -> (p, q) = (s - n, -s) and back
TO_PQ = ((-1, 1), (0, -1))
TO_NS = ((-1, -1), (0, -1))


# -- filtered complexes ------------------------------------------------------------

class FilteredComplex:
    """A free homological complex ``C`` with subcomplexes ``F_0 <= ... <= F_L = C``.

    ``ranks[n]`` is the rank of ``C_n`` and ``d[n] : C_n -> C_{n-1}``.
    ``bases[s][n]`` is a ``ranks[n] x rank(F_s)_n`` injective matrix whose
    columns span ``(F_s)_n`` inside ``C_n``; the last level is the identity.
    """

    def __init__(self, ranks: dict, d: dict, bases: list):
        self.ranks = {int(n): int(r) for n, r in ranks.items() if int(r) > 0}
        self.degrees = sorted(self.ranks)
        self.d = {}
        for n in self.degrees:
            M = d.get(n)
            if M is None:
                M = zeros(self.rank(n - 1), self.rank(n))
            self.d[n] = int_matrix(M, rows=self.rank(n - 1), cols=self.rank(n))
        for n in d:
            if n not in self.ranks and int_matrix(d[n]).size:
                raise SchemaError(f"differential given in degree {n} where C is zero")
        for n in self.degrees:
            if self.rank(n - 1) and self.rank(n - 2) and (self.d[n - 1] @ self.d[n]).any():
                raise FiltrationError(f"d o d is nonzero in degree {n}")
        if not bases:
            bases = [{}]
        self.L = len(bases) - 1
        self.bases: list[dict] = []
        for s, level in enumerate(bases):
            lv = {}
            for n in self.degrees:
                if s == self.L:
                    lv[n] = identity(self.rank(n))
                else:
                    M = level.get(n)
                    lv[n] = int_matrix(M if M is not None else zeros(self.rank(n), 0), rows=self.rank(n))
            self.bases.append(lv)
        if any(bases[self.L].get(n) is not None and not _is_unimodular_basis(int_matrix(bases[self.L][n], rows=self.rank(n)))
               for n in self.degrees):
            raise FiltrationError("the top level of a filtration must be the whole complex")
        self._check()

    def rank(self, n: int) -> int:
        return self.ranks.get(n, 0)

    def basis(self, s: int, n: int) -> np.ndarray:
        if s < 0 or n not in self.ranks:
            return zeros(self.rank(n), 0)
        if s > self.L:
            s = self.L
        return self.bases[s][n]

    def level_rank(self, s: int, n: int) -> int:
        return self.basis(s, n).shape[1]

    def _check(self):
        for s in range(self.L + 1):
            for n in self.degrees:
                B = self.basis(s, n)
                if kernel_basis(B).shape[1]:
                    raise FiltrationError(f"F_{s} is not embedded injectively in degree {n}")
                if s > 0:
                    try:
                        solve_integer_many(self.basis(s, n), self.basis(s - 1, n))
                    except NoSolution as exc:
                        raise FiltrationError(f"F_{s - 1} is not contained in F_{s} in degree {n}") from exc
                if self.rank(n - 1):
                    try:
                        self.level_d(s, n)
                    except NoSolution as exc:
                        raise FiltrationError(f"F_{s} is not closed under d in degree {n}") from exc

    def level_d(self, s: int, n: int) -> np.ndarray:
        """Differential of ``F_s`` in its own basis."""
        B_src, B_dst = self.basis(s, n), self.basis(s, n - 1)
        if B_dst.shape[1]:
            return solve_integer_many(B_dst, self.d[n] @ B_src)
        if self.rank(n - 1) and (self.d[n] @ B_src).any():
            raise NoSolution(f"d leaves F_{s} in degree {n}")
        return zeros(0, B_src.shape[1])

    def inclusion(self, s: int, n: int) -> np.ndarray:
        """``F_{s-1} -> F_s`` in the two level bases."""
        B, A = self.basis(s, n), self.basis(s - 1, n)
        if not A.shape[1]:
            return zeros(B.shape[1], 0)
        return solve_integer_many(B, A)

    @classmethod
    def from_levels(cls, levels: list, inclusions: list) -> "FilteredComplex":
        """Build from per-level complexes and the inclusions ``F_{s-1} -> F_s``.

        ``levels[s]`` is ``(ranks, d)`` for ``F_s``; ``inclusions[s-1][n]`` is
        the matrix of ``F_{s-1} -> F_s`` in degree ``n``.  Squares are checked.
        """
        if not levels:
            return cls({}, {}, [{}])
        L = len(levels) - 1
        ranks, d = levels[L]
        ranks = {int(n): int(r) for n, r in ranks.items()}
        bases = [None] * (L + 1)
        bases[L] = {n: identity(r) for n, r in ranks.items()}
        for s in range(L, 0, -1):
            r_lo, d_lo = levels[s - 1]
            r_hi, d_hi = levels[s]
            inc = inclusions[s - 1]
            lv = {}
            for n, r in ranks.items():
                m = int(r_lo.get(n, 0))
                J = int_matrix(inc.get(n, zeros(int(r_hi.get(n, 0)), m)), rows=int(r_hi.get(n, 0)), cols=m)
                if kernel_basis(J).shape[1]:
                    raise FiltrationError(f"inclusion F_{s - 1} -> F_{s} is not injective in degree {n}")
                # inclusion commutes with d
                if int(r_lo.get(n - 1, 0)) or int(r_hi.get(n - 1, 0)):
                    J1 = int_matrix(inc.get(n - 1, zeros(int(r_hi.get(n - 1, 0)), int(r_lo.get(n - 1, 0)))),
                                    rows=int(r_hi.get(n - 1, 0)), cols=int(r_lo.get(n - 1, 0)))
                    dh = int_matrix(d_hi.get(n, zeros(J1.shape[0], J.shape[0])), rows=J1.shape[0], cols=J.shape[0])
                    dl = int_matrix(d_lo.get(n, zeros(J1.shape[1], m)), rows=J1.shape[1], cols=m)
                    if ((dh @ J) - (J1 @ dl)).any():
                        raise FiltrationError(f"inclusion F_{s - 1} -> F_{s} does not commute with d in degree {n}")
                lv[n] = bases[s][n] @ J if bases[s][n].shape[1] else zeros(r, m)
            bases[s - 1] = lv
        return cls(ranks, d, bases)

    def to_levels(self) -> tuple[list, list]:
        levels, incs = [], []
        for s in range(self.L + 1):
            ranks = {n: self.level_rank(s, n) for n in self.degrees}
            d = {n: self.level_d(s, n) for n in self.degrees if self.rank(n - 1)}
            levels.append((ranks, d))
            if s:
                incs.append({n: self.inclusion(s, n) for n in self.degrees})
        return levels, incs

    def total(self) -> ChainComplex:
        """``C`` itself over ``Z`` with ``maps[n] = d_{n+1}``."""
        groups = {n: Presentation.free(self.rank(n)) for n in self.degrees}
        maps = {}
        for n in self.degrees:
            if self.rank(n - 1):
                maps[n - 1] = GroupHom(groups[n], groups[n - 1], self.d[n])
        return ChainComplex(INT, groups, maps)

    def __repr__(self):
        return f"FilteredComplex(L={self.L}, ranks={self.ranks})"


def _is_unimodular_basis(M: np.ndarray) -> bool:
    if M.shape[0] != M.shape[1]:
        return False
    return Presentation(M.shape[0], M).is_trivial


# -- the tower couple ----------------------------------------------------------------

@dataclass
class TowerCouple:
    couple: ExactCouple
    bound: BoundFunction
    stable: list
    filtered: FilteredComplex
    groups_D: dict = field(default_factory=dict)
    groups_E: dict = field(default_factory=dict)

    def converge(self, n: int):
        from .couple import converge

        return converge(self.couple, self.bound, (n, self.filtered.L))


def tower_bound(L: int) -> BoundFunction:
    return BoundFunction(lambda x: max(0, x[1] + 1, L - x[1] + 1))


def couple_from_tower(F: FilteredComplex) -> TowerCouple:
    """The exact couple of the quotient tower of ``F``, with bound and stable indices."""
    L = F.L
    degs = F.degrees

    def quotient_group(t: int, n: int) -> Presentation:
        # (C / F_t)_n
        return Presentation(F.rank(n), F.basis(t, n))

    Dsq, Esq = {}, {}
    for n in degs:
        for s in range(0, L + 1):
            t = L - 1 - s
            Qn, Qm = quotient_group(t, n), quotient_group(t, n - 1)
            cyc = kernel(GroupHom(Qn, Qm, F.d[n]))
            bnd = Subgroup(Qn, F.d[n + 1]) if F.rank(n + 1) else Subgroup(Qn)
            Dsq[(n, s)] = Subquotient(cyc, bnd)
            u = L - s
            # (F_u / F_{u-1})_n in the basis of F_u
            Rn = Presentation(F.level_rank(u, n), F.inclusion(u, n))
            Rm = Presentation(F.level_rank(u, n - 1), F.inclusion(u, n - 1))
            dn = F.level_d(u, n) if F.rank(n - 1) else zeros(Rm.ambient, Rn.ambient)
            cyc = kernel(GroupHom(Rn, Rm, dn))
            if F.rank(n + 1):
                bnd = Subgroup(Rn, F.level_d(u, n + 1))
            else:
                bnd = Subgroup(Rn)
            Esq[(n, s)] = Subquotient(cyc, bnd)

    fold_D = Fold((0, 1), (0, 1), L)
    D = GradedGroup({x: sq.presentation for x, sq in Dsq.items()}, fold_D)
    E = GradedGroup({x: sq.presentation for x, sq in Esq.items() if not sq.presentation.is_trivial})

    def dsq(x):
        return Dsq[fold_D(x)]

    i_maps = {}
    for n in degs:
        for s in range(1, L + 2):
            src, dst = dsq((n, s)), dsq((n, s - 1))
            if src.size and dst.size:
                i_maps[(n, s)] = hom_from_images(src, dst, src.num.generators)
    k_maps = {}
    for (n, s), sq in Esq.items():
        if (n, s) not in E.groups:
            continue
        dst = Dsq[(n, s)]
        if dst.size:
            k_maps[(n, s)] = hom_from_images(sq, dst, F.basis(L - s, n) @ sq.num.generators)
    j_maps = {}
    for n in degs:
        if not F.rank(n - 1):
            continue
        for s in range(1, L + 1):
            src = Dsq[(n, s - 1)]
            dst = Esq[(n - 1, s)]
            if not src.size or (n - 1, s) not in E.groups:
                continue
            u = L - s
            # lift, differentiate, express in F_u
            dz = F.d[n] @ src.num.generators
            y = solve_integer_many(F.basis(u, n - 1), dz)
            j_maps[(n, s - 1)] = hom_from_images(src, dst, y)

    i = GradedHom(D, D, IOTA, i_maps, Fold((0, 1), (0, 1), L + 1))
    j = GradedHom(D, E, ETA, j_maps)
    k = GradedHom(E, D, KAPPA, k_maps)
    C = ExactCouple(D, E, i, j, k)
    stable = [(n, L) for n in degs]
    return TowerCouple(C, tower_bound(L), stable, F, Dsq, Esq)


# -- reindexing ----------------------------------------------------------------------

def _transform(obj, T, Tinv):
    if isinstance(obj, BiDegree):
        return BiDegree((T[0][0] * obj.shift[0] + T[0][1] * obj.shift[1],
                         T[1][0] * obj.shift[0] + T[1][1] * obj.shift[1]))
    if isinstance(obj, tuple):
        return (T[0][0] * obj[0] + T[0][1] * obj[1], T[1][0] * obj[0] + T[1][1] * obj[1])
    if isinstance(obj, GradedGroup):
        return obj.transformed(T, Tinv)
    if isinstance(obj, GradedHom):
        return obj.transformed(T, Tinv)
    if isinstance(obj, ExactCouple):
        D, E = obj.D.transformed(T, Tinv), obj.E.transformed(T, Tinv)
        return ExactCouple(
            D,
            E,
            obj.i.transformed(T, Tinv, D, D),
            obj.j.transformed(T, Tinv, D, E),
            obj.k.transformed(T, Tinv, E, D),
            obj.r,
            {_transform(x, T, Tinv): M for x, M in obj.lineage_D.items()},
            {_transform(x, T, Tinv): M for x, M in obj.lineage_E.items()},
            "pq" if T == TO_PQ else "ns",
        )
    raise TypeError(f"cannot reindex {type(obj).__name__}")


def reindex_cohomological(obj):
    """``(n, s) -> (p, q) = (s - n, -s)`` on indices, degrees, groups, homs and couples."""
    return _transform(obj, TO_PQ, TO_NS)


def reindex_homological(obj):
    """Inverse of :func:`reindex_cohomological`: ``(n, s) = (-(p + q), -q)``."""
    return _transform(obj, TO_NS, TO_PQ)


# -- CW library ----------------------------------------------------------------------

@dataclass(frozen=True)
class CwComplexSpec:
    name: str
    n: int = 0

    def __post_init__(self):
        name = self.name.lower().replace("_", "").replace("-", "")
        aliases = {
            "sphere": "sphere",
            "torus": "torus2",
            "torus2": "torus2",
            "rp": "rp",
            "realprojective": "rp",
            "cp": "cp",
            "complexprojectivetruncated": "cp",
        }
        if name not in aliases:
            raise UnknownSpec(f"unknown CW complex {self.name!r}")
        object.__setattr__(self, "name", aliases[name])
        if self.name in ("sphere", "rp", "cp") and self.n < (1 if self.name != "cp" else 0):
            raise UnknownSpec(f"{self.name} needs a positive dimension, got {self.n}")

    def label(self) -> str:
        return "torus2" if self.name == "torus2" else f"{self.name}-{self.n}"


def cellular_chains(spec: CwComplexSpec) -> tuple[dict, dict]:
    """Cell counts per dimension and boundary matrices ``d[k] : C_k -> C_{k-1}``."""
    if spec.name == "sphere":
        ranks = {0: 1, spec.n: 1}
        d = {}
        if spec.n == 1:
            d[1] = [[0]]
    elif spec.name == "torus2":
        ranks = {0: 1, 1: 2, 2: 1}
        d = {1: [[0, 0]], 2: [[0], [0]]}
    elif spec.name == "rp":
        ranks = {k: 1 for k in range(spec.n + 1)}
        d = {k: [[0 if k % 2 else 2]] for k in range(1, spec.n + 1)}
    else:
        ranks = {2 * k: 1 for k in range(spec.n + 1)}
        d = {}
    return ranks, {k: int_matrix(M) for k, M in d.items()}


def cw_library(spec: CwComplexSpec, variant: str = "homology") -> ChainComplex:
    """Cellular chain complex (over ``int``) or its dual cochain complex (over ``int_down``)."""
    ranks, d = cellular_chains(spec)
    groups = {k: Presentation.free(r) for k, r in ranks.items()}
    maps = {}
    if variant == "homology":
        for k, M in d.items():
            maps[k - 1] = GroupHom(groups[k], groups[k - 1], M)
        return ChainComplex(INT, groups, maps)
    if variant == "cohomology":
        # delta^{k-1} = d_k^T : C^{k-1} -> C^k, stored at k since S(k) = k - 1
        for k, M in d.items():
            maps[k] = GroupHom(groups[k - 1], groups[k], M.T.copy())
        return ChainComplex(INT_DOWN, groups, maps)
    raise UnknownSpec(f"unknown variant {variant!r}")


def _homological_data(C: ChainComplex) -> tuple[dict, dict]:
    """``(ranks, d)`` of a free complex, read homologically."""
    for a, P in C.groups.items():
        if P.relations.any():
            raise SchemaError(f"group at {a} is not free")
    if C.index.kind in ("int", "nat"):
        ranks = {a: P.ambient for a, P in C.groups.items()}
        d = {i + 1: f.matrix for i, f in C.maps.items()}
    elif C.index.kind == "int_down":
        # cochains in degree m become chains in degree -m
        ranks = {-a: P.ambient for a, P in C.groups.items()}
        d = {-(i - 1): f.matrix for i, f in C.maps.items()}
    else:
        raise SchemaError("skeletal filtration needs an integer-indexed complex")
    return ranks, d


def skeletal_filtration(C: ChainComplex) -> FilteredComplex:
    """``F_s`` = chains in (homological) degrees ``<= n_min + s``.

    Cochain complexes over ``int_down`` are first read homologically through
    ``n = -m``.
    """
    ranks, d = _homological_data(C)
    ranks = {n: r for n, r in ranks.items() if r}
    if not ranks:
        return FilteredComplex({}, {}, [{}])
    lo, hi = min(ranks), max(ranks)
    bases = []
    for s in range(hi - lo + 1):
        bases.append({n: identity(r) if n <= lo + s else zeros(r, 0) for n, r in ranks.items()})
    return FilteredComplex(ranks, d, bases)


def trivial_filtration(C: ChainComplex) -> FilteredComplex:
    ranks, d = _homological_data(C)
    return FilteredComplex(ranks, d, [{}])


def z4_extension_filtration() -> FilteredComplex:
    """``0 -> Z --4--> Z -> 0`` filtered by ``F_0 = (Z --2--> Z)`` included via ``(1, 2)``.

    ``H_0`` of the total complex is ``Z/4``, assembled from two ``Z/2`` pieces.
    """
    levels = [
        ({1: 1, 0: 1}, {1: [[2]]}),
        ({1: 1, 0: 1}, {1: [[4]]}),
    ]
    inclusions = [{1: [[1]], 0: [[2]]}]
    return FilteredComplex.from_levels(levels, inclusions)


# -- double complexes ----------------------------------------------------------------

@dataclass
class Bicomplex:
    """Free groups on a grid with ``dh : (a, b) -> (a-1, b)`` and ``dv : (a, b) -> (a, b-1)``.

    ``convention`` is ``"anticommuting"`` (``dh dv + dv dh = 0``) or
    ``"commuting"``, in which case vertical maps in odd columns are negated
    when totalising.
    """

    ranks: dict
    dh: dict = field(default_factory=dict)
    dv: dict = field(default_factory=dict)
    convention: str = "anticommuting"

    def rank(self, a, b) -> int:
        return int(self.ranks.get((a, b), 0))

    def h(self, a, b) -> np.ndarray:
        M = self.dh.get((a, b))
        return int_matrix(M if M is not None else zeros(self.rank(a - 1, b), self.rank(a, b)),
                          rows=self.rank(a - 1, b), cols=self.rank(a, b))

    def v(self, a, b) -> np.ndarray:
        M = self.dv.get((a, b))
        M = int_matrix(M if M is not None else zeros(self.rank(a, b - 1), self.rank(a, b)),
                       rows=self.rank(a, b - 1), cols=self.rank(a, b))
        if self.convention == "commuting" and a % 2:
            M = -M
        return M


def double_complex_filtration(bc: Bicomplex) -> FilteredComplex:
    """Total complex with the column filtration ``F_s`` = columns ``<= a_min + s``."""
    if bc.convention not in ("anticommuting", "commuting"):
        raise SchemaError(f"unknown sign convention {bc.convention!r}")
    cells = sorted((a, b) for (a, b), r in bc.ranks.items() if int(r) > 0)
    if not cells:
        return FilteredComplex({}, {}, [{}])
    for a, b in cells:
        if bc.rank(a - 2, b) and (bc.h(a - 1, b) @ bc.h(a, b)).any():
            raise FiltrationError(f"horizontal d o d is nonzero at {(a, b)}")
        if bc.rank(a, b - 2) and (bc.v(a, b - 1) @ bc.v(a, b)).any():
            raise FiltrationError(f"vertical d o d is nonzero at {(a, b)}")
        if bc.rank(a - 1, b - 1) and ((bc.h(a, b - 1) @ bc.v(a, b)) + (bc.v(a - 1, b) @ bc.h(a, b))).any():
            raise NotAnticommuting(f"square at {(a, b)} does not anticommute")
    a_lo = min(a for a, _ in cells)
    a_hi = max(a for a, _ in cells)
    by_n: dict = {}
    for a, b in cells:
        by_n.setdefault(a + b, []).append((a, b))
    offsets = {}
    for n, cs in by_n.items():
        off = 0
        for c in cs:
            offsets[c] = off
            off += bc.rank(*c)
    ranks = {n: sum(bc.rank(*c) for c in cs) for n, cs in by_n.items()}
    d = {}
    for n, cs in by_n.items():
        if n - 1 not in ranks:
            continue
        M = zeros(ranks[n - 1], ranks[n])
        for a, b in cs:
            r0, c0 = offsets[(a, b)], bc.rank(a, b)
            col = slice(r0, r0 + c0)
            if (a - 1, b) in offsets:
                o = offsets[(a - 1, b)]
                M[o:o + bc.rank(a - 1, b), col] += bc.h(a, b)
            if (a, b - 1) in offsets:
                o = offsets[(a, b - 1)]
                M[o:o + bc.rank(a, b - 1), col] += bc.v(a, b)
        d[n] = M
    bases = []
    for s in range(a_hi - a_lo + 1):
        lv = {}
        for n, cs in by_n.items():
            cols = [offsets[c] + t for c in cs if c[0] <= a_lo + s for t in range(bc.rank(*c))]
            B = zeros(ranks[n], len(cols))
            for j, row in enumerate(cols):
                B[row, j] = 1
            lv[n] = B
        bases.append(lv)
    return FilteredComplex(ranks, d, bases)


# -- the Hopf fibration sequence -------------------------------------------------------

def hopf_les_template(n_max: int = 6) -> LesTemplate:
    """The homotopy sequence of ``S^1 -> S^3 -> S^2`` over ``N x fin_3``.

    Position ``(k, 0)`` is ``pi_k(S^2)``, ``(k, 1)`` is ``pi_k(S^3)`` and
    ``(k, 2)`` is ``pi_k(S^1)``.  The known inputs are ``pi_1(S^1) = Z``,
    ``pi_k(S^1) = 0`` above, ``pi_1(S^3) = pi_2(S^3) = 0`` and ``pi_1(S^2) = 0``;
    higher ``pi_k(S^3)`` enter as symbols and ``pi_k(S^2)`` for ``k >= 2`` are
    the unknowns.
    """
    idx = nat_x_fin(3)
    entries: dict = {}
    for k in range(1, n_max + 1):
        # S^2 is simply connected; the rest of its column is unknown
        entries[(k, 0)] = FgaGroup() if k == 1 else Unknown(f"pi{k}_S2")
        entries[(k, 1)] = FgaGroup() if k <= 2 else Symbol(f"pi{k}_S3")
        entries[(k, 2)] = FgaGroup(1) if k == 1 else FgaGroup()
    window = idx.walk((1, 0), 3 * n_max)
    return LesTemplate(idx, window, entries)
