"""Z x Z graded abelian groups and graded homomorphisms.

Degrees are index shifts.  A graded hom ``phi`` of degree ``d`` stores one
:class:`~specseq.fga.GroupHom` per source index ``x``, landing at ``x + d``.
``apply_at(x)`` is the map leaving ``x``; ``apply_into(x)`` is the map arriving
at ``x`` (stored at ``x - d``).

Supports are finite, with one escape hatch: a :class:`Fold` declares that a
family is constant beyond a hyperplane, so towers that stabilise can be
represented without infinite tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .fga import GroupHom, Presentation

BiIndex = tuple[int, int]

_TRIVIAL = Presentation.trivial()


def _pair(v) -> BiIndex:
    a, b = v
    return (int(a), int(b))


@dataclass(frozen=True)
class BiDegree:
    """Translation of Z x Z by ``shift``."""

    shift: BiIndex

    def __post_init__(self):
        object.__setattr__(self, "shift", _pair(self.shift))

    def __call__(self, x) -> BiIndex:
        return (x[0] + self.shift[0], x[1] + self.shift[1])

    def __add__(self, other: "BiDegree") -> "BiDegree":
        return BiDegree((self.shift[0] + other.shift[0], self.shift[1] + other.shift[1]))

    def __neg__(self) -> "BiDegree":
        return BiDegree((-self.shift[0], -self.shift[1]))

    def __sub__(self, other: "BiDegree") -> "BiDegree":
        return self + (-other)

    def __mul__(self, k: int) -> "BiDegree":
        return BiDegree((k * self.shift[0], k * self.shift[1]))

    __rmul__ = __mul__

    def inverse(self) -> "BiDegree":
        return -self

    def power(self, k: int, x) -> BiIndex:
        """``x`` moved ``k`` times along this degree (``k`` may be negative)."""
        return (x[0] + k * self.shift[0], x[1] + k * self.shift[1])


ZERO_DEGREE = BiDegree((0, 0))


def as_degree(d) -> BiDegree:
    return d if isinstance(d, BiDegree) else BiDegree(d)


@dataclass(frozen=True)
class Fold:
    """Projection of the plane onto the half-plane ``functional <= bound``.

    Points with ``functional(x) > bound`` slide back along ``direction``;
    ``functional(direction)`` must be 1.
    """

    direction: BiIndex
    functional: BiIndex
    bound: int

    def __post_init__(self):
        object.__setattr__(self, "direction", _pair(self.direction))
        object.__setattr__(self, "functional", _pair(self.functional))
        if self.level(self.direction) != 1:
            raise ValueError("fold functional must take the value 1 on its direction")

    def level(self, x) -> int:
        return self.functional[0] * x[0] + self.functional[1] * x[1]

    def __call__(self, x) -> BiIndex:
        t = self.level(x) - self.bound
        if t <= 0:
            return (x[0], x[1])
        return (x[0] - t * self.direction[0], x[1] - t * self.direction[1])

    def with_bound(self, bound: int) -> "Fold":
        return Fold(self.direction, self.functional, bound)

    def transformed(self, T, T_inv) -> "Fold":
        """The same fold after the linear change of coordinates ``T``."""
        v = _lin(T, self.direction)
        lam = (
            self.functional[0] * T_inv[0][0] + self.functional[1] * T_inv[1][0],
            self.functional[0] * T_inv[0][1] + self.functional[1] * T_inv[1][1],
        )
        return Fold(v, lam, self.bound)


def _lin(T, x) -> BiIndex:
    return (T[0][0] * x[0] + T[0][1] * x[1], T[1][0] * x[0] + T[1][1] * x[1])


class GradedGroup:
    """Finitely supported family ``x -> Presentation``; absent means trivial."""

    def __init__(self, groups: dict | None = None, fold: Fold | None = None):
        self.groups: dict[BiIndex, Presentation] = {
            _pair(x): P for x, P in sorted((groups or {}).items())
        }
        self.fold = fold

    def key(self, x) -> BiIndex:
        return self.fold(x) if self.fold else _pair(x)

    def __getitem__(self, x) -> Presentation:
        return self.groups.get(self.key(x), _TRIVIAL)

    def __contains__(self, x) -> bool:
        return not self[x].is_trivial

    def support(self) -> list[BiIndex]:
        """Stored indices carrying a nontrivial group, in sorted order."""
        return [x for x, P in self.groups.items() if not P.is_trivial]

    def canonical(self, x):
        return self[x].canonical

    def table(self) -> dict[BiIndex, str]:
        return {x: str(self.groups[x]) for x in self.support()}

    def transformed(self, T, T_inv) -> "GradedGroup":
        fold = self.fold.transformed(T, T_inv) if self.fold else None
        return GradedGroup({_lin(T, x): P for x, P in self.groups.items()}, fold)

    def __repr__(self):
        return f"GradedGroup({self.table()})"


class GradedHom:
    """Degree-``degree`` map ``src -> dst`` with one GroupHom per source index."""

    def __init__(
        self,
        src: GradedGroup,
        dst: GradedGroup,
        degree,
        maps: dict | None = None,
        fold: Fold | None = None,
    ):
        self.src, self.dst = src, dst
        self.degree = as_degree(degree)
        self.maps: dict[BiIndex, GroupHom] = {_pair(x): f for x, f in sorted((maps or {}).items())}
        self.fold = fold

    def key(self, x) -> BiIndex:
        return self.fold(x) if self.fold else _pair(x)

    def apply_at(self, x) -> GroupHom:
        """The component leaving ``x``: ``src[x] -> dst[x + degree]``."""
        f = self.maps.get(self.key(x))
        if f is not None:
            return f
        return GroupHom.zero(self.src[x], self.dst[self.degree(x)])

    def apply_into(self, x) -> GroupHom:
        """The component arriving at ``x``: ``src[x - degree] -> dst[x]``."""
        return self.apply_at(self.degree.power(-1, x))

    def indices(self) -> list[BiIndex]:
        return list(self.maps)

    def check(self) -> "GradedHom":
        """Verify endpoint consistency and well-definedness of every component."""
        for x, f in self.maps.items():
            if f.src.ambient != self.src[x].ambient or f.dst.ambient != self.dst[self.degree(x)].ambient:
                raise ValueError(f"component at {x} has mismatched endpoints")
            f.check()
        return self

    def transformed(self, T, T_inv, src=None, dst=None) -> "GradedHom":
        src = src if src is not None else self.src.transformed(T, T_inv)
        dst = dst if dst is not None else self.dst.transformed(T, T_inv)
        fold = self.fold.transformed(T, T_inv) if self.fold else None
        return GradedHom(
            src,
            dst,
            _lin(T, self.degree.shift),
            {_lin(T, x): f for x, f in self.maps.items()},
            fold,
        )

    @classmethod
    def identity(cls, G: GradedGroup) -> "GradedHom":
        return cls(G, G, ZERO_DEGREE, {x: GroupHom.identity(P) for x, P in G.groups.items()}, G.fold)

    @classmethod
    def from_function(cls, src, dst, degree, keys: Iterable, fn: Callable, fold=None) -> "GradedHom":
        return cls(src, dst, degree, {x: fn(x) for x in keys}, fold)

    def __repr__(self):
        return f"GradedHom(degree={self.degree.shift}, maps={len(self.maps)})"


def apply_at(phi: GradedHom, x) -> GroupHom:
    return phi.apply_at(x)


def apply_into(phi: GradedHom, x) -> GroupHom:
    return phi.apply_into(x)


def graded_compose(psi: GradedHom, phi: GradedHom) -> GradedHom:
    """``psi o phi``: degree adds and ``maps[x] = psi[x + d_phi] o phi[x]``.

    When both factors fold along the same hyperplane the composite folds too,
    with the bound pushed far enough that both factors are constant past it.
    """
    fold = None
    keys = set(phi.maps)
    if phi.fold and psi.fold and (phi.fold.direction, phi.fold.functional) == (
        psi.fold.direction,
        psi.fold.functional,
    ):
        bound = max(phi.fold.bound, psi.fold.bound - phi.fold.level(phi.degree.shift))
        fold = phi.fold.with_bound(bound)
        # every index past the old tables but inside the new bound needs an entry
        v = phi.fold.direction
        for x in list(keys) + list(psi.maps):
            for t in range(0, bound - phi.fold.level(x) + 1):
                keys.add((x[0] + t * v[0], x[1] + t * v[1]))
    maps = {}
    for x in sorted(keys):
        f = phi.apply_at(x)
        g = psi.apply_at(phi.degree(x))
        maps[x] = g @ f
    return GradedHom(phi.src, psi.dst, phi.degree + psi.degree, maps, fold)


def graded_is_zero(phi: GradedHom) -> bool:
    return all(f.is_zero() for f in phi.maps.values())


def nonzero_indices(phi: GradedHom) -> list[BiIndex]:
    return [x for x, f in phi.maps.items() if not f.is_zero()]
