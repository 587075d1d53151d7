"""Finitely generated abelian groups presented as cokernels of integer matrices.

A :class:`Presentation` stands for ``Z^n / colspan(R)``.  Everything here is
exact: matrices are 2-D numpy arrays of ``dtype=object`` holding Python ints,
so entries never overflow.  Canonical forms come from the Smith normal form.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from functools import cached_property
from math import prod

import numpy as np

from .errors import DenominatorNotContained, NoSolution, NotWellDefined

__all__ = [
    "int_matrix",
    "zeros",
    "identity",
    "smith_normal_form",
    "solve_integer",
    "solve_integer_many",
    "kernel_basis",
    "lattice_basis",
    "FgaGroup",
    "Presentation",
    "GroupHom",
    "Subgroup",
    "Subquotient",
    "canonical_form",
    "kernel",
    "image",
    "subquotient",
    "induced_hom",
    "hom_from_images",
    "is_isomorphic",
]


# -- integer matrices ----------------------------------------------------------

def _as_int(v):
    if isinstance(v, str):
        return int(v.strip())
    return operator.index(v)


def int_matrix(data, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce ``data`` to a 2-D object array of Python ints.

    ``rows``/``cols`` pin the shape of empty matrices, which numpy cannot infer
    from ``[]``.  Decimal strings are accepted for entries.
    """
    arr = data if isinstance(data, np.ndarray) else np.array(data, dtype=object)
    if arr.size == 0:
        r = rows if rows is not None else (arr.shape[0] if arr.ndim == 2 else 0)
        c = cols if cols is not None else (arr.shape[1] if arr.ndim == 2 else 0)
        return np.zeros((r, c), dtype=object)
    if arr.ndim == 1:
        # a flat vector is a column unless the caller asked for one row
        arr = arr.reshape(1, -1) if rows == 1 and cols != 1 else arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    if (rows is not None and arr.shape[0] != rows) or (cols is not None and arr.shape[1] != cols):
        raise ValueError(f"matrix has shape {arr.shape}, expected ({rows}, {cols})")
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = _as_int(v)
    return out


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=object)


def identity(n: int) -> np.ndarray:
    out = zeros(n, n)
    for i in range(n):
        out[i, i] = 1
    return out


def _hstack(*blocks, rows):
    blocks = [b for b in blocks if b.shape[1]]
    if not blocks:
        return zeros(rows, 0)
    return np.hstack(blocks)


def _snf_lists(A, m, n):
    """Smith form by elementary operations with smallest-magnitude pivots.

    Returns ``(U, A, V, Uinv)`` as lists of rows with ``U @ M @ V == A``.
    """
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    Uinv = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, k):
        A[i], A[k] = A[k], A[i]
        U[i], U[k] = U[k], U[i]
        for row in Uinv:
            row[i], row[k] = row[k], row[i]

    def swap_cols(j, k):
        for row in A:
            row[j], row[k] = row[k], row[j]
        for row in V:
            row[j], row[k] = row[k], row[j]

    def row_axpy(dst, src, q):
        # R_dst += q * R_src
        a, b = A[dst], A[src]
        for c in range(n):
            if b[c]:
                a[c] += q * b[c]
        a, b = U[dst], U[src]
        for c in range(m):
            if b[c]:
                a[c] += q * b[c]
        for row in Uinv:
            if row[dst]:
                row[src] -= q * row[dst]

    def col_axpy(dst, src, q):
        # C_dst += q * C_src
        for row in A:
            if row[src]:
                row[dst] += q * row[src]
        for row in V:
            if row[src]:
                row[dst] += q * row[src]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = A[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        if i != t:
            swap_rows(t, i)
        if j != t:
            swap_cols(t, j)
        while True:
            p = A[t][t]
            clean = True
            for i in range(t + 1, m):
                if A[i][t]:
                    row_axpy(i, t, -(A[i][t] // p))
                    clean = clean and not A[i][t]
            for j in range(t + 1, n):
                if A[t][j]:
                    col_axpy(j, t, -(A[t][j] // p))
                    clean = clean and not A[t][j]
            if not clean:
                cand = [(abs(A[i][t]), i, t) for i in range(t + 1, m) if A[i][t]]
                cand += [(abs(A[t][j]), t, j) for j in range(t + 1, n) if A[t][j]]
                _, i, j = min(cand)
                if i != t:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            row_axpy(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-v for v in A[t]]
            U[t] = [-v for v in U[t]]
            for row in Uinv:
                row[t] = -row[t]
        t += 1
    return U, A, V, Uinv


class _Smith:
    """Smith decomposition of one matrix, reused for many solves."""

    def __init__(self, M: np.ndarray):
        self.m, self.n = M.shape
        U, D, V, Uinv = _snf_lists(M.tolist(), self.m, self.n)
        self.U, self.V, self.Uinv = U, V, Uinv
        self.diag = [D[t][t] for t in range(min(self.m, self.n))]
        self.rank = sum(1 for d in self.diag if d)
        self.D = D

    def solve_many(self, B: np.ndarray) -> np.ndarray:
        cols = B.shape[1]
        X = zeros(self.n, cols)
        Bl = B.tolist()
        for c in range(cols):
            ub = [sum(self.U[i][k] * Bl[k][c] for k in range(self.m) if Bl[k][c]) for i in range(self.m)]
            y = [0] * self.n
            for t in range(self.rank):
                q, r = divmod(ub[t], self.diag[t])
                if r:
                    raise NoSolution(f"column {c} is not in the integer span")
                y[t] = q
            if any(ub[t] for t in range(self.rank, self.m)):
                raise NoSolution(f"column {c} is not in the rational span")
            for i in range(self.n):
                X[i, c] = sum(self.V[i][t] * y[t] for t in range(self.rank) if y[t])
        return X

    def kernel(self) -> np.ndarray:
        K = zeros(self.n, self.n - self.rank)
        for c, t in enumerate(range(self.rank, self.n)):
            for i in range(self.n):
                K[i, c] = self.V[i][t]
        return K

    def column_basis(self) -> np.ndarray:
        B = zeros(self.m, self.rank)
        for t in range(self.rank):
            for i in range(self.m):
                B[i, t] = self.Uinv[i][t] * self.diag[t]
        return B


def smith_normal_form(M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(U, D, V)`` with ``U @ M @ V == D``.

    ``U`` and ``V`` are unimodular and ``D`` is diagonal with non-negative
    entries ``d1 | d2 | ...``.

    >>> U, D, V = smith_normal_form([[2, 4], [6, 8]])
    >>> [D[0, 0], D[1, 1]]
    [2, 4]
    """
    M = int_matrix(M)
    m, n = M.shape
    U, D, V, _ = _snf_lists(M.tolist(), m, n)
    return int_matrix(U, m, m), int_matrix(D, m, n), int_matrix(V, n, n)


def solve_integer(M, b) -> np.ndarray:
    """Some integer ``x`` with ``M @ x == b``; raises :class:`NoSolution`."""
    M = int_matrix(M)
    b = int_matrix(np.asarray(b, dtype=object).reshape(-1, 1), rows=M.shape[0], cols=1)
    return _Smith(M).solve_many(b)[:, 0]


def solve_integer_many(M, B) -> np.ndarray:
    M = int_matrix(M)
    B = int_matrix(B, rows=M.shape[0])
    return _Smith(M).solve_many(B)


def kernel_basis(M) -> np.ndarray:
    """Columns form a basis of the integer null space of ``M``."""
    return _Smith(int_matrix(M)).kernel()


def lattice_basis(M) -> np.ndarray:
    """Columns form a basis of the lattice spanned by the columns of ``M``."""
    M = int_matrix(M)
    if M.shape[1] == 0:
        return M
    return _Smith(M).column_basis()


# -- groups --------------------------------------------------------------------

@dataclass(frozen=True)
class FgaGroup:
    """``Z^free_rank + Z/d1 + ... + Z/dk`` with ``d1 | d2 | ...`` and ``di >= 2``."""

    free_rank: int = 0
    invariant_factors: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "invariant_factors", tuple(int(d) for d in self.invariant_factors))
        if self.free_rank < 0:
            raise ValueError("free rank must be non-negative")
        ds = self.invariant_factors
        if any(d < 2 for d in ds) or any(b % a for a, b in zip(ds, ds[1:])):
            raise ValueError(f"invalid invariant factors {ds}")

    @classmethod
    def parse(cls, text: str) -> "FgaGroup":
        """Inverse of ``str``: ``"0"``, ``"Z"``, ``"Z^2 + Z/2 + Z/4"``."""
        text = text.strip()
        if text == "0":
            return cls()
        rank, orders = 0, []
        for term in text.split("+"):
            term = term.strip()
            if term == "Z":
                rank += 1
            elif term.startswith("Z^"):
                rank += int(term[2:])
            elif term.startswith("Z/"):
                orders.append(int(term[2:]))
            else:
                raise ValueError(f"cannot parse group term {term!r}")
        return canonical_form(Presentation.diagonal([0] * rank + orders))

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.invariant_factors

    @property
    def order(self) -> int | None:
        """Group order, or ``None`` when infinite."""
        return None if self.free_rank else prod(self.invariant_factors)

    def presentation(self) -> "Presentation":
        return Presentation.diagonal([0] * self.free_rank + list(self.invariant_factors))

    def __str__(self):
        if self.is_trivial:
            return "0"
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts += [f"Z/{d}" for d in self.invariant_factors]
        return " + ".join(parts)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Presentation:
    """The group ``Z^ambient / colspan(relations)``."""

    ambient: int
    relations: np.ndarray = None

    def __post_init__(self):
        rel = self.relations if self.relations is not None else zeros(self.ambient, 0)
        object.__setattr__(self, "relations", _frozen(int_matrix(rel, rows=self.ambient)))

    @classmethod
    def free(cls, n: int) -> "Presentation":
        return cls(n)

    @classmethod
    def trivial(cls) -> "Presentation":
        return cls(0)

    @classmethod
    def cyclic(cls, d: int) -> "Presentation":
        return cls(1, [[d]])

    @classmethod
    def diagonal(cls, entries) -> "Presentation":
        """``Z/e1 + Z/e2 + ...`` where ``e = 0`` gives a free summand."""
        n = len(entries)
        rel = zeros(n, n)
        for i, e in enumerate(entries):
            rel[i, i] = e
        return cls(n, rel)

    @cached_property
    def _smith(self) -> _Smith:
        return _Smith(self.relations)

    @cached_property
    def canonical(self) -> FgaGroup:
        s = self._smith
        return FgaGroup(
            free_rank=self.ambient - s.rank,
            invariant_factors=tuple(d for d in s.diag if d > 1),
        )

    @property
    def is_trivial(self) -> bool:
        return self.ambient == 0 or self.canonical.is_trivial

    def contains(self, vectors) -> bool:
        """True when every column of ``vectors`` is zero in the group."""
        V = int_matrix(vectors, rows=self.ambient)
        if not V.shape[1]:
            return True
        try:
            self._smith.solve_many(V)
        except NoSolution:
            return False
        return True

    def __str__(self):
        return str(self.canonical)

    def __repr__(self):
        return f"Presentation({self.ambient}, {self.relations.tolist()}) ~ {self.canonical}"


def canonical_form(P: Presentation) -> FgaGroup:
    return P.canonical


def is_isomorphic(A: Presentation, B: Presentation) -> bool:
    return A.canonical == B.canonical


@dataclass(frozen=True, eq=False)
class GroupHom:
    """Homomorphism of presented groups given by a matrix on ambient lattices."""

    src: Presentation
    dst: Presentation
    matrix: np.ndarray = None

    def __post_init__(self):
        M = self.matrix if self.matrix is not None else zeros(self.dst.ambient, self.src.ambient)
        object.__setattr__(
            self, "matrix", _frozen(int_matrix(M, rows=self.dst.ambient, cols=self.src.ambient))
        )

    @classmethod
    def zero(cls, src: Presentation, dst: Presentation) -> "GroupHom":
        return cls(src, dst)

    @classmethod
    def identity(cls, P: Presentation) -> "GroupHom":
        return cls(P, P, identity(P.ambient))

    def is_well_defined(self) -> bool:
        return self.dst.contains(self.matrix @ self.src.relations)

    def check(self) -> "GroupHom":
        if not self.is_well_defined():
            raise NotWellDefined("relations of the source do not map into relations of the target")
        return self

    def __matmul__(self, other: "GroupHom") -> "GroupHom":
        if other.dst.ambient != self.src.ambient:
            raise ValueError("homomorphisms are not composable")
        return GroupHom(other.src, self.dst, self.matrix @ other.matrix)

    def is_zero(self) -> bool:
        return self.dst.contains(self.matrix)

    def equals(self, other: "GroupHom") -> bool:
        if self.matrix.shape != other.matrix.shape:
            return False
        return self.dst.contains(self.matrix - other.matrix)

    def is_surjective(self) -> bool:
        return Presentation(self.dst.ambient, _hstack(self.matrix, self.dst.relations, rows=self.dst.ambient)).is_trivial

    def is_injective(self) -> bool:
        return self.src.contains(kernel(self).generators)

    def is_isomorphism(self) -> bool:
        return self.is_injective() and self.is_surjective()


@dataclass(frozen=True, eq=False)
class Subgroup:
    """Subgroup of ``ambient`` generated by the classes of the given columns."""

    ambient: Presentation
    generators: np.ndarray = None

    def __post_init__(self):
        G = self.generators if self.generators is not None else zeros(self.ambient.ambient, 0)
        object.__setattr__(self, "generators", _frozen(int_matrix(G, rows=self.ambient.ambient)))

    @classmethod
    def whole(cls, P: Presentation) -> "Subgroup":
        return cls(P, identity(P.ambient))

    def contains(self, vectors) -> bool:
        V = int_matrix(vectors, rows=self.ambient.ambient)
        if not V.shape[1]:
            return True
        M = _hstack(self.generators, self.ambient.relations, rows=self.ambient.ambient)
        try:
            _Smith(M).solve_many(V)
        except NoSolution:
            return False
        return True

    def contains_subgroup(self, other: "Subgroup") -> bool:
        return self.contains(other.generators)


def kernel(f: GroupHom) -> Subgroup:
    """Classes ``[x]`` of the source with ``f(x)`` zero in the target."""
    n = f.src.ambient
    M = _hstack(f.matrix, f.dst.relations, rows=f.dst.ambient)
    if M.shape[1] == 0:
        return Subgroup(f.src)
    K = _Smith(M).kernel()[:n, :]
    return Subgroup(f.src, lattice_basis(K))


def image(f: GroupHom) -> Subgroup:
    return Subgroup(f.dst, f.matrix)


class Subquotient:
    """``num / den`` inside a common ambient presentation.

    ``presentation`` is written in coordinates relative to the numerator
    generators: its ambient basis vector ``e_l`` is the class of
    ``num.generators[:, l]``.
    """

    def __init__(self, num: Subgroup, den: Subgroup | None = None):
        ambient = num.ambient
        den = den if den is not None else Subgroup(ambient)
        if den.ambient.ambient != ambient.ambient:
            raise ValueError("numerator and denominator live in different ambients")
        self.num, self.den, self.ambient = num, den, ambient
        s = num.generators.shape[1]
        self._NR = _hstack(num.generators, ambient.relations, rows=ambient.ambient)
        self._smith = _Smith(self._NR)
        try:
            den_coords = self._smith.solve_many(den.generators)[:s, :]
        except NoSolution as exc:
            raise DenominatorNotContained("denominator is not contained in numerator") from exc
        rel = _hstack(den_coords, self._smith.kernel()[:s, :], rows=s)
        self.presentation = Presentation(s, lattice_basis(rel))

    @property
    def size(self) -> int:
        return self.presentation.ambient

    def coordinates(self, vectors) -> np.ndarray:
        """Express ambient vectors lying in the numerator in generator coordinates."""
        V = int_matrix(vectors, rows=self.ambient.ambient)
        if not V.shape[1]:
            return zeros(self.size, 0)
        return self._smith.solve_many(V)[: self.size, :]

    @property
    def canonical(self) -> FgaGroup:
        return self.presentation.canonical

    def __repr__(self):
        return f"Subquotient({self.canonical})"


def subquotient(num: Subgroup, den: Subgroup) -> Presentation:
    return Subquotient(num, den).presentation


def _as_subquotient(sq) -> Subquotient:
    if isinstance(sq, Subquotient):
        return sq
    num, den = sq
    return Subquotient(num, den)


def hom_from_images(src: Subquotient, dst: Subquotient, images) -> GroupHom:
    """Homomorphism sending numerator generator ``l`` of ``src`` to ``images[:, l]``.

    ``images`` lives in the ambient of ``dst``.  Raises :class:`NotWellDefined`
    if an image leaves the numerator of ``dst`` or a relation of ``src`` does
    not land in the denominator of ``dst``.
    """
    images = int_matrix(images, rows=dst.ambient.ambient, cols=src.size)
    try:
        coords = dst.coordinates(images)
    except NoSolution as exc:
        raise NotWellDefined("image leaves the target numerator") from exc
    return GroupHom(src.presentation, dst.presentation, coords).check()


def induced_hom(f: GroupHom, src_sq, dst_sq) -> GroupHom:
    """The map ``src.num/src.den -> dst.num/dst.den`` induced by ``f``.

    ``src_sq`` and ``dst_sq`` are :class:`Subquotient` objects or
    ``(num, den)`` pairs of :class:`Subgroup`.
    """
    src, dst = _as_subquotient(src_sq), _as_subquotient(dst_sq)
    if not dst.num.contains(f.matrix @ src.num.generators):
        raise NotWellDefined("f(numerator) is not contained in the target numerator")
    if not dst.den.contains(f.matrix @ src.den.generators):
        raise NotWellDefined("f(denominator) is not contained in the target denominator")
    return hom_from_images(src, dst, f.matrix @ src.num.generators)
