import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import homology_oracle
from specseq.builders import (
    ETA,
    IOTA,
    KAPPA,
    Bicomplex,
    CwComplexSpec,
    FilteredComplex,
    couple_from_tower,
    cw_library,
    double_complex_filtration,
    hopf_les_template,
    reindex_cohomological,
    reindex_homological,
    skeletal_filtration,
    trivial_filtration,
    z4_extension_filtration,
)
from specseq.chain import homology_at_position
from specseq.couple import derived_sequence, differential, infinity_page, validate_couple
from specseq.errors import FiltrationError, NotAnticommuting, UnknownSpec
from specseq.fga import FgaGroup, int_matrix
from specseq.graded import BiDegree, graded_is_zero


def cw(name, n=0, variant="homology"):
    return cw_library(CwComplexSpec(name, n), variant)


def H(C, k):
    return str(homology_at_position(C, k))


# -- library ------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sphere_cohomology(n):
    C = cw("sphere", n, "cohomology")
    assert [H(C, k) for k in range(n + 2)] == ["Z" if k in (0, n) else "0" for k in range(n + 2)]


def test_torus_cohomology():
    C = cw("torus", 0, "cohomology")
    assert [H(C, k) for k in range(3)] == ["Z", "Z^2", "Z"]


def test_rp2_cohomology():
    C = cw("rp", 2, "cohomology")
    assert [H(C, k) for k in range(3)] == ["Z", "0", "Z/2"]


@pytest.mark.parametrize("name,n", [("sphere", 1), ("sphere", 3), ("torus", 0), ("rp", 2), ("rp", 5), ("cp", 3)])
def test_library_against_oracle(name, n):
    """Homology from the minors oracle; cohomology by universal coefficients."""
    from specseq.builders import cellular_chains

    ranks, d = cellular_chains(CwComplexSpec(name, n))
    C, Cd = cw(name, n), cw(name, n, "cohomology")
    top = max(ranks)
    for k in range(top + 2):
        free, tors = homology_oracle(ranks, d, k)
        assert homology_at_position(C, k) == FgaGroup(free, tuple(tors))
        # H^k = free part of H_k plus torsion of H_{k-1}
        _, tors_below = homology_oracle(ranks, d, k - 1)
        assert homology_at_position(Cd, k) == FgaGroup(free, tuple(tors_below))


def test_unknown_spec():
    with pytest.raises(UnknownSpec):
        CwComplexSpec("klein")
    with pytest.raises(UnknownSpec):
        cw_library(CwComplexSpec("sphere", 2), "sheaf")


# -- the tower couple ----------------------------------------------------------------

def test_trivial_filtration_degenerates():
    C = cw("torus")
    tc = couple_from_tower(trivial_filtration(C))
    assert graded_is_zero(tc.couple.j)
    E = {x[0]: str(P.canonical) for x, P in tc.couple.E.groups.items()}
    assert E == {0: "Z", 1: "Z^2", 2: "Z"}
    for x, P in tc.couple.E.groups.items():
        assert tc.couple.D[x].canonical == P.canonical


def test_tower_degrees_and_exactness():
    tc = couple_from_tower(skeletal_filtration(cw("rp", 3)))
    C = tc.couple
    assert (C.iota, C.eta, C.kappa) == (IOTA, ETA, KAPPA)
    assert validate_couple(C) == []
    assert tc.stable == [(n, 3) for n in range(4)]


def test_sphere_skeletal_e2_is_einf():
    F = skeletal_filtration(cw("sphere", 2))
    tc = couple_from_tower(F)
    Einf = infinity_page(tc.couple, tc.bound)
    E2 = {x: str(P.canonical) for x, P in tc.couple.E.groups.items() if not P.is_trivial}
    assert E2 == {x: str(P.canonical) for x, P in Einf.groups.items()}
    assert sorted((x[0], g) for x, g in E2.items()) == [(0, "Z"), (2, "Z")]


def test_sphere_one_skeletal_pieces():
    F = skeletal_filtration(cw("sphere", 1))
    assert F.L == 1
    E = {x: str(P.canonical) for x, P in couple_from_tower(F).couple.E.groups.items()}
    assert sorted((x[0], g) for x, g in E.items()) == [(0, "Z"), (1, "Z")]


def test_torus_skeletal_e2_is_homology():
    tc = couple_from_tower(skeletal_filtration(cw("torus")))
    assert graded_is_zero(differential(tc.couple))
    E = sorted((x[0], str(P.canonical)) for x, P in tc.couple.E.groups.items())
    assert E == [(0, "Z"), (1, "Z^2"), (2, "Z")]


def test_clamping_above_L():
    F = skeletal_filtration(cw("rp", 3))
    C = couple_from_tower(F).couple
    for n in range(4):
        for s in range(F.L + 1, F.L + 4):
            f = C.i.apply_into((n, s - 1))
            assert f.is_isomorphism()
            assert C.D[(n, s)].canonical == C.D[(n, F.L)].canonical


def test_z4_extension_filtration():
    F = z4_extension_filtration()
    assert F.L == 1
    assert homology_at_position(F.total(), 0) == FgaGroup(0, (4,))
    cert = couple_from_tower(F).converge(0)
    assert [str(p) for p in cert.nontrivial_pieces] == ["Z/2", "Z/2"]


def test_filtration_checks():
    with pytest.raises(FiltrationError):
        # F_0 not closed under d: d(e1) = e0 but e0 enters only at level 1
        FilteredComplex({0: 1, 1: 1}, {1: [[1]]}, [{1: [[1]], 0: np.zeros((1, 0), dtype=object)}, {}])
    with pytest.raises(FiltrationError):
        FilteredComplex({0: 2}, {}, [{0: [[1, 2], [1, 2]]}, {}])
    with pytest.raises(FiltrationError):
        FilteredComplex({0: 1, 1: 1, 2: 1}, {1: [[1]], 2: [[1]]}, [{}])


def test_levels_roundtrip():
    F = z4_extension_filtration()
    levels, inclusions = F.to_levels()
    G = FilteredComplex.from_levels(levels, inclusions)
    for s in range(F.L + 1):
        for n in F.degrees:
            assert np.array_equal(G.basis(s, n), F.basis(s, n))


# -- reindexing ----------------------------------------------------------------------

def test_reindex_examples():
    assert reindex_cohomological((0, 0)) == (0, 0)
    assert reindex_cohomological(IOTA).shift == (-1, 1)
    assert reindex_cohomological(ETA).shift == (2, -1)
    assert reindex_cohomological((3, 1)) == (-2, -1)


@given(st.integers(-20, 20), st.integers(-20, 20))
def test_reindex_inverse(n, s):
    assert reindex_homological(reindex_cohomological((n, s))) == (n, s)
    assert reindex_homological(reindex_cohomological(BiDegree((n, s)))).shift == (n, s)


def test_reindexed_differential_degrees():
    C = couple_from_tower(skeletal_filtration(cw("rp", 4))).couple
    for Cr in derived_sequence(C, 5):
        P = reindex_cohomological(Cr)
        assert P.coordinates == "pq"
        assert differential(P).degree.shift == (Cr.r, 1 - Cr.r)
        back = reindex_homological(P)
        assert set(back.E.groups) == set(Cr.E.groups)
        assert all(back.i.maps[x].equals(Cr.i.maps[x]) for x in Cr.i.maps)


# -- double complexes ------------------------------------------------------------------

def test_single_column_bicomplex():
    bc = Bicomplex({(0, 0): 1, (0, 1): 1}, {}, {(0, 1): [[2]]})
    F = double_complex_filtration(bc)
    assert F.L == 0
    assert str(homology_at_position(F.total(), 0)) == "Z/2"


def test_two_by_two_identity_grid():
    bc = Bicomplex(
        {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1},
        {(1, 0): [[1]], (1, 1): [[1]]},
        {(0, 1): [[1]], (1, 1): [[-1]]},
    )
    F = double_complex_filtration(bc)
    T = F.total()
    assert all(homology_at_position(T, n).is_trivial for n in range(3))
    tc = couple_from_tower(F)
    assert not infinity_page(tc.couple, tc.bound).support()


def test_not_anticommuting():
    bc = Bicomplex(
        {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1},
        {(1, 0): [[1]], (1, 1): [[1]]},
        {(0, 1): [[1]], (1, 1): [[1]]},
    )
    with pytest.raises(NotAnticommuting):
        double_complex_filtration(bc)
    bc.convention = "commuting"
    assert double_complex_filtration(bc).L == 1


def random_small_complex(rng, degrees, max_rank=2):
    """Free complex with two-term differentials chosen so that d o d = 0."""
    ranks = {a: rng.randint(0, max_rank) for a in degrees}
    d = {}
    for a in degrees[1:]:
        M = int_matrix([[rng.randint(-2, 2) for _ in range(ranks[a])] for _ in range(ranks[a - 1])],
                       rows=ranks[a - 1], cols=ranks[a])
        if a - 1 in d and ranks[a - 2] and (d[a - 1] @ M).any():
            M = M * 0
        d[a] = M
    return ranks, d


def tensor_bicomplex(rng):
    """A tensor product of a 3-term and a 2-term complex: anticommuting by the Koszul sign."""
    ra, da = random_small_complex(rng, [0, 1, 2])
    rb, db = random_small_complex(rng, [0, 1])
    ranks, dh, dv = {}, {}, {}
    for a, x in ra.items():
        for b, y in rb.items():
            ranks[(a, b)] = x * y
            if a in da:
                dh[(a, b)] = np.kron(da[a], np.eye(y, dtype=int).astype(object))
            if b in db:
                dv[(a, b)] = (-1) ** a * np.kron(np.eye(x, dtype=int).astype(object), db[b])
    return Bicomplex(ranks, dh, dv), (ra, da, rb, db)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_random_grid_convergence(seed):
    bc, _ = tensor_bicomplex(random.Random(seed))
    F = double_complex_filtration(bc)
    tc = couple_from_tower(F)
    assert validate_couple(tc.couple) == []
    T = F.total()
    for n in F.degrees:
        free, tors = homology_oracle(F.ranks, F.d, n)
        assert homology_at_position(T, n) == FgaGroup(free, tuple(tors))
        cert = tc.converge(n)
        assert cert.target == FgaGroup(free, tuple(tors))
        assert sum(p.free_rank for p in cert.pieces) == free


def test_hopf_template_shape():
    T = hopf_les_template(4)
    assert T.unknowns() == ["pi2_S2", "pi3_S2", "pi4_S2"]
    assert T.entry((1, 2)) == FgaGroup(1)
