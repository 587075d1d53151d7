from hypothesis import given, settings
from hypothesis import strategies as st

from specseq.builders import IOTA, TO_NS, TO_PQ, couple_from_tower, skeletal_filtration, cw_library, CwComplexSpec
from specseq.fga import GroupHom, Presentation
from specseq.graded import (
    BiDegree,
    GradedGroup,
    GradedHom,
    apply_at,
    apply_into,
    graded_compose,
    graded_is_zero,
)

Z = Presentation.free(1)
Z2 = Presentation.cyclic(2)


def scalar_hom(G, degree, c):
    maps = {}
    for x, P in G.groups.items():
        y = BiDegree(degree)(x)
        if y in G.groups:
            maps[x] = GroupHom(P, G[y], [[c]])
    return GradedHom(G, G, degree, maps)


def line_group(xs):
    return GradedGroup({x: Z for x in xs})


def test_degree_arithmetic():
    a, b = BiDegree((2, -1)), BiDegree((2, -1))
    assert (a + b).shift == (4, -2)
    assert (a - a).shift == (0, 0)
    assert a.power(-1, a((3, 4))) == (3, 4)


def test_compose_with_identity():
    G = line_group([(0, 0), (1, 0)])
    f = scalar_hom(G, (1, 0), 3)
    g = graded_compose(GradedHom.identity(G), f)
    assert g.degree.shift == (1, 0)
    assert all(g.maps[x].equals(f.maps[x]) for x in f.maps)


def test_compose_degree_adds():
    G = line_group([(0, 0), (2, -1), (4, -2)])
    f = scalar_hom(G, (2, -1), 1)
    assert graded_compose(f, f).degree.shift == (4, -2)


def test_doubling_squared_is_quadrupling():
    G = line_group([(0, 0), (0, 1), (3, 3)])
    two = scalar_hom(G, (0, 0), 2)
    four = graded_compose(two, two)
    for x in G.groups:
        assert list(four.maps[x].matrix.ravel()) == [4]


def test_apply_conventions():
    G = line_group([(0, 0)])
    f = scalar_hom(G, (0, 0), 5)
    assert apply_at(f, (7, 7)).src.ambient == 0
    assert apply_at(f, (0, 0)).equals(apply_into(f, (0, 0)))


def test_apply_into_tower_source():
    # D^{n,s} is reached by i from D^{n,s+1}
    F = skeletal_filtration(cw_library(CwComplexSpec("sphere", 2)))
    C = couple_from_tower(F).couple
    assert C.i.degree == IOTA
    for x in [(0, 0), (2, 1), (2, 2), (0, 3)]:
        f = C.i.apply_into(x)
        assert f.src.ambient == C.D[(x[0], x[1] + 1)].ambient
        assert f.dst.ambient == C.D[x].ambient


def test_graded_is_zero_examples():
    assert graded_is_zero(GradedHom(GradedGroup({}), GradedGroup({}), (0, 0), {}))
    G = line_group([(0, 0)])
    assert not graded_is_zero(scalar_hom(G, (0, 0), 2))
    H = GradedGroup({(0, 0): Z2})
    assert graded_is_zero(GradedHom(G, H, (0, 0), {(0, 0): GroupHom(Z, Z2, [[2]])}))


indices = st.tuples(st.integers(-3, 3), st.integers(-3, 3))


@settings(max_examples=60, deadline=None)
@given(
    st.sets(indices, min_size=1, max_size=8),
    st.tuples(st.integers(-1, 1), st.integers(-1, 1)),
    st.tuples(st.integers(-1, 1), st.integers(-1, 1)),
    st.tuples(st.integers(-1, 1), st.integers(-1, 1)),
    st.integers(-3, 3),
    st.integers(-3, 3),
    st.integers(-3, 3),
)
def test_compose_associative_and_unital(xs, d1, d2, d3, a, b, c):
    G = line_group(xs)
    f, g, h = scalar_hom(G, d1, a), scalar_hom(G, d2, b), scalar_hom(G, d3, c)
    left = graded_compose(h, graded_compose(g, f))
    right = graded_compose(graded_compose(h, g), f)
    assert left.degree == right.degree
    for x in G.groups:
        assert left.apply_at(x).equals(right.apply_at(x))
    one = GradedHom.identity(G)
    for x in G.groups:
        assert graded_compose(one, f).apply_at(x).equals(f.apply_at(x))
        assert graded_compose(f, one).apply_at(x).equals(f.apply_at(x))


@settings(max_examples=60, deadline=None)
@given(st.sets(indices, min_size=1, max_size=8), st.tuples(st.integers(-2, 2), st.integers(-2, 2)), st.integers(-3, 3))
def test_apply_into_matches_apply_at(xs, d, c):
    G = line_group(xs)
    f = scalar_hom(G, d, c)
    for x in f.maps:
        assert apply_into(f, f.degree(x)).equals(apply_at(f, x))


@settings(max_examples=40, deadline=None)
@given(st.sets(indices, min_size=1, max_size=6), st.tuples(st.integers(-2, 2), st.integers(-2, 2)))
def test_reindex_roundtrip(xs, d):
    G = line_group(xs)
    f = scalar_hom(G, d, 1)
    g = f.transformed(TO_PQ, TO_NS).transformed(TO_NS, TO_PQ)
    assert g.degree == f.degree
    assert set(g.maps) == set(f.maps)
    assert set(G.transformed(TO_PQ, TO_NS).transformed(TO_NS, TO_PQ).groups) == set(G.groups)
