import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xspecial.errors import DimensionMismatch, NotAField, NotMFamily, ParseError, TooLarge
from xspecial.extraspecial import (
    ExtraSpecial,
    GElem,
    carry_f,
    carry_identity_holds,
    check_associativity,
    check_carry_identity,
    check_relations,
    elem,
    gpow,
    h_mul,
    heisenberg_matrix,
    m_mul,
    matrix_check,
)
from xspecial.quasifield import bundled, qf_prime

F3 = qf_prime(3)
F5 = qf_prime(5)


def g(x, y, z):
    return elem(x, y, z)


def test_h_mul_examples():
    assert h_mul(F3, g([1], [0], 0), g([0], [1], 0)) == g([1], [1], 1)
    assert h_mul(F3, g([0], [1], 0), g([1], [0], 0)) == g([1], [1], 0)


def test_h_mul_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        h_mul(F3, g([1], [0], 0), g([0, 1], [1, 0], 0))


@pytest.mark.parametrize("Q,n", [(F3, 1), (F5, 2), (bundled("hall9"), 2)], ids=["F3", "F5", "hall9"])
def test_identity_two_sided(Q, n):
    G = ExtraSpecial(Q, n)
    rng = np.random.default_rng(0)
    e = G.identity
    for _ in range(100):
        a = G.random_element(rng)
        assert G.mul(e, a) == a == G.mul(a, e)


def test_carry_examples():
    assert carry_f(3, [2], [2]) == 1
    assert carry_f(3, [0], [0]) == 0
    assert carry_f(5, [3, 4], [2, 1]) == 2


@pytest.mark.parametrize("p,n", [(p, n) for p in (2, 3, 5) for n in (1, 2)])
def test_carry_symmetric(p, n):
    vecs = list(itertools.product(range(p), repeat=n))
    for y, y2 in itertools.product(vecs, repeat=2):
        assert carry_f(p, y, y2) == carry_f(p, y2, y)


def test_m_mul_examples():
    assert m_mul(F3, g([0], [1], 0), g([0], [1], 0)) == g([0], [2], 0)
    assert m_mul(F3, g([0], [2], 0), g([0], [1], 0)) == g([0], [0], 1)
    M1 = ExtraSpecial(F3, 1, "M")
    assert M1.pow(g([0], [1], 0), 3) == g([0], [0], 1)


def test_m_requires_prime_field():
    with pytest.raises(NotMFamily):
        ExtraSpecial(bundled("hall9"), 1, "M")
    with pytest.raises(NotMFamily):
        m_mul(bundled("hall9"), g([0], [1], 0), g([0], [1], 0))


def test_pow_examples():
    M1 = ExtraSpecial(F3, 1, "M")
    H1 = ExtraSpecial(F3, 1, "H")
    assert M1.pow(M1.a(0), 3) == M1.identity
    assert H1.pow(H1.b(0), 3) == H1.identity
    rng = np.random.default_rng(1)
    for G in (M1, H1):
        x = G.random_element(rng)
        assert G.pow(x, 1) == x
        assert G.pow(x, 0) == G.identity
        assert gpow(G, x, 5) == G.mul(G.mul(G.mul(G.mul(x, x), x), x), x)
    with pytest.raises(ValueError):
        gpow(M1, M1.c, -1)


@pytest.mark.parametrize("kind,p,n", [("M", 3, 1), ("M", 5, 2), ("H", 3, 2), ("H", 5, 1), ("M", 7, 1), ("H", 2, 2)])
def test_relations_hold(kind, p, n):
    rep = check_relations(ExtraSpecial(qf_prime(p), n, kind))
    assert rep.ok, rep.failed()


def test_relation_names_cover_presentation():
    rep = check_relations(ExtraSpecial(F3, 2, "M"))
    names = {r.relation for r in rep.results}
    assert {"[a1,b1]=c", "[a1,b2]=1", "[a2,c]=1", "b1^3=c", "a2^3=1", "c^3=1"} <= names


def test_heisenberg_law_fails_m_presentation():
    # the law without the carry term gives b^3 = 1, not c
    rep = check_relations(ExtraSpecial(F3, 1, "H"), presentation="M")
    assert [r.relation for r in rep.failed()] == ["b1^3=c"]


def test_inverse_matches_exhaustive_search():
    for G in (ExtraSpecial(F3, 1, "M"), ExtraSpecial(F3, 1, "H"), ExtraSpecial(bundled("hall9"), 1, "H")):
        elems = list(G.elements())
        for x in elems[:: max(1, len(elems) // 60)]:
            found = [h for h in elems if G.mul(x, h) == G.identity]
            assert found == [G.inv(x)]


def test_associativity_exhaustive_m1():
    res = check_associativity(ExtraSpecial(F3, 1, "M"))
    assert res.ok and res.triples == 27**3
    assert res.carry_ok and res.carry_triples == 27


def test_associativity_matches_scalar_oracle():
    # vectorised product against scalar m_mul on every pair
    G = ExtraSpecial(F3, 1, "M")
    elems = list(G.elements())
    X, Y, Z = G.to_arrays(elems)
    PX, PY, PZ = G.mul_arrays(X[:, None], Y[:, None], Z[:, None], X[None], Y[None], Z[None])
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            assert elem(PX[i, j], PY[i, j], PZ[i, j]) == m_mul(F3, a, b)


@pytest.mark.parametrize("p,n", [(3, 2), (5, 1), (5, 2)])
def test_associativity_sampled(p, n):
    res = check_associativity(ExtraSpecial(qf_prime(p), n, "M"), samples=10**5, seed=0)
    assert res.ok and res.carry_ok


def test_hall9_heisenberg_is_not_associative():
    res = check_associativity(ExtraSpecial(bundled("hall9"), 1, "H"), samples=5000)
    assert not res.ok
    G = ExtraSpecial(bundled("hall9"), 1, "H")
    a, b, c = res.witness
    assert G.mul(G.mul(a, b), c) != G.mul(a, G.mul(b, c))


def test_associativity_guard():
    with pytest.raises(TooLarge):
        check_associativity(ExtraSpecial(F5, 2, "M"))


def test_carry_identity_exhaustive():
    assert check_carry_identity(3, 2).carry_ok
    assert check_carry_identity(5, 1).carry_ok
    for y1, y2, y3 in itertools.product(range(5), repeat=3):
        assert carry_identity_holds(5, [y1], [y2], [y3])


def test_broken_law_detected_by_associativity():
    # a carry that is not a cocycle breaks associativity
    class Broken(ExtraSpecial):
        def mul_arrays(self, X1, Y1, Z1, X2, Y2, Z2):
            X, Y, Z = super().mul_arrays(X1, Y1, Z1, X2, Y2, Z2)
            return X, Y, (Z + (Y1 == 2).sum(axis=-1) * (Y2 == 1).sum(axis=-1)) % self.q

    assert not check_associativity(Broken(F3, 1, "H")).ok


def test_hall9_loop_cancellation():
    G = ExtraSpecial(bundled("hall9"), 1, "H")
    elems = list(G.elements())
    X, Y, Z = G.to_arrays(elems)
    rng = np.random.default_rng(3)
    for gi in rng.choice(len(elems), size=8, replace=False):
        x = (X[gi], Y[gi], Z[gi])
        left = G.encode(*G.mul_arrays(*x, X, Y, Z))
        right = G.encode(*G.mul_arrays(X, Y, Z, *x))
        assert len(np.unique(left)) == len(elems)
        assert len(np.unique(right)) == len(elems)
    e = G.identity
    assert all(G.mul(e, x) == x == G.mul(x, e) for x in elems)


@pytest.mark.parametrize("kind,n", [("H", 1), ("H", 2), ("M", 1), ("M", 2)])
def test_center_commutes(kind, n):
    G = ExtraSpecial(F3, n, kind)
    for t in range(3):
        c = G.center_element(t)
        for x in G.elements():
            assert G.mul(c, x) == G.mul(x, c)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_center_generator_order(p):
    for kind in "HM":
        G = ExtraSpecial(qf_prime(p), 1, kind)
        assert G.pow(G.c, p) == G.identity


@pytest.mark.parametrize("p,n", [(3, 1), (5, 2)])
def test_matrix_model(p, n):
    Q = qf_prime(p)
    G = ExtraSpecial(Q, n)
    rng = np.random.default_rng(p)
    for _ in range(100):
        assert matrix_check(Q, n, G.random_element(rng), G.random_element(rng))


def test_matrix_model_identity():
    G = ExtraSpecial(F3, 1)
    e = G.identity
    assert matrix_check(F3, 1, e, e)
    assert heisenberg_matrix(F3, e) == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_matrix_model_needs_field():
    G = ExtraSpecial(bundled("hall9"), 1)
    with pytest.raises(NotAField):
        matrix_check(bundled("hall9"), 1, G.identity, G.identity)


def test_gelem_text_roundtrip():
    x = g([1, 2], [0, 4], 3)
    assert str(x) == "[1,2 | 0,4 | 3]"
    assert GElem.parse(str(x)) == x
    with pytest.raises(ParseError):
        GElem.parse("[1,2 | 0]")
    with pytest.raises(DimensionMismatch):
        GElem((1,), (1, 2), 0)


def test_encode_decode_roundtrip():
    G = ExtraSpecial(F3, 2, "M")
    codes = np.arange(G.order)
    assert np.array_equal(G.encode(*G.decode(codes)), codes)
    assert [G.from_code(c) for c in range(G.order)] == list(G.elements())


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.sampled_from("HM"), st.data())
def test_group_axioms_random(p, kind, data):
    G = ExtraSpecial(qf_prime(p), 2, kind)
    el = st.tuples(
        st.tuples(st.integers(0, p - 1), st.integers(0, p - 1)),
        st.tuples(st.integers(0, p - 1), st.integers(0, p - 1)),
        st.integers(0, p - 1),
    ).map(lambda t: GElem(*t))
    a, b, c = data.draw(el), data.draw(el), data.draw(el)
    assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))
    assert G.mul(a, G.inv(a)) == G.identity == G.mul(G.inv(a), a)
    # commutators are central
    comm = G.commutator(a, b)
    assert comm.x == (0, 0) and comm.y == (0, 0)
