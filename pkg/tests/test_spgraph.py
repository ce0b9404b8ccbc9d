import itertools
import math

import numpy as np
import pytest
import sympy

from xspecial.bricks import Brick, certificate, random_brick
from xspecial.eigen import jacobi_eigenvalues, off_norm, round_robin
from xspecial.errors import DifferentSides, NoConvergence, PreconditionFailed, SameVertex, TooLarge
from xspecial.extraspecial import ExtraSpecial, elem
from xspecial.quasifield import bundled, qf_prime
from xspecial.spgraph import (
    build,
    common_neighbors,
    dichotomy_check,
    h_graph,
    lemma4_set_check,
    m_squared_check,
    mixing_check,
    random_mixing,
    spectrum,
    structural_h,
    structure,
)

F3 = qf_prime(3)
CASES = [(qf_prime(2), 1), (F3, 1), (F3, 2), (qf_prime(5), 1), (bundled("hall9"), 1)]
IDS = ["F2-1", "F3-1", "F3-2", "F5-1", "hall9-1"]


@pytest.fixture(scope="module")
def graphs():
    return {i: build(Q, n) for i, (Q, n) in zip(IDS, CASES)}


def test_incidence_rule_small():
    G = build(F3, 1)
    # ((x), z) ~ ((y), z') iff x*y == z + z'
    for (x, zx), (y, zy) in itertools.product(itertools.product(range(3), repeat=2), repeat=2):
        adj = G.incidence[G.index(((x,), zx)), G.index(((y,), zy))]
        assert adj == ((x * y) % 3 == (zx + zy) % 3)


@pytest.mark.parametrize("key", IDS)
def test_degrees(graphs, key):
    G = graphs[key]
    deg = G.adjacency().sum(axis=1)
    assert np.all(deg == G.degree)
    assert G.adjacency().shape == (2 * G.side_size, 2 * G.side_size)


def test_common_neighbor_examples():
    G = build(F3, 1)
    # same vector part, different last coordinate: no common neighbour
    assert common_neighbors(G, ((0,), 0), ((0,), 1)) == 0
    assert common_neighbors(G, ((0,), 0), ((1,), 0)) == 1
    assert common_neighbors(G, ((0,), 0), ((1,), 2), side="Y") == 1
    with pytest.raises(SameVertex):
        common_neighbors(G, ((1,), 1), ((1,), 1))
    with pytest.raises(DifferentSides):
        common_neighbors(G, ((1,), 1), ((2,), 1), side="X", v_side="Y")


def test_common_neighbors_n2():
    G = build(F3, 2)
    assert common_neighbors(G, ((0, 0), 0), ((1, 0), 0)) == 3
    assert common_neighbors(G, ((1, 2), 0), ((1, 2), 2)) == 0


@pytest.mark.parametrize("key", IDS)
def test_structure(graphs, key):
    G = graphs[key]
    assert dichotomy_check(G)
    H = h_graph(G)
    assert H.regular_degree == G.q - 1
    assert np.array_equal(H.adjacency, structural_h(G))
    assert m_squared_check(G)
    assert structure(G).ok


def test_h_degree_values():
    assert build(F3, 1) and h_graph(build(F3, 1)).regular_degree == 2
    assert h_graph(build(qf_prime(2), 1)).regular_degree == 1
    assert h_graph(build(bundled("hall9"), 1)).regular_degree == 8


def test_build_guard():
    with pytest.raises(TooLarge):
        build(qf_prime(7), 4)


def test_eigen_guard():
    # 7^(3+1) = 2401 fits the build limit but not the eigensolver limit
    G = build(qf_prime(7), 3)
    with pytest.raises(TooLarge):
        spectrum(G)


def test_charpoly_oracle_f3():
    G = build(F3, 1)
    M = sympy.Matrix(G.adjacency().tolist())
    x = sympy.symbols("x")
    # eigenvalues +-q (trivial), +-sqrt(q) six times each, and 0 four times
    assert sympy.factor(M.charpoly(x).as_expr()) == sympy.factor(
        (x - 3) * (x + 3) * (x**2 - 3) ** 6 * x**4
    )
    sp = spectrum(G)
    assert sp.lambda1 == pytest.approx(3, abs=1e-6)
    assert sp.lambda2 == pytest.approx(math.sqrt(3), abs=1e-6)
    assert sp.lambda_min == pytest.approx(-3, abs=1e-6)


@pytest.mark.parametrize("key", IDS)
def test_spectrum_against_numpy(graphs, key):
    G = graphs[key]
    sp = spectrum(G)
    ref = np.sort(np.linalg.eigvalsh(G.adjacency().astype(float)))[::-1]
    assert np.allclose(sp.eigenvalues, ref, atol=1e-6)
    assert sp.lambda1 == pytest.approx(G.degree, abs=1e-6)
    assert sp.lambda_min == pytest.approx(-G.degree, abs=1e-6)
    assert sp.lambda2 == pytest.approx(G.q ** (G.n / 2), abs=1e-6)
    assert sp.passed
    assert sp.residual < 1e-9


def test_jacobi_small():
    A = np.array([[2.0, 1.0], [1.0, 2.0]])
    res = jacobi_eigenvalues(A)
    assert np.allclose(res.eigenvalues, [3, 1])
    res = jacobi_eigenvalues(np.diag([1.0, 5.0, 3.0]))
    assert np.allclose(res.eigenvalues, [5, 3, 1]) and res.sweeps == 0


def test_jacobi_random_symmetric():
    rng = np.random.default_rng(0)
    for m in (1, 3, 8, 17):
        A = rng.normal(size=(m, m))
        A = A + A.T
        res = jacobi_eigenvalues(A)
        assert np.allclose(res.eigenvalues, np.sort(np.linalg.eigvalsh(A))[::-1], atol=1e-8)
        assert res.residual < 1e-9


def test_jacobi_no_convergence():
    A = np.random.default_rng(1).normal(size=(12, 12))
    with pytest.raises(NoConvergence):
        jacobi_eigenvalues(A + A.T, max_sweeps=1)


def test_round_robin_covers_all_pairs():
    for m in (2, 5, 8):
        seen = set()
        for P, Q in round_robin(m):
            assert len(set(P) | set(Q)) == 2 * len(P)
            seen |= {tuple(sorted(t)) for t in zip(P.tolist(), Q.tolist())}
        assert seen == set(itertools.combinations(range(m), 2))


def test_off_norm():
    A = np.array([[100.0, 3.0], [4.0, -7.0]])
    assert off_norm(A) == pytest.approx(5.0)


def test_mixing_examples():
    G = build(F3, 1)
    s = G.side_size
    full = mixing_check(G, range(s), range(s), math.sqrt(3))
    assert full.e == s * G.degree and full.deviation == 0 and full.passed
    empty = mixing_check(G, [], range(s), math.sqrt(3))
    assert empty.e == 0 and empty.passed


@pytest.mark.parametrize("key", IDS)
def test_random_mixing(graphs, key):
    G = graphs[key]
    lam = G.q ** (G.n / 2)
    results = random_mixing(G, lam, count=200, seed=0)
    assert len(results) == 200 and all(r.passed for r in results)
    # brute-force edge count for a few of them
    rng = np.random.default_rng(0)
    for _ in range(3):
        B, C = (sorted(rng.choice(G.side_size, size=min(5, G.side_size), replace=False)) for _ in range(2))
        r = mixing_check(G, B, C, lam)
        assert r.e == sum(int(G.incidence[b, c]) for b in B for c in C)


def _check_witness(Bk, a, b, lam, w):
    Q = Bk.Q
    G = Bk.group
    second = elem([Q.sub(ai, xi) for ai, xi in zip(a, w.x)], [Q.sub(bi, yi) for bi, yi in zip(b, w.y)], w.z2)
    first = elem(w.x, w.y, w.z)
    assert first in Bk and second in Bk
    assert G.mul(first, second) == elem(a, b, lam)


@pytest.mark.parametrize("kind", "HM")
def test_edge_witness_full_brick(kind):
    Bk = Brick.full(ExtraSpecial(F3, 1, kind))
    graph = build(F3, 1)
    for a, b, lam in itertools.product(range(3), repeat=3):
        _check_witness(Bk, [a], [b], lam, lemma4_set_check(Bk, [a], [b], lam, graph))


def test_edge_witness_random_bricks():
    rng = np.random.default_rng(7)
    found = 0
    for Q, n, kind in [(F3, 2, "M"), (F3, 2, "H"), (qf_prime(5), 1, "M"), (bundled("hall9"), 1, "H")]:
        G = ExtraSpecial(Q, n, kind)
        graph = build(Q, n)
        for _ in range(20):
            Bk = random_brick(G, rng, min_size=max(1, Q.q // 2))
            for a in itertools.product(range(Q.q), repeat=n):
                b = a
                if not certificate(Bk, a, b):
                    continue
                for lam in range(Q.q):
                    _check_witness(Bk, a, b, lam, lemma4_set_check(Bk, a, b, lam, graph))
                    found += 1
    assert found > 0


def test_edge_witness_needs_certificate():
    Bk = Brick(ExtraSpecial(F3, 1), [[0]], [[0]], [0])
    with pytest.raises(PreconditionFailed):
        lemma4_set_check(Bk, [0], [0], 0)
