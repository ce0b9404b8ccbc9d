"""The bipartite sum-product graph SP_{Q,n}.

Both sides are ``Q^n x Q``; ``(x, z_x) ~ (y, z_y)`` iff
``<x, y> = z_x + z_y``.  Vertices on each side are numbered
lexicographically by ``(vector, last coordinate)``, X side first in the full
adjacency matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .bricks import Brick, certificate, shifted_negation
from .eigen import jacobi_eigenvalues
from .errors import DifferentSides, DimensionMismatch, NoWitness, PreconditionFailed, SameVertex, TooLarge
from .extraspecial import carry_f
from .quasifield import QTable

SIDE_LIMIT = 4096
# Jacobi sweeps are cubic in the full matrix dimension 2 * side
EIGEN_LIMIT = 4096

Vertex = tuple[tuple[int, ...], int]


class SPGraph:
    """Incidence between the two sides, stored as a ``side x side`` boolean matrix."""

    def __init__(self, Q: QTable, n: int, incidence: np.ndarray):
        self.Q = Q
        self.n = n
        self.q = Q.q
        self.dimension = n
        self.side_size = Q.q ** (n + 1)
        self.incidence = incidence
        self.incidence.setflags(write=False)
        self.vectors = list(itertools.product(range(Q.q), repeat=n))
        self._adjacency = None

    def __repr__(self) -> str:
        return f"SPGraph({self.Q.name}, n={self.n})"

    @property
    def degree(self) -> int:
        return self.q**self.n

    def index(self, v: Vertex) -> int:
        vec, z = v
        if len(vec) != self.n:
            raise DimensionMismatch(f"vertex vector has length {len(vec)}, expected {self.n}")
        code = 0
        for c in vec:
            code = code * self.q + c
        return code * self.q + z

    def vertex(self, i: int) -> Vertex:
        return self.vectors[i // self.q], i % self.q

    def adjacency(self) -> np.ndarray:
        """Full ``2s x 2s`` integer adjacency matrix (X side first)."""
        if self._adjacency is None:
            s = self.side_size
            M = np.zeros((2 * s, 2 * s), dtype=np.int64)
            M[:s, s:] = self.incidence
            M[s:, :s] = self.incidence.T
            M.setflags(write=False)
            self._adjacency = M
        return self._adjacency

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(u, v)`` in full-matrix numbering, ``u`` on the X side."""
        s = self.side_size
        return [(int(u), int(v) + s) for u, v in np.argwhere(self.incidence)]

    def edge_list_text(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges())


def build(Q: QTable, n: int) -> SPGraph:
    if n < 1:
        raise DimensionMismatch(f"dimension must be >= 1, got {n}")
    side = Q.q ** (n + 1)
    if side > SIDE_LIMIT:
        raise TooLarge(f"SP graph side size {side} > {SIDE_LIMIT}")
    q = Q.q
    vecs = np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64).reshape(-1, n)
    add, mul = Q.add_table, Q.mul_table
    # D[x, y] = <x, y>
    D = np.zeros((len(vecs), len(vecs)), dtype=np.int64)
    for i in range(n):
        D = add[D, mul[vecs[:, None, i], vecs[None, :, i]]]
    # incidence[(x, zx), (y, zy)] = D[x, y] == zx + zy
    inc = D[:, None, :, None] == add[None, :, None, :]
    return SPGraph(Q, n, inc.reshape(side, side))


# ---------------------------------------------------------------------------
# exact structure


def common_neighbors(G: SPGraph, u: Vertex, v: Vertex, side: str = "X", v_side: str | None = None) -> int:
    if v_side is not None and v_side != side:
        raise DifferentSides("common neighbours are only counted for two vertices on the same side")
    if side not in ("X", "Y"):
        raise ValueError(f"side must be 'X' or 'Y', got {side!r}")
    i, j = G.index(u), G.index(v)
    if i == j:
        raise SameVertex(f"{u} and {v} are the same vertex")
    inc = G.incidence if side == "X" else G.incidence.T
    return int(np.count_nonzero(inc[i] & inc[j]))


def same_side_gram(G: SPGraph) -> tuple[np.ndarray, np.ndarray]:
    """Common-neighbour counts within X and within Y."""
    N = G.incidence.astype(np.int64)
    return N @ N.T, N.T @ N


def _same_vector(G: SPGraph) -> np.ndarray:
    """``side x side`` mask: same first n coordinates."""
    vec_id = np.arange(G.side_size) // G.q
    return vec_id[:, None] == vec_id[None, :]


def dichotomy_check(G: SPGraph) -> bool:
    """Every same-side pair shares 0 neighbours if its vectors agree, else exactly q^(n-1)."""
    same = _same_vector(G)
    off = ~np.eye(G.side_size, dtype=bool)
    want = np.where(same, 0, G.q ** (G.n - 1))
    return all(bool(np.array_equal(C[off], want[off])) for C in same_side_gram(G))


@dataclass
class HGraph:
    adjacency: np.ndarray  # 2s x 2s, 0/1
    degrees: np.ndarray

    @property
    def regular_degree(self) -> int | None:
        d = np.unique(self.degrees)
        return int(d[0]) if len(d) == 1 else None


def h_graph(G: SPGraph) -> HGraph:
    """Same-side vertices with no common neighbour in ``G``."""
    s = G.side_size
    XX, YY = same_side_gram(G)
    E = np.zeros((2 * s, 2 * s), dtype=np.int64)
    E[:s, :s] = XX == 0
    E[s:, s:] = YY == 0
    np.fill_diagonal(E, 0)
    return HGraph(E, E.sum(axis=1))


def structural_h(G: SPGraph) -> np.ndarray:
    """H built from its description: same side, same vector part, different last coordinate."""
    s = G.side_size
    blk = (_same_vector(G) & ~np.eye(s, dtype=bool)).astype(np.int64)
    E = np.zeros((2 * s, 2 * s), dtype=np.int64)
    E[:s, :s] = blk
    E[s:, s:] = blk
    return E


def m_squared_check(G: SPGraph) -> bool:
    """``M^2 == q^(n-1) diag(J, J) + (q^n - q^(n-1)) I - q^(n-1) E`` entrywise, in integers."""
    M = G.adjacency()
    q, n, s = G.q, G.n, G.side_size
    E = structural_h(G)
    if not np.array_equal(E, h_graph(G).adjacency):
        return False
    J2 = np.zeros_like(M)
    J2[:s, :s] = 1
    J2[s:, s:] = 1
    lo = q ** (n - 1)
    rhs = lo * J2 + (q**n - lo) * np.eye(2 * s, dtype=np.int64) - lo * E
    return bool(np.array_equal(M @ M, rhs))


@dataclass
class StructureReport:
    regular: bool
    dichotomy: bool
    h_regular: bool
    m_squared: bool

    @property
    def ok(self) -> bool:
        return self.regular and self.dichotomy and self.h_regular and self.m_squared

    def to_dict(self) -> dict:
        return {
            "regular": self.regular,
            "commonNeighborDichotomy": self.dichotomy,
            "hRegular": self.h_regular,
            "mSquared": self.m_squared,
            "ok": self.ok,
        }


def structure(G: SPGraph) -> StructureReport:
    deg = G.adjacency().sum(axis=1)
    return StructureReport(
        regular=bool(np.all(deg == G.degree)),
        dichotomy=dichotomy_check(G),
        h_regular=h_graph(G).regular_degree == G.q - 1,
        m_squared=m_squared_check(G),
    )


# ---------------------------------------------------------------------------
# spectrum and mixing


@dataclass
class SpectralReport:
    lambda1: float
    lambda2: float
    lambda_min: float
    bound: float
    passed: bool
    solver_iterations: int
    residual: float
    tol: float
    eigenvalues: np.ndarray

    def to_dict(self) -> dict:
        return {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "lambdaMin": self.lambda_min,
            "bound": self.bound,
            "pass": self.passed,
            "solverIterations": self.solver_iterations,
            "residual": self.residual,
            "tol": self.tol,
        }


def spectrum(G: SPGraph, tol: float = 1e-9, max_sweeps: int = 100) -> SpectralReport:
    """Eigenvalues of the full adjacency matrix by Jacobi rotations.

    ``passed`` is ``lambda2 <= sqrt(2) q^(n/2) + tol``.
    """
    if 2 * G.side_size > EIGEN_LIMIT:
        raise TooLarge(f"eigensolver guard: matrix dimension {2 * G.side_size} > {EIGEN_LIMIT}")
    res = jacobi_eigenvalues(G.adjacency(), tol=tol, max_sweeps=max_sweeps)
    ev = res.eigenvalues
    bound = math.sqrt(2) * G.q ** (G.n / 2)
    lam2 = float(ev[1])
    return SpectralReport(
        lambda1=float(ev[0]),
        lambda2=lam2,
        lambda_min=float(ev[-1]),
        bound=bound,
        passed=lam2 <= bound + tol,
        solver_iterations=res.sweeps,
        residual=res.residual,
        tol=tol,
        eigenvalues=ev,
    )


@dataclass
class MixingResult:
    size_b: int
    size_c: int
    e: int
    expected: Fraction
    deviation: float
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "sizeB": self.size_b,
            "sizeC": self.size_c,
            "e": self.e,
            "expected": float(self.expected),
            "deviation": self.deviation,
            "bound": self.bound,
            "pass": self.passed,
        }


def mixing_check(G: SPGraph, B: Sequence[int], C: Sequence[int], lambda2: float, tol: float = 1e-6) -> MixingResult:
    """Edge count between X-side vertices ``B`` and Y-side vertices ``C`` against the mixing bound.

    Vertices are side-local indices in ``range(G.side_size)``.
    """
    B = np.unique(np.asarray(B, dtype=np.intp))
    C = np.unique(np.asarray(C, dtype=np.intp))
    e = int(np.count_nonzero(G.incidence[np.ix_(B, C)])) if len(B) and len(C) else 0
    expected = Fraction(G.degree * len(B) * len(C), G.side_size)
    deviation = float(abs(e - expected))
    bound = lambda2 * math.sqrt(len(B) * len(C))
    return MixingResult(len(B), len(C), e, expected, deviation, bound, deviation <= bound + tol)


def random_vertex_sets(G: SPGraph, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    s = G.side_size
    out = []
    for _ in range(2):
        k = int(rng.integers(0, s + 1))
        out.append(np.sort(rng.choice(s, size=k, replace=False)))
    return out[0], out[1]


def random_mixing(G: SPGraph, lambda2: float, count: int = 200, seed: int = 0, tol: float = 1e-6) -> list[MixingResult]:
    rng = np.random.default_rng(seed)
    return [mixing_check(G, *random_vertex_sets(G, rng), lambda2, tol) for _ in range(count)]


# ---------------------------------------------------------------------------
# the edge witness behind the certificate


@dataclass(frozen=True)
class Witness:
    x: tuple[int, ...]
    y: tuple[int, ...]
    z: int
    z2: int


def lemma4_sets(B: Brick, a: Sequence[int], b: Sequence[int], lam: int):
    """Vertex sets ``E`` (X side) and ``F`` (Y side) together with their sources.

    ``E = X' x (lam - Z)`` and ``F = {(b - y, -z - f(y, b - y))}``; the carry
    term is present only for M_n.
    """
    Q = B.Q
    n = B.n
    Xp = [sorted(set(Xi) & shifted_negation(Q, ai, Xi)) for Xi, ai in zip(B.X, a)]
    Yp = [sorted(set(Yi) & shifted_negation(Q, bi, Yi)) for Yi, bi in zip(B.Y, b)]
    E = []
    for x in itertools.product(*Xp):
        for z in B.Z:
            E.append(((x, Q.add(Q.neg(z), lam)), (x, z)))
    F = []
    for y in itertools.product(*Yp):
        by = tuple(Q.sub(bi, yi) for bi, yi in zip(b, y))
        shift = carry_f(Q.q, y, by) if B.group.kind == "M" else 0
        for z in B.Z:
            second = Q.neg(z)
            if shift:
                second = (second - shift) % Q.q
            F.append(((by, second), (y, z)))
    return E, F


def lemma4_set_check(B: Brick, a: Sequence[int], b: Sequence[int], lam: int, graph: SPGraph | None = None) -> Witness:
    """Find an edge between the two certificate sets, i.e. ``x, y, z, z'`` with
    ``z + z' + <x, b - y> (+ f(y, b - y)) == lam``.

    Requires the certificate to hold for ``(a, b)``.
    """
    if not certificate(B, a, b):
        raise PreconditionFailed(f"certificate does not hold for a={tuple(a)}, b={tuple(b)}")
    G = graph if graph is not None else build(B.Q, B.n)
    if G.Q != B.Q or G.n != B.n:
        raise DimensionMismatch("graph does not match the brick's quasifield and dimension")
    E, F = lemma4_sets(B, a, b, lam)
    ei = [G.index(v) for v, _ in E]
    fi = [G.index(v) for v, _ in F]
    hits = np.argwhere(G.incidence[np.ix_(ei, fi)])
    if not len(hits):
        raise NoWitness(f"no edge between E and F for a={tuple(a)}, b={tuple(b)}, lambda={lam}")
    i, j = hits[0]
    x, z = E[i][1]
    y, z2 = F[j][1]
    return Witness(x, y, z, z2)
