"""Group laws of H_n(Q) and M_n on triples ``[x, y, z]``.

Both families share the Heisenberg product
``[x, y, z] . [x', y', z'] = [x + x', y + y', z + z' + <x, y'>]``;
M_n (prime fields only) adds the carry count ``f(y, y')`` to the centre
coordinate.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, NotAField, NotMFamily, ParseError, TooLarge
from .quasifield import QTable, dot, qf_prime

ASSOC_EXHAUSTIVE_LIMIT = 10**8


@dataclass(frozen=True, order=True)
class GElem:
    x: tuple[int, ...]
    y: tuple[int, ...]
    z: int

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise DimensionMismatch(f"x has length {len(self.x)} but y has length {len(self.y)}")

    @property
    def n(self) -> int:
        return len(self.x)

    def __str__(self) -> str:
        xs = ",".join(map(str, self.x))
        ys = ",".join(map(str, self.y))
        return f"[{xs} | {ys} | {self.z}]"

    @classmethod
    def parse(cls, text: str) -> "GElem":
        m = re.fullmatch(r"\s*\[([^|]*)\|([^|]*)\|([^|\]]*)\]\s*", text)
        if not m:
            raise ParseError(f"cannot parse group element {text!r}")
        try:
            xs, ys = ([int(t) for t in part.split(",") if t.strip()] for part in m.groups()[:2])
            z = int(m.group(3))
        except ValueError as exc:
            raise ParseError(f"cannot parse group element {text!r}") from exc
        return cls(tuple(xs), tuple(ys), z)


def elem(x: Sequence[int], y: Sequence[int], z: int) -> GElem:
    return GElem(tuple(int(v) for v in x), tuple(int(v) for v in y), int(z))


def carry_f(p: int, y: Sequence[int], y2: Sequence[int]) -> int:
    """Number of coordinates with ``y_i + y2_i >= p`` (entries read in ``0..p-1``)."""
    if len(y) != len(y2):
        raise DimensionMismatch(f"carry of vectors with lengths {len(y)} and {len(y2)}")
    return sum((a % p + b % p) // p for a, b in zip(y, y2))


def _vec_add(Q: QTable, u: Sequence[int], v: Sequence[int]) -> tuple[int, ...]:
    if len(u) != len(v):
        raise DimensionMismatch(f"vectors of lengths {len(u)} and {len(v)}")
    return tuple(Q.add(a, b) for a, b in zip(u, v))


def h_mul(Q: QTable, g: GElem, h: GElem) -> GElem:
    x = _vec_add(Q, g.x, h.x)
    y = _vec_add(Q, g.y, h.y)
    z = Q.add(Q.add(g.z, h.z), dot(Q, g.x, h.y))
    return GElem(x, y, z)


def m_mul(Q: QTable, g: GElem, h: GElem) -> GElem:
    if not Q.is_prime_field():
        raise NotMFamily(f"M_n is defined over prime fields only, got {Q.name}")
    base = h_mul(Q, g, h)
    return GElem(base.x, base.y, (base.z + carry_f(Q.q, g.y, h.y)) % Q.q)


class ExtraSpecial:
    """H_n(Q) (``kind="H"``) or M_n over F_p (``kind="M"``).

    Also carries vectorised versions of the product used by the brute-force
    enumerations in :mod:`xspecial.bricks`.
    """

    def __init__(self, Q: QTable, n: int, kind: str = "H"):
        if kind not in ("H", "M"):
            raise ValueError(f"kind must be 'H' or 'M', got {kind!r}")
        if n < 1:
            raise DimensionMismatch(f"dimension must be >= 1, got {n}")
        if kind == "M" and not Q.is_prime_field():
            raise NotMFamily(f"M_n is defined over prime fields only, got {Q.name}")
        self.Q = Q
        self.n = n
        self.kind = kind
        self.q = Q.q

    def __repr__(self) -> str:
        return f"{self.name}"

    @property
    def name(self) -> str:
        return f"H_{self.n}({self.Q.name})" if self.kind == "H" else f"M_{self.n}(p={self.q})"

    @property
    def order(self) -> int:
        return self.q ** (2 * self.n + 1)

    @property
    def identity(self) -> GElem:
        zero = (0,) * self.n
        return GElem(zero, zero, 0)

    def _check(self, g: GElem) -> None:
        if g.n != self.n:
            raise DimensionMismatch(f"element of dimension {g.n} in {self.name}")

    def mul(self, g: GElem, h: GElem) -> GElem:
        self._check(g)
        self._check(h)
        return h_mul(self.Q, g, h) if self.kind == "H" else m_mul(self.Q, g, h)

    def inv(self, g: GElem) -> GElem:
        """Right inverse ``h`` with ``g . h = 1``, solved coordinate by coordinate."""
        Q = self.Q
        x = tuple(Q.neg(v) for v in g.x)
        y = tuple(Q.neg(v) for v in g.y)
        s = Q.add(g.z, dot(Q, g.x, y))
        if self.kind == "M":
            s = (s + carry_f(self.q, g.y, y)) % self.q
        return GElem(x, y, Q.neg(s))

    def pow(self, g: GElem, k: int) -> GElem:
        if k < 0:
            raise ValueError(f"exponent must be non-negative, got {k}")
        acc = self.identity
        for _ in range(k):
            acc = self.mul(acc, g)
        return acc

    def commutator(self, g: GElem, h: GElem) -> GElem:
        """``g^-1 h^-1 g h`` multiplied left to right."""
        return self.mul(self.mul(self.mul(self.inv(g), self.inv(h)), g), h)

    def basis(self, i: int) -> tuple[int, ...]:
        e = [0] * self.n
        e[i] = self.Q.one
        return tuple(e)

    def a(self, i: int) -> GElem:
        return GElem(self.basis(i), (0,) * self.n, 0)

    def b(self, i: int) -> GElem:
        return GElem((0,) * self.n, self.basis(i), 0)

    @property
    def c(self) -> GElem:
        return GElem((0,) * self.n, (0,) * self.n, self.Q.one)

    def center_element(self, t: int) -> GElem:
        return GElem((0,) * self.n, (0,) * self.n, t)

    def elements(self) -> Iterator[GElem]:
        vecs = list(itertools.product(range(self.q), repeat=self.n))
        for x in vecs:
            for y in vecs:
                for z in range(self.q):
                    yield GElem(x, y, z)

    def random_element(self, rng: np.random.Generator) -> GElem:
        v = rng.integers(0, self.q, size=2 * self.n + 1)
        return elem(v[: self.n], v[self.n : 2 * self.n], v[-1])

    # -- vectorised arithmetic ------------------------------------------------

    def dot_arrays(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        add, mul = self.Q.add_table, self.Q.mul_table
        acc = np.zeros(X.shape[:-1], dtype=np.int64)
        for i in range(self.n):
            acc = add[acc, mul[X[..., i], Y[..., i]]]
        return acc

    def mul_arrays(self, X1, Y1, Z1, X2, Y2, Z2):
        """Elementwise (broadcasting) product of elements given as arrays.

        ``X*``/``Y*`` have a trailing axis of length n, ``Z*`` do not.
        """
        add = self.Q.add_table
        X = add[X1, X2]
        Y = add[Y1, Y2]
        Z = add[add[Z1, Z2], self.dot_arrays(X1, Y2)]
        if self.kind == "M":
            Z = (Z + ((Y1 + Y2) >= self.q).sum(axis=-1)) % self.q
        return X, Y, Z

    def encode(self, X: np.ndarray, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """Mixed-radix code of ``[x, y, z]``; lexicographic in (x, y, z)."""
        code = np.zeros(np.shape(Z), dtype=np.int64)
        for i in range(self.n):
            code = code * self.q + X[..., i]
        for i in range(self.n):
            code = code * self.q + Y[..., i]
        return code * self.q + Z

    def decode(self, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        codes = np.asarray(codes, dtype=np.int64)
        digits = []
        rest = codes.copy()
        for _ in range(2 * self.n + 1):
            digits.append(rest % self.q)
            rest //= self.q
        digits.reverse()
        X = np.stack(digits[: self.n], axis=-1)
        Y = np.stack(digits[self.n : 2 * self.n], axis=-1)
        return X, Y, digits[-1]

    def all_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.decode(np.arange(self.order))

    def to_arrays(self, elems: Sequence[GElem]):
        X = np.array([g.x for g in elems], dtype=np.int64).reshape(len(elems), self.n)
        Y = np.array([g.y for g in elems], dtype=np.int64).reshape(len(elems), self.n)
        Z = np.array([g.z for g in elems], dtype=np.int64)
        return X, Y, Z

    def from_code(self, code: int) -> GElem:
        X, Y, Z = self.decode(np.array([code]))
        return elem(X[0], Y[0], Z[0])


# ---------------------------------------------------------------------------
# relation and associativity checks


@dataclass
class RelationResult:
    relation: str
    passed: bool
    lhs: str
    rhs: str

    def to_dict(self) -> dict:
        return {"relation": self.relation, "passed": self.passed, "lhs": self.lhs, "rhs": self.rhs}


@dataclass
class RelationReport:
    group: str
    presentation: str
    results: list[RelationResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def failed(self) -> list[RelationResult]:
        return [r for r in self.results if not r.passed]

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "presentation": self.presentation,
            "ok": self.ok,
            "relations": [r.to_dict() for r in self.results],
        }


def gpow(G: ExtraSpecial, g: GElem, k: int) -> GElem:
    """``g^k`` as the left-associated product ``((g g) g) ...``."""
    return G.pow(g, k)


def check_relations(G: ExtraSpecial, presentation: str | None = None) -> RelationReport:
    """Evaluate every defining relation of the H_n or M_n presentation in ``G``.

    ``presentation`` defaults to ``G.kind``; passing the other letter checks
    a group law against the wrong presentation (used to tell H from M).
    """
    pres = presentation or G.kind
    rep = RelationReport(G.name, pres)
    one = G.identity
    c = G.c
    p = G.q

    def put(name: str, lhs: GElem, rhs: GElem) -> None:
        rep.results.append(RelationResult(name, lhs == rhs, str(lhs), str(rhs)))

    n = G.n
    for i in range(n):
        for j in range(n):
            put(f"[a{i + 1},a{j + 1}]=1", G.commutator(G.a(i), G.a(j)), one)
            put(f"[b{i + 1},b{j + 1}]=1", G.commutator(G.b(i), G.b(j)), one)
            if i != j:
                put(f"[a{i + 1},b{j + 1}]=1", G.commutator(G.a(i), G.b(j)), one)
    for i in range(n):
        put(f"[a{i + 1},c]=1", G.commutator(G.a(i), c), one)
        put(f"[b{i + 1},c]=1", G.commutator(G.b(i), c), one)
        put(f"[a{i + 1},b{i + 1}]=c", G.commutator(G.a(i), G.b(i)), c)
    for i in range(n):
        put(f"a{i + 1}^{p}=1", G.pow(G.a(i), p), one)
        if pres == "H":
            put(f"b{i + 1}^{p}=1", G.pow(G.b(i), p), one)
        else:
            put(f"b{i + 1}^{p}=c", G.pow(G.b(i), p), c)
    put(f"c^{p}=1", G.pow(c, p), one)
    return rep


@dataclass
class AssociativityResult:
    ok: bool
    triples: int
    witness: tuple[GElem, GElem, GElem] | None = None
    carry_ok: bool | None = None
    carry_triples: int = 0
    carry_witness: tuple | None = None

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "triples": self.triples,
            "witness": None if self.witness is None else [str(g) for g in self.witness],
            "carry_identity_ok": self.carry_ok,
            "carry_identity_triples": self.carry_triples,
            "carry_identity_witness": None if self.carry_witness is None else [list(v) for v in self.carry_witness],
        }


def carry_identity_holds(p: int, y1, y2, y3) -> bool:
    """``f(y1+y2, y3) + f(y1, y2) == f(y1, y2+y3) + f(y2, y3)`` over F_p."""
    s12 = [(a + b) % p for a, b in zip(y1, y2)]
    s23 = [(a + b) % p for a, b in zip(y2, y3)]
    return carry_f(p, s12, y3) + carry_f(p, y1, y2) == carry_f(p, y1, s23) + carry_f(p, y2, y3)


def _carry_arrays(p: int, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return ((A + B) >= p).sum(axis=-1)


def _carry_identity_arrays(p: int, Y1, Y2, Y3) -> np.ndarray:
    lhs = _carry_arrays(p, (Y1 + Y2) % p, Y3) + _carry_arrays(p, Y1, Y2)
    rhs = _carry_arrays(p, Y1, (Y2 + Y3) % p) + _carry_arrays(p, Y2, Y3)
    return lhs == rhs


def check_associativity(G: ExtraSpecial, samples: int | None = None, seed: int = 0) -> AssociativityResult:
    """Check ``(g h) k == g (h k)`` exhaustively (``samples=None``) or on random triples.

    For M_n the cocycle identity of the carry function is checked on the same
    footing (all y-vector triples, or ``samples`` random ones).
    """
    if samples is None:
        if G.order**3 > ASSOC_EXHAUSTIVE_LIMIT:
            raise TooLarge(f"exhaustive associativity needs {G.order}^3 > {ASSOC_EXHAUSTIVE_LIMIT} triples")
        res = _assoc_exhaustive(G)
    else:
        res = _assoc_sampled(G, samples, np.random.default_rng(seed))
    if G.kind == "M":
        _carry_check(G, samples, np.random.default_rng(seed + 1), res)
    return res


def _assoc_exhaustive(G: ExtraSpecial) -> AssociativityResult:
    X, Y, Z = G.all_arrays()
    m = G.order
    # all (h, k) pairs for a fixed g
    Xh, Yh, Zh = X[:, None], Y[:, None], Z[:, None]
    Xk, Yk, Zk = X[None, :], Y[None, :], Z[None, :]
    hk = G.mul_arrays(Xh, Yh, Zh, Xk, Yk, Zk)
    for gi in range(m):
        g = (X[gi], Y[gi], Z[gi])
        gh = G.mul_arrays(*g, Xh, Yh, Zh)
        left = G.encode(*G.mul_arrays(*gh, Xk, Yk, Zk))
        right = G.encode(*G.mul_arrays(*g, *hk))
        bad = np.argwhere(left != right)
        if len(bad):
            hi, ki = bad[0]
            return AssociativityResult(False, m**3, (G.from_code(gi), G.from_code(hi), G.from_code(ki)))
    return AssociativityResult(True, m**3)


def _assoc_sampled(G: ExtraSpecial, samples: int, rng: np.random.Generator) -> AssociativityResult:
    codes = rng.integers(0, G.order, size=(3, samples))
    e1, e2, e3 = (G.decode(c) for c in codes)
    left = G.encode(*G.mul_arrays(*G.mul_arrays(*e1, *e2), *e3))
    right = G.encode(*G.mul_arrays(*e1, *G.mul_arrays(*e2, *e3)))
    bad = np.flatnonzero(left != right)
    if len(bad):
        i = bad[0]
        return AssociativityResult(False, samples, tuple(G.from_code(int(c[i])) for c in codes))
    return AssociativityResult(True, samples)


def _carry_check(G: ExtraSpecial, samples: int | None, rng, res: AssociativityResult) -> None:
    p, n = G.q, G.n
    if samples is None:
        vecs = np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64)
        k = len(vecs)
        i1, i2, i3 = (a.ravel() for a in np.meshgrid(np.arange(k), np.arange(k), np.arange(k), indexing="ij"))
        Y1, Y2, Y3 = vecs[i1], vecs[i2], vecs[i3]
    else:
        Y1, Y2, Y3 = (rng.integers(0, p, size=(samples, n)) for _ in range(3))
    ok = _carry_identity_arrays(p, Y1, Y2, Y3)
    res.carry_triples = len(ok)
    res.carry_ok = bool(ok.all())
    if not res.carry_ok:
        i = int(np.flatnonzero(~ok)[0])
        res.carry_witness = (tuple(map(int, Y1[i])), tuple(map(int, Y2[i])), tuple(map(int, Y3[i])))
    res.ok = res.ok and res.carry_ok


def check_carry_identity(p: int, n: int) -> AssociativityResult:
    """Exhaustive cocycle check of the carry function alone over (F_p^n)^3."""
    res = AssociativityResult(True, 0)
    _carry_check(ExtraSpecial(qf_prime(p), n, "M"), None, None, res)
    return res


# ---------------------------------------------------------------------------
# matrix representation


def heisenberg_matrix(Q: QTable, g: GElem) -> list[list[int]]:
    """The (n+2)x(n+2) upper unitriangular matrix of ``g`` over Q."""
    n = g.n
    size = n + 2
    M = [[0] * size for _ in range(size)]
    for i in range(size):
        M[i][i] = Q.one
    for i in range(n):
        M[0][1 + i] = g.x[i]
        M[1 + i][size - 1] = g.y[i]
    M[0][size - 1] = g.z
    return M


def table_matmul(Q: QTable, A: list[list[int]], B: list[list[int]]) -> list[list[int]]:
    size = len(A)
    out = [[0] * size for _ in range(size)]
    for i in range(size):
        for j in range(size):
            acc = 0
            for k in range(size):
                acc = Q.add(acc, Q.mul(A[i][k], B[k][j]))
            out[i][j] = acc
    return out


def matrix_check(Q: QTable, n: int, g: GElem, h: GElem) -> bool:
    """Compare the matrix product of ``g`` and ``h`` with the matrix of ``h_mul(g, h)``."""
    if not Q.is_field():
        raise NotAField(f"{Q.name} is not a field; the matrix model needs associative, commutative *")
    if g.n != n or h.n != n:
        raise DimensionMismatch(f"elements must have dimension {n}")
    prod = table_matmul(Q, heisenberg_matrix(Q, g), heisenberg_matrix(Q, h))
    return prod == heisenberg_matrix(Q, h_mul(Q, g, h))
