"""Bricks, their product sets, and coverage of centre cosets.

A brick is ``[X_1 x ... x X_n, Y_1 x ... x Y_n, Z]`` inside H_n(Q) or M_n.
The main question is which cosets ``[a, b, Q]`` of the centre lie in
``B . B``, and whether the counting certificate
``|Z|^2 prod |X_i & (a_i - X_i)| |Y_i & (b_i - Y_i)| > 2 q^(n+2)``
predicts them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, ParseError, PreconditionFailed, TooLarge
from .extraspecial import ExtraSpecial, GElem, elem
from .quasifield import QTable

ENUM_LIMIT = 10**7
PRODUCT_LIMIT = 10**8
COVERAGE_LIMIT = 10**6
_CHUNK = 1 << 20


def _normalize(s: Iterable[int], q: int, label: str) -> tuple[int, ...]:
    out = tuple(sorted({int(v) for v in s}))
    if not out:
        raise PreconditionFailed(f"{label} must be non-empty")
    if out[0] < 0 or out[-1] >= q:
        raise IndexOutOfRange(f"{label} has elements outside [0, {q})")
    return out


@dataclass(frozen=True)
class Brick:
    group: ExtraSpecial
    X: tuple[tuple[int, ...], ...]
    Y: tuple[tuple[int, ...], ...]
    Z: tuple[int, ...]

    def __init__(self, group: ExtraSpecial, X: Sequence[Iterable[int]], Y: Sequence[Iterable[int]], Z: Iterable[int]):
        n, q = group.n, group.q
        if len(X) != n or len(Y) != n:
            raise DimensionMismatch(f"brick in dimension {n} needs {n} X- and Y-factors, got {len(X)} and {len(Y)}")
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "X", tuple(_normalize(s, q, f"X{i + 1}") for i, s in enumerate(X)))
        object.__setattr__(self, "Y", tuple(_normalize(s, q, f"Y{i + 1}") for i, s in enumerate(Y)))
        object.__setattr__(self, "Z", _normalize(Z, q, "Z"))

    @classmethod
    def full(cls, group: ExtraSpecial) -> "Brick":
        everything = range(group.q)
        return cls(group, [everything] * group.n, [everything] * group.n, everything)

    @property
    def Q(self) -> QTable:
        return self.group.Q

    @property
    def n(self) -> int:
        return self.group.n

    @property
    def xy_size(self) -> int:
        return math.prod(len(s) for s in self.X) * math.prod(len(s) for s in self.Y)

    @property
    def size(self) -> int:
        return len(self.Z) * self.xy_size

    def __len__(self) -> int:
        return self.size

    def __contains__(self, g: GElem) -> bool:
        return (
            g.n == self.n
            and all(v in s for v, s in zip(g.x, self.X))
            and all(v in s for v, s in zip(g.y, self.Y))
            and g.z in self.Z
        )

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All elements as ``(X, Y, Z)`` arrays in lexicographic order."""
        if self.size > ENUM_LIMIT:
            raise TooLarge(f"brick has {self.size} elements > {ENUM_LIMIT}")
        grids = np.meshgrid(*[np.array(s) for s in (*self.X, *self.Y, self.Z)], indexing="ij")
        cols = [g.ravel().astype(np.int64) for g in grids]
        n = self.n
        X = np.stack(cols[:n], axis=-1)
        Y = np.stack(cols[n : 2 * n], axis=-1)
        return X, Y, cols[-1]

    def spec_text(self) -> str:
        Q = self.Q
        lines = [f"p {Q.q}" if Q.is_prime_field() else f"qtable {Q.name}.qtable", f"n {self.n}", f"family {self.group.kind}"]
        lines += [f"X{i + 1}: " + " ".join(map(str, s)) for i, s in enumerate(self.X)]
        lines += [f"Y{i + 1}: " + " ".join(map(str, s)) for i, s in enumerate(self.Y)]
        lines.append("Z: " + " ".join(map(str, self.Z)))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"X": [list(s) for s in self.X], "Y": [list(s) for s in self.Y], "Z": list(self.Z)}


def brick_elements(B: Brick) -> Iterator[GElem]:
    X, Y, Z = B.arrays()
    for i in range(len(Z)):
        yield elem(X[i], Y[i], Z[i])


def random_subset(q: int, rng: np.random.Generator, min_size: int = 1, max_size: int | None = None) -> tuple[int, ...]:
    hi = q if max_size is None else max_size
    k = int(rng.integers(min_size, hi + 1))
    return tuple(sorted(int(v) for v in rng.choice(q, size=k, replace=False)))


def random_brick(G: ExtraSpecial, rng: np.random.Generator, min_size: int = 1, z_min_size: int | None = None) -> Brick:
    q = G.q
    X = [random_subset(q, rng, min_size) for _ in range(G.n)]
    Y = [random_subset(q, rng, min_size) for _ in range(G.n)]
    Z = random_subset(q, rng, min_size if z_min_size is None else z_min_size)
    return Brick(G, X, Y, Z)


def all_bricks(G: ExtraSpecial) -> Iterator[Brick]:
    """Every brick of ``G`` (``(2^q - 1)^(2n+1)`` of them)."""
    q = G.q
    subsets = [s for k in range(1, q + 1) for s in itertools.combinations(range(q), k)]
    for parts in itertools.product(subsets, repeat=2 * G.n + 1):
        yield Brick(G, parts[: G.n], parts[G.n : 2 * G.n], parts[-1])


# ---------------------------------------------------------------------------
# product sets


def product_codes(B: Brick, B2: Brick | None = None) -> np.ndarray:
    """Sorted unique element codes of ``B . B2`` (see ``ExtraSpecial.encode``)."""
    B2 = B if B2 is None else B2
    G = B.group
    if B2.group is not G and (B2.group.kind, B2.group.n, B2.group.Q) != (G.kind, G.n, G.Q):
        raise DimensionMismatch("bricks live in different groups")
    if B.size * B2.size > PRODUCT_LIMIT:
        raise TooLarge(f"product set needs {B.size * B2.size} products > {PRODUCT_LIMIT}")
    X1, Y1, Z1 = B.arrays()
    X2, Y2, Z2 = B2.arrays()
    step = max(1, _CHUNK // len(Z2))
    seen = []
    for lo in range(0, len(Z1), step):
        sl = slice(lo, lo + step)
        prod = G.mul_arrays(X1[sl, None], Y1[sl, None], Z1[sl, None], X2[None], Y2[None], Z2[None])
        seen.append(np.unique(G.encode(*prod)))
    return np.unique(np.concatenate(seen))


def product_set(B: Brick, B2: Brick | None = None) -> set[GElem]:
    """The exact set ``{g . h : g in B, h in B2}`` (``B2`` defaults to ``B``)."""
    G = B.group
    X, Y, Z = G.decode(product_codes(B, B2))
    return {elem(X[i], Y[i], Z[i]) for i in range(len(Z))}


def coset_contained(P: set[GElem] | frozenset[GElem], a: Sequence[int], b: Sequence[int], q: int) -> bool:
    """True iff ``[a, b, t]`` is in ``P`` for every ``t`` in ``0..q-1``."""
    a, b = tuple(a), tuple(b)
    return all(GElem(a, b, t) in P for t in range(q))


# ---------------------------------------------------------------------------
# additive combinatorics in Q


def sumset(Q: QTable, S: Iterable[int], T: Iterable[int]) -> frozenset[int]:
    T = list(T)
    return frozenset(Q.add(s, t) for s in S for t in T)


def shifted_negation(Q: QTable, a: int, S: Iterable[int]) -> frozenset[int]:
    """``a - S = {a + (-s)}``."""
    return frozenset(Q.add(a, Q.neg(s)) for s in S)


def overlap(Q: QTable, S: Iterable[int], a: int) -> int:
    """``|S & (a - S)|``."""
    S = frozenset(S)
    return len(S & shifted_negation(Q, a, S))


def eq1_check(Q: QTable, X: Iterable[int]) -> bool:
    """``sum_a |X & (a - X)| == |X|^2``."""
    X = frozenset(X)
    return sum(overlap(Q, X, a) for a in range(Q.q)) == len(X) ** 2


def overlap_product(B: Brick, a: Sequence[int], b: Sequence[int]) -> int:
    Q = B.Q
    if len(a) != B.n or len(b) != B.n:
        raise DimensionMismatch(f"(a, b) must have length {B.n}")
    out = 1
    for Xi, ai in zip(B.X, a):
        out *= overlap(Q, Xi, ai)
    for Yi, bi in zip(B.Y, b):
        out *= overlap(Q, Yi, bi)
    return out


def certificate_threshold(q: int, n: int) -> int:
    return 2 * q ** (n + 2)


def certificate(B: Brick, a: Sequence[int], b: Sequence[int]) -> bool:
    """Sufficient condition for ``[a, b, Q]`` to lie in ``B . B``."""
    return len(B.Z) ** 2 * overlap_product(B, a, b) > certificate_threshold(B.group.q, B.n)


def grid(q: int, n: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All ``(a, b)`` in ``Q^n x Q^n`` in lexicographic order."""
    vecs = list(itertools.product(range(q), repeat=n))
    for a in vecs:
        for b in vecs:
            yield a, b


def overlap_product_identity(B: Brick) -> tuple[int, int]:
    """Both sides of ``sum_{a,b} prod |X_i & (a_i - X_i)| |Y_i & (b_i - Y_i)| = prod |X_i|^2 |Y_i|^2``.

    The left side is summed pair by pair over the whole grid.
    """
    q, n = B.group.q, B.n
    if q ** (2 * n) > COVERAGE_LIMIT:
        raise TooLarge(f"grid of {q ** (2 * n)} pairs > {COVERAGE_LIMIT}")
    lhs = sum(overlap_product(B, a, b) for a, b in grid(q, n))
    return lhs, B.xy_size**2


def doubled_brick(B: Brick) -> Brick:
    """``[X + X, Y + Y, Q]``, componentwise sumsets with a full centre."""
    Q = B.Q
    return Brick(B.group, [sumset(Q, s, s) for s in B.X], [sumset(Q, s, s) for s in B.Y], range(Q.q))


def large_z_branch(B: Brick) -> bool:
    """For ``|Z| > q/2``, check ``B . B == [X + X, Y + Y, Q]`` exactly."""
    q = B.group.q
    if 2 * len(B.Z) <= q:
        raise PreconditionFailed(f"|Z| = {len(B.Z)} is not greater than q/2 = {q / 2}")
    got = product_codes(B)
    D = doubled_brick(B)
    want = np.unique(B.group.encode(*D.arrays()))
    return bool(np.array_equal(got, want))


# ---------------------------------------------------------------------------
# coverage


@dataclass
class PairResult:
    contained: bool
    certified: bool


@dataclass
class CoverageReport:
    group: str
    q: int
    n: int
    brick_size: int
    z_size: int
    N: int
    certified: int
    per_pair: dict[tuple[tuple[int, ...], tuple[int, ...]], PairResult] = field(repr=False)
    lower_bound: Fraction | None
    lower_bound_with_z: Fraction | None

    @property
    def sound(self) -> bool:
        """Every certified pair is actually contained."""
        return self.certified <= self.N and all(r.contained for r in self.per_pair.values() if r.certified)

    @property
    def meets_threshold(self) -> bool:
        """``N >= |B| / q``."""
        return self.N * self.q >= self.brick_size

    @property
    def bound_status(self) -> str:
        """``vacuous`` when the bound is undefined, else ``holds``/``violated`` for ``N >= ceil(lowerBound)``."""
        if self.lower_bound is None:
            return "vacuous"
        need = math.ceil(self.lower_bound)
        return "holds" if self.N >= need and self.certified >= need else "violated"

    def to_dict(self) -> dict:
        frac = lambda f: None if f is None else str(f)
        return {
            "group": self.group,
            "q": self.q,
            "n": self.n,
            "brickSize": self.brick_size,
            "N": self.N,
            "certified": self.certified,
            "lowerBound": frac(self.lower_bound),
            "lowerBoundWithZ": frac(self.lower_bound_with_z),
            "boundStatus": self.bound_status,
            "threshold": str(Fraction(self.brick_size, self.q)),
            "meetsThreshold": self.meets_threshold,
            "sound": self.sound,
            "pairs": [
                {"a": list(a), "b": list(b), "contained": r.contained, "certified": r.certified}
                for (a, b), r in self.per_pair.items()
            ],
        }


def lower_bound(B: Brick, with_z: bool = False) -> Fraction | None:
    """Coverage lower bound ``(P^2 - 2q^(3n+2)) / (P - 2q^(n+2))`` with ``P = prod |X_i||Y_i|``.

    ``with_z`` uses the sharper per-pair threshold ``2q^(n+2)/|Z|^2`` for the
    uncertified pairs.  ``None`` when the denominator is not positive.
    """
    q, n = B.group.q, B.n
    P = B.xy_size
    w = len(B.Z) ** 2 if with_z else 1
    num = w * P * P - 2 * q ** (3 * n + 2)
    den = w * P - 2 * q ** (n + 2)
    if den <= 0:
        return None
    return Fraction(num, den)


def _overlap_counts(Q: QTable, S: Sequence[int]) -> np.ndarray:
    """``|S & (a - S)|`` for every ``a``, as a length-q array."""
    ind = np.zeros(Q.q, dtype=bool)
    ind[list(S)] = True
    # a - s in S  <=>  a in S + s
    counts = np.zeros(Q.q, dtype=np.int64)
    A = Q.add_table
    for s in S:
        counts[A[s][ind]] += 1
    return counts


def coverage(B: Brick) -> CoverageReport:
    """Containment and certificate for every centre coset ``[a, b, Q]``."""
    G = B.group
    q, n = G.q, G.n
    pairs = q ** (2 * n)
    if pairs > COVERAGE_LIMIT:
        raise TooLarge(f"coverage grid of {pairs} pairs > {COVERAGE_LIMIT}")
    codes = product_codes(B)
    contained = np.bincount(codes // q, minlength=pairs) == q

    # certificate for the whole grid; int64 is exact: |Z|^2 q^(2n) <= q^2 * 10^6
    lhs = np.full(pairs, len(B.Z) ** 2, dtype=np.int64)
    factors = [_overlap_counts(B.Q, s) for s in (*B.X, *B.Y)]
    digits = np.arange(pairs)
    for k, f in enumerate(factors):
        place = q ** (2 * n - 1 - k)
        lhs *= f[(digits // place) % q]
    certified = lhs > certificate_threshold(q, n)

    per_pair = {}
    for idx, (a, b) in enumerate(grid(q, n)):
        per_pair[(a, b)] = PairResult(bool(contained[idx]), bool(certified[idx]))
    return CoverageReport(
        group=G.name,
        q=q,
        n=n,
        brick_size=B.size,
        z_size=len(B.Z),
        N=int(contained.sum()),
        certified=int(certified.sum()),
        per_pair=per_pair,
        lower_bound=lower_bound(B),
        lower_bound_with_z=lower_bound(B, with_z=True),
    )


# ---------------------------------------------------------------------------
# brick spec files


@dataclass
class BrickSpec:
    n: int
    X: list[list[int]]
    Y: list[list[int]]
    Z: list[int]
    prime: int | None = None
    table: str | None = None
    family: str | None = None

    def build(self, Q: QTable, family: str | None = None) -> Brick:
        return Brick(ExtraSpecial(Q, self.n, family or self.family or "H"), self.X, self.Y, self.Z)


def parse_brick_spec(text: str) -> BrickSpec:
    """Parse ``p``/``qtable``, ``n``, optional ``family``, then ``X1:``..``Yn:`` and ``Z:`` lines."""
    fields: dict[str, str] = {}
    sets: dict[str, list[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if ":" in body:
            key, _, rest = body.partition(":")
            key = key.strip()
            try:
                sets[key] = [int(t) for t in rest.split()]
            except ValueError:
                raise ParseError(f"line {lineno}: bad element list {rest!r}") from None
            continue
        parts = body.split()
        if len(parts) != 2 or parts[0] not in ("p", "qtable", "n", "family"):
            raise ParseError(f"line {lineno}: unrecognised line {body!r}")
        fields[parts[0]] = parts[1]
    if ("p" in fields) == ("qtable" in fields):
        raise ParseError("brick spec needs exactly one of 'p' or 'qtable'")
    if "n" not in fields:
        raise ParseError("brick spec needs an 'n' line")
    try:
        n = int(fields["n"])
        prime = int(fields["p"]) if "p" in fields else None
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    family = fields.get("family")
    if family not in (None, "H", "M"):
        raise ParseError(f"family must be H or M, got {family!r}")
    try:
        X = [sets.pop(f"X{i + 1}") for i in range(n)]
        Y = [sets.pop(f"Y{i + 1}") for i in range(n)]
        Z = sets.pop("Z")
    except KeyError as exc:
        raise ParseError(f"brick spec is missing set {exc.args[0]}") from None
    if sets:
        raise ParseError(f"unexpected sets {sorted(sets)} for n={n}")
    return BrickSpec(n, X, Y, Z, prime=prime, table=fields.get("qtable"), family=family)


def load_brick_spec(path: str | Path) -> BrickSpec:
    return parse_brick_spec(Path(path).read_text(encoding="utf-8"))
