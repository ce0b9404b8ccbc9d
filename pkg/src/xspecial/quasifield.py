"""Finite left quasifields stored as explicit Cayley tables.

Elements are the integers ``0..q-1``; ``0`` is always the additive identity
and the multiplicative identity is stored in :attr:`QTable.one`.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NotPrime, ParseError, TooLarge

VERIFY_MAX_ORDER = 512

__all__ = [
    "QTable",
    "AxiomResult",
    "AxiomReport",
    "is_prime",
    "qf_prime",
    "qf_hall",
    "qf_load",
    "qf_loads",
    "qf_dump",
    "qf_verify",
    "qf_add",
    "qf_mul",
    "qf_neg",
    "qf_sub",
    "dot",
    "bundled",
    "resolve_table",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.int64)
    arr.setflags(write=False)
    return arr


class QTable:
    """Cayley tables ``add`` and ``mul`` of a finite (candidate) quasifield.

    Construction only checks shapes and index ranges; the axioms are checked
    by :func:`qf_verify`.  Instances are immutable.
    """

    __slots__ = ("q", "add_table", "mul_table", "one", "name", "_neg")

    def __init__(self, add, mul, one: int = 1, name: str = ""):
        add_t = np.asarray(add)
        mul_t = np.asarray(mul)
        if add_t.ndim != 2 or add_t.shape[0] != add_t.shape[1] or add_t.shape[0] == 0:
            raise DimensionMismatch(f"add table must be square and non-empty, got shape {add_t.shape}")
        q = add_t.shape[0]
        if mul_t.shape != (q, q):
            raise DimensionMismatch(f"mul table shape {mul_t.shape} does not match order {q}")
        for label, t in (("add", add_t), ("mul", mul_t)):
            if t.size and (t.min() < 0 or t.max() >= q):
                raise IndexOutOfRange(f"{label} table has entries outside [0, {q})")
        if not 0 <= one < q:
            raise IndexOutOfRange(f"one={one} outside [0, {q})")
        object.__setattr__(self, "q", int(q))
        object.__setattr__(self, "add_table", _frozen(add_t))
        object.__setattr__(self, "mul_table", _frozen(mul_t))
        object.__setattr__(self, "one", int(one))
        object.__setattr__(self, "name", name or f"Q{q}")
        object.__setattr__(self, "_neg", None)

    def __setattr__(self, key, value):
        raise AttributeError("QTable is immutable")

    def __repr__(self) -> str:
        return f"QTable(name={self.name!r}, q={self.q})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, QTable):
            return NotImplemented
        return (
            self.q == other.q
            and self.one == other.one
            and np.array_equal(self.add_table, other.add_table)
            and np.array_equal(self.mul_table, other.mul_table)
        )

    def __hash__(self) -> int:
        return hash((self.q, self.one, self.add_table.tobytes(), self.mul_table.tobytes()))

    @property
    def neg_table(self) -> np.ndarray:
        """Additive inverses; ``-1`` marks elements without an inverse."""
        if self._neg is None:
            hits = self.add_table == 0
            neg = np.where(hits.any(axis=1), hits.argmax(axis=1), -1)
            object.__setattr__(self, "_neg", _frozen(neg))
        return self._neg

    def _check(self, *elems: int) -> None:
        for e in elems:
            if not 0 <= e < self.q:
                raise IndexOutOfRange(f"element {e} outside [0, {self.q})")

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        return int(self.add_table[a, b])

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        return int(self.mul_table[a, b])

    def neg(self, a: int) -> int:
        self._check(a)
        n = int(self.neg_table[a])
        if n < 0:
            raise ValueError(f"{a} has no additive inverse in {self.name}")
        return n

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def elements(self) -> range:
        return range(self.q)

    def with_entry(self, table: str, a: int, b: int, value: int) -> "QTable":
        """Copy of this table with one ``add`` or ``mul`` entry overwritten."""
        add = self.add_table.copy()
        mul = self.mul_table.copy()
        {"add": add, "mul": mul}[table][a, b] = value
        return QTable(add, mul, self.one, name=f"{self.name}[{table}({a},{b})={value}]")

    def is_prime_field(self) -> bool:
        if not is_prime(self.q):
            return False
        i = np.arange(self.q)
        return (
            self.one == 1
            and np.array_equal(self.add_table, (i[:, None] + i[None, :]) % self.q)
            and np.array_equal(self.mul_table, (i[:, None] * i[None, :]) % self.q)
        )

    def is_field(self) -> bool:
        """True when ``*`` is also commutative and associative (so Q is a finite field)."""
        if not qf_verify(self).ok:
            return False
        m = self.mul_table
        return bool(np.array_equal(m, m.T)) and _mul_associative(self) is None


def qf_add(Q: QTable, a: int, b: int) -> int:
    return Q.add(a, b)


def qf_mul(Q: QTable, a: int, b: int) -> int:
    return Q.mul(a, b)


def qf_neg(Q: QTable, a: int) -> int:
    return Q.neg(a)


def qf_sub(Q: QTable, a: int, b: int) -> int:
    return Q.sub(a, b)


def dot(Q: QTable, x: Sequence[int], y: Sequence[int]) -> int:
    """``x_1*y_1 + ... + x_n*y_n`` accumulated left to right."""
    if len(x) != len(y):
        raise DimensionMismatch(f"dot of vectors with lengths {len(x)} and {len(y)}")
    Q._check(*x, *y)
    add, mul = Q.add_table, Q.mul_table
    acc = 0
    for xi, yi in zip(x, y):
        acc = add[acc, mul[xi, yi]]
    return int(acc)


# ---------------------------------------------------------------------------
# constructors


def qf_prime(p: int) -> QTable:
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    i = np.arange(p)
    return QTable((i[:, None] + i[None, :]) % p, (i[:, None] * i[None, :]) % p, 1, name=f"F{p}")


def qf_hall(p: int = 3, r: int = 1, s: int = 1) -> QTable:
    """Hall quasifield of order ``p**2`` built from ``x^2 - r x - s`` over F_p.

    Elements ``a + l*b`` are encoded as ``a + p*b``.  The classical Hall
    system is right distributive, so the table stores the opposite product,
    which is left distributive.
    """
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    poly = lambda c: (c * c - r * c - s) % p
    if any(poly(c) == 0 for c in range(p)):
        raise ValueError(f"x^2 - {r}x - {s} is reducible over F_{p}")

    def hall(u: tuple[int, int], v: tuple[int, int]) -> tuple[int, int]:
        a, b = u
        c, d = v
        if d == 0:
            return (a * c) % p, (b * c) % p
        dinv = pow(d, -1, p)
        return (a * c - b * dinv * poly(c)) % p, (a * d - b * c + r * b) % p

    q = p * p
    elems = [(k % p, k // p) for k in range(q)]
    enc = lambda e: e[0] + p * e[1]
    add = [[enc(((u[0] + v[0]) % p, (u[1] + v[1]) % p)) for v in elems] for u in elems]
    mul = [[enc(hall(v, u)) for v in elems] for u in elems]
    return QTable(add, mul, one=1, name=f"hall{q}")


# ---------------------------------------------------------------------------
# table files


def qf_loads(text: str, name: str = "") -> QTable:
    """Parse a quasifield table from its text form (see :func:`qf_dump`)."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body))

    def header(pos: int, key: str) -> int:
        if pos >= len(lines):
            raise ParseError(f"missing '{key}' line")
        lineno, body = lines[pos]
        parts = body.split()
        if len(parts) != 2 or parts[0] != key:
            raise ParseError(f"line {lineno}: expected '{key} <int>', got {body!r}")
        return _parse_int(parts[1], lineno)

    q = header(0, "q")
    if q < 1:
        raise ParseError(f"order must be positive, got {q}")
    one = header(1, "one")
    if len(lines) != 2 + 2 * q:
        raise ParseError(f"expected {2 * q} table rows for q={q}, found {len(lines) - 2}")

    tables = {}
    pos = 2
    for key in ("add", "mul"):
        rows = []
        for i in range(q):
            lineno, body = lines[pos]
            pos += 1
            tag, _, rest = body.partition(":")
            if tag.strip() != key:
                raise ParseError(f"line {lineno}: expected '{key}:' row, got {body!r}")
            parts = rest.split()
            if not parts or _parse_int(parts[0], lineno) != i:
                raise ParseError(f"line {lineno}: expected row index {i}")
            entries = [_parse_int(t, lineno) for t in parts[1:]]
            if len(entries) != q:
                raise ParseError(f"line {lineno}: row has {len(entries)} entries, expected {q}")
            for e in entries:
                if e >= q:
                    raise IndexOutOfRange(f"line {lineno}: entry {e} >= q={q}")
            rows.append(entries)
        tables[key] = rows
    if one >= q:
        raise IndexOutOfRange(f"one={one} >= q={q}")
    return QTable(tables["add"], tables["mul"], one, name=name or f"Q{q}")


def _parse_int(token: str, lineno: int) -> int:
    if not token.isdigit():
        raise ParseError(f"line {lineno}: {token!r} is not a non-negative decimal index")
    return int(token)


def qf_load(source: str | Path | TextIO) -> QTable:
    """Load a table from a path or open text stream; axioms are not checked."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        return qf_loads(path.read_text(encoding="utf-8"), name=path.stem)
    return qf_loads(source.read(), name=getattr(source, "name", ""))


def qf_dump(Q: QTable) -> str:
    out = io.StringIO()
    out.write(f"# {Q.name}\n")
    out.write(f"q {Q.q}\none {Q.one}\n")
    for key, table in (("add", Q.add_table), ("mul", Q.mul_table)):
        for i, row in enumerate(table):
            out.write(f"{key}: {i} " + " ".join(str(int(v)) for v in row) + "\n")
    return out.getvalue()


def bundled(name: str) -> QTable:
    """Load one of the tables shipped in ``xspecial/data`` (e.g. ``"hall9"``)."""
    stem = name[: -len(".qtable")] if name.endswith(".qtable") else name
    ref = resources.files("xspecial").joinpath("data", f"{stem}.qtable")
    return qf_loads(ref.read_text(encoding="utf-8"), name=stem)


# ---------------------------------------------------------------------------
# axiom verification


@dataclass
class AxiomResult:
    name: str
    group: str
    passed: bool
    witness: dict | None = None
    informational: bool = False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "group": self.group,
            "passed": self.passed,
            "witness": self.witness,
            "informational": self.informational,
        }


@dataclass
class AxiomReport:
    table: str
    order: int
    results: list[AxiomResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results if not r.informational)

    def failed(self) -> list[AxiomResult]:
        return [r for r in self.results if not r.passed and not r.informational]

    def __getitem__(self, name: str) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def groups(self) -> dict[str, bool]:
        out: dict[str, bool] = {}
        for r in self.results:
            if not r.informational:
                out[r.group] = out.get(r.group, True) and r.passed
        return out

    def to_dict(self) -> dict:
        return {
            "table": self.table,
            "order": self.order,
            "ok": self.ok,
            "groups": self.groups(),
            "axioms": [r.to_dict() for r in self.results],
        }


def _first_true(mask: np.ndarray) -> tuple[int, ...] | None:
    hits = np.argwhere(mask)
    return tuple(int(v) for v in hits[0]) if len(hits) else None


def _first_triple(q: int, fails_for) -> tuple[int, int, int] | None:
    """Lexicographically first ``(a, b, c)`` where ``fails_for(a)[b, c]`` is true."""
    for a in range(q):
        hit = _first_true(fails_for(a))
        if hit is not None:
            return (a, *hit)
    return None


def _mul_associative(Q: QTable):
    m = Q.mul_table
    return _first_triple(Q.q, lambda a: m[m[a]] != m[a][m])


def _is_perm(row: np.ndarray, values: Iterable[int]) -> bool:
    return sorted(int(v) for v in row) == list(values)


def qf_verify(Q: QTable) -> AxiomReport:
    """Exhaustively check the left-quasifield axioms on ``Q``.

    Additive group (abelian), loop on the nonzero elements, left
    distributivity, ``0*x = x*0 = 0`` and unique solvability of
    ``a*x = b*x + c`` for ``a != b``.  Associativity and commutativity of
    ``*`` and right distributivity are reported as informational only.
    """
    q = Q.q
    if q > VERIFY_MAX_ORDER:
        raise TooLarge(f"axiom check is O(q^3); refusing q={q} > {VERIFY_MAX_ORDER}")
    A, M = Q.add_table, Q.mul_table
    idx = np.arange(q)
    rep = AxiomReport(Q.name, q)

    def put(name, group, wit, informational=False):
        rep.results.append(AxiomResult(name, group, wit is None, wit, informational))

    # additive group
    bad = _first_true((A[0] != idx) | (A[:, 0] != idx))
    put("add_identity", "additive_group", None if bad is None else {"x": bad[0]})
    neg = Q.neg_table
    no_inv = np.flatnonzero((neg < 0) | (A[idx, np.maximum(neg, 0)] != 0) | (A[np.maximum(neg, 0), idx] != 0))
    put("add_inverse", "additive_group", None if not len(no_inv) else {"x": int(no_inv[0])})
    t = _first_triple(q, lambda a: A[A[a]] != A[a][A])
    put("add_associative", "additive_group", None if t is None else dict(zip("abc", t)))
    bad = _first_true(A != A.T)
    put("add_commutative", "additive_group", None if bad is None else dict(zip("ab", bad)))

    # loop on Q*
    nz = list(range(1, q))
    row = next((a for a in nz if not _is_perm(M[a, 1:], nz)), None)
    put("loop_left_division", "loop", None if row is None else {"row": row})
    col = next((b for b in nz if not _is_perm(M[1:, b], nz)), None)
    put("loop_right_division", "loop", None if col is None else {"column": col})
    e = Q.one
    if e == 0:
        put("loop_identity", "loop", {"one": 0})
    else:
        bad = np.flatnonzero((M[e, 1:] != idx[1:]) | (M[1:, e] != idx[1:]))
        put("loop_identity", "loop", None if not len(bad) else {"x": int(bad[0]) + 1})

    # a*(b+c) = a*b + a*c
    t = _first_triple(q, lambda a: M[a][A] != A[M[a][:, None], M[a][None, :]])
    put("left_distributive", "left_distributive", None if t is None else dict(zip("abc", t)))

    bad = np.flatnonzero(M[0] != 0)
    put("zero_times_x", "zero_mul", None if not len(bad) else {"x": int(bad[0])})
    bad = np.flatnonzero(M[:, 0] != 0)
    put("x_times_zero", "zero_mul", None if not len(bad) else {"x": int(bad[0])})

    # a*x = b*x + c has exactly one solution x, for a != b
    wit = None
    if rep["add_inverse"].passed:
        negv = Q.neg_table
        for a in range(q):
            for b in range(q):
                if a == b:
                    continue
                # c = a*x - b*x; each c must be hit by exactly one x
                counts = np.bincount(A[M[a], negv[M[b]]], minlength=q)
                bad = np.flatnonzero(counts != 1)
                if len(bad):
                    wit = {"a": a, "b": b, "c": int(bad[0]), "solutions": int(counts[bad[0]])}
                    break
            if wit:
                break
    else:
        for a in range(q):
            for b in range(q):
                if a == b:
                    continue
                counts = (A[M[b]] == M[a][:, None]).sum(axis=0)
                bad = np.flatnonzero(counts != 1)
                if len(bad):
                    wit = {"a": a, "b": b, "c": int(bad[0]), "solutions": int(counts[bad[0]])}
                    break
            if wit:
                break
    put("unique_solution", "unique_solution", wit)

    # informational
    t = _mul_associative(Q)
    put("mul_associative", "informational", None if t is None else dict(zip("abc", t)), True)
    bad = _first_true(M != M.T)
    put("mul_commutative", "informational", None if bad is None else dict(zip("ab", bad)), True)
    # (b + c) * a = b*a + c*a, witness keyed by role
    t = _first_triple(q, lambda b: M[A[b]] != A[M[b][None, :], M])
    put("right_distributive", "informational", None if t is None else dict(zip("bca", t)), True)
    return rep



def resolve_table(prime: int | None = None, table: str | Path | None = None, base_dir: Path | None = None) -> QTable:
    """Exactly one of ``prime`` / ``table``; a table that is not an existing
    path is looked up among the bundled tables."""
    if (prime is None) == (table is None):
        raise ValueError("give exactly one of a prime or a table")
    if prime is not None:
        return qf_prime(prime)
    path = Path(table)
    if not path.is_absolute() and base_dir is not None and (base_dir / path).exists():
        path = base_dir / path
    if path.exists():
        return qf_load(path)
    try:
        return bundled(path.name)
    except FileNotFoundError:
        raise FileNotFoundError(f"no table file {table}") from None
