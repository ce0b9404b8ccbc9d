"""Cyclic Jacobi eigenvalue iteration for dense real symmetric matrices.

Rotations are applied in round-robin order: each round annihilates a set of
disjoint ``(p, q)`` pairs at once, and ``m - 1`` rounds visit every pair, so
one sweep costs ``O(m)`` vectorised rank-2 updates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence


@dataclass
class JacobiResult:
    eigenvalues: np.ndarray  # descending
    sweeps: int
    residual: float  # Frobenius norm of the off-diagonal part


def off_norm(A: np.ndarray) -> float:
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def round_robin(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Rounds of disjoint index pairs covering every pair of ``range(m)`` once."""
    players = list(range(m)) + ([-1] if m % 2 else [])
    k = len(players)
    rounds = []
    for _ in range(k - 1):
        ps, qs = [], []
        for i in range(k // 2):
            u, v = players[i], players[k - 1 - i]
            if u >= 0 and v >= 0:
                ps.append(min(u, v))
                qs.append(max(u, v))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0], players[-1], *players[1:-1]]
    return rounds


def _rotate(A: np.ndarray, P: np.ndarray, Q: np.ndarray) -> None:
    apq = A[P, Q]
    active = apq != 0.0
    if not active.any():
        return
    app = A[P, P]
    aqq = A[Q, Q]
    safe = np.where(active, apq, 1.0)
    with np.errstate(over="ignore"):
        theta = (aqq - app) / (2.0 * safe)
    big = np.abs(theta) > 1e150
    t = np.where(
        big,
        0.5 / np.where(big, theta, 1.0),
        np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(np.where(big, 0.0, theta) ** 2 + 1.0)),
    )
    c = np.where(active, 1.0 / np.sqrt(t * t + 1.0), 1.0)
    s = np.where(active, t * c, 0.0)

    cp, cq = A[:, P].copy(), A[:, Q].copy()
    A[:, P] = cp * c - cq * s
    A[:, Q] = cp * s + cq * c
    rp, rq = A[P, :].copy(), A[Q, :].copy()
    A[P, :] = c[:, None] * rp - s[:, None] * rq
    A[Q, :] = s[:, None] * rp + c[:, None] * rq
    A[P, Q] = 0.0
    A[Q, P] = 0.0


def jacobi_eigenvalues(A: np.ndarray, tol: float = 1e-9, max_sweeps: int = 100) -> JacobiResult:
    """All eigenvalues of symmetric ``A``, iterating until the off-diagonal norm is below ``tol``."""
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.allclose(A, A.T):
        raise ValueError("matrix is not symmetric")
    m = A.shape[0]
    rounds = round_robin(m)
    residual = off_norm(A)
    sweeps = 0
    while residual >= tol:
        if sweeps >= max_sweeps:
            raise NoConvergence(f"off-diagonal norm {residual:.3e} after {sweeps} sweeps")
        for P, Q in rounds:
            _rotate(A, P, Q)
        sweeps += 1
        residual = off_norm(A)
    return JacobiResult(np.sort(np.diag(A))[::-1].copy(), sweeps, residual)
