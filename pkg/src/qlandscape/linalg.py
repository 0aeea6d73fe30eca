"""Symmetric eigenvalues by cyclic Jacobi rotations.

Pairs are scheduled with the round-robin (circle) ordering so that each
round applies ``n // 2`` disjoint rotations at once as vectorized row and
column updates.
"""
from __future__ import annotations

import numpy as np


def round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """``n - 1`` (or ``n`` for odd n) rounds of disjoint index pairs covering every pair once."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p, q = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=int), np.array(q, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def jacobi_eigvalsh(a, tol: float = 1e-12, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix, sorted ascending.

    Sweeps stop once the off-diagonal Frobenius norm is below
    ``tol * ||A||_F``.
    """
    a = np.array(a, dtype=float)
    n, m = a.shape
    if n != m:
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("matrix must be symmetric")
    a = 0.5 * (a + a.T)
    if n == 1:
        return a.diagonal().copy()
    scale = np.linalg.norm(a)
    if scale == 0:
        return np.zeros(n)
    rounds = round_robin(n)
    for _ in range(max_sweeps):
        if off_norm(a) <= tol * scale:
            break
        for p, q in rounds:
            apq = a[p, q]
            active = np.abs(apq) > 1e-300
            theta = np.where(active, 0.5 * np.arctan2(2 * apq, a[q, q] - a[p, p]), 0.0)
            c, s = np.cos(theta), np.sin(theta)
            cp, cq = a[:, p], a[:, q]
            a[:, p] = c * cp - s * cq
            a[:, q] = s * cp + c * cq
            rp, rq = a[p, :], a[q, :]
            a[p, :] = c[:, None] * rp - s[:, None] * rq
            a[q, :] = s[:, None] * rp + c[:, None] * rq
        a = 0.5 * (a + a.T)
    else:
        raise RuntimeError("Jacobi sweeps did not converge")
    return np.sort(a.diagonal())
