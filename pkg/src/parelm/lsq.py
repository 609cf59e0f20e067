"""Minimum-norm and basic least-squares solvers for dense collocation systems.

The per-step systems are underdetermined (M rows, N >= M columns) and dense.
The default solver returns the unique least-squares solution of minimum
Euclidean norm through a complete orthogonal decomposition; a pivoted-QR
basic solution (at most rank many nonzeros) is provided as an alternative.
Numerical rank is decided by thresholding the pivoted R diagonal against
its largest entry, which is scale invariant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

DEFAULT_RANK_TOL = 1e-15


@dataclass(frozen=True)
class LsSolution:
    """Result of one least-squares solve.

    ``residual_norm`` is recomputed from the original matrix, not inferred
    from the factorization.
    """

    weights: np.ndarray
    residual_norm: float
    numerical_rank: int
    method_tag: str


def _validate(C: np.ndarray, rhs: np.ndarray, rank_tol: float) -> tuple[np.ndarray, np.ndarray]:
    C = np.asarray(C, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if C.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got shape {C.shape}")
    if rhs.shape != (C.shape[0],):
        raise ValueError(f"rhs length {rhs.shape} does not match {C.shape[0]} rows")
    if not np.all(np.isfinite(C)):
        raise ValueError("matrix contains non-finite entries")
    if not np.all(np.isfinite(rhs)):
        raise ValueError("rhs contains non-finite entries")
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    return C, rhs


class CodFactorization:
    """Rank-revealing complete orthogonal decomposition of a dense matrix.

    Factor once, solve many right-hand sides: first a column-pivoted QR,
    C P = Q R, with the numerical rank r counted from the R diagonal; then
    a second QR of the leading r rows transposed, R[:r].T = Z T, which zeros
    the trailing block and exposes the row space.  ``solve`` returns the
    minimum-norm least-squares solution restricted to that row space.
    """

    def __init__(self, C: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL):
        C, _ = _validate(C, np.zeros(np.asarray(C).shape[0]), rank_tol)
        self.matrix = C
        self.shape = C.shape
        self.rank_tol = float(rank_tol)
        self._q, self._r, self._perm = sla.qr(C, mode="economic", pivoting=True)
        diag = np.abs(np.diag(self._r))
        if diag.size == 0 or diag[0] == 0.0:
            self.rank = 0
        else:
            self.rank = int(np.count_nonzero(diag > self.rank_tol * diag[0]))
        if self.rank > 0:
            # R[:r].T is N x r with full column rank; economic QR gives the
            # orthonormal row-space factor Z and the r x r triangle T
            self._z, self._t = sla.qr(self._r[: self.rank, :].T, mode="economic")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape != (self.shape[0],):
            raise ValueError(f"rhs length {rhs.shape} does not match {self.shape[0]} rows")
        if not np.all(np.isfinite(rhs)):
            raise ValueError("rhs contains non-finite entries")
        n = self.shape[1]
        w = np.zeros(n)
        if self.rank == 0:
            return w
        c1 = (self._q.T @ rhs)[: self.rank]
        y = sla.solve_triangular(self._t.T, c1, lower=True)
        w[self._perm] = self._z @ y
        return w

    def solve_full(self, rhs: np.ndarray, method_tag: str = "min_norm_cod") -> LsSolution:
        w = self.solve(rhs)
        res = float(np.linalg.norm(self.matrix @ w - np.asarray(rhs, dtype=float)))
        return LsSolution(weights=w, residual_norm=res, numerical_rank=self.rank, method_tag=method_tag)


def min_norm_solve(C: np.ndarray, rhs: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> LsSolution:
    """Minimum-norm least-squares solution of C w = rhs.

    Among all minimizers of ``||C w - rhs||`` this returns the one of
    smallest Euclidean norm, computed through :class:`CodFactorization`.
    """
    C, rhs = _validate(C, rhs, rank_tol)
    return CodFactorization(C, rank_tol).solve_full(rhs)


def pivoted_qr_solve(C: np.ndarray, rhs: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> LsSolution:
    """Basic least-squares solution with at most rank-many nonzero weights.

    Uses column-pivoted QR only; the weights on the N - rank non-pivot
    columns are set to zero, generally yielding a sparser solution than
    :func:`min_norm_solve` at the same residual on full-row-rank systems.
    """
    C, rhs = _validate(C, rhs, rank_tol)
    q, r, perm = sla.qr(C, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(diag > rank_tol * diag[0]))
    n = C.shape[1]
    w = np.zeros(n)
    if rank > 0:
        c1 = (q.T @ rhs)[:rank]
        v1 = sla.solve_triangular(r[:rank, :rank], c1, lower=False)
        w[perm[:rank]] = v1
    res = float(np.linalg.norm(C @ w - rhs))
    return LsSolution(weights=w, residual_norm=res, numerical_rank=rank, method_tag="pivoted_qr")
