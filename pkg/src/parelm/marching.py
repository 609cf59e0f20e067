"""Time discretization: theta-method and BDF schemes, step assembly, time loop.

Both families advance the collocated parabolic problem one stationary
elliptic solve per step.  The step matrix depends only on the scheme, the
step size and the spatial setup, so it is assembled and factorized once
per run and reused across all steps.

Sign convention.  A k-step BDF step solves

    a_k u_new - dt b_k L(u_new) = -sum_{j<k} a_j u_hist[j] + dt b_k f(t_new)

with a_k = 1, which reduces exactly to backward Euler at k = 1 and keeps
the left-hand side elliptic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .basis import ElmBasis
from .lsq import DEFAULT_RANK_TOL, CodFactorization
from .problems import CollocationGrid, ProblemSpec

# Normalized BDF coefficients (a_0 .. a_k with a_k = 1) and b_k, exact
# rationals, plus the L(alpha)-stability half-angle in degrees.  The methods
# are L-stable for k = 1, 2, L(alpha)-stable up to k = 6, and not zero-stable
# beyond that.
_BDF_EXACT: dict[int, tuple[tuple[Fraction, ...], Fraction, float]] = {
    1: ((Fraction(-1), Fraction(1)), Fraction(1), 90.0),
    2: ((Fraction(1, 3), Fraction(-4, 3), Fraction(1)), Fraction(2, 3), 90.0),
    3: (
        (Fraction(-2, 11), Fraction(9, 11), Fraction(-18, 11), Fraction(1)),
        Fraction(6, 11),
        86.03,
    ),
    4: (
        (Fraction(3, 25), Fraction(-16, 25), Fraction(36, 25), Fraction(-48, 25), Fraction(1)),
        Fraction(12, 25),
        73.35,
    ),
    5: (
        (
            Fraction(-12, 137),
            Fraction(75, 137),
            Fraction(-200, 137),
            Fraction(300, 137),
            Fraction(-300, 137),
            Fraction(1),
        ),
        Fraction(60, 137),
        51.84,
    ),
    6: (
        (
            Fraction(10, 147),
            Fraction(-72, 147),
            Fraction(225, 147),
            Fraction(-400, 147),
            Fraction(450, 147),
            Fraction(-360, 147),
            Fraction(1),
        ),
        Fraction(60, 147),
        17.84,
    ),
}


@dataclass(frozen=True)
class BdfScheme:
    """Coefficients of the k-step backward differentiation formula."""

    k: int
    a: np.ndarray  # a_0 .. a_k, with a_k = 1
    b_k: float
    stability_angle_deg: float

    @property
    def steps(self) -> int:
        return self.k

    @property
    def label(self) -> str:
        return f"BDF{self.k}"


@dataclass(frozen=True)
class ThetaScheme:
    """One-step theta-method; theta = 0, 1/2, 1 are FE, TR, BE."""

    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")

    @property
    def steps(self) -> int:
        return 1

    @property
    def label(self) -> str:
        if self.theta == 0.0:
            return "FE"
        if self.theta == 0.5:
            return "TR"
        if self.theta == 1.0:
            return "BE"
        return f"theta={self.theta:g}"


Scheme = Union[BdfScheme, ThetaScheme]


def bdf_coefficients(k: int) -> BdfScheme:
    """Tabulated k-step BDF coefficients, k in 1..6 (not zero-stable beyond)."""
    if k not in _BDF_EXACT:
        raise ValueError(f"k must be in [1, 6], got {k}")
    a_exact, b_exact, angle = _BDF_EXACT[k]
    a = np.array([float(c) for c in a_exact])
    a.setflags(write=False)
    return BdfScheme(k=k, a=a, b_k=float(b_exact), stability_angle_deg=angle)


def bdf_coefficients_exact(k: int) -> tuple[tuple[Fraction, ...], Fraction]:
    """Exact rational (a_0..a_k, b_k) for order-condition checks."""
    if k not in _BDF_EXACT:
        raise ValueError(f"k must be in [1, 6], got {k}")
    a_exact, b_exact, _ = _BDF_EXACT[k]
    return a_exact, b_exact


def parse_scheme(scheme_id: str) -> Scheme:
    """Map a scheme name (BE, TR, FE, BDF1..BDF6, theta=<v>) to a scheme object."""
    s = scheme_id.strip()
    upper = s.upper()
    if upper == "BE":
        return ThetaScheme(1.0)
    if upper == "TR":
        return ThetaScheme(0.5)
    if upper == "FE":
        return ThetaScheme(0.0)
    if upper.startswith("BDF"):
        try:
            k = int(upper[3:])
        except ValueError:
            raise ValueError(f"malformed BDF scheme id {scheme_id!r}") from None
        return bdf_coefficients(k)
    if upper.startswith("THETA"):
        _, _, val = s.partition("=")
        if not val:
            raise ValueError(f"theta scheme needs a value, e.g. theta=0.5, got {scheme_id!r}")
        return ThetaScheme(float(val))
    raise ValueError(f"unknown scheme {scheme_id!r}")


class WeightHistory:
    """Ring buffer of the most recent external-weight vectors, newest last.

    Times must advance with uniform spacing; this is validated on push so a
    mis-sequenced time loop fails loudly rather than silently assembling a
    wrong right-hand side.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._weights: deque[np.ndarray] = deque(maxlen=capacity)
        self._times: deque[float] = deque(maxlen=capacity)

    def push(self, weights: np.ndarray, t: float) -> None:
        w = np.array(weights, dtype=float, copy=True)
        if self._weights and w.shape != self._weights[0].shape:
            raise ValueError("all weight vectors in a history must have equal length")
        if self._times:
            dt = t - self._times[-1]
            if dt <= 0:
                raise ValueError("times must be strictly increasing")
            if len(self._times) >= 2:
                dt_prev = self._times[-1] - self._times[-2]
                if abs(dt - dt_prev) > 1e-12 * max(abs(dt), abs(dt_prev)):
                    raise ValueError("history times must be uniformly spaced")
        w.setflags(write=False)
        self._weights.append(w)
        self._times.append(float(t))

    def __len__(self) -> int:
        return len(self._weights)

    @property
    def full(self) -> bool:
        return len(self._weights) == self.capacity

    @property
    def entries(self) -> list[np.ndarray]:
        """Stored weight vectors, oldest first."""
        return list(self._weights)

    @property
    def times(self) -> list[float]:
        return list(self._times)

    @property
    def newest(self) -> np.ndarray:
        return self._weights[-1]

    @property
    def newest_time(self) -> float:
        return self._times[-1]


@dataclass(frozen=True)
class TimeLoopStats:
    """Per-run bookkeeping from the time loop."""

    n_solves: int
    residual_norms: tuple[float, ...] = field(default_factory=tuple)


def _check_grid(basis: ElmBasis, grid: CollocationGrid) -> None:
    lo, hi = basis.domain
    glo, ghi = grid.boundary
    if abs(glo - lo) > 1e-12 or abs(ghi - hi) > 1e-12:
        raise ValueError("grid boundary does not match the basis domain")
    if np.any(grid.interior <= lo) or np.any(grid.interior >= hi):
        raise ValueError("grid points outside the domain")
    if grid.n_rows > basis.n_neurons:
        raise ValueError(
            f"{grid.n_rows} collocation rows exceed {basis.n_neurons} neurons; "
            "the system must not be overdetermined"
        )


def evaluation_matrix(basis: ElmBasis, grid: CollocationGrid) -> np.ndarray:
    """Plain feature values at interior points with boundary rows appended."""
    _check_grid(basis, grid)
    lo, hi = grid.boundary
    return np.vstack([basis.eval(0, grid.interior), basis.eval(0, lo), basis.eval(0, hi)])


def assemble_step_matrix(
    scheme: Scheme,
    dt: float,
    basis: ElmBasis,
    grid: CollocationGrid,
    problem: ProblemSpec,
) -> np.ndarray:
    """Step matrix of shape (M_int + 2) x N for the given scheme and step size.

    Interior row j holds a_k sigma_i(x_j) - dt b_k nu sigma_i''(x_j) for BDF
    (sigma_i(x_j) - theta dt nu sigma_i''(x_j) for the theta-method); the
    final two rows are the Dirichlet trace at the endpoints.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    _check_grid(basis, grid)
    vals = basis.eval(0, grid.interior)
    dxx = basis.eval(2, grid.interior)
    if isinstance(scheme, BdfScheme):
        shift = dt * scheme.b_k * problem.nu
        interior = scheme.a[-1] * vals - shift * dxx
    else:
        interior = vals - scheme.theta * dt * problem.nu * dxx
    lo, hi = grid.boundary
    return np.vstack([interior, basis.eval(0, lo), basis.eval(0, hi)])


def assemble_step_rhs(
    scheme: Scheme,
    dt: float,
    history: WeightHistory,
    basis: ElmBasis,
    grid: CollocationGrid,
    problem: ProblemSpec,
    t_new: float,
) -> np.ndarray:
    """Right-hand side for the step ending at ``t_new``.

    The stored networks are evaluated at the collocation points each call;
    the grid is not assumed fixed across runs.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    _check_grid(basis, grid)
    k = scheme.steps
    if len(history) != k:
        raise ValueError(f"history holds {len(history)} entries, scheme needs exactly {k}")
    expected = history.newest_time + dt
    if abs(t_new - expected) > 1e-10 * max(abs(t_new), abs(expected), dt):
        raise ValueError(f"t_new={t_new!r} does not follow history end {history.newest_time!r} by dt")

    xin = grid.interior
    vals = basis.eval(0, xin)
    if isinstance(scheme, BdfScheme):
        interior = dt * scheme.b_k * np.asarray(problem.f(t_new, xin), dtype=float)
        for j, w in enumerate(history.entries):
            interior -= scheme.a[j] * (vals @ w)
    else:
        w_prev = history.newest
        t_prev = history.newest_time
        u_prev = vals @ w_prev
        upp_prev = basis.eval(2, xin) @ w_prev
        interior = (
            u_prev
            + scheme.theta * dt * np.asarray(problem.f(t_new, xin), dtype=float)
            + (1.0 - scheme.theta)
            * dt
            * (problem.nu * upp_prev + np.asarray(problem.f(t_prev, xin), dtype=float))
        )
    return np.concatenate([interior, [float(problem.g_lo(t_new)), float(problem.g_hi(t_new))]])


def starting_procedure(
    k: int,
    m: int,
    dt: float,
    problem: ProblemSpec,
    basis: ElmBasis,
    grid: CollocationGrid,
    w0: np.ndarray,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> tuple[WeightHistory, int]:
    """Generate the k starting values a k-step BDF needs, counting solves.

    The k - 1 values past w0 come from a (k-1)-step BDF run at the reduced
    step dt/m, itself started recursively the same way (dt/m^2, ...), with
    every m-th sub-step sampled onto the coarse grid.  Each recursion level
    performs exactly m (k - 1) sub-step solves; the returned count covers
    all levels, which is how the harness prices starting cost.
    """
    if k < 2:
        raise ValueError("starting procedure applies to k >= 2 only")
    if m < 1:
        raise ValueError("m must be >= 1")
    t0 = problem.t0
    w0 = np.asarray(w0, dtype=float)

    coarse = WeightHistory(k)
    coarse.push(w0, t0)

    sub_dt = dt / m
    if k == 2:
        sub_hist = WeightHistory(1)
        sub_hist.push(w0, t0)
        n_solves = 0
    else:
        sub_hist, n_solves = starting_procedure(k - 1, m, sub_dt, problem, basis, grid, w0, rank_tol)

    scheme = bdf_coefficients(k - 1)
    fac = CodFactorization(assemble_step_matrix(scheme, sub_dt, basis, grid, problem), rank_tol)
    newest_index = k - 2  # sub-grid index of the newest pre-filled entry
    for it in range(1, m * (k - 1) + 1):
        i_new = newest_index + it
        t_new = t0 + i_new * sub_dt
        rhs = assemble_step_rhs(scheme, sub_dt, sub_hist, basis, grid, problem, t_new)
        w = fac.solve(rhs)
        n_solves += 1
        sub_hist.push(w, t_new)
        if i_new % m == 0 and not coarse.full:
            coarse.push(w, t0 + (i_new // m) * dt)
    if not coarse.full:
        raise RuntimeError("starting procedure failed to collect all coarse samples")
    return coarse, n_solves


def run_time_loop(
    scheme: Scheme,
    problem: ProblemSpec,
    basis: ElmBasis,
    grid: CollocationGrid,
    dt: float,
    t_final: float,
    w0: np.ndarray,
    m_start: int = 8,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> tuple[WeightHistory, TimeLoopStats]:
    """March from t0 to t_final, one minimum-norm solve per step.

    The step matrix is assembled and factorized once.  For a k-step BDF the
    starting procedure supplies the first k - 1 values; its sub-step solves
    are included in the returned solve count.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    t0 = problem.t0
    span = t_final - t0
    if span < 0:
        raise ValueError("t_final before t0")
    n_total = int(round(span / dt))
    if abs(n_total * dt - span) > 1e-10 * max(abs(span), dt):
        raise ValueError(f"horizon {span!r} is not an integer multiple of dt={dt!r}")

    w0 = np.asarray(w0, dtype=float)
    if n_total == 0:
        hist = WeightHistory(scheme.steps)
        hist.push(w0, t0)
        return hist, TimeLoopStats(n_solves=0)

    k = scheme.steps
    if k > 1 and n_total < k - 1:
        raise ValueError(f"horizon of {n_total} steps is too short for a {k}-step scheme")
    if k == 1:
        hist = WeightHistory(1)
        hist.push(w0, t0)
        n_start = 0
    else:
        hist, n_start = starting_procedure(k, m_start, dt, problem, basis, grid, w0, rank_tol)

    C = assemble_step_matrix(scheme, dt, basis, grid, problem)
    fac = CodFactorization(C, rank_tol)
    resids = []
    for n in range(k, n_total + 1):
        t_new = t0 + n * dt
        rhs = assemble_step_rhs(scheme, dt, hist, basis, grid, problem, t_new)
        w = fac.solve(rhs)
        resids.append(float(np.linalg.norm(C @ w - rhs)))
        hist.push(w, t_new)
    n_main = max(0, n_total - k + 1)
    return hist, TimeLoopStats(n_solves=n_start + n_main, residual_norms=tuple(resids))
