"""End-to-end solves: initial fit, time marching, error evaluation, studies."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .basis import ElmBasis, sample_basis
from .lsq import DEFAULT_RANK_TOL, CodFactorization
from .marching import evaluation_matrix, parse_scheme, run_time_loop
from .problems import CollocationGrid, ProblemSpec, default_interior_count, make_grid

CSV_COLUMNS = ("scheme", "N", "dt", "Nt", "linf_error", "walltime_s", "seed", "observed_order")


@dataclass(frozen=True)
class SolveConfig:
    """Everything needed to reproduce one run."""

    scheme_id: str
    n_neurons: int
    dt: float
    seed: int = 1000
    m_start: int = 8
    rank_tol: float = DEFAULT_RANK_TOL
    n_error_points: int = 5000
    t_final: Optional[float] = None  # overrides the problem's final time
    boundary_rows_in_m: bool = True  # N/2 total rows vs N/2 interior points

    def __post_init__(self):
        parse_scheme(self.scheme_id)  # fail fast on unknown ids
        if self.n_neurons < 6:
            raise ValueError("need n_neurons >= 6 for at least one interior point")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.m_start < 1:
            raise ValueError("m_start must be >= 1")
        if self.rank_tol <= 0:
            raise ValueError("rank_tol must be positive")
        if self.n_error_points < 2:
            raise ValueError("n_error_points must be >= 2")


@dataclass(frozen=True)
class SolveReport:
    """Record of one run: cost, final error and enough state to recheck it."""

    problem_label: str
    scheme_id: str
    n_neurons: int
    dt: float
    seed: int
    nt: int
    linf_error_final: Optional[float]
    walltime_s: float
    final_time: float
    final_weights: np.ndarray
    residual_norms: tuple[float, ...] = field(default_factory=tuple)
    basis_digest: str = ""

    def csv_row(self, observed_order: Optional[float] = None, with_walltime: bool = True) -> list[str]:
        err = "" if self.linf_error_final is None else f"{self.linf_error_final:.16e}"
        wall = f"{self.walltime_s:.3f}" if with_walltime else ""
        order = "" if observed_order is None else f"{observed_order:.4f}"
        return [
            self.scheme_id,
            str(self.n_neurons),
            f"{self.dt:.16g}",
            str(self.nt),
            err,
            wall,
            str(self.seed),
            order,
        ]


def default_grid(problem: ProblemSpec, n_neurons: int, boundary_rows_in_m: bool = True) -> CollocationGrid:
    """Grid under the harness rule of N/2 equispaced collocation rows."""
    return make_grid(problem, default_interior_count(n_neurons, boundary_rows_in_m))


def fit_initial(
    basis: ElmBasis,
    grid: CollocationGrid,
    problem: ProblemSpec,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> np.ndarray:
    """Least-squares fit of the initial condition onto the feature span.

    The data vector holds u0 at the interior points and the boundary values
    g(t0) at the endpoints, so an incompatible corner (problem b) is
    arbitrated by least squares instead of being imposed twice.
    """
    E = evaluation_matrix(basis, grid)
    rhs = np.concatenate(
        [
            np.asarray(problem.u0(grid.interior), dtype=float),
            [float(problem.g_lo(problem.t0)), float(problem.g_hi(problem.t0))],
        ]
    )
    return CodFactorization(E, rank_tol).solve(rhs)


def linf_error(
    basis: ElmBasis, weights: np.ndarray, problem: ProblemSpec, t: float, n_points: int = 5000
) -> Optional[float]:
    """Max-norm error against the exact solution on an equispaced grid.

    Endpoints are included so boundary violations show up.  Returns None
    when the problem has no exact solution.
    """
    if problem.exact is None:
        return None
    lo, hi = problem.x_domain
    xs = np.linspace(lo, hi, n_points)
    approx = basis.eval(0, xs) @ np.asarray(weights, dtype=float)
    return float(np.max(np.abs(approx - problem.exact(t, xs))))


def solve(problem: ProblemSpec, config: SolveConfig) -> SolveReport:
    """Run the full pipeline for one configuration.

    sample basis -> build grid -> fit u0 -> (starting procedure) -> time
    loop -> final-time error.  Identical configurations reproduce bitwise
    identical numeric results; only the measured wall time varies.
    """
    start = time.perf_counter()
    scheme = parse_scheme(config.scheme_id)
    basis = sample_basis(config.n_neurons, problem.x_domain, config.seed)
    grid = default_grid(problem, config.n_neurons, config.boundary_rows_in_m)
    w0 = fit_initial(basis, grid, problem, config.rank_tol)
    t_final = problem.t_final if config.t_final is None else config.t_final
    history, stats = run_time_loop(
        scheme, problem, basis, grid, config.dt, t_final, w0,
        m_start=config.m_start, rank_tol=config.rank_tol,
    )
    err = linf_error(basis, history.newest, problem, t_final, config.n_error_points)
    return SolveReport(
        problem_label=problem.label,
        scheme_id=config.scheme_id,
        n_neurons=config.n_neurons,
        dt=config.dt,
        seed=config.seed,
        nt=stats.n_solves,
        linf_error_final=err,
        walltime_s=time.perf_counter() - start,
        final_time=t_final,
        final_weights=history.newest,
        residual_norms=stats.residual_norms,
        basis_digest=basis.parameter_digest(),
    )


def observed_orders(dts: Sequence[float], errors: Sequence[Optional[float]]) -> list[Optional[float]]:
    """p_hat = log2(e_i / e_{i+1}) for consecutive rows with halved dt.

    The first row and any pair that is not a clean halving (or has missing
    or zero errors) yield None.
    """
    out: list[Optional[float]] = [None]
    for i in range(1, len(dts)):
        e0, e1 = errors[i - 1], errors[i]
        dyadic = abs(dts[i - 1] / dts[i] - 2.0) < 1e-9
        if dyadic and e0 and e1 and e0 > 0 and e1 > 0:
            out.append(math.log2(e0 / e1))
        else:
            out.append(None)
    return out


def convergence_study(
    problem: ProblemSpec,
    scheme_id: str,
    n_neurons: int,
    dt_list: Optional[Sequence[float]] = None,
    n_list: Optional[Sequence[int]] = None,
    seed: int = 1000,
    jobs: int = 1,
    base_config: Optional[SolveConfig] = None,
) -> list[SolveReport]:
    """One report per refinement value, in refinement order.

    Exactly one of ``dt_list`` (temporal refinement at fixed N) and
    ``n_list`` (spatial refinement at fixed dt) must be given.  Runs are
    independent, so they may execute in parallel; results merge in input
    order regardless of completion order.
    """
    if (dt_list is None) == (n_list is None):
        raise ValueError("give exactly one of dt_list and n_list")
    base = base_config if base_config is not None else SolveConfig(
        scheme_id=scheme_id, n_neurons=n_neurons, dt=1.0, seed=seed
    )
    if dt_list is not None:
        if len(dt_list) == 0:
            raise ValueError("empty refinement list")
        configs = [replace(base, scheme_id=scheme_id, n_neurons=n_neurons, dt=float(d), seed=seed)
                   for d in dt_list]
    else:
        if len(n_list) == 0:
            raise ValueError("empty refinement list")
        configs = [replace(base, scheme_id=scheme_id, n_neurons=int(n), seed=seed) for n in n_list]

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda c: solve(problem, c), configs))
    return [solve(problem, c) for c in configs]


def study_rows(reports: Sequence[SolveReport], with_walltime: bool = True) -> list[list[str]]:
    """CSV rows for a study, with the observed-order column filled in."""
    orders = observed_orders([r.dt for r in reports], [r.linf_error_final for r in reports])
    return [r.csv_row(observed_order=o, with_walltime=with_walltime) for r, o in zip(reports, orders)]


def write_csv(rows: Sequence[Sequence[str]], fh: io.TextIOBase, timestamp: bool = True) -> None:
    """Write the stable study schema; the timestamp header is optional.

    With ``timestamp=False`` the output is byte-identical across reruns of
    the same configuration.
    """
    if timestamp:
        fh.write(f"# generated {time.strftime('%Y-%m-%dT%H:%M:%S%z')}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row)
