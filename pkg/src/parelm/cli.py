"""Command-line harness: single solves, convergence studies, invariant checks.

Subcommands
-----------
solve   one run, one CSV record
study   a preset or an explicit sweep; CSV per panel, optional SVG plots
verify  fast self-checks (scheme tables, derivatives, solvers, exact solutions)
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import marching, problems
from .basis import sample_basis
from .lsq import min_norm_solve
from .presets import PRESET_NAMES, load_preset
from .solver import (
    CSV_COLUMNS,
    SolveConfig,
    convergence_study,
    solve,
    study_rows,
    write_csv,
)


def _parse_float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _parse_int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _add_common_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", required=True,
                   help="problem name: a, a(gamma=3), b, b(terms=20) or c")
    p.add_argument("--gamma", type=float, default=None, help="gamma for problem a")
    p.add_argument("--terms", type=int, default=None, help="series terms for problem b")
    p.add_argument("--seed", type=int, default=1000, help="basis seed (default 1000)")
    p.add_argument("--m-start", type=int, default=8, dest="m_start",
                   help="sub-step factor of the BDF starting procedure (default 8)")
    p.add_argument("--rank-tol", type=float, default=1e-15, dest="rank_tol",
                   help="relative rank tolerance of the least-squares solver (default 1e-15)")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the timestamp header and wall times for byte-stable CSV output")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parelm",
        description="Random-sigmoid collocation benchmarks for 1-D parabolic problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one configuration and emit a CSV record")
    _add_common_run_flags(p_solve)
    p_solve.add_argument("--scheme", required=True, help="BE, TR, FE, BDF1..BDF6 or theta=<v>")
    p_solve.add_argument("--neurons", type=int, required=True)
    p_solve.add_argument("--dt", type=float, required=True)
    p_solve.add_argument("--tfinal", type=float, default=None, help="override the problem's final time")
    p_solve.add_argument("--out", type=Path, default=None, help="CSV path (default: stdout)")

    p_study = sub.add_parser("study", help="run a preset or an explicit refinement sweep")
    p_study.add_argument("--preset", choices=PRESET_NAMES, default=None)
    p_study.add_argument("--problem", default=None, help="problem name for an explicit sweep")
    p_study.add_argument("--gamma", type=float, default=None)
    p_study.add_argument("--terms", type=int, default=None)
    p_study.add_argument("--scheme", action="append", default=None,
                         help="scheme for an explicit sweep; repeatable")
    p_study.add_argument("--dt-list", type=_parse_float_list, default=None, dest="dt_list",
                         help="comma-separated step sizes")
    p_study.add_argument("--n-list", type=_parse_int_list, default=None, dest="n_list",
                         help="comma-separated neuron counts")
    p_study.add_argument("--neurons", type=int, default=40)
    p_study.add_argument("--seed", type=int, default=1000)
    p_study.add_argument("--m-start", type=int, default=8, dest="m_start")
    p_study.add_argument("--rank-tol", type=float, default=1e-15, dest="rank_tol")
    p_study.add_argument("--out-dir", type=Path, default=Path("."), dest="out_dir")
    p_study.add_argument("--plot", action="store_true", help="emit one SVG per panel next to its CSV")
    p_study.add_argument("--jobs", type=int, default=1, help="parallel runs per sweep")
    p_study.add_argument("--no-timestamp", action="store_true")

    p_verify = sub.add_parser("verify", help="run the fast invariant suite")
    p_verify.add_argument("--group", choices=sorted(VERIFY_GROUPS), default=None,
                          help="run a single group")
    return parser


# ---------------------------------------------------------------------------
# verify groups

def _check_bdf_order_conditions() -> tuple[bool, str]:
    for k in range(1, 7):
        a, b = marching.bdf_coefficients_exact(k)
        if a[k] != 1:
            return False, f"k={k}: leading coefficient is {a[k]}, expected 1"
        if sum(a) != 0:
            return False, f"k={k}: coefficients sum to {sum(a)}, expected 0"
        for q in range(1, k + 1):
            lhs = sum(Fraction(j) ** q * a[j] for j in range(k + 1))
            rhs = q * b * Fraction(k) ** (q - 1)
            if lhs != rhs:
                return False, f"k={k}: order condition q={q} violated ({lhs} != {rhs})"
        sch = marching.bdf_coefficients(k)
        if abs(float(np.sum(sch.a))) > 1e-12:
            return False, f"k={k}: float coefficients sum to {np.sum(sch.a)}"
        for q in range(1, k + 1):
            lhs_f = sum(j**q * sch.a[j] for j in range(k + 1))
            if abs(lhs_f - q * sch.b_k * k ** (q - 1)) > 1e-12:
                return False, f"k={k}: float order condition q={q} off"
    return True, "k=1..6 consistency and order conditions hold exactly"


def _check_derivative_identities() -> tuple[bool, str]:
    basis = sample_basis(30, (0.0, 2.0), 42)
    rng = np.random.default_rng(7)
    xs = rng.uniform(0.05, 1.95, 100)
    h = 1e-6
    d1 = basis.eval(1, xs)
    fd1 = (basis.eval(0, xs + h) - basis.eval(0, xs - h)) / (2 * h)
    if not np.allclose(fd1, d1, rtol=1e-6, atol=1e-9):
        return False, "first derivative disagrees with central differences"
    h2 = 1e-5
    d2 = basis.eval(2, xs)
    fd2 = (basis.eval(1, xs + h2) - basis.eval(1, xs - h2)) / (2 * h2)
    if not np.allclose(fd2, d2, rtol=1e-6, atol=1e-8):
        return False, "second derivative disagrees with central differences"
    return True, "closed-form derivatives match finite differences at 100 points"


def _check_least_squares() -> tuple[bool, str]:
    rng = np.random.default_rng(11)
    for _ in range(25):
        m = int(rng.integers(2, 9))
        n = int(rng.integers(m + 1, 15))
        C = rng.standard_normal((m, n))
        rhs = rng.standard_normal(m)
        sol = min_norm_solve(C, rhs)
        oracle = C.T @ np.linalg.solve(C @ C.T, rhs)
        if np.linalg.norm(sol.weights - oracle) > 1e-8 * np.linalg.norm(oracle):
            return False, "minimum-norm solution deviates from the pseudoinverse oracle"
        if sol.residual_norm > 1e-10:
            return False, f"nonzero residual {sol.residual_norm} on a full-row-rank system"
    return True, "minimum-norm solutions match the pseudoinverse oracle on 25 systems"


def _check_exact_solutions() -> tuple[bool, str]:
    rng = np.random.default_rng(3)
    h = 1e-5
    for prob, t_lo in ((problems.problem_a(3), 0.0), (problems.problem_b(), 0.05),
                       (problems.problem_c(), 0.0)):
        lo, hi = prob.x_domain
        for _ in range(25):
            t = rng.uniform(t_lo + 2 * h, prob.t_final - 2 * h)
            x = rng.uniform(lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo))
            ut = (prob.exact(t + h, x) - prob.exact(t - h, x)) / (2 * h)
            uxx = (prob.exact(t, x + h) - 2 * prob.exact(t, x) + prob.exact(t, x - h)) / h**2
            resid = abs(ut - prob.nu * uxx - prob.f(t, np.asarray(x)))
            if resid > 1e-5:
                return False, f"{prob.label}: PDE residual {resid:.2e} at (t={t:.3f}, x={x:.3f})"
        for t in np.linspace(max(t_lo, prob.t0) + 0.01, prob.t_final, 7):
            if abs(prob.exact(t, lo)) > 1e-12 or abs(prob.exact(t, hi)) > 1e-12:
                return False, f"{prob.label}: boundary value violated at t={t:.3f}"
    return True, "cataloged exact solutions satisfy their PDEs and boundary data"


VERIFY_GROUPS = {
    "bdf-order-conditions": _check_bdf_order_conditions,
    "derivative-identities": _check_derivative_identities,
    "least-squares": _check_least_squares,
    "exact-solutions": _check_exact_solutions,
}


def _cmd_verify(args) -> int:
    names = [args.group] if args.group else sorted(VERIFY_GROUPS)
    failed = []
    for name in names:
        ok, detail = VERIFY_GROUPS[name]()
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        if not ok:
            failed.append(name)
    if failed:
        print(f"verify: {len(failed)} group(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# solve / study

def _cmd_solve(args) -> int:
    problem = problems.get_problem(args.problem, gamma=args.gamma, n_terms=args.terms)
    config = SolveConfig(
        scheme_id=args.scheme,
        n_neurons=args.neurons,
        dt=args.dt,
        seed=args.seed,
        m_start=args.m_start,
        rank_tol=args.rank_tol,
        t_final=args.tfinal,
    )
    report = solve(problem, config)
    rows = [report.csv_row(with_walltime=not args.no_timestamp)]
    if args.out is None:
        write_csv(rows, sys.stdout, timestamp=not args.no_timestamp)
    else:
        with open(args.out, "w") as fh:
            write_csv(rows, fh, timestamp=not args.no_timestamp)
        print(f"wrote {args.out}")
    return 0


def _plot_panel(csv_path: Path, svg_path: Path, x_axis: str, title: str) -> None:
    """Log-log error plot generated from the CSV alone."""
    import csv as _csv

    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "parelm"  # deterministic element ids
    import matplotlib.pyplot as plt

    with open(csv_path) as fh:
        rows = [r for r in _csv.reader(fh) if r and not r[0].startswith("#")]
    header, data = rows[0], rows[1:]
    idx = {name: header.index(name) for name in CSV_COLUMNS}

    series: dict[str, list[tuple[float, float]]] = {}
    for row in data:
        err = row[idx["linf_error"]]
        if not err:
            continue
        if x_axis == "N":
            key = f"{row[idx['scheme']]}, dt={float(row[idx['dt']]):g}"
            x = float(row[idx["N"]])
        else:
            key = row[idx["scheme"]]
            x = float(row[idx["Nt"]])
        series.setdefault(key, []).append((x, float(err)))

    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    for key, pts in series.items():
        pts.sort()
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], marker="o", label=key)
    ax.set_xlabel("number of neurons N" if x_axis == "N" else "stationary solves Nt")
    ax.set_ylabel("final-time max error")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _run_panel(panel, seed, m_start, rank_tol, jobs):
    problem = problems.get_problem(panel.problem)
    reports = []
    for scheme in panel.schemes:
        for n in panel.n_list:
            base = SolveConfig(scheme_id=scheme, n_neurons=n, dt=panel.dt_list[0],
                               seed=seed, m_start=m_start, rank_tol=rank_tol)
            reports.append(
                convergence_study(problem, scheme, n, dt_list=panel.dt_list,
                                  seed=seed, jobs=jobs, base_config=base)
            )
    return reports


def _cmd_study(args) -> int:
    from .presets import ExperimentPreset, PanelSpec

    if args.preset is not None:
        preset = load_preset(args.preset)
    else:
        if args.problem is None or not args.scheme:
            raise ValueError("explicit studies need --problem and at least one --scheme")
        if (args.dt_list is None) == (args.n_list is None):
            raise ValueError("give exactly one of --dt-list and --n-list")
        if args.dt_list == [] or args.n_list == []:
            raise ValueError("empty refinement sweep")
        name = args.problem if args.gamma is None else f"{args.problem}(gamma={args.gamma:g})"
        panel = PanelSpec(
            panel="custom",
            problem=name,
            schemes=tuple(args.scheme),
            dt_list=tuple(args.dt_list) if args.dt_list is not None else (0.1,),
            n_list=tuple(args.n_list) if args.n_list is not None else (args.neurons,),
            x_axis="Nt" if args.dt_list is not None else "N",
        )
        preset = ExperimentPreset(name="custom", description="", panels=(panel,))

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for panel in preset.panels:
        groups = _run_panel(panel, args.seed, args.m_start, args.rank_tol, args.jobs)
        rows = []
        for reports in groups:
            rows.extend(study_rows(reports, with_walltime=not args.no_timestamp))
        csv_path = args.out_dir / f"{preset.name}_{panel.panel}.csv"
        with open(csv_path, "w") as fh:
            write_csv(rows, fh, timestamp=not args.no_timestamp)
        print(f"wrote {csv_path}")
        if args.plot:
            svg_path = args.out_dir / f"{preset.name}_{panel.panel}.svg"
            _plot_panel(csv_path, svg_path, panel.x_axis, f"{panel.problem} ({panel.panel})")
            print(f"wrote {svg_path}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "study":
            return _cmd_study(args)
        return _cmd_verify(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
